#pragma once

#include <Eigen/Core>
#include <cmath>

#include "steinquad/errors.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/targets/builtin.hpp"

namespace steinquad {

// Regular lattice over the hypercube mean +- 5 sigma per coordinate,
// n_per_dim points per axis.
inline PointSet grid_points(int n_per_dim, const GaussianTarget& target,
                            long budget = (1L << 22)) {
    if (n_per_dim < 1) throw ConfigError("grid_points: n_per_dim must be >= 1");
    const int d = target.dim();
    double total = 1.0;
    for (int k = 0; k < d; ++k) {
        total *= n_per_dim;
        if (total > static_cast<double>(budget))
            throw BudgetExceeded("grid_points: n_per_dim^d exceeds the point budget");
    }
    const long n = static_cast<long>(total);
    const Eigen::ArrayXd sd = target.variance_diag().array().sqrt();
    Eigen::MatrixXd pts(n, d);
    std::vector<int> idx(d, 0);
    for (long i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            const double lo = target.mean()[k] - 5.0 * sd[k];
            const double step = (n_per_dim == 1) ? 0.0 : 10.0 * sd[k] / (n_per_dim - 1);
            pts(i, k) = (n_per_dim == 1) ? target.mean()[k] : lo + step * idx[k];
        }
        for (int k = 0; k < d; ++k) {
            if (++idx[k] < n_per_dim) break;
            idx[k] = 0;
        }
    }
    return make_point_set(target, std::move(pts), Provenance::Grid);
}

}  // namespace steinquad
