#pragma once

#include <Eigen/Core>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/special.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/targets/builtin.hpp"

namespace steinquad {

namespace detail {

inline constexpr int kHaltonPrimes[50] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,
    61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139,
    149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229};

// radical inverse of i in the given base
inline double radical_inverse(long i, int base) {
    double inv_base = 1.0 / base;
    double f = inv_base;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv_base;
    }
    return r;
}

}  // namespace detail

// First n Halton points in (0,1)^d, bases = first d primes, index starting
// at 1 (so base 2 yields 1/2, 1/4, 3/4, ...).
inline Eigen::MatrixXd halton_points(Eigen::Index n, int d) {
    if (d < 1 || d > 50) throw ConfigError("halton_points: d must be in [1, 50]");
    Eigen::MatrixXd out(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            out(i, j) = detail::radical_inverse(i + 1, detail::kHaltonPrimes[j]);
    return out;
}

// Halton points pushed through the Gaussian inverse CDF so the design
// targets a diagonal Gaussian.
inline PointSet qmc_point_set(const GaussianTarget& target, Eigen::Index n) {
    const int d = target.dim();
    Eigen::MatrixXd u = halton_points(n, d);
    Eigen::MatrixXd x(n, d);
    const Eigen::ArrayXd sd = target.variance_diag().array().sqrt();
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            x(i, j) = target.mean()[j] + sd[j] * std_normal_quantile(u(i, j));
    return make_point_set(target, std::move(x), Provenance::QMC);
}

}  // namespace steinquad
