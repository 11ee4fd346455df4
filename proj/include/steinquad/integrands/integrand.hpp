#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "steinquad/errors.hpp"

namespace steinquad {

// Scalar function f on R^d with metadata. true_value is present only when
// the integral against the paired target is analytically or oracle
// computable.
struct Integrand {
    int dim = 0;
    std::function<double(const Eigen::VectorXd&)> eval;
    std::optional<double> true_value;
    std::string name;

    double operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

enum class CoordTransform { Identity, Exp };

// f(w) = w_j, or exp(w_j) for mapping log-space samples back to parameter
// space (posterior means of ODE parameters).
inline Integrand coordinate_integrand(int j, CoordTransform transform, int dim) {
    if (j < 0 || j >= dim) throw ConfigError("coordinate_integrand: index out of range");
    Integrand f;
    f.dim = dim;
    if (transform == CoordTransform::Identity) {
        f.name = "coord_" + std::to_string(j);
        f.eval = [j](const Eigen::VectorXd& w) { return w[j]; };
    } else {
        f.name = "exp_coord_" + std::to_string(j);
        f.eval = [j](const Eigen::VectorXd& w) { return std::exp(w[j]); };
    }
    return f;
}

}  // namespace steinquad
