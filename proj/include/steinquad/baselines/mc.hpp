#pragma once

#include <Eigen/Core>
#include <cmath>

#include "steinquad/errors.hpp"

namespace steinquad {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    Eigen::Index n = 0;
};

inline McEstimate mc_estimate(const Eigen::VectorXd& values) {
    if (values.size() < 2) throw TooFewSamples("mc_estimate needs at least two values");
    McEstimate est;
    est.n = values.size();
    est.mean = values.mean();
    const double var =
        (values.array() - est.mean).square().sum() / static_cast<double>(est.n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(est.n));
    return est;
}

}  // namespace steinquad
