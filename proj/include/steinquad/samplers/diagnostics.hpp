#pragma once

#include <Eigen/Core>
#include <cmath>

namespace steinquad {

// Effective sample size of a scalar chain by Geyer's initial positive
// sequence: ESS = n / (1 + 2 sum rho_k), summing autocorrelations while
// consecutive pair sums stay positive.
inline double effective_sample_size(const Eigen::VectorXd& chain) {
    const Eigen::Index n = chain.size();
    if (n < 4) return static_cast<double>(n);
    const double mean = chain.mean();
    const Eigen::VectorXd c = chain.array() - mean;
    const double var = c.squaredNorm() / static_cast<double>(n);
    if (var <= 0.0) return static_cast<double>(n);

    auto rho = [&](Eigen::Index k) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i + k < n; ++i) acc += c[i] * c[i + k];
        return acc / (static_cast<double>(n) * var);
    };

    double tail = 0.0;
    for (Eigen::Index k = 1; k + 1 < n; k += 2) {
        const double pair = rho(k) + rho(k + 1);
        if (pair <= 0.0) break;
        tail += pair;
    }
    const double ess = static_cast<double>(n) / (1.0 + 2.0 * tail);
    return std::min(ess, static_cast<double>(n));
}

// Monte Carlo standard error of the chain mean using ESS.
inline double mcmc_std_error(const Eigen::VectorXd& chain) {
    const Eigen::Index n = chain.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    const double mean = chain.mean();
    const double sd = std::sqrt((chain.array() - mean).square().sum() / (n - 1));
    return sd / std::sqrt(effective_sample_size(chain));
}

}  // namespace steinquad
