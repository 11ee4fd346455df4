#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/linalg.hpp"
#include "steinquad/numerics/special.hpp"
#include "steinquad/steinnet/loss.hpp"

namespace steinquad {

// GGN-Laplace posterior on theta restricted to its theta0 marginal:
//   Sigma^{-1} = H_GGN + sigma0^{-2} I,  H_GGN = sigma^{-2} sum_i J_i J_i^T,
//   q(theta0) = N(theta0 | theta0_MAP, (Sigma)_{00}).
struct LaplacePosterior {
    Eigen::VectorXd theta_map;
    double sigma = 1.0;
    double sigma0 = 1.0;
    double theta0_mean = 0.0;
    double theta0_var = 0.0;
};

struct CalibrationStat {
    double abs_rel_error = 0.0;
    double posterior_std = 0.0;
    double gamma = 0.0;
};

// H_GGN from a precomputed Jacobian Gram matrix (sum_i J_i J_i^T)
inline DenseMatrix ggn_from_gram(const DenseMatrix& gram, double sigma) {
    if (!(sigma > 0)) throw ConfigError("ggn: sigma must be positive");
    return gram / (sigma * sigma);
}

// sigma^{-2} sum_i J(x_i) J(x_i)^T for a network on a dataset
inline DenseMatrix ggn_hessian(const SteinNetwork& net, const PointSet& ps,
                               const Eigen::VectorXd& f, double sigma,
                               const ScoreTarget* target = nullptr) {
    SteinBatchEvaluator ev = make_evaluator(net, ps, f, 0.0, target);
    DenseMatrix gram;
    Eigen::VectorXd residuals;
    ev.jacobian_gram(net.theta, gram, residuals);
    return ggn_from_gram(gram, sigma);
}

// theta0 marginal variance e0^T (H + sigma0^{-2} I)^{-1} e0 via Cholesky
inline double theta0_marginal_var(const DenseMatrix& h_ggn, double sigma0) {
    if (!(sigma0 > 0)) throw ConfigError("laplace: sigma0 must be positive");
    const Eigen::Index q = h_ggn.rows();
    DenseMatrix precision = h_ggn;
    precision.diagonal().array() += 1.0 / (sigma0 * sigma0);
    CholeskyFactor chol(precision);
    Vector e0 = Vector::Zero(q);
    e0[0] = 1.0;
    return e0.dot(chol.solve(e0));
}

inline LaplacePosterior laplace_from_gram(const DenseMatrix& gram, Eigen::VectorXd theta_map,
                                          double sigma, double sigma0) {
    LaplacePosterior post;
    post.theta0_var = theta0_marginal_var(ggn_from_gram(gram, sigma), sigma0);
    post.theta0_mean = theta_map[0];
    post.theta_map = std::move(theta_map);
    post.sigma = sigma;
    post.sigma0 = sigma0;
    return post;
}

// residual-MLE plug-in for the dataset noise, floored against
// zero-variance interpolating fits
inline double default_sigma(const Eigen::VectorXd& residuals) {
    const double ms = residuals.squaredNorm() / std::max<Eigen::Index>(1, residuals.size());
    return std::max(std::sqrt(ms), 1e-8);
}

// Laplace evidence of (sigma, sigma0) given the Gram matrix, residuals and
// theta_MAP:
//   log p(D | sigma, sigma0) = -n/2 log(2 pi sigma^2) - |r|^2/(2 sigma^2)
//     - |theta|^2/(2 sigma0^2) - (p+1)/2 log(sigma0^2)
//     - 1/2 log det(sigma^{-2} G + sigma0^{-2} I)
// (the prior and Gaussian-integral normalizers combine into the last two
// terms; theta-independent constants are kept so values are comparable
// across both scales).
inline double laplace_log_marginal(const DenseMatrix& gram, const Eigen::VectorXd& residuals,
                                   const Eigen::VectorXd& theta_map, double sigma,
                                   double sigma0) {
    const double n = static_cast<double>(residuals.size());
    const double q = static_cast<double>(gram.rows());
    DenseMatrix precision = gram / (sigma * sigma);
    precision.diagonal().array() += 1.0 / (sigma0 * sigma0);
    CholeskyFactor chol(precision);
    double ll = -0.5 * n * std::log(2.0 * kPi * sigma * sigma);
    ll -= residuals.squaredNorm() / (2.0 * sigma * sigma);
    ll -= theta_map.squaredNorm() / (2.0 * sigma0 * sigma0);
    ll -= q * std::log(sigma0);
    ll -= 0.5 * chol.log_det();
    return ll;
}

// Maximizes the Laplace evidence over the grid; ties break toward larger
// sigma0.
inline std::pair<double, double> tune_noise_scales(const DenseMatrix& gram,
                                                   const Eigen::VectorXd& residuals,
                                                   const Eigen::VectorXd& theta_map,
                                                   const std::vector<double>& sigma_grid,
                                                   const std::vector<double>& sigma0_grid) {
    if (sigma_grid.empty() || sigma0_grid.empty())
        throw EmptyGrid("tune_noise_scales: empty grid");
    double best_ll = -std::numeric_limits<double>::infinity();
    double best_sigma = sigma_grid.front(), best_sigma0 = sigma0_grid.front();
    for (const double sigma : sigma_grid) {
        for (const double sigma0 : sigma0_grid) {
            const double ll = laplace_log_marginal(gram, residuals, theta_map, sigma, sigma0);
            if (ll > best_ll || (ll == best_ll && sigma0 > best_sigma0)) {
                best_ll = ll;
                best_sigma = sigma;
                best_sigma0 = sigma0;
            }
        }
    }
    return {best_sigma, best_sigma0};
}

inline std::vector<double> log_spaced_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return g;
}

// noise-scale selection policy: fixed values or evidence-tuned grids
struct NoiseConfig {
    double sigma = -1.0;    // <= 0: residual-MLE default
    double sigma0 = -1.0;   // <= 0: tune over sigma0_grid
    std::vector<double> sigma0_grid = log_spaced_grid(1e-3, 1e3, 13);
};

// Full pipeline at theta_MAP: one Gram pass, then scale selection and the
// theta0 marginal.
inline LaplacePosterior laplace_posterior(const SteinBatchEvaluator& ev,
                                          const Eigen::VectorXd& theta_map,
                                          const NoiseConfig& cfg = {}) {
    DenseMatrix gram;
    Eigen::VectorXd residuals;
    ev.jacobian_gram(theta_map, gram, residuals);
    double sigma = cfg.sigma > 0 ? cfg.sigma : default_sigma(residuals);
    double sigma0 = cfg.sigma0;
    if (!(sigma0 > 0)) {
        auto [s, s0] = tune_noise_scales(gram, residuals, theta_map, {sigma}, cfg.sigma0_grid);
        sigma = s;
        sigma0 = s0;
    }
    return laplace_from_gram(gram, theta_map, sigma, sigma0);
}

// gamma = |estimate - reference| / |reference| / posterior_std
inline CalibrationStat calibration(double estimate, double reference, double posterior_std) {
    if (reference == 0.0) throw ZeroReference("calibration: reference integral is zero");
    if (!(posterior_std > 0)) throw ConfigError("calibration: posterior std must be positive");
    CalibrationStat stat;
    stat.abs_rel_error = std::abs(estimate - reference) / std::abs(reference);
    stat.posterior_std = posterior_std;
    stat.gamma = stat.abs_rel_error / posterior_std;
    return stat;
}

}  // namespace steinquad
