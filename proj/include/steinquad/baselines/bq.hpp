#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "steinquad/baselines/kernels.hpp"
#include "steinquad/errors.hpp"
#include "steinquad/numerics/linalg.hpp"
#include "steinquad/numerics/rng.hpp"
#include "steinquad/targets/builtin.hpp"

namespace steinquad {

// GP-prior quadrature: posterior mean z^T K^{-1} f with z_i = Pi[k(., x_i)]
// and, when the double integral PiPi[k] has a closed form, posterior
// variance PiPi[k] - z^T K^{-1} z. Prior mean is zero throughout.
struct BqPosterior {
    double mean = 0.0;
    std::optional<double> variance;
    Eigen::Index n = 0;
};

namespace detail {

// embedding of one 1-D coordinate factor, without the kernel amplitude
inline double rbf_factor_embedding(const RbfKernel& unit, const ScoreTarget& factor, double x) {
    if (const auto* g = dynamic_cast<const GaussianTarget*>(&factor)) {
        const double l2 = unit.lengthscale * unit.lengthscale;
        const double s2 = g->variance_diag()[0];
        const double dx = x - g->mean()[0];
        return std::sqrt(l2 / (l2 + s2)) * std::exp(-dx * dx / (2.0 * (l2 + s2)));
    }
    if (const auto* t = dynamic_cast<const TruncatedGaussian1D*>(&factor)) {
        RbfKernel k = unit;
        k.amplitude = 1.0;
        return kme_rbf_truncated(k, *t, x);
    }
    if (const auto* m = dynamic_cast<const GaussianMixture1D*>(&factor)) {
        RbfKernel k = unit;
        k.amplitude = 1.0;
        double acc = 0.0;
        for (std::size_t c = 0; c < m->weights().size(); ++c)
            acc += m->weights()[c] *
                   detail::rbf_gauss_product_integral(k, m->means()[c],
                                                      std::sqrt(m->variances()[c]), m->lower(),
                                                      m->upper(), x);
        return acc / m->total_mass();
    }
    throw EmbeddingUnavailable("no closed-form RBF embedding for this 1-D factor");
}

}  // namespace detail

// Pi[k(., x_i)] for every row of x, plus PiPi[k] when available.
// Supported pi: diagonal Gaussian (mean + double integral), truncated
// Gaussian in 1-D (mean only), truncated Gaussian mixtures in 1-D (mean
// only), and products of the 1-D cases (mean only unless all factors are
// plain Gaussians).
struct EmbeddingResult {
    Eigen::VectorXd z;
    std::optional<double> double_integral;
};

inline EmbeddingResult rbf_embeddings(const RbfKernel& kernel, const ScoreTarget& pi,
                                      const Eigen::MatrixXd& x) {
    EmbeddingResult out;
    out.z.resize(x.rows());

    if (const auto* g = dynamic_cast<const GaussianTarget*>(&pi)) {
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            out.z[i] = kme_rbf_gaussian(kernel, *g, x.row(i).transpose());
        out.double_integral = kme_rbf_gaussian_double(kernel, *g);
        return out;
    }
    if (const auto* t = dynamic_cast<const TruncatedGaussian1D*>(&pi)) {
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            out.z[i] = kme_rbf_truncated(kernel, *t, x(i, 0));
        return out;  // no closed-form double integral under truncation
    }
    if (const auto* m = dynamic_cast<const GaussianMixture1D*>(&pi)) {
        // weight-summed Gaussian-product integrals over the truncation
        // box, renormalized by the total truncated mass
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double acc = 0.0;
            for (std::size_t c = 0; c < m->weights().size(); ++c)
                acc += m->weights()[c] *
                       detail::rbf_gauss_product_integral(kernel, m->means()[c],
                                                          std::sqrt(m->variances()[c]),
                                                          m->lower(), m->upper(), x(i, 0));
            out.z[i] = acc / m->total_mass();
        }
        return out;  // no closed-form double integral for mixtures
    }
    if (const auto* p = dynamic_cast<const ProductTarget*>(&pi)) {
        const auto& factors = p->factors();
        bool all_gaussian = true;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double acc = kernel.amplitude;
            for (std::size_t k = 0; k < factors.size(); ++k)
                acc *= detail::rbf_factor_embedding(kernel, *factors[k],
                                                    x(i, static_cast<Eigen::Index>(k)));
            out.z[i] = acc;
        }
        for (const auto& f : factors)
            all_gaussian = all_gaussian && (dynamic_cast<const GaussianTarget*>(f.get()) != nullptr);
        if (all_gaussian) {
            double acc = kernel.amplitude;
            const double l2 = kernel.lengthscale * kernel.lengthscale;
            for (const auto& f : factors) {
                const auto* g = dynamic_cast<const GaussianTarget*>(f.get());
                acc *= std::sqrt(l2 / (l2 + 2.0 * g->variance_diag()[0]));
            }
            out.double_integral = acc;
        }
        return out;
    }
    throw EmbeddingUnavailable("no closed-form RBF embedding for this target");
}

inline Eigen::MatrixXd rbf_gram(const RbfKernel& kernel, const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = kernel.amplitude;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            k(i, j) = kernel(x.row(i).transpose(), x.row(j).transpose());
            k(j, i) = k(i, j);
        }
    }
    return k;
}

inline BqPosterior bq_posterior(const RbfKernel& kernel, const ScoreTarget& pi,
                                const Eigen::MatrixXd& x, const Eigen::VectorXd& f) {
    EmbeddingResult emb = rbf_embeddings(kernel, pi, x);
    CholeskyFactor chol(rbf_gram(kernel, x));
    const Eigen::VectorXd kinv_f = chol.solve(f);
    BqPosterior post;
    post.n = x.rows();
    post.mean = emb.z.dot(kinv_f);
    if (emb.double_integral) {
        const double var = *emb.double_integral - emb.z.dot(chol.solve(emb.z));
        post.variance = std::max(0.0, var);  // jitter can push it slightly negative
    }
    return post;
}

// Matern-1/2 BQ: 1-D standard normal only (the embedding does not extend)
inline BqPosterior bq_posterior(const Matern12Kernel& kernel, const ScoreTarget& pi,
                                const Eigen::MatrixXd& x, const Eigen::VectorXd& f) {
    if (pi.dim() != 1)
        throw EmbeddingUnavailable("matern-1/2 posterior mean is only available in d = 1");
    const auto* g = dynamic_cast<const GaussianTarget*>(&pi);
    if (!g || std::abs(g->mean()[0]) > 0 || std::abs(g->variance_diag()[0] - 1.0) > 0)
        throw EmbeddingUnavailable("matern-1/2 embedding requires a standard normal target");
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(x(i, 0), x(j, 0));
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = kme_matern12_gaussian(kernel.lengthscale, x(i, 0));
    CholeskyFactor chol(k);
    BqPosterior post;
    post.n = n;
    post.mean = z.dot(chol.solve(f));
    return post;
}

// GP mean function at arbitrary points (used by the interpolation checks)
inline Eigen::VectorXd gp_mean_at(const RbfKernel& kernel, const Eigen::MatrixXd& x_train,
                                  const Eigen::VectorXd& f, const Eigen::MatrixXd& x_query) {
    CholeskyFactor chol(rbf_gram(kernel, x_train));
    const Eigen::VectorXd alpha = chol.solve(f);
    Eigen::VectorXd out(x_query.rows());
    for (Eigen::Index i = 0; i < x_query.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < x_train.rows(); ++j)
            acc += kernel(x_query.row(i).transpose(), x_train.row(j).transpose()) * alpha[j];
        out[i] = acc;
    }
    return out;
}

// GP log marginal likelihood maximization over a log-space grid refined by
// coordinate descent (factor-1.26 steps), ties toward larger lengthscale.
// For n beyond max_fit_points a seeded subsample is used.
struct GpFitConfig {
    int lengthscale_grid = 25;
    int amplitude_grid = 9;
    int max_refinements = 24;
    Eigen::Index max_fit_points = 1024;
    std::uint64_t subsample_seed = 17;
};

namespace detail {

// -1/2 f^T K^{-1} f - 1/2 log det K - n/2 log 2pi with K = amp * E(l);
// one factorization of E serves every amplitude
struct GpObjective {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& f;

    double operator()(double lengthscale, double amplitude) const {
        RbfKernel unit{lengthscale, 1.0};
        CholeskyFactor chol(rbf_gram(unit, x));
        const double quad = f.dot(chol.solve(f));
        const double n = static_cast<double>(x.rows());
        return -0.5 * quad / amplitude - 0.5 * (chol.log_det() + n * std::log(amplitude)) -
               0.5 * n * std::log(2.0 * kPi);
    }
};

inline double median_pairwise_distance(const Eigen::MatrixXd& x) {
    std::vector<double> d;
    const Eigen::Index n = std::min<Eigen::Index>(x.rows(), 256);
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d.push_back((x.row(i) - x.row(j)).norm());
    if (d.empty()) return 1.0;
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    const double med = d[d.size() / 2];
    return med > 0 ? med : 1.0;
}

}  // namespace detail

inline RbfKernel fit_gp_hyperparams(const Eigen::MatrixXd& x_full, const Eigen::VectorXd& f_full,
                                    const GpFitConfig& cfg = {}) {
    if (x_full.rows() < 2) throw TooFewSamples("gp fit needs at least two points");

    Eigen::MatrixXd x = x_full;
    Eigen::VectorXd f = f_full;
    if (x_full.rows() > cfg.max_fit_points) {
        RandomStream rng(cfg.subsample_seed);
        x.resize(cfg.max_fit_points, x_full.cols());
        f.resize(cfg.max_fit_points);
        for (Eigen::Index i = 0; i < cfg.max_fit_points; ++i) {
            const auto r = static_cast<Eigen::Index>(
                rng.next_below(static_cast<std::uint64_t>(x_full.rows())));
            x.row(i) = x_full.row(r);
            f[i] = f_full[r];
        }
    }
    detail::GpObjective objective{x, f};

    const double med = detail::median_pairwise_distance(x);
    const double fvar = std::max(1e-12, (f.array() - f.mean()).square().sum() /
                                            std::max<Eigen::Index>(1, f.size() - 1));

    double best_ll = -std::numeric_limits<double>::infinity();
    double best_l = med, best_amp = fvar;
    auto consider = [&](double l, double amp) {
        const double ll = objective(l, amp);
        if (ll > best_ll || (ll == best_ll && l > best_l)) {
            best_ll = ll;
            best_l = l;
            best_amp = amp;
        }
    };

    for (int i = 0; i < cfg.lengthscale_grid; ++i) {
        const double l = 1e-2 * med *
                         std::pow(1e4, cfg.lengthscale_grid == 1
                                           ? 0.0
                                           : static_cast<double>(i) / (cfg.lengthscale_grid - 1));
        for (int j = 0; j < cfg.amplitude_grid; ++j) {
            const double amp =
                1e-2 * fvar *
                std::pow(1e4, cfg.amplitude_grid == 1
                                  ? 0.0
                                  : static_cast<double>(j) / (cfg.amplitude_grid - 1));
            consider(l, amp);
        }
    }

    // coordinate descent around the best grid cell
    const double step = 1.26;
    for (int it = 0; it < cfg.max_refinements; ++it) {
        const double l0 = best_l, a0 = best_amp;
        consider(l0 * step, a0);
        consider(l0 / step, a0);
        consider(best_l, best_amp * step);
        consider(best_l, best_amp / step);
        if (best_l == l0 && best_amp == a0) break;
    }
    return RbfKernel{best_l, best_amp};
}

}  // namespace steinquad
