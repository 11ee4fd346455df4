#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/targets/target.hpp"

namespace steinquad {

// Metropolis-adjusted Langevin. Proposal x' = x + (eps^2/2) score(x)
// + eps xi with xi ~ N(0, I), corrected by Metropolis-Hastings with the
// asymmetric proposal density. When adapt is set, log(eps) follows a
// Robbins-Monro recursion toward the target acceptance rate during
// burn-in and is frozen afterwards.
struct MalaConfig {
    double step_size = 0.5;
    long n_burn = 2000;
    long n_keep = 1000;
    long thinning = 1;
    Eigen::VectorXd init;
    double adapt_target_accept = 0.574;
    bool adapt = true;
};

struct MalaDiagnostics {
    double final_step_size = 0.0;
    double acceptance_rate = 0.0;  // post burn-in
};

namespace detail {

// log q(to | from) for the Langevin proposal, up to the constant
inline double mala_log_q(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                         const Eigen::VectorXd& score_from, double eps) {
    const Eigen::VectorXd mean = from + 0.5 * eps * eps * score_from;
    return -(to - mean).squaredNorm() / (2.0 * eps * eps);
}

}  // namespace detail

inline PointSet mala_sample(const ScoreTarget& target, const MalaConfig& cfg, RandomStream& rng,
                            MalaDiagnostics* diag = nullptr) {
    if (cfg.init.size() != target.dim()) throw ConfigError("mala: init has wrong dimension");
    if (cfg.thinning < 1) throw ConfigError("mala: thinning must be >= 1");

    // One combined target evaluation per proposal. Outside-support or
    // unevaluable proposals (posterior targets whose solver blows up in an
    // extreme corner) count as zero density and are rejected; only the
    // initial point escalates to an error.
    auto eval_target = [&](const Eigen::VectorXd& x, double& logp, Eigen::VectorXd& s) {
        try {
            auto [lp, sc] = target.log_density_and_score(x);
            logp = lp;
            s = std::move(sc);
        } catch (const NumericalError&) {
            logp = -std::numeric_limits<double>::infinity();
        }
    };

    Eigen::VectorXd x = cfg.init;
    double logp = 0.0;
    Eigen::VectorXd s;
    eval_target(x, logp, s);
    if (!std::isfinite(logp))
        throw NonFiniteDensity("mala: non-finite log density at the initial point");

    double log_eps = std::log(cfg.step_size);
    const long total = cfg.n_burn + cfg.n_keep * cfg.thinning;
    const int d = target.dim();

    Eigen::MatrixXd kept(cfg.n_keep, d);
    Eigen::MatrixXd kept_scores(cfg.n_keep, d);
    long kept_count = 0;
    long accepted_post_burn = 0;

    Eigen::VectorXd xi(d), xp(d);
    for (long t = 0; t < total; ++t) {
        const double eps = std::exp(log_eps);
        for (int k = 0; k < d; ++k) xi[k] = rng.normal();
        xp = x + 0.5 * eps * eps * s + eps * xi;

        double logpp = 0.0;
        Eigen::VectorXd sp;
        eval_target(xp, logpp, sp);
        double log_alpha = -std::numeric_limits<double>::infinity();
        if (std::isfinite(logpp)) {
            log_alpha = logpp - logp + detail::mala_log_q(x, xp, sp, eps) -
                        detail::mala_log_q(xp, x, s, eps);
        }
        const bool accept = std::log(rng.uniform() + 1e-300) < log_alpha;
        if (accept) {
            x = xp;
            logp = logpp;
            s = sp;
            if (!std::isfinite(logp))
                throw NonFiniteDensity("mala: chain reached non-finite log density");
        }

        if (t < cfg.n_burn) {
            if (cfg.adapt) {
                const double alpha = std::exp(std::min(0.0, log_alpha));
                log_eps += (alpha - cfg.adapt_target_accept) /
                           std::pow(static_cast<double>(t + 1), 0.6);
            }
        } else {
            accepted_post_burn += accept ? 1 : 0;
            const long post = t - cfg.n_burn;
            if ((post + 1) % cfg.thinning == 0) {
                kept.row(kept_count) = x.transpose();
                kept_scores.row(kept_count) = s.transpose();
                ++kept_count;
            }
        }
    }

    if (diag) {
        diag->final_step_size = std::exp(log_eps);
        diag->acceptance_rate = (cfg.n_keep * cfg.thinning > 0)
                                    ? static_cast<double>(accepted_post_burn) /
                                          static_cast<double>(cfg.n_keep * cfg.thinning)
                                    : 0.0;
    }

    PointSet ps;
    ps.points = std::move(kept);
    ps.scores = std::move(kept_scores);
    ps.provenance = Provenance::MALA;
    return ps;
}

// Runs n_chains independent chains (each with its own forked stream and
// its own init row) and pools the kept samples in chain order.
inline PointSet mala_sample_pooled(const ScoreTarget& target, MalaConfig cfg,
                                   const Eigen::MatrixXd& inits, RandomStream& rng) {
    const long n_chains = inits.rows();
    if (n_chains < 1) throw ConfigError("mala: need at least one chain init");
    const int d = target.dim();
    PointSet pooled;
    pooled.points.resize(cfg.n_keep * n_chains, d);
    pooled.scores.resize(cfg.n_keep * n_chains, d);
    pooled.provenance = Provenance::MALA;
    for (long c = 0; c < n_chains; ++c) {
        RandomStream chain_rng = rng.split(static_cast<std::uint64_t>(c));
        cfg.init = inits.row(c).transpose();
        PointSet ps = mala_sample(target, cfg, chain_rng);
        pooled.points.middleRows(c * cfg.n_keep, cfg.n_keep) = ps.points;
        pooled.scores.middleRows(c * cfg.n_keep, cfg.n_keep) = ps.scores;
    }
    return pooled;
}

}  // namespace steinquad
