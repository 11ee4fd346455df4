#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/rng.hpp"
#include "steinquad/training/lbfgs.hpp"

namespace steinquad {

// value/gradient on an index subset; a null subset means the full batch
using StochasticObjective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&,
                         const std::vector<Eigen::Index>*)>;

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long iters = 10'000;
    long batch_size = 0;  // 0 = full batch
    long n_data = 0;      // required when batch_size > 0
};

inline std::pair<Eigen::VectorXd, TrainReport> adam_minimize(const StochasticObjective& obj,
                                                             Eigen::VectorXd x,
                                                             const AdamConfig& cfg,
                                                             RandomStream& rng) {
    if (!(cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1))
        throw ConfigError("adam: betas must lie in [0, 1)");
    if (cfg.batch_size > 0 && cfg.n_data <= 0)
        throw ConfigError("adam: mini-batching needs n_data");
    const auto t_start = std::chrono::steady_clock::now();

    TrainReport report;
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
    std::vector<Eigen::Index> batch;

    for (long t = 1; t <= cfg.iters; ++t) {
        const std::vector<Eigen::Index>* subset = nullptr;
        if (cfg.batch_size > 0) {
            batch.resize(cfg.batch_size);
            for (long i = 0; i < cfg.batch_size; ++i)
                batch[i] = static_cast<Eigen::Index>(
                    rng.next_below(static_cast<std::uint64_t>(cfg.n_data)));
            subset = &batch;
        }
        const double f = obj(x, g, subset);
        ++report.n_evals;
        if (!std::isfinite(f) || !g.allFinite())
            throw NonFiniteObjective("adam: objective not finite");
        report.loss_trace.push_back(f);

        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        x -= (cfg.lr / bc1) *
             (m.array() / ((v.array() / bc2).sqrt() + cfg.eps)).matrix();
    }

    // final full-batch value so comparisons across optimizers are fair
    report.final_loss = obj(x, g, nullptr);
    ++report.n_evals;
    report.grad_norm = g.lpNorm<Eigen::Infinity>();
    report.iters_used = cfg.iters;
    report.termination = "max_iters";
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(report)};
}

}  // namespace steinquad
