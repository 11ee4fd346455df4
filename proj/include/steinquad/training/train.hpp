#pragma once

#include <optional>
#include <utility>
#include <variant>

#include "steinquad/samplers/point_set.hpp"
#include "steinquad/steinnet/loss.hpp"
#include "steinquad/steinnet/network.hpp"
#include "steinquad/training/adam.hpp"
#include "steinquad/training/lbfgs.hpp"

namespace steinquad {

// L-BFGS is the primary optimizer; Adam is kept for the optimizer study.
struct OptimizerConfig {
    enum class Kind { Lbfgs, Adam } kind = Kind::Lbfgs;
    LbfgsConfig lbfgs;
    AdamConfig adam;
};

struct TrainResult {
    SteinNetwork net;
    TrainReport report;
};

// Full-batch training of the Stein network on {x_i, f_i, s_i}. theta0 is
// initialized to the sample mean of f (the plain MC estimate) before
// optimization. lambda decays theta_u only unless decay_theta0 is set.
inline TrainResult train_bsn(SteinNetwork net, const PointSet& ps, const Eigen::VectorXd& f,
                             double lambda, const OptimizerConfig& opt = {},
                             const ScoreTarget* target = nullptr, RandomStream* rng = nullptr,
                             bool decay_theta0 = false) {
    if (ps.size() < 1) throw ConfigError("train_bsn: empty dataset");
    SteinBatchEvaluator ev = make_evaluator(net, ps, f, lambda, target, decay_theta0);
    net.theta[0] = f.mean();

    TrainResult out;
    if (opt.kind == OptimizerConfig::Kind::Lbfgs) {
        Objective obj = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
            return ev.loss_and_gradient(theta, grad);
        };
        auto [theta, report] = lbfgs_minimize(obj, net.theta, opt.lbfgs);
        net.theta = std::move(theta);
        out.report = std::move(report);
    } else {
        StochasticObjective obj = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad,
                                      const std::vector<Eigen::Index>* rows) {
            return rows ? ev.loss_and_gradient_subset(theta, grad, *rows)
                        : ev.loss_and_gradient(theta, grad);
        };
        AdamConfig acfg = opt.adam;
        if (acfg.batch_size > 0) acfg.n_data = ps.size();
        RandomStream local(0);
        RandomStream& stream = rng ? *rng : local;
        auto [theta, report] = adam_minimize(obj, net.theta, acfg, stream);
        net.theta = std::move(theta);
        out.report = std::move(report);
    }
    out.net = std::move(net);
    return out;
}

}  // namespace steinquad
