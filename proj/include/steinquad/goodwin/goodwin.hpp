#pragma once

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/goodwin/ode.hpp"
#include "steinquad/numerics/rng.hpp"
#include "steinquad/numerics/special.hpp"
#include "steinquad/targets/target.hpp"

namespace steinquad {

// Two-state Goodwin oscillator without intermediate protein species:
//   du1/dt = a1 / (1 + a2 u2^rho) - alpha u1
//   du2/dt = k1 u1 - alpha u2,      u(0) = (0, 0), rho fixed at 10.
struct GoodwinParams {
    double a1 = 1.0;
    double a2 = 3.0;
    double k1 = 1.0;
    double alpha = 0.5;
    double rho = 10.0;

    static GoodwinParams ground_truth() { return {}; }

    Eigen::Vector4d as_vector() const { return {a1, a2, k1, alpha}; }
    static GoodwinParams from_vector(const Eigen::Vector4d& v, double rho_ = 10.0) {
        return {v[0], v[1], v[2], v[3], rho_};
    }
};

inline Eigen::Vector2d goodwin_rhs(const Eigen::Vector2d& u, const GoodwinParams& p) {
    const double u2c = std::max(u[1], 0.0);  // dynamics stay nonnegative
    const double denom = 1.0 + p.a2 * std::pow(u2c, p.rho);
    return {p.a1 / denom - p.alpha * u[0], p.k1 * u[0] - p.alpha * u[1]};
}

inline Eigen::MatrixXd solve_goodwin(const GoodwinParams& p, const std::vector<double>& times,
                                     const OdeSolverConfig& cfg = {}) {
    Dopri5 solver(
        [&p](double, const Eigen::VectorXd& u, Eigen::VectorXd& du) {
            const Eigen::Vector2d d = goodwin_rhs(Eigen::Vector2d(u[0], u[1]), p);
            du[0] = d[0];
            du[1] = d[1];
        },
        cfg);
    return solver.solve_at(Eigen::Vector2d::Zero(), 0.0, times);
}

// Synthetic observations: ground-truth trajectory plus independent
// Gaussian noise (0.1 on u1, 0.05 on u2) at n_times points in [1, 25].
struct GoodwinData {
    std::vector<double> times;
    Eigen::VectorXd y1;
    Eigen::VectorXd y2;
    double noise1 = 0.1;
    double noise2 = 0.05;
    std::uint64_t seed = 0;
};

inline GoodwinData make_goodwin_data(int n_times, std::uint64_t seed,
                                     const OdeSolverConfig& cfg = {}) {
    GoodwinData data;
    data.seed = seed;
    data.times.resize(n_times);
    for (int i = 0; i < n_times; ++i)
        data.times[i] = 1.0 + 24.0 * (n_times == 1 ? 0.0 : static_cast<double>(i) / (n_times - 1));
    const Eigen::MatrixXd u = solve_goodwin(GoodwinParams::ground_truth(), data.times, cfg);
    RandomStream rng(seed);
    data.y1.resize(n_times);
    data.y2.resize(n_times);
    for (int i = 0; i < n_times; ++i) {
        data.y1[i] = u(i, 0) + data.noise1 * rng.normal();
        data.y2[i] = u(i, 1) + data.noise2 * rng.normal();
    }
    return data;
}

inline void save_goodwin_csv(const GoodwinData& data, std::ostream& os) {
    os << "# goodwin synthetic dataset, seed " << data.seed << ", noise " << data.noise1 << " "
       << data.noise2 << "\n";
    os << "t,y1,y2\n";
    os.precision(17);
    for (std::size_t i = 0; i < data.times.size(); ++i)
        os << data.times[i] << ',' << data.y1[i] << ',' << data.y2[i] << "\n";
}

inline void save_goodwin_csv_file(const GoodwinData& data, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open goodwin csv for writing: " + path);
    save_goodwin_csv(data, os);
}

// Unnormalized log posterior over w = log(a1, a2, k1, alpha) and its exact
// score via forward sensitivities: the ODE is augmented with the 2x4
// parameter sensitivity block (10 states total), so the score is accurate
// to solver tolerance instead of finite differences.
inline std::pair<double, Eigen::Vector4d> log_posterior_and_score(
    const Eigen::Vector4d& w, const GoodwinData& data, const OdeSolverConfig& cfg = {}) {
    const Eigen::Vector4d x = w.array().exp();
    const GoodwinParams p = GoodwinParams::from_vector(x);

    auto rhs = [&p](double, const Eigen::VectorXd& state, Eigen::VectorXd& dstate) {
        const double u1 = state[0], u2 = state[1];
        const double u2c = std::max(u2, 0.0);
        const double pow_r = std::pow(u2c, p.rho);
        const double pow_rm1 = std::pow(u2c, p.rho - 1.0);
        const double denom = 1.0 + p.a2 * pow_r;
        // deep saturation: production and its derivatives vanish; taking
        // the limits keeps the augmented system finite for the extreme
        // parameters an unadapted sampler can propose
        const bool saturated = !(pow_r < 1e250) || !std::isfinite(denom);
        // f and its Jacobians in u and in the original parameters
        dstate[0] = (saturated ? 0.0 : p.a1 / denom) - p.alpha * u1;
        dstate[1] = p.k1 * u1 - p.alpha * u2;
        const double df1_du1 = -p.alpha;
        const double df1_du2 =
            saturated ? 0.0 : -p.a1 * p.a2 * p.rho * pow_rm1 / (denom * denom);
        const double df2_du1 = p.k1;
        const double df2_du2 = -p.alpha;
        const double df1_dp[4] = {saturated ? 0.0 : 1.0 / denom,
                                  saturated ? 0.0 : -p.a1 * pow_r / (denom * denom), 0.0, -u1};
        const double df2_dp[4] = {0.0, 0.0, u1, -u2};
        // dS/dt = J_u S + J_p, S stored row-major: state[2 + 4 i + j]
        for (int j = 0; j < 4; ++j) {
            const double s1 = state[2 + j];
            const double s2 = state[6 + j];
            dstate[2 + j] = df1_du1 * s1 + df1_du2 * s2 + df1_dp[j];
            dstate[6 + j] = df2_du1 * s1 + df2_du2 * s2 + df2_dp[j];
        }
    };

    Dopri5 solver(rhs, cfg);
    const Eigen::MatrixXd sol = solver.solve_at(Eigen::VectorXd::Zero(10), 0.0, data.times);

    double loglik = 0.0;
    Eigen::Vector4d grad_x = Eigen::Vector4d::Zero();
    const double inv_s1 = 1.0 / (data.noise1 * data.noise1);
    const double inv_s2 = 1.0 / (data.noise2 * data.noise2);
    for (std::size_t k = 0; k < data.times.size(); ++k) {
        const double r1 = data.y1[static_cast<Eigen::Index>(k)] - sol(k, 0);
        const double r2 = data.y2[static_cast<Eigen::Index>(k)] - sol(k, 1);
        loglik -= 0.5 * (r1 * r1 * inv_s1 + r2 * r2 * inv_s2);
        for (int j = 0; j < 4; ++j)
            grad_x[j] += r1 * inv_s1 * sol(k, 2 + j) + r2 * inv_s2 * sol(k, 6 + j);
    }

    // chain through x = exp(w) and add the standard normal prior on w
    const double logp = loglik - 0.5 * w.squaredNorm() - 2.0 * kLog2Pi;
    const Eigen::Vector4d score = (grad_x.array() * x.array()).matrix() - w;
    return {logp, score};
}

// Score-accessible posterior over the log parameters; no normalizer, no
// exact sampler (MALA is the sampling route).
class GoodwinTarget final : public ScoreTarget {
public:
    GoodwinTarget(GoodwinData data, OdeSolverConfig cfg = {})
        : data_(std::move(data)), cfg_(cfg) {}

    int dim() const override { return 4; }

    Eigen::VectorXd score(const Eigen::VectorXd& w) const override {
        return log_posterior_and_score(Eigen::Vector4d(w), data_, cfg_).second;
    }

    double log_density_unnorm(const Eigen::VectorXd& w) const override {
        return log_posterior_and_score(Eigen::Vector4d(w), data_, cfg_).first;
    }

    std::pair<double, Eigen::VectorXd> log_density_and_score(
        const Eigen::VectorXd& w) const override {
        auto [logp, s] = log_posterior_and_score(Eigen::Vector4d(w), data_, cfg_);
        return {logp, Eigen::VectorXd(s)};
    }

    const GoodwinData& data() const { return data_; }

private:
    GoodwinData data_;
    OdeSolverConfig cfg_;
};

inline std::shared_ptr<const GoodwinTarget> make_goodwin_target(GoodwinData data,
                                                                const OdeSolverConfig& cfg = {}) {
    return std::make_shared<GoodwinTarget>(std::move(data), cfg);
}

}  // namespace steinquad
