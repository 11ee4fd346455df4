#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "steinquad/errors.hpp"

namespace steinquad {

// objective returns the value and fills the gradient
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsConfig {
    int history_size = 10;
    int max_iters = 500;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    double grad_tol = 1e-8;
    int max_line_search_steps = 25;
};

// per accepted step, for Wolfe-condition auditing
struct StepInfo {
    double alpha = 0.0;
    double f_before = 0.0;
    double f_after = 0.0;
    double dphi0 = 0.0;       // directional derivative at alpha = 0
    double dphi_alpha = 0.0;  // directional derivative at the accepted alpha
};

struct TrainReport {
    double final_loss = 0.0;
    long iters_used = 0;
    double grad_norm = 0.0;  // max-norm at termination
    std::vector<double> loss_trace;
    double wall_time_s = 0.0;
    bool line_search_failed = false;
    std::string termination;  // grad_tol | max_iters | line_search
    std::vector<StepInfo> steps;
    long n_evals = 0;
};

namespace detail {

// cubic minimizer of the interpolant through (a, fa, da), (b, fb, db);
// falls back to bisection when the model is degenerate
inline double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) return 0.5 * (a + b);
    const double d2 = std::sqrt(disc) * (b > a ? 1.0 : -1.0);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a + b);
    double t = b - (b - a) * (db + d2 - d1) / denom;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double margin = 0.1 * (hi - lo);
    if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (a + b);
    return t;
}

}  // namespace detail

// Strong-Wolfe line search (bracket + zoom with cubic interpolation).
// Returns true on success with x/f/g updated at the accepted point.
class WolfeLineSearch {
public:
    WolfeLineSearch(const Objective& obj, const LbfgsConfig& cfg) : obj_(obj), cfg_(cfg) {}

    bool search(Eigen::VectorXd& x, double& f, Eigen::VectorXd& g, const Eigen::VectorXd& dir,
                double alpha0, StepInfo& info, long& eval_count) {
        const Eigen::VectorXd x0 = x;
        const double f0 = f;
        const double dphi0 = g.dot(dir);
        if (!(dphi0 < 0.0)) return false;

        auto eval = [&](double alpha, double& fa, double& da, Eigen::VectorXd& ga) {
            xa_ = x0 + alpha * dir;
            fa = obj_(xa_, ga);
            da = ga.dot(dir);
            ++eval_count;
            if (!std::isfinite(fa)) throw NonFiniteObjective("line search hit a non-finite value");
        };

        auto accept = [&](double alpha, double fa, double da, const Eigen::VectorXd& ga) {
            x = x0 + alpha * dir;
            f = fa;
            g = ga;
            info = StepInfo{alpha, f0, fa, dphi0, da};
        };

        double a_prev = 0.0, f_prev = f0, d_prev = dphi0;
        double alpha = alpha0;
        Eigen::VectorXd ga(g.size());
        double fa = 0.0, da = 0.0;

        for (int it = 0; it < cfg_.max_line_search_steps; ++it) {
            eval(alpha, fa, da, ga);
            if (fa > f0 + cfg_.wolfe_c1 * alpha * dphi0 || (it > 0 && fa >= f_prev)) {
                return zoom(x0, f0, dphi0, a_prev, f_prev, d_prev, alpha, fa, da, eval, accept,
                            eval_count);
            }
            if (std::abs(da) <= -cfg_.wolfe_c2 * dphi0) {
                accept(alpha, fa, da, ga);
                return true;
            }
            if (da >= 0.0) {
                return zoom(x0, f0, dphi0, alpha, fa, da, a_prev, f_prev, d_prev, eval, accept,
                            eval_count);
            }
            a_prev = alpha;
            f_prev = fa;
            d_prev = da;
            alpha *= 2.0;
            if (alpha > 1e12) break;
        }
        return false;
    }

private:
    template <class Eval, class Accept>
    bool zoom(const Eigen::VectorXd& x0, double f0, double dphi0, double a_lo, double f_lo,
              double d_lo, double a_hi, double f_hi, double d_hi, Eval&& eval, Accept&& accept,
              long& eval_count) {
        (void)x0;
        Eigen::VectorXd ga;
        double fa = 0.0, da = 0.0;
        for (int it = 0; it < cfg_.max_line_search_steps; ++it) {
            const double alpha = detail::cubic_minimizer(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
            if (!std::isfinite(alpha) || std::abs(a_hi - a_lo) * std::abs(dphi0) < 1e-18)
                return false;
            ga.resize(0);
            eval(alpha, fa, da, ga);
            if (fa > f0 + cfg_.wolfe_c1 * alpha * dphi0 || fa >= f_lo) {
                a_hi = alpha;
                f_hi = fa;
                d_hi = da;
            } else {
                if (std::abs(da) <= -cfg_.wolfe_c2 * dphi0) {
                    accept(alpha, fa, da, ga);
                    return true;
                }
                if (da * (a_hi - a_lo) >= 0.0) {
                    a_hi = a_lo;
                    f_hi = f_lo;
                    d_hi = d_lo;
                }
                a_lo = alpha;
                f_lo = fa;
                d_lo = da;
            }
        }
        return false;
    }

    const Objective& obj_;
    const LbfgsConfig& cfg_;
    Eigen::VectorXd xa_;
};

// L-BFGS with two-loop recursion and strong-Wolfe steps. Curvature pairs
// with s.y <= 1e-10 |s||y| are skipped. On line-search failure the best
// iterate is kept and reported rather than thrown.
inline std::pair<Eigen::VectorXd, TrainReport> lbfgs_minimize(const Objective& obj,
                                                              Eigen::VectorXd x,
                                                              const LbfgsConfig& cfg = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    if (!(cfg.wolfe_c1 > 0 && cfg.wolfe_c1 < cfg.wolfe_c2 && cfg.wolfe_c2 < 1))
        throw ConfigError("lbfgs: requires 0 < c1 < c2 < 1");

    TrainReport report;
    Eigen::VectorXd g(x.size());
    double f = obj(x, g);
    ++report.n_evals;
    if (!std::isfinite(f) || !g.allFinite())
        throw NonFiniteObjective("lbfgs: objective not finite at the initial point");
    report.loss_trace.push_back(f);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    WolfeLineSearch line_search(obj, cfg);

    Eigen::VectorXd best_x = x;
    double best_f = f;

    long k = 0;
    for (; k < cfg.max_iters; ++k) {
        report.grad_norm = g.lpNorm<Eigen::Infinity>();
        if (report.grad_norm <= cfg.grad_tol) {
            report.termination = "grad_tol";
            break;
        }

        // two-loop recursion
        Eigen::VectorXd q = -g;
        std::vector<double> alpha_coef(s_hist.size());
        for (long i = static_cast<long>(s_hist.size()) - 1; i >= 0; --i) {
            alpha_coef[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha_coef[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha_coef[i] - beta) * s_hist[i];
        }
        if (q.dot(g) >= 0.0) {
            // fallback to steepest descent if the model lost descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            q = -g;
        }

        const double alpha0 =
            s_hist.empty() ? std::min(1.0, 1.0 / std::max(1e-12, g.norm())) : 1.0;

        Eigen::VectorXd x_old = x, g_old = g;
        StepInfo info;
        const bool ok = line_search.search(x, f, g, q, alpha0, info, report.n_evals);
        if (!ok) {
            report.line_search_failed = true;
            report.termination = "line_search";
            break;
        }
        report.steps.push_back(info);
        report.loss_trace.push_back(f);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }

        Eigen::VectorXd s = x - x_old;
        Eigen::VectorXd y = g - g_old;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.history_size) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
    }
    if (report.termination.empty()) report.termination = "max_iters";

    if (f > best_f) {
        f = best_f;
        x = best_x;
    }
    report.final_loss = f;
    report.iters_used = k;
    report.grad_norm = g.lpNorm<Eigen::Infinity>();
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(report)};
}

}  // namespace steinquad
