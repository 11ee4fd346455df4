#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

#include "steinquad/errors.hpp"

namespace steinquad {

struct OdeSolverConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    long max_steps = 2'000'000;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Embedded Dormand-Prince 5(4) with the standard 4th-order dense-output
// interpolant (Hairer/Norsett/Wanner coefficients). FSAL: the last stage of
// an accepted step seeds the next one. Values at the requested times come
// from the interpolant of the step that covers them.
class Dopri5 {
public:
    Dopri5(OdeRhs rhs, OdeSolverConfig cfg = {}) : rhs_(std::move(rhs)), cfg_(cfg) {}

    // integrates from t0 and returns the state at each requested time;
    // times must be non-decreasing and >= t0
    Eigen::MatrixXd solve_at(const Eigen::VectorXd& u0, double t0,
                             const std::vector<double>& times) {
        const Eigen::Index n = u0.size();
        Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), n);
        if (times.empty()) return out;
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            if (times[i + 1] < times[i]) throw ConfigError("dopri5: times must be sorted");
        if (times.front() < t0) throw ConfigError("dopri5: requested time before t0");

        double t = t0;
        Eigen::VectorXd y = u0;
        Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
        Eigen::VectorXd ytmp(n), ynew(n), yerr(n);
        rhs_(t, y, k1);

        std::size_t next_time = 0;
        while (next_time < times.size() && times[next_time] <= t) {
            out.row(next_time) = y.transpose();
            ++next_time;
        }
        if (next_time == times.size()) return out;

        const double t_end = times.back();
        double h = initial_step(t, y, k1, t_end - t0);
        long steps = 0;

        while (t < t_end) {
            if (++steps > cfg_.max_steps)
                throw MaxStepsExceeded("dopri5: exceeded the step budget");
            if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))))
                throw StepUnderflow("dopri5: step size underflow");
            if (t + h > t_end) h = t_end - t;

            // stages
            ytmp = y + h * kB21 * k1;
            rhs_(t + kA2 * h, ytmp, k2);
            ytmp = y + h * (kB31 * k1 + kB32 * k2);
            rhs_(t + kA3 * h, ytmp, k3);
            ytmp = y + h * (kB41 * k1 + kB42 * k2 + kB43 * k3);
            rhs_(t + kA4 * h, ytmp, k4);
            ytmp = y + h * (kB51 * k1 + kB52 * k2 + kB53 * k3 + kB54 * k4);
            rhs_(t + kA5 * h, ytmp, k5);
            ytmp = y + h * (kB61 * k1 + kB62 * k2 + kB63 * k3 + kB64 * k4 + kB65 * k5);
            rhs_(t + h, ytmp, k6);
            ynew = y + h * (kC1 * k1 + kC3 * k3 + kC4 * k4 + kC5 * k5 + kC6 * k6);
            rhs_(t + h, ynew, k7);

            yerr = h * (kD1 * k1 + kD3 * k3 + kD4 * k4 + kD5 * k5 + kD6 * k6 + kD7 * k7);
            double err = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double scale =
                    cfg_.atol + cfg_.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double e = yerr[i] / scale;
                err += e * e;
            }
            err = std::sqrt(err / static_cast<double>(n));
            if (!std::isfinite(err)) err = 1e10;  // reject and shrink hard

            if (err <= 1.0) {
                // serve requested times inside (t, t+h]
                while (next_time < times.size() && times[next_time] <= t + h) {
                    const double theta = (times[next_time] - t) / h;
                    out.row(next_time) =
                        dense_eval(y, ynew, k1, k3, k4, k5, k6, k7, h, theta).transpose();
                    ++next_time;
                }
                t += h;
                y.swap(ynew);
                k1.swap(k7);  // FSAL
                if (next_time == times.size()) break;
            }
            const double safety = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::min(5.0, std::max(0.2, safety));
        }
        return out;
    }

private:
    double initial_step(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dy,
                        double span) const {
        const double d0 = y.norm(), d1 = dy.norm();
        double h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-6 * std::max(1.0, span);
        (void)t;
        return std::min(h, 0.1 * span);
    }

    Eigen::VectorXd dense_eval(const Eigen::VectorXd& y, const Eigen::VectorXd& ynew,
                               const Eigen::VectorXd& k1, const Eigen::VectorXd& k3,
                               const Eigen::VectorXd& k4, const Eigen::VectorXd& k5,
                               const Eigen::VectorXd& k6, const Eigen::VectorXd& k7, double h,
                               double theta) const {
        (void)ynew;
        const double x1 = 5.0 * (2558722523.0 - 31403016.0 * theta) / 11282082432.0;
        const double x3 = 100.0 * (882725551.0 - 15701508.0 * theta) / 32700410799.0;
        const double x4 = 25.0 * (443332067.0 - 31403016.0 * theta) / 1880347072.0;
        const double x5 = 32805.0 * (23143187.0 - 3489224.0 * theta) / 199316789632.0;
        const double x6 = 55.0 * (29972135.0 - 7076736.0 * theta) / 822651844.0;
        const double x7 = 10.0 * (7414447.0 - 829305.0 * theta) / 29380423.0;
        const double tm1 = theta - 1.0;
        const double a = theta * theta * (3.0 - 2.0 * theta);
        const double b = theta * theta * tm1;
        const double c = theta * theta * tm1 * tm1;
        const double d = theta * tm1 * tm1;
        const double b1 = a * kC1 - c * x1 + d;
        const double b3 = a * kC3 + c * x3;
        const double b4 = a * kC4 - c * x4;
        const double b5 = a * kC5 + c * x5;
        const double b6 = a * kC6 - c * x6;
        const double b7 = b + c * x7;
        return y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6 + b7 * k7);
    }

    static constexpr double kA2 = 1.0 / 5.0, kA3 = 3.0 / 10.0, kA4 = 4.0 / 5.0, kA5 = 8.0 / 9.0;
    static constexpr double kB21 = 1.0 / 5.0;
    static constexpr double kB31 = 3.0 / 40.0, kB32 = 9.0 / 40.0;
    static constexpr double kB41 = 44.0 / 45.0, kB42 = -56.0 / 15.0, kB43 = 32.0 / 9.0;
    static constexpr double kB51 = 19372.0 / 6561.0, kB52 = -25360.0 / 2187.0,
                            kB53 = 64448.0 / 6561.0, kB54 = -212.0 / 729.0;
    static constexpr double kB61 = 9017.0 / 3168.0, kB62 = -355.0 / 33.0,
                            kB63 = 46732.0 / 5247.0, kB64 = 49.0 / 176.0,
                            kB65 = -5103.0 / 18656.0;
    static constexpr double kC1 = 35.0 / 384.0, kC3 = 500.0 / 1113.0, kC4 = 125.0 / 192.0,
                            kC5 = -2187.0 / 6784.0, kC6 = 11.0 / 84.0;
    static constexpr double kD1 = kC1 - 5179.0 / 57600.0;
    static constexpr double kD3 = kC3 - 7571.0 / 16695.0;
    static constexpr double kD4 = kC4 - 393.0 / 640.0;
    static constexpr double kD5 = kC5 + 92097.0 / 339200.0;
    static constexpr double kD6 = kC6 - 187.0 / 2100.0;
    static constexpr double kD7 = -1.0 / 40.0;

    OdeRhs rhs_;
    OdeSolverConfig cfg_;
};

}  // namespace steinquad
