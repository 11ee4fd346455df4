#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>

#include "steinquad/steinnet/mlp.hpp"
#include "steinquad/steinnet/stein.hpp"

namespace steinquad {

// The Stein network g_theta(x) = S_m[u_theta_u](x) + theta0. The integral
// of g under the score's distribution equals theta0, which is why training
// g against f-samples estimates the integral directly.
//
// theta layout: theta[0] is theta0, the remainder is the body network in
// layer order (each affine block as row-major W then b).
struct SteinNetwork {
    MlpArchitecture arch;
    Eigen::VectorXd theta;
    MChoice m;
    std::optional<BoundaryBox> boundary;

    double theta0() const { return theta[0]; }
    long param_count() const { return arch.param_count(); }
};

inline SteinNetwork init_network(const MlpArchitecture& arch, RandomStream& rng,
                                 MChoice m = MChoice::identity(),
                                 std::optional<BoundaryBox> boundary = std::nullopt) {
    SteinNetwork net;
    net.arch = arch;
    net.theta = init_theta(arch, rng);
    net.m = std::move(m);
    net.boundary = std::move(boundary);
    return net;
}

inline void forward_with_input_jacobian(const SteinNetwork& net, const Eigen::VectorXd& x,
                                        Eigen::VectorXd& u, Eigen::MatrixXd& j_u) {
    mlp_forward_jacobian(net.arch, net.theta, x, u, j_u);
}

// Single-point evaluation with the full input Jacobian and the Stein terms
// broken out. The batch trainer uses the coefficient form instead; the two
// agree and tests compare them.
struct EvalRecord {
    double value = 0.0;
    Eigen::VectorXd u;
    Eigen::MatrixXd j_u;
    double div_term = 0.0;
    double score_term = 0.0;
};

inline EvalRecord stein_forward(const SteinNetwork& net, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& score,
                                double density = std::numeric_limits<double>::quiet_NaN()) {
    EvalRecord rec;
    mlp_forward_jacobian(net.arch, net.theta, x, rec.u, rec.j_u);

    Eigen::VectorXd u_eff = rec.u;
    Eigen::MatrixXd j_eff = rec.j_u;
    if (net.boundary) {
        if (!((x.array() > net.boundary->lower.array()).all() &&
              (x.array() < net.boundary->upper.array()).all()))
            throw OutsideSupport("stein_forward: point not interior to the boundary box");
        const double delta = boundary_delta(*net.boundary, x);
        const Eigen::VectorXd dgrad = boundary_delta_grad(*net.boundary, x);
        j_eff = delta * rec.j_u + rec.u * dgrad.transpose();
        u_eff = delta * rec.u;
    }

    const int d = net.arch.in_dim;
    switch (net.m.kind) {
        case MKind::Identity: {
            rec.score_term = score.dot(u_eff);
            rec.div_term = j_eff.trace();
            break;
        }
        case MKind::ScaledIdentity: {
            rec.score_term = score.dot(u_eff) / net.m.c;
            rec.div_term = j_eff.trace() / net.m.c;
            break;
        }
        case MKind::InverseSquareNorm: {
            const double c = 1.0 / (x.squaredNorm() + 1.0);
            rec.score_term = c * score.dot(u_eff);
            rec.div_term = (-2.0 * c * c) * x.dot(u_eff) + c * j_eff.trace();
            break;
        }
        case MKind::InverseNorm: {
            const double c = 1.0 / std::sqrt(x.squaredNorm() + 1.0);
            rec.score_term = c * score.dot(u_eff);
            rec.div_term = (-c * c * c) * x.dot(u_eff) + c * j_eff.trace();
            break;
        }
        case MKind::DensityScaled: {
            if (!std::isfinite(density))
                throw NumericalError("density-scaled m requires a normalized density value");
            rec.score_term = density * score.dot(u_eff);
            rec.div_term = density * score.dot(u_eff) + density * j_eff.trace();
            break;
        }
        case MKind::DiagX: {
            double st = 0.0, dv = 0.0;
            for (int k = 0; k < d; ++k) {
                st += x[k] * score[k] * u_eff[k];
                dv += u_eff[k] + x[k] * j_eff(k, k);
            }
            rec.score_term = st;
            rec.div_term = dv;
            break;
        }
    }
    rec.value = rec.score_term + rec.div_term + net.theta0();
    return rec;
}

}  // namespace steinquad
