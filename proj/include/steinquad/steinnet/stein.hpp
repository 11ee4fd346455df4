#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>

#include "steinquad/errors.hpp"

namespace steinquad {

// m(x) in the diffusion Stein operator. All supported choices are either
// c(x) * I_d for a scalar field c, or diag(x).
enum class MKind {
    Identity,
    ScaledIdentity,     // I / C
    InverseSquareNorm,  // I / (|x|^2 + 1)
    InverseNorm,        // I / sqrt(|x|^2 + 1)
    DensityScaled,      // I * pi(x); normalized pi only
    DiagX,              // diag(x)
};

struct MChoice {
    MKind kind = MKind::Identity;
    double c = 1.0;  // ScaledIdentity divisor

    static MChoice identity() { return {}; }
    static MChoice scaled(double c) {
        if (!(c > 0)) throw ConfigError("scaled identity m: C must be positive");
        return {MKind::ScaledIdentity, c};
    }
};

// how the ScaledIdentity constant is derived from the observed scores
enum class ScaleRule { StdOfScores, MaxAbsScore };

// std: scalar standard deviation of all pooled score entries;
// max: largest absolute score entry.
inline double resolve_scale_c(ScaleRule rule, const Eigen::MatrixXd& scores) {
    if (scores.size() == 0) throw ConfigError("resolve_scale_c: empty score set");
    if (rule == ScaleRule::MaxAbsScore) {
        const double c = scores.array().abs().maxCoeff();
        if (!(c > 0)) throw ConfigError("resolve_scale_c: max |score| is zero");
        return c;
    }
    const double mean = scores.mean();
    const double var = (scores.array() - mean).square().sum() / scores.size();
    const double c = std::sqrt(var);
    if (!(c > 0)) throw ConfigError("resolve_scale_c: score std is zero");
    return c;
}

// smooth factor vanishing on the box boundary: delta(x) = prod (x_k - a_k)(b_k - x_k)
struct BoundaryBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

inline double boundary_delta(const BoundaryBox& box, const Eigen::VectorXd& x) {
    double prod = 1.0;
    for (int k = 0; k < x.size(); ++k) prod *= (x[k] - box.lower[k]) * (box.upper[k] - x[k]);
    return prod;
}

inline Eigen::VectorXd boundary_delta_grad(const BoundaryBox& box, const Eigen::VectorXd& x) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd term(d);
    for (int k = 0; k < d; ++k) term[k] = (x[k] - box.lower[k]) * (box.upper[k] - x[k]);
    Eigen::VectorXd grad(d);
    for (int k = 0; k < d; ++k) {
        double rest = 1.0;
        for (int j = 0; j < d; ++j)
            if (j != k) rest *= term[j];
        grad[k] = rest * (box.lower[k] + box.upper[k] - 2.0 * x[k]);
    }
    return grad;
}

// The Stein layer output is linear in (u, diag J_u):
//   g(x) = a(x) . u(x) + b(x) . diag(J_u(x)) + theta0,
// where a, b collect the m-choice, the score and (optionally) the boundary
// factor. Precomputing them once per point is what makes batch training
// and the GGN pass cheap.
struct SteinCoeffs {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

inline SteinCoeffs stein_coefficients(const MChoice& m, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& score,
                                      double density = std::numeric_limits<double>::quiet_NaN(),
                                      const std::optional<BoundaryBox>& boundary = std::nullopt) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd a(d), b(d);
    switch (m.kind) {
        case MKind::Identity: {
            a = score;
            b.setOnes();
            break;
        }
        case MKind::ScaledIdentity: {
            a = score / m.c;
            b.setConstant(1.0 / m.c);
            break;
        }
        case MKind::InverseSquareNorm: {
            const double c = 1.0 / (x.squaredNorm() + 1.0);
            a = c * score - (2.0 * c * c) * x;
            b.setConstant(c);
            break;
        }
        case MKind::InverseNorm: {
            const double c = 1.0 / std::sqrt(x.squaredNorm() + 1.0);
            a = c * score - (c * c * c) * x;
            b.setConstant(c);
            break;
        }
        case MKind::DensityScaled: {
            if (!std::isfinite(density))
                throw NumericalError("density-scaled m requires a normalized density value");
            // grad pi = pi * score
            a = density * 2.0 * score;
            b.setConstant(density);
            break;
        }
        case MKind::DiagX: {
            a = (x.array() * score.array() + 1.0).matrix();
            b = x;
            break;
        }
    }
    if (boundary) {
        const double delta = boundary_delta(*boundary, x);
        const Eigen::VectorXd dgrad = boundary_delta_grad(*boundary, x);
        a = delta * a + (b.array() * dgrad.array()).matrix();
        b *= delta;
    }
    return {std::move(a), std::move(b)};
}

}  // namespace steinquad
