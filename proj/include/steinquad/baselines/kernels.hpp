#pragma once

#include <Eigen/Core>
#include <cmath>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/special.hpp"
#include "steinquad/targets/builtin.hpp"

namespace steinquad {

// RBF kernel in the k(x,x') = amplitude * exp(-|x-x'|^2 / (2 l^2))
// convention. The closed-form embeddings below depend on the 2 l^2 form,
// which makes it canonical here.
struct RbfKernel {
    double lengthscale = 1.0;
    double amplitude = 1.0;

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return amplitude *
               std::exp(-(a - b).squaredNorm() / (2.0 * lengthscale * lengthscale));
    }
};

// Matern-1/2 kernel exp(-|x-x'|/l); its Gaussian embedding is only known
// in one dimension and the BQ mean is amplitude-invariant, so no amplitude
// is carried.
struct Matern12Kernel {
    double lengthscale = 1.0;

    double operator()(double a, double b) const {
        return std::exp(-std::abs(a - b) / lengthscale);
    }
};

// Pi[k(., x)] for diagonal-Gaussian pi:
//   amplitude * prod_k sqrt(l^2/(l^2+s_k^2)) exp(-(x_k-mu_k)^2/(2(l^2+s_k^2)))
inline double kme_rbf_gaussian(const RbfKernel& kernel, const GaussianTarget& pi,
                               const Eigen::VectorXd& x) {
    const double l2 = kernel.lengthscale * kernel.lengthscale;
    double out = kernel.amplitude;
    for (int k = 0; k < pi.dim(); ++k) {
        const double s2 = pi.variance_diag()[k];
        const double dx = x[k] - pi.mean()[k];
        out *= std::sqrt(l2 / (l2 + s2)) * std::exp(-dx * dx / (2.0 * (l2 + s2)));
    }
    return out;
}

// PiPi[k] for diagonal-Gaussian pi: amplitude * prod_k sqrt(l^2/(l^2+2 s_k^2))
inline double kme_rbf_gaussian_double(const RbfKernel& kernel, const GaussianTarget& pi) {
    const double l2 = kernel.lengthscale * kernel.lengthscale;
    double out = kernel.amplitude;
    for (int k = 0; k < pi.dim(); ++k)
        out *= std::sqrt(l2 / (l2 + 2.0 * pi.variance_diag()[k]));
    return out;
}

namespace detail {

// int_a^b k(x', x) phi(x'; mu, sigma) dx' for the RBF kernel, before any
// truncation normalizer: the Gaussian product identity gives
//   amplitude l sqrt(2 pi) C Z(a, b, mu~, sigma~)
// with a negative exponent in C.
inline double rbf_gauss_product_integral(const RbfKernel& kernel, double mu, double sigma,
                                         double a, double b, double x) {
    const double l = kernel.lengthscale;
    const double l2 = l * l, s2 = sigma * sigma;
    const double mu_t = (mu * l2 + x * s2) / (s2 + l2);
    const double sigma_t = std::sqrt(s2 * l2 / (s2 + l2));
    const double c = std::exp(-(mu - x) * (mu - x) / (2.0 * (s2 + l2))) /
                     std::sqrt(2.0 * kPi * (s2 + l2));
    const double mass = std_normal_mass((a - mu_t) / sigma_t, (b - mu_t) / sigma_t);
    return kernel.amplitude * l * std::sqrt(2.0 * kPi) * c * mass;
}

}  // namespace detail

// Pi[k(., x)] for a truncated Gaussian on [a,b] (one side may be infinite)
inline double kme_rbf_truncated(const RbfKernel& kernel, const TruncatedGaussian1D& pi,
                                double x) {
    return detail::rbf_gauss_product_integral(kernel, pi.mu(), pi.sigma(), pi.lower(),
                                              pi.upper(), x) /
           pi.normalizer();
}

namespace detail {

// e^{z^2} erfc(z) for z >= 0; direct product below the erfc underflow
// region, asymptotic series beyond
inline double erfcx_pos(double z) {
    if (z <= 15.0) return std::exp(z * z) * std::erfc(z);
    const double inv2z2 = 1.0 / (2.0 * z * z);
    double term = 1.0, sum = 1.0;
    for (int n = 1; n < 20; ++n) {
        term *= -(2.0 * n - 1.0) * inv2z2;
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return sum / (z * std::sqrt(kPi));
}

}  // namespace detail

// Pi[k(., x)] for the Matern-1/2 kernel under pi = N(0,1). The textbook
// form 1/2 e^{(2xl+1)/2l^2} erfc((x+1/l)/sqrt2) + ... overflows for small
// l; with A - B^2 = -x^2/2 it reduces to the stable
//   1/2 e^{-x^2/2} [erfcx((x+1/l)/sqrt2) + erfcx((1/l-x)/sqrt2)].
inline double kme_matern12_gaussian(double l, double x) {
    if (!(l > 0)) throw ConfigError("matern embedding: lengthscale must be positive");
    const double z1 = (x + 1.0 / l) / kSqrt2;
    const double z2 = (1.0 / l - x) / kSqrt2;
    auto piece = [&](double z) {
        if (z >= 0.0) return std::exp(-0.5 * x * x) * detail::erfcx_pos(z);
        // erfcx(z) = 2 e^{z^2} - erfcx(-z); fold e^{-x^2/2} into the
        // exponent analytically (z^2 - x^2/2 stays moderate here)
        return 2.0 * std::exp(z * z - 0.5 * x * x) -
               std::exp(-0.5 * x * x) * detail::erfcx_pos(-z);
    };
    return 0.5 * (piece(z1) + piece(z2));
}

}  // namespace steinquad
