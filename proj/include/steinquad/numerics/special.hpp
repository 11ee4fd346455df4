#pragma once

#include <cmath>
#include <limits>

#include "steinquad/errors.hpp"

namespace steinquad {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLog2Pi = 1.837877066409345483560659472811235279;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;

// standard normal pdf
inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

inline double std_normal_log_pdf(double x) {
    return -0.5 * x * x - 0.5 * kLog2Pi;
}

// Phi(x) = (1 + erf(x/sqrt(2)))/2
inline double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

// Inverse of Phi by bisection bracket + Newton polish, |Phi(x)-p| driven
// below 1e-12 relative. Used for truncated-Gaussian inverse-CDF sampling
// and for mapping QMC points into Gaussian space.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw NumericalError("std_normal_quantile: p outside [0,1]");
    }
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 64; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std_normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double err = std_normal_cdf(x) - p;
        const double d = std_normal_pdf(x);
        if (d <= 0.0) break;
        const double step = err / d;
        x -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
    }
    return x;
}

// Phi(b) - Phi(a) computed to keep accuracy when both ends sit in a tail.
inline double std_normal_mass(double a, double b) {
    if (a > b) return 0.0;
    if (a > 0.0) {
        // both tails positive: use complementary form
        return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
    }
    if (b < 0.0) {
        return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
    }
    return std_normal_cdf(b) - std_normal_cdf(a);
}

}  // namespace steinquad
