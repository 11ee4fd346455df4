#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/special.hpp"

namespace steinquad {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// Gauss–Hermite rule normalized to N(0,1): sum_i w_i f(x_i) ~ E[f(Z)].
// Newton iteration on the (physicists') Hermite recurrence, then the
// change of variables x -> sqrt(2) x, w -> w / sqrt(pi).
inline QuadratureRule gauss_hermite(int n_nodes) {
    const int n = n_nodes;
    const double eps = 1e-14;
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        double pp = 0.0;
        for (int its = 0; its < 100; ++its) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= eps) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double sqrt_pi = std::sqrt(kPi);
    for (int i = 0; i < n; ++i) {
        // nodes come out descending; flip to ascending
        rule.nodes[i] = kSqrt2 * x[n - 1 - i];
        rule.weights[i] = w[n - 1 - i] / sqrt_pi;
    }
    return rule;
}

// Gauss–Legendre on [-1,1] by Newton on the Legendre recurrence.
inline QuadratureRule gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int its = 0; its < 100; ++its) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

// integral of f over [a,b] with an n-node Gauss–Legendre rule
template <class F>
double gl_integrate(F&& f, double a, double b, const QuadratureRule& gl) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return half * acc;
}

// composite Gauss–Legendre: [a,b] in `panels` equal panels, smooth f only
template <class F>
double composite_gl(F&& f, double a, double b, int panels, int nodes_per_panel = 20) {
    const QuadratureRule gl = gauss_legendre(nodes_per_panel);
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) acc += gl_integrate(f, a + p * h, a + (p + 1) * h, gl);
    return acc;
}

// Uniform-grid trapezoid rule. Slow-converging; used only as the
// independent oracle the closed-form routines are tested against.
template <class F>
double trapezoid(F&& f, double a, double b, long n_points) {
    const double h = (b - a) / static_cast<double>(n_points - 1);
    double acc = 0.5 * (f(a) + f(b));
    for (long i = 1; i + 1 < n_points; ++i) acc += f(a + h * static_cast<double>(i));
    return acc * h;
}

}  // namespace steinquad
