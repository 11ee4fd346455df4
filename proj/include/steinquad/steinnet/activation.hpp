#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "steinquad/errors.hpp"

namespace steinquad {

// Continuously differentiable activations only: the Stein layer
// differentiates the body network with respect to its input, so RELU-style
// kinks are excluded by construction.
enum class Activation { CELU, Tanh, Gauss, Sigmoid, TanhShrink };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::CELU: return "celu";
        case Activation::Tanh: return "tanh";
        case Activation::Gauss: return "gauss";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::TanhShrink: return "tanhshrink";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "celu") return Activation::CELU;
    if (s == "tanh") return Activation::Tanh;
    if (s == "gauss") return Activation::Gauss;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanhshrink") return Activation::TanhShrink;
    throw ConfigError("unknown activation: " + s);
}

namespace act {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double value(Activation a, double x) {
    switch (a) {
        case Activation::CELU: return x > 0.0 ? x : std::expm1(x);
        case Activation::Tanh: return std::tanh(x);
        case Activation::Gauss: return std::exp(-x * x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::TanhShrink: return x - std::tanh(x);
    }
    return 0.0;
}

inline double deriv(Activation a, double x) {
    switch (a) {
        case Activation::CELU: return x > 0.0 ? 1.0 : std::exp(x);
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::Gauss: return -2.0 * x * std::exp(-x * x);
        case Activation::Sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
        case Activation::TanhShrink: {
            const double t = std::tanh(x);
            return t * t;
        }
    }
    return 0.0;
}

inline double deriv2(Activation a, double x) {
    switch (a) {
        case Activation::CELU: return x > 0.0 ? 0.0 : std::exp(x);
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return -2.0 * t * (1.0 - t * t);
        }
        case Activation::Gauss: return (4.0 * x * x - 2.0) * std::exp(-x * x);
        case Activation::Sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case Activation::TanhShrink: {
            const double t = std::tanh(x);
            return 2.0 * t * (1.0 - t * t);
        }
    }
    return 0.0;
}

template <class Derived>
Eigen::MatrixXd map_value(Activation a, const Eigen::MatrixBase<Derived>& m) {
    switch (a) {
        case Activation::CELU:
            return m.unaryExpr([](double x) { return value(Activation::CELU, x); });
        case Activation::Tanh:
            return m.unaryExpr([](double x) { return value(Activation::Tanh, x); });
        case Activation::Gauss:
            return m.unaryExpr([](double x) { return value(Activation::Gauss, x); });
        case Activation::Sigmoid:
            return m.unaryExpr([](double x) { return value(Activation::Sigmoid, x); });
        case Activation::TanhShrink:
            return m.unaryExpr([](double x) { return value(Activation::TanhShrink, x); });
    }
    return m;
}

template <class Derived>
Eigen::MatrixXd map_deriv(Activation a, const Eigen::MatrixBase<Derived>& m) {
    switch (a) {
        case Activation::CELU:
            return m.unaryExpr([](double x) { return deriv(Activation::CELU, x); });
        case Activation::Tanh:
            return m.unaryExpr([](double x) { return deriv(Activation::Tanh, x); });
        case Activation::Gauss:
            return m.unaryExpr([](double x) { return deriv(Activation::Gauss, x); });
        case Activation::Sigmoid:
            return m.unaryExpr([](double x) { return deriv(Activation::Sigmoid, x); });
        case Activation::TanhShrink:
            return m.unaryExpr([](double x) { return deriv(Activation::TanhShrink, x); });
    }
    return m;
}

template <class Derived>
Eigen::MatrixXd map_deriv2(Activation a, const Eigen::MatrixBase<Derived>& m) {
    switch (a) {
        case Activation::CELU:
            return m.unaryExpr([](double x) { return deriv2(Activation::CELU, x); });
        case Activation::Tanh:
            return m.unaryExpr([](double x) { return deriv2(Activation::Tanh, x); });
        case Activation::Gauss:
            return m.unaryExpr([](double x) { return deriv2(Activation::Gauss, x); });
        case Activation::Sigmoid:
            return m.unaryExpr([](double x) { return deriv2(Activation::Sigmoid, x); });
        case Activation::TanhShrink:
            return m.unaryExpr([](double x) { return deriv2(Activation::TanhShrink, x); });
    }
    return m;
}

}  // namespace act

}  // namespace steinquad
