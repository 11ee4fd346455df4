#pragma once

#include <Eigen/Core>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/rng.hpp"
#include "steinquad/steinnet/activation.hpp"

namespace steinquad {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Body network u: R^d -> R^d,
//   Linear(d,h) . act (. Linear(h,h) . act)^hidden_layers . Linear(h,d)
// hidden_layers counts the h->h blocks; there are hidden_layers+2 affine
// maps in total.
struct MlpArchitecture {
    int in_dim = 1;
    int hidden_width = 32;
    int hidden_layers = 2;
    Activation activation = Activation::CELU;

    int n_affine() const { return hidden_layers + 2; }

    int layer_in(int k) const { return k == 0 ? in_dim : hidden_width; }
    int layer_out(int k) const { return k == n_affine() - 1 ? in_dim : hidden_width; }

    // number of body parameters (weights + biases), excluding theta0
    long param_count() const {
        long p = 0;
        for (int k = 0; k < n_affine(); ++k)
            p += static_cast<long>(layer_out(k)) * layer_in(k) + layer_out(k);
        return p;
    }

    // full parameter vector size: [theta0, theta_u]
    long theta_size() const { return param_count() + 1; }

    // offset of layer k's weight block inside the full theta vector;
    // each block is W (row-major, out x in) followed by b (out)
    long layer_offset(int k) const {
        long off = 1;  // skip theta0
        for (int i = 0; i < k; ++i)
            off += static_cast<long>(layer_out(i)) * layer_in(i) + layer_out(i);
        return off;
    }

    bool operator==(const MlpArchitecture&) const = default;
};

// read-only views of one affine layer inside a packed theta vector
struct LayerView {
    Eigen::Map<const RowMajorMat> w;
    Eigen::Map<const Eigen::VectorXd> b;
};

inline LayerView layer_view(const MlpArchitecture& arch, const Eigen::VectorXd& theta, int k) {
    const long off = arch.layer_offset(k);
    const int out = arch.layer_out(k), in = arch.layer_in(k);
    return LayerView{
        Eigen::Map<const RowMajorMat>(theta.data() + off, out, in),
        Eigen::Map<const Eigen::VectorXd>(theta.data() + off + static_cast<long>(out) * in, out)};
}

struct LayerViewMut {
    Eigen::Map<RowMajorMat> w;
    Eigen::Map<Eigen::VectorXd> b;
};

inline LayerViewMut layer_view(const MlpArchitecture& arch, Eigen::VectorXd& theta, int k) {
    const long off = arch.layer_offset(k);
    const int out = arch.layer_out(k), in = arch.layer_in(k);
    return LayerViewMut{
        Eigen::Map<RowMajorMat>(theta.data() + off, out, in),
        Eigen::Map<Eigen::VectorXd>(theta.data() + off + static_cast<long>(out) * in, out)};
}

// weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases 0, theta0 = 0
inline Eigen::VectorXd init_theta(const MlpArchitecture& arch, RandomStream& rng) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(arch.theta_size());
    for (int k = 0; k < arch.n_affine(); ++k) {
        LayerViewMut lv = layer_view(arch, theta, k);
        const double bound = 1.0 / std::sqrt(static_cast<double>(arch.layer_in(k)));
        for (int r = 0; r < lv.w.rows(); ++r)
            for (int c = 0; c < lv.w.cols(); ++c) lv.w(r, c) = rng.uniform(-bound, bound);
    }
    return theta;
}

// Exact u(x) and input Jacobian du_i/dx_j by forward propagation of the
// (width x d) Jacobian through each affine map and activation diagonal.
inline void mlp_forward_jacobian(const MlpArchitecture& arch, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& x, Eigen::VectorXd& u,
                                 Eigen::MatrixXd& j_u) {
    const int d = arch.in_dim;
    Eigen::VectorXd a = x;
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(d, d);
    for (int k = 0; k < arch.n_affine(); ++k) {
        const LayerView lv = layer_view(arch, theta, k);
        Eigen::VectorXd pre = lv.w * a + lv.b;
        Eigen::MatrixXd zpre = lv.w * z;
        if (k + 1 < arch.n_affine()) {
            a = act::map_value(arch.activation, pre);
            const Eigen::VectorXd d1 = act::map_deriv(arch.activation, pre);
            z = zpre.array().colwise() * d1.array();
        } else {
            a = std::move(pre);
            z = std::move(zpre);
        }
    }
    u = std::move(a);
    j_u = std::move(z);
}

}  // namespace steinquad
