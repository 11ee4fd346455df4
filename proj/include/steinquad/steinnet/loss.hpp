#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/linalg.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/steinnet/network.hpp"

namespace steinquad {

// Batched evaluation of g_theta and of the regularized squared loss
//   l_tot = (1/n) sum (f_i - g_theta(x_i))^2 + lambda |theta_u|^2
// with exact parameter gradients.
//
// The Stein layer reduces to g = a_i . u(x_i) + b_i . diag(J_u(x_i))
// + theta0 per point (coefficients precomputed at construction), so one
// forward pass propagates values and input Jacobians together, and one
// reverse pass accumulates the theta-gradient through both.
//
// Points are processed in fixed-size chunks in a fixed order; results are
// bitwise reproducible for a given theta.
class SteinBatchEvaluator {
public:
    SteinBatchEvaluator(const MlpArchitecture& arch, const MChoice& m,
                        std::optional<BoundaryBox> boundary, const Eigen::MatrixXd& points,
                        const Eigen::MatrixXd& scores, Eigen::VectorXd f,
                        const Eigen::VectorXd* densities, double lambda, bool decay_theta0 = false,
                        Eigen::Index chunk = 512)
        : arch_(arch),
          m_(m),
          boundary_(std::move(boundary)),
          f_(std::move(f)),
          lambda_(lambda),
          decay_theta0_(decay_theta0),
          chunk_(chunk) {
        const Eigen::Index n = points.rows();
        const int d = arch_.in_dim;
        if (points.cols() != d || scores.rows() != n || f_.size() != n)
            throw ConfigError("stein evaluator: data shape mismatch");
        if (m_.kind == MKind::DensityScaled && densities == nullptr)
            throw ConfigError("stein evaluator: density-scaled m needs per-point densities");
        xt_ = points.transpose();
        coeff_a_.resize(d, n);
        coeff_b_.resize(d, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dens = densities ? (*densities)[i] : std::numeric_limits<double>::quiet_NaN();
            SteinCoeffs co = stein_coefficients(m_, points.row(i).transpose(),
                                                scores.row(i).transpose(), dens, boundary_);
            coeff_a_.col(i) = co.a;
            coeff_b_.col(i) = co.b;
        }
    }

    Eigen::Index n() const { return f_.size(); }
    const Eigen::VectorXd& f() const { return f_; }
    const MlpArchitecture& arch() const { return arch_; }

    // l_tot and its exact gradient over the full dataset
    double loss_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
        return loss_grad_impl(theta, &grad, nullptr);
    }

    // mini-batch variant: mean squared error over the given rows
    double loss_and_gradient_subset(const Eigen::VectorXd& theta, Eigen::VectorXd& grad,
                                    const std::vector<Eigen::Index>& rows) const {
        return loss_grad_impl(theta, &grad, &rows);
    }

    double loss_value(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd g = g_values(theta);
        double l = (f_ - g).squaredNorm() / static_cast<double>(n());
        l += lambda_ * penalty(theta);
        if (!std::isfinite(l)) throw NonFiniteLoss("stein loss is not finite");
        return l;
    }

    // g_theta at every data point
    Eigen::VectorXd g_values(const Eigen::VectorXd& theta) const {
        const Eigen::Index total = n();
        Eigen::VectorXd g(total);
        Workspace ws;
        for (Eigen::Index start = 0; start < total; start += chunk_) {
            const Eigen::Index c = std::min(chunk_, total - start);
            forward_chunk(theta, start, c, ws);
            for (Eigen::Index j = 0; j < c; ++j) g[start + j] = chunk_g(theta, ws, start, j);
        }
        return g;
    }

    // gram += sum_i grad_theta g(x_i) grad_theta g(x_i)^T (full p+1 square,
    // no noise scaling) and residuals r_i = f_i - g(x_i)
    void jacobian_gram(const Eigen::VectorXd& theta, DenseMatrix& gram,
                       Eigen::VectorXd& residuals) const {
        const long q = arch_.theta_size();
        const Eigen::Index total = n();
        gram = DenseMatrix::Zero(q, q);
        residuals.resize(total);
        Workspace ws;
        RowMajorMat jrows;
        for (Eigen::Index start = 0; start < total; start += chunk_) {
            const Eigen::Index c = std::min(chunk_, total - start);
            forward_chunk(theta, start, c, ws);
            jrows.resize(c, q);
            for (Eigen::Index j = 0; j < c; ++j) {
                residuals[start + j] = f_[start + j] - chunk_g(theta, ws, start, j);
                point_jacobian(theta, ws, start, j, jrows.row(j));
            }
            gram.selfadjointView<Eigen::Lower>().rankUpdate(jrows.transpose(), 1.0);
        }
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    }

    // gradient of g at a single point (theta0 coordinate is exactly 1)
    Eigen::VectorXd g_jacobian(const Eigen::VectorXd& theta, Eigen::Index row) const {
        Workspace ws;
        const Eigen::Index start = (row / chunk_) * chunk_;
        const Eigen::Index c = std::min(chunk_, n() - start);
        forward_chunk(theta, start, c, ws);
        Eigen::VectorXd out(arch_.theta_size());
        RowMajorMat tmp(1, arch_.theta_size());
        point_jacobian(theta, ws, start, row - start, tmp.row(0));
        out = tmp.row(0).transpose();
        return out;
    }

private:
    struct Workspace {
        // per affine layer: pre-activations and their input Jacobians
        std::vector<Eigen::MatrixXd> pre;    // w_out x c
        std::vector<Eigen::MatrixXd> zpre;   // w_out x (c d)
        std::vector<Eigen::MatrixXd> actv;   // w_out x c      (k < L-1)
        std::vector<Eigen::MatrixXd> zactv;  // w_out x (c d)  (k < L-1)
        std::vector<Eigen::MatrixXd> d1;     // activation derivative at pre
        Eigen::MatrixXd x;                   // d x c input block
        Eigen::Index c = 0;
    };

    double penalty(const Eigen::VectorXd& theta) const {
        double p = theta.tail(theta.size() - 1).squaredNorm();
        if (decay_theta0_) p += theta[0] * theta[0];
        return p;
    }

    void forward_chunk(const Eigen::VectorXd& theta, Eigen::Index start, Eigen::Index c,
                       Workspace& ws) const {
        const int L = arch_.n_affine();
        const int d = arch_.in_dim;
        ws.pre.resize(L);
        ws.zpre.resize(L);
        ws.actv.resize(L - 1);
        ws.zactv.resize(L - 1);
        ws.d1.resize(L - 1);
        ws.c = c;
        ws.x = xt_.middleCols(start, c);
        for (int k = 0; k < L; ++k) {
            const LayerView lv = layer_view(arch_, theta, k);
            const Eigen::MatrixXd& in = (k == 0) ? ws.x : ws.actv[k - 1];
            ws.pre[k].noalias() = lv.w * in;
            ws.pre[k].colwise() += lv.b;
            if (k == 0) {
                // input Jacobian starts at the identity: each block is W_0
                ws.zpre[0].resize(arch_.layer_out(0), c * d);
                for (Eigen::Index j = 0; j < c; ++j) ws.zpre[0].middleCols(j * d, d) = lv.w;
            } else {
                ws.zpre[k].noalias() = lv.w * ws.zactv[k - 1];
            }
            if (k < L - 1) {
                ws.actv[k] = act::map_value(arch_.activation, ws.pre[k]);
                ws.d1[k] = act::map_deriv(arch_.activation, ws.pre[k]);
                ws.zactv[k].resize(ws.zpre[k].rows(), ws.zpre[k].cols());
                for (Eigen::Index j = 0; j < c; ++j)
                    ws.zactv[k].middleCols(j * d, d) =
                        ws.zpre[k].middleCols(j * d, d).array().colwise() *
                        ws.d1[k].col(j).array();
            }
        }
    }

    // g for point j of the cached chunk
    double chunk_g(const Eigen::VectorXd& theta, const Workspace& ws, Eigen::Index start,
                   Eigen::Index j) const {
        const int L = arch_.n_affine();
        const int d = arch_.in_dim;
        const Eigen::MatrixXd& u = ws.pre[L - 1];
        const Eigen::MatrixXd& zu = ws.zpre[L - 1];
        double g = theta[0] + coeff_a_.col(start + j).dot(u.col(j));
        for (int k = 0; k < d; ++k) g += coeff_b_(k, start + j) * zu(k, j * d + k);
        return g;
    }

    double loss_grad_impl(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                          const std::vector<Eigen::Index>* rows) const {
        const long q = arch_.theta_size();
        const int L = arch_.n_affine();
        const int d = arch_.in_dim;
        const Eigen::Index total = rows ? static_cast<Eigen::Index>(rows->size()) : n();
        if (total < 1) throw ConfigError("stein loss: empty dataset");
        const double inv_n = 1.0 / static_cast<double>(total);

        Eigen::VectorXd g_acc = Eigen::VectorXd::Zero(q);
        double sq_err = 0.0;

        Workspace ws;
        Eigen::MatrixXd ca, cb, xg;
        Eigen::VectorXd fg;
        std::vector<Eigen::MatrixXd> bar_pre(L), bar_zpre(L);
        for (Eigen::Index bstart = 0; bstart < total; bstart += chunk_) {
            const Eigen::Index c = std::min(chunk_, total - bstart);
            Eigen::Index cache_start;
            if (rows) {
                // gather the selected rows into contiguous blocks
                xg.resize(d, c);
                ca.resize(d, c);
                cb.resize(d, c);
                fg.resize(c);
                for (Eigen::Index j = 0; j < c; ++j) {
                    const Eigen::Index r = (*rows)[bstart + j];
                    xg.col(j) = xt_.col(r);
                    ca.col(j) = coeff_a_.col(r);
                    cb.col(j) = coeff_b_.col(r);
                    fg[j] = f_[r];
                }
                forward_gathered(theta, xg, c, ws);
                cache_start = 0;
            } else {
                forward_chunk(theta, bstart, c, ws);
                cache_start = bstart;
            }

            const Eigen::MatrixXd& coefa = rows ? ca : coeff_a_;
            const Eigen::MatrixXd& coefb = rows ? cb : coeff_b_;
            const Eigen::Index coff = rows ? 0 : bstart;

            // residual-scaled seeds for the reverse pass
            Eigen::VectorXd rvec(c);
            for (Eigen::Index j = 0; j < c; ++j) {
                const Eigen::MatrixXd& u = ws.pre[L - 1];
                const Eigen::MatrixXd& zu = ws.zpre[L - 1];
                double g = theta[0] + coefa.col(coff + j).dot(u.col(j));
                for (int k = 0; k < d; ++k) g += coefb(k, coff + j) * zu(k, j * d + k);
                const double fj = rows ? fg[j] : f_[cache_start + j];
                const double resid = g - fj;
                sq_err += resid * resid;
                rvec[j] = 2.0 * resid * inv_n;
            }

            bar_pre[L - 1].resize(d, c);
            bar_zpre[L - 1] = Eigen::MatrixXd::Zero(d, c * d);
            for (Eigen::Index j = 0; j < c; ++j) {
                bar_pre[L - 1].col(j) = rvec[j] * coefa.col(coff + j);
                for (int k = 0; k < d; ++k)
                    bar_zpre[L - 1](k, j * d + k) = rvec[j] * coefb(k, coff + j);
            }
            g_acc[0] += rvec.sum();

            backward_chunk(theta, ws, bar_pre, bar_zpre, g_acc);
        }

        double l = sq_err * inv_n + lambda_ * penalty(theta);
        if (!std::isfinite(l)) throw NonFiniteLoss("stein loss is not finite");
        if (grad) {
            g_acc.tail(q - 1) += 2.0 * lambda_ * theta.tail(q - 1);
            if (decay_theta0_) g_acc[0] += 2.0 * lambda_ * theta[0];
            *grad = std::move(g_acc);
        }
        return l;
    }

    // forward pass over an explicitly gathered input block
    void forward_gathered(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x, Eigen::Index c,
                          Workspace& ws) const {
        const int L = arch_.n_affine();
        const int d = arch_.in_dim;
        ws.pre.resize(L);
        ws.zpre.resize(L);
        ws.actv.resize(L - 1);
        ws.zactv.resize(L - 1);
        ws.d1.resize(L - 1);
        ws.c = c;
        ws.x = x;
        for (int k = 0; k < L; ++k) {
            const LayerView lv = layer_view(arch_, theta, k);
            const Eigen::MatrixXd& in = (k == 0) ? ws.x : ws.actv[k - 1];
            ws.pre[k].noalias() = lv.w * in;
            ws.pre[k].colwise() += lv.b;
            if (k == 0) {
                ws.zpre[0].resize(arch_.layer_out(0), c * d);
                for (Eigen::Index j = 0; j < c; ++j) ws.zpre[0].middleCols(j * d, d) = lv.w;
            } else {
                ws.zpre[k].noalias() = lv.w * ws.zactv[k - 1];
            }
            if (k < L - 1) {
                ws.actv[k] = act::map_value(arch_.activation, ws.pre[k]);
                ws.d1[k] = act::map_deriv(arch_.activation, ws.pre[k]);
                ws.zactv[k].resize(ws.zpre[k].rows(), ws.zpre[k].cols());
                for (Eigen::Index j = 0; j < c; ++j)
                    ws.zactv[k].middleCols(j * d, d) =
                        ws.zpre[k].middleCols(j * d, d).array().colwise() *
                        ws.d1[k].col(j).array();
            }
        }
    }

    // reverse pass through the cached chunk; bar_pre/bar_zpre hold the
    // output-layer adjoints on entry and are consumed layer by layer
    void backward_chunk(const Eigen::VectorXd& theta, const Workspace& ws,
                        std::vector<Eigen::MatrixXd>& bar_pre,
                        std::vector<Eigen::MatrixXd>& bar_zpre, Eigen::VectorXd& g_acc) const {
        const int L = arch_.n_affine();
        const int d = arch_.in_dim;
        const Eigen::Index c = ws.c;
        for (int k = L - 1; k >= 0; --k) {
            const LayerView lv = layer_view(arch_, theta, k);
            const long off = arch_.layer_offset(k);
            const int out = arch_.layer_out(k), in_w = arch_.layer_in(k);
            Eigen::Map<RowMajorMat> gw(g_acc.data() + off, out, in_w);
            Eigen::Map<Eigen::VectorXd> gb(g_acc.data() + off + static_cast<long>(out) * in_w,
                                           out);
            const Eigen::MatrixXd& in_act = (k == 0) ? ws.x : ws.actv[k - 1];
            gw.noalias() += bar_pre[k] * in_act.transpose();
            gb.noalias() += bar_pre[k].rowwise().sum();
            if (k == 0) {
                // the input-Jacobian chain starts at the identity tile
                for (Eigen::Index j = 0; j < c; ++j)
                    gw.noalias() += bar_zpre[0].middleCols(j * d, d);
            } else {
                gw.noalias() += bar_zpre[k] * ws.zactv[k - 1].transpose();
            }
            if (k > 0) {
                Eigen::MatrixXd bar_act = lv.w.transpose() * bar_pre[k];
                Eigen::MatrixXd bar_zact = lv.w.transpose() * bar_zpre[k];
                const Eigen::MatrixXd d2 = act::map_deriv2(arch_.activation, ws.pre[k - 1]);
                bar_pre[k - 1].resize(in_w, c);
                bar_zpre[k - 1].resize(in_w, c * d);
                for (Eigen::Index j = 0; j < c; ++j) {
                    Eigen::VectorXd zdot = (bar_zact.middleCols(j * d, d).array() *
                                            ws.zpre[k - 1].middleCols(j * d, d).array())
                                               .rowwise()
                                               .sum();
                    bar_pre[k - 1].col(j) = ws.d1[k - 1].col(j).cwiseProduct(bar_act.col(j)) +
                                            d2.col(j).cwiseProduct(zdot);
                    bar_zpre[k - 1].middleCols(j * d, d) =
                        bar_zact.middleCols(j * d, d).array().colwise() *
                        ws.d1[k - 1].col(j).array();
                }
            }
        }
    }

    // theta-gradient of g for one cached point, written into a jacobian row
    template <class RowXpr>
    void point_jacobian(const Eigen::VectorXd& theta, const Workspace& ws, Eigen::Index start,
                        Eigen::Index j, RowXpr row) const {
        const int L = arch_.n_affine();
        const int d = arch_.in_dim;
        row.setZero();
        row[0] = 1.0;  // theta0 enters additively
        Eigen::VectorXd bar_pre = coeff_a_.col(start + j);
        Eigen::MatrixXd bar_zpre = coeff_b_.col(start + j).asDiagonal();
        for (int k = L - 1; k >= 0; --k) {
            const LayerView lv = layer_view(arch_, theta, k);
            const long off = arch_.layer_offset(k);
            const int out = arch_.layer_out(k), in_w = arch_.layer_in(k);
            // W block, row-major
            for (int r = 0; r < out; ++r) {
                const long base = off + static_cast<long>(r) * in_w;
                if (k == 0) {
                    for (int ccol = 0; ccol < in_w; ++ccol)
                        row[base + ccol] = bar_pre[r] * ws.x(ccol, j) + bar_zpre(r, ccol);
                } else {
                    const auto in_act = ws.actv[k - 1].col(j);
                    for (int ccol = 0; ccol < in_w; ++ccol) {
                        double v = bar_pre[r] * in_act[ccol];
                        v += bar_zpre.row(r).dot(ws.zactv[k - 1].row(ccol).segment(j * d, d));
                        row[base + ccol] = v;
                    }
                }
            }
            // bias block
            const long boff = off + static_cast<long>(out) * in_w;
            for (int r = 0; r < out; ++r) row[boff + r] = bar_pre[r];
            if (k > 0) {
                Eigen::VectorXd bar_act = lv.w.transpose() * bar_pre;
                Eigen::MatrixXd bar_zact = lv.w.transpose() * bar_zpre;
                const auto pre_col = ws.pre[k - 1].col(j);
                Eigen::VectorXd zdot =
                    (bar_zact.array() * ws.zpre[k - 1].middleCols(j * d, d).array())
                        .rowwise()
                        .sum();
                bar_pre.resize(in_w);
                for (int r = 0; r < in_w; ++r)
                    bar_pre[r] = ws.d1[k - 1](r, j) * bar_act[r] +
                                 act::deriv2(arch_.activation, pre_col[r]) * zdot[r];
                bar_zpre = bar_zact.array().colwise() * ws.d1[k - 1].col(j).array();
            }
        }
    }

    MlpArchitecture arch_;
    MChoice m_;
    std::optional<BoundaryBox> boundary_;
    Eigen::MatrixXd xt_;       // d x n
    Eigen::MatrixXd coeff_a_;  // d x n
    Eigen::MatrixXd coeff_b_;  // d x n
    Eigen::VectorXd f_;
    double lambda_ = 0.0;
    bool decay_theta0_ = false;
    Eigen::Index chunk_ = 512;
};

// builds the evaluator for a network + point set, resolving per-point
// densities when the m-choice needs them
inline SteinBatchEvaluator make_evaluator(const SteinNetwork& net, const PointSet& ps,
                                          const Eigen::VectorXd& f, double lambda,
                                          const ScoreTarget* target = nullptr,
                                          bool decay_theta0 = false) {
    const Eigen::VectorXd* dens_ptr = nullptr;
    Eigen::VectorXd dens;
    if (net.m.kind == MKind::DensityScaled) {
        if (!target || !target->normalized())
            throw ConfigError("density-scaled m is only defined for normalized targets");
        dens.resize(ps.size());
        for (Eigen::Index i = 0; i < ps.size(); ++i)
            dens[i] = std::exp(target->log_density_unnorm(ps.points.row(i).transpose()));
        dens_ptr = &dens;
    }
    return SteinBatchEvaluator(net.arch, net.m, net.boundary, ps.points, ps.scores, f, dens_ptr,
                               lambda, decay_theta0);
}

// spec-level convenience: l_tot and exact gradient for a network on a
// dataset {x_i, f_i, s_i}
inline std::pair<double, Eigen::VectorXd> loss_and_gradient(const SteinNetwork& net,
                                                            const PointSet& ps,
                                                            const Eigen::VectorXd& f,
                                                            double lambda,
                                                            bool decay_theta0 = false) {
    SteinBatchEvaluator ev = make_evaluator(net, ps, f, lambda, nullptr, decay_theta0);
    Eigen::VectorXd grad;
    const double l = ev.loss_and_gradient(net.theta, grad);
    return {l, std::move(grad)};
}

// gradient of the scalar g_theta(x) with respect to theta (size p+1;
// the theta0 coordinate is exactly 1)
inline Eigen::VectorXd g_jacobian_wrt_theta(const SteinNetwork& net, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& score,
                                            double density = std::numeric_limits<double>::quiet_NaN()) {
    Eigen::MatrixXd pts = x.transpose();
    Eigen::MatrixXd scs = score.transpose();
    Eigen::VectorXd f1(1);
    f1[0] = 0.0;
    Eigen::VectorXd dens(1);
    const Eigen::VectorXd* dp = nullptr;
    if (net.m.kind == MKind::DensityScaled) {
        dens[0] = density;
        dp = &dens;
    }
    SteinBatchEvaluator ev(net.arch, net.m, net.boundary, pts, scs, f1, dp, 0.0);
    return ev.g_jacobian(net.theta, 0);
}

}  // namespace steinquad
