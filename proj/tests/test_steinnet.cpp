#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <utility>

#include "steinquad/numerics/special.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/steinnet/loss.hpp"
#include "steinquad/steinnet/network.hpp"
#include "steinquad/steinnet/serialize.hpp"
#include "steinquad/targets/builtin.hpp"

using namespace steinquad;

namespace {

// gradcheck-style comparison: relative to the larger magnitude with a
// floor tied to the gradient scale
void expect_grad_close(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric,
                       double tol, double scale_floor_frac = 1e-6) {
    ASSERT_EQ(analytic.size(), numeric.size());
    const double gmax = std::max(analytic.lpNorm<Eigen::Infinity>(), 1e-12);
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]),
                                       scale_floor_frac * std::max(1.0, gmax)});
        EXPECT_LE(std::abs(analytic[i] - numeric[i]) / denom, tol) << "coordinate " << i;
    }
}

SteinNetwork random_net(int d, int h, int l, unsigned seed, MChoice m = MChoice::identity(),
                        Activation act = Activation::CELU) {
    MlpArchitecture arch;
    arch.in_dim = d;
    arch.hidden_width = h;
    arch.hidden_layers = l;
    arch.activation = act;
    RandomStream rng(seed);
    SteinNetwork net = init_network(arch, rng, m);
    net.theta[0] = rng.normal();  // nonzero bias for the tests
    return net;
}

// central finite difference of a scalar function of theta
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& theta, double h = 1e-5) {
    Eigen::VectorXd g(theta.size());
    Eigen::VectorXd t = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double hi = h * std::max(1.0, std::abs(theta[i]));
        t[i] = theta[i] + hi;
        const double fp = f(t);
        t[i] = theta[i] - hi;
        const double fm = f(t);
        t[i] = theta[i];
        g[i] = (fp - fm) / (2.0 * hi);
    }
    return g;
}

}  // namespace

TEST(Architecture, ParameterCount) {
    MlpArchitecture arch;
    arch.in_dim = 1;
    arch.hidden_width = 32;
    arch.hidden_layers = 2;
    EXPECT_EQ(arch.param_count(), 2209);
    EXPECT_EQ(arch.theta_size(), 2210);
}

TEST(InitNetwork, SameSeedSameTheta) {
    MlpArchitecture arch;
    arch.in_dim = 3;
    RandomStream a(42), b(42);
    SteinNetwork na = init_network(arch, a);
    SteinNetwork nb = init_network(arch, b);
    EXPECT_EQ(na.theta, nb.theta);
}

TEST(InitNetwork, BoundsScaleWithFanIn) {
    MlpArchitecture arch;
    arch.in_dim = 4;
    arch.hidden_width = 16;
    RandomStream rng(1);
    SteinNetwork net = init_network(arch, rng);
    const auto l0 = layer_view(arch, std::as_const(net.theta), 0);
    EXPECT_LE(l0.w.array().abs().maxCoeff(), 0.5);  // 1/sqrt(4)
    EXPECT_EQ(l0.b.norm(), 0.0);
}

TEST(ForwardJacobian, LinearRegimeIsExact) {
    // with large positive input-layer biases the CELU stays in its linear
    // branch, so u is exactly affine and J_u = W1 * W0
    MlpArchitecture arch;
    arch.in_dim = 2;
    arch.hidden_width = 3;
    arch.hidden_layers = 0;
    RandomStream rng(5);
    SteinNetwork net = init_network(arch, rng);
    layer_view(arch, net.theta, 0).b.setConstant(50.0);
    const auto l0 = layer_view(arch, std::as_const(net.theta), 0);
    const auto l1 = layer_view(arch, std::as_const(net.theta), 1);
    Eigen::VectorXd u;
    Eigen::MatrixXd j;
    Eigen::VectorXd x(2);
    x << 0.3, -0.2;
    forward_with_input_jacobian(net, x, u, j);
    const Eigen::MatrixXd expected = l1.w * l0.w;
    EXPECT_LT((j - expected).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(ForwardJacobian, ZeroWeightsGiveBiasAndZeroJacobian) {
    MlpArchitecture arch;
    arch.in_dim = 2;
    arch.hidden_width = 4;
    arch.hidden_layers = 1;
    SteinNetwork net;
    net.arch = arch;
    net.theta = Eigen::VectorXd::Zero(arch.theta_size());
    Eigen::VectorXd b_out(2);
    b_out << 1.5, -2.5;
    layer_view(arch, net.theta, arch.n_affine() - 1).b = b_out;
    Eigen::VectorXd u;
    Eigen::MatrixXd j;
    forward_with_input_jacobian(net, Eigen::Vector2d(0.7, 0.1), u, j);
    EXPECT_EQ(u, b_out);
    EXPECT_EQ(j.norm(), 0.0);
}

TEST(ForwardJacobian, MatchesFiniteDifferences) {
    SteinNetwork net = random_net(2, 8, 2, 9);
    Eigen::VectorXd x(2);
    x << 0.37, -1.21;
    Eigen::VectorXd u;
    Eigen::MatrixXd j;
    forward_with_input_jacobian(net, x, u, j);
    const double h = 1e-5;
    for (int col = 0; col < 2; ++col) {
        Eigen::VectorXd xp = x, xm = x;
        xp[col] += h;
        xm[col] -= h;
        Eigen::VectorXd up, um;
        Eigen::MatrixXd jtmp;
        forward_with_input_jacobian(net, xp, up, jtmp);
        forward_with_input_jacobian(net, xm, um, jtmp);
        const Eigen::VectorXd fd = (up - um) / (2.0 * h);
        for (int r = 0; r < 2; ++r)
            EXPECT_NEAR(j(r, col), fd[r], 1e-6 * std::max(1.0, std::abs(fd[r])));
    }
}

TEST(SteinForward, ConstantFieldTrivials) {
    // all weights zero, output bias c: u == c, J == 0
    MlpArchitecture arch;
    arch.in_dim = 2;
    arch.hidden_width = 4;
    arch.hidden_layers = 1;
    SteinNetwork net;
    net.arch = arch;
    net.theta = Eigen::VectorXd::Zero(arch.theta_size());
    net.theta[0] = 0.75;
    Eigen::VectorXd c(2);
    c << 0.4, -1.1;
    layer_view(arch, net.theta, arch.n_affine() - 1).b = c;

    GaussianTarget pi = GaussianTarget::standard(2);
    Eigen::VectorXd x(2);
    x << 0.6, -0.9;
    EvalRecord rec = stein_forward(net, x, pi.score(x));
    EXPECT_NEAR(rec.value, (-x).dot(c) + 0.75, 1e-14);
    EXPECT_NEAR(rec.div_term, 0.0, 1e-15);

    // at the mode the score vanishes: g(0) = theta0
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    EvalRecord rec0 = stein_forward(net, zero, pi.score(zero));
    EXPECT_DOUBLE_EQ(rec0.value, 0.75);
}

TEST(SteinForward, ZeroFieldIsTheta0Everywhere) {
    MlpArchitecture arch;
    arch.in_dim = 1;
    SteinNetwork net;
    net.arch = arch;
    net.theta = Eigen::VectorXd::Zero(arch.theta_size());
    net.theta[0] = -3.25;
    GaussianTarget pi = GaussianTarget::standard(1);
    RandomStream rng(3);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd x(1);
        x << rng.normal() * 2.0;
        EXPECT_DOUBLE_EQ(stein_forward(net, x, pi.score(x)).value, -3.25);
    }
}

TEST(SteinForward, ScaledIdentityDividesTerms) {
    SteinNetwork net_id = random_net(2, 6, 1, 21);
    SteinNetwork net_sc = net_id;
    net_sc.m = MChoice::scaled(7.5);
    GaussianTarget pi = GaussianTarget::standard(2);
    Eigen::VectorXd x(2);
    x << -0.4, 1.3;
    EvalRecord a = stein_forward(net_id, x, pi.score(x));
    EvalRecord b = stein_forward(net_sc, x, pi.score(x));
    EXPECT_NEAR(b.score_term, a.score_term / 7.5, 1e-13);
    EXPECT_NEAR(b.div_term, a.div_term / 7.5, 1e-13);
}

TEST(SteinForward, BoundaryDeltaVanishesOnFaces) {
    BoundaryBox box;
    box.lower = Eigen::VectorXd::Zero(2);
    box.upper = Eigen::VectorXd::Ones(2);
    Eigen::VectorXd face(2);
    face << 0.0, 0.5;
    EXPECT_EQ(boundary_delta(box, face), 0.0);
    face << 0.7, 1.0;
    EXPECT_EQ(boundary_delta(box, face), 0.0);

    // pi(x) u~(x) -> 0 approaching the boundary
    SteinNetwork net = random_net(2, 6, 1, 31);
    net.boundary = box;
    Eigen::VectorXd x(2);
    x << 1e-12, 0.5;
    Eigen::VectorXd u;
    Eigen::MatrixXd j;
    forward_with_input_jacobian(net, x, u, j);
    EXPECT_LE(std::abs(boundary_delta(box, x)) * u.norm(), 1e-11);

    // evaluation pinned to the boundary itself is rejected
    GaussianTarget pi = GaussianTarget::standard(2);
    Eigen::VectorXd on_face(2);
    on_face << 0.0, 0.5;
    EXPECT_THROW(stein_forward(net, on_face, pi.score(on_face)), OutsideSupport);
}

// Pointwise check of the divergence identity S_m[u](x) pi(x)
// = sum_k d/dx_k [ (m u)_k pi ](x), which is the mechanism behind the
// zero-mean property. Run for every m kind.
TEST(SteinForward, DivergenceIdentityAllMKinds) {
    GaussianTarget pi = GaussianTarget::standard(2);
    auto density = [&](const Eigen::VectorXd& x) {
        return std::exp(pi.log_density_unnorm(x));
    };

    std::vector<MChoice> choices = {MChoice::identity(),
                                    MChoice::scaled(3.0),
                                    {MKind::InverseSquareNorm, 1.0},
                                    {MKind::InverseNorm, 1.0},
                                    {MKind::DensityScaled, 1.0},
                                    {MKind::DiagX, 1.0}};

    RandomStream rng(77);
    for (const MChoice& m : choices) {
        SteinNetwork net = random_net(2, 6, 1, 55, m);
        // flux field (m u pi)(x)
        auto flux = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd u;
            Eigen::MatrixXd j;
            forward_with_input_jacobian(net, x, u, j);
            const double px = density(x);
            switch (m.kind) {
                case MKind::Identity: return px * u;
                case MKind::ScaledIdentity: return (px / m.c) * u;
                case MKind::InverseSquareNorm: return px / (x.squaredNorm() + 1.0) * u;
                case MKind::InverseNorm: return px / std::sqrt(x.squaredNorm() + 1.0) * u;
                case MKind::DensityScaled: return px * px * u;
                case MKind::DiagX: return px * (x.array() * u.array()).matrix();
            }
            return u;
        };
        for (int rep = 0; rep < 5; ++rep) {
            Eigen::VectorXd x(2);
            x << rng.normal(), rng.normal();
            const double dens = density(x);
            EvalRecord rec = stein_forward(net, x, pi.score(x), dens);
            const double h = 1e-5;
            double div_fd = 0.0;
            for (int k = 0; k < 2; ++k) {
                Eigen::VectorXd xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                div_fd += (flux(xp)[k] - flux(xm)[k]) / (2.0 * h);
            }
            const double lhs = (rec.value - net.theta0()) * dens;
            EXPECT_NEAR(lhs, div_fd, 1e-6 * std::max(1.0, std::abs(div_fd)))
                << "m kind " << static_cast<int>(m.kind);
        }
    }
}

// Stein-layer linearity through exact block-diagonal stacking of two body
// networks: u3 = u1 + u2 implies S[u3] = S[u1] + S[u2] pointwise.
TEST(SteinForward, LinearityViaStacking) {
    const int d = 2, h = 4, l = 1;
    SteinNetwork n1 = random_net(d, h, l, 101);
    SteinNetwork n2 = random_net(d, h, l, 202);

    MlpArchitecture arch3;
    arch3.in_dim = d;
    arch3.hidden_width = 2 * h;
    arch3.hidden_layers = l;
    SteinNetwork n3;
    n3.arch = arch3;
    n3.theta = Eigen::VectorXd::Zero(arch3.theta_size());
    for (int k = 0; k < arch3.n_affine(); ++k) {
        LayerViewMut w3 = layer_view(arch3, n3.theta, k);
        const auto w1 = layer_view(n1.arch, std::as_const(n1.theta), k);
        const auto w2 = layer_view(n2.arch, std::as_const(n2.theta), k);
        const bool first = (k == 0), last = (k == arch3.n_affine() - 1);
        if (first) {
            w3.w.topRows(h) = w1.w;
            w3.w.bottomRows(h) = w2.w;
            w3.b.head(h) = w1.b;
            w3.b.tail(h) = w2.b;
        } else if (last) {
            w3.w.leftCols(h) = w1.w;
            w3.w.rightCols(h) = w2.w;
            w3.b = w1.b + w2.b;
        } else {
            w3.w.topLeftCorner(h, h) = w1.w;
            w3.w.bottomRightCorner(h, h) = w2.w;
            w3.b.head(h) = w1.b;
            w3.b.tail(h) = w2.b;
        }
    }

    GaussianTarget pi = GaussianTarget::standard(d);
    RandomStream rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd x(d);
        x << rng.normal(), rng.normal();
        const Eigen::VectorXd s = pi.score(x);
        const double g1 = stein_forward(n1, x, s).value - n1.theta0();
        const double g2 = stein_forward(n2, x, s).value - n2.theta0();
        const double g3 = stein_forward(n3, x, s).value - n3.theta0();
        EXPECT_NEAR(g3, g1 + g2, 1e-12 * std::max(1.0, std::abs(g1) + std::abs(g2)));
    }
}

TEST(Activations, DerivativesMatchFiniteDifferences) {
    for (Activation a : {Activation::CELU, Activation::Tanh, Activation::Gauss,
                         Activation::Sigmoid, Activation::TanhShrink}) {
        double worst = 0.0;
        const int n = 10'000;
        for (int i = 0; i < n; ++i) {
            const double x = -6.0 + 12.0 * static_cast<double>(i) / (n - 1);
            const double h = 1e-6;
            const double fd = (act::value(a, x + h) - act::value(a, x - h)) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - act::deriv(a, x)));
        }
        EXPECT_LE(worst, 1e-8) << activation_name(a);
    }
    // CELU one-sided derivative limits at 0 both equal 1
    EXPECT_NEAR(act::deriv(Activation::CELU, 1e-12), 1.0, 1e-10);
    EXPECT_NEAR(act::deriv(Activation::CELU, -1e-12), 1.0, 1e-10);
}

TEST(Activations, SecondDerivativeSpotChecks) {
    RandomStream rng(8);
    for (Activation a : {Activation::CELU, Activation::Tanh, Activation::Gauss,
                         Activation::Sigmoid, Activation::TanhShrink}) {
        for (int i = 0; i < 50; ++i) {
            double x = rng.uniform(-4.0, 4.0);
            if (a == Activation::CELU && std::abs(x) < 1e-3) x += 0.01;  // skip the d2 jump
            const double h = 1e-5;
            const double fd = (act::deriv(a, x + h) - act::deriv(a, x - h)) / (2.0 * h);
            EXPECT_NEAR(act::deriv2(a, x), fd, 1e-6 * std::max(1.0, std::abs(fd)))
                << activation_name(a) << " at " << x;
        }
    }
}

TEST(LossGradient, PerfectFitIsZero) {
    // zero body + theta0 equal to the constant f: residuals vanish
    MlpArchitecture arch;
    arch.in_dim = 1;
    SteinNetwork net;
    net.arch = arch;
    net.theta = Eigen::VectorXd::Zero(arch.theta_size());
    net.theta[0] = 2.5;

    GaussianTarget pi = GaussianTarget::standard(1);
    RandomStream rng(6);
    PointSet ps = iid_sample(pi, 32, rng);
    Eigen::VectorXd f = Eigen::VectorXd::Constant(32, 2.5);
    auto [l, grad] = loss_and_gradient(net, ps, f, 0.0);
    EXPECT_NEAR(l, 0.0, 1e-28);
    EXPECT_NEAR(grad[0], 0.0, 1e-14);
}

TEST(LossGradient, QuadraticInTheta0) {
    MlpArchitecture arch;
    arch.in_dim = 1;
    SteinNetwork net;
    net.arch = arch;
    net.theta = Eigen::VectorXd::Zero(arch.theta_size());

    GaussianTarget pi = GaussianTarget::standard(1);
    RandomStream rng(6);
    PointSet ps = iid_sample(pi, 17, rng);
    Eigen::VectorXd f = Eigen::VectorXd::Ones(17);
    auto [l, grad] = loss_and_gradient(net, ps, f, 0.0);
    EXPECT_DOUBLE_EQ(l, 1.0);
    EXPECT_DOUBLE_EQ(grad[0], -2.0);
}

TEST(LossGradient, FiniteDifferenceOracle) {
    GaussianTarget pi = GaussianTarget::standard(2);
    RandomStream rng(13);
    PointSet ps = iid_sample(pi, 16, rng);
    SteinNetwork net = random_net(2, 6, 1, 99);
    Eigen::VectorXd f(16);
    for (int i = 0; i < 16; ++i) f[i] = rng.normal();

    SteinBatchEvaluator ev = make_evaluator(net, ps, f, 1e-3);
    Eigen::VectorXd grad;
    ev.loss_and_gradient(net.theta, grad);
    Eigen::VectorXd fd = fd_gradient(
        [&](const Eigen::VectorXd& t) { return ev.loss_value(t); }, net.theta);
    expect_grad_close(grad, fd, 1e-5);
}

TEST(LossGradient, FiniteDifferenceOracleWithBoundaryAndScaledM) {
    TruncatedGaussian1D pi(0.4, 1.0, 0.0, 3.0);
    RandomStream rng(14);
    PointSet ps = iid_sample(pi, 12, rng);
    SteinNetwork net = random_net(1, 5, 1, 77, MChoice::scaled(2.0));
    BoundaryBox box;
    box.lower = Eigen::VectorXd::Zero(1);
    box.upper = Eigen::VectorXd::Constant(1, 3.0);
    net.boundary = box;
    Eigen::VectorXd f(12);
    for (int i = 0; i < 12; ++i) f[i] = rng.normal();

    SteinBatchEvaluator ev = make_evaluator(net, ps, f, 1e-4);
    Eigen::VectorXd grad;
    ev.loss_and_gradient(net.theta, grad);
    Eigen::VectorXd fd = fd_gradient(
        [&](const Eigen::VectorXd& t) { return ev.loss_value(t); }, net.theta);
    expect_grad_close(grad, fd, 1e-5);
}

TEST(GJacobian, Theta0CoordinateIsOne) {
    GaussianTarget pi = GaussianTarget::standard(3);
    SteinNetwork net = random_net(3, 4, 1, 23);
    Eigen::VectorXd x(3);
    x << 0.1, -0.2, 0.5;
    Eigen::VectorXd j = g_jacobian_wrt_theta(net, x, pi.score(x));
    EXPECT_DOUBLE_EQ(j[0], 1.0);
}

TEST(GJacobian, MatchesFiniteDifferences) {
    GaussianTarget pi = GaussianTarget::standard(2);
    SteinNetwork net = random_net(2, 6, 1, 31);
    Eigen::VectorXd x(2);
    x << 0.8, -0.3;
    const Eigen::VectorXd s = pi.score(x);
    Eigen::VectorXd j = g_jacobian_wrt_theta(net, x, s);
    SteinNetwork probe = net;
    Eigen::VectorXd fd = fd_gradient(
        [&](const Eigen::VectorXd& t) {
            probe.theta = t;
            return stein_forward(probe, x, s).value;
        },
        net.theta);
    expect_grad_close(j, fd, 1e-5);
}

TEST(GJacobian, ZeroFieldStructure) {
    // with u == 0 the network output is linear in the last-layer
    // parameters; the jacobian must still match finite differences
    MlpArchitecture arch;
    arch.in_dim = 1;
    arch.hidden_width = 4;
    arch.hidden_layers = 1;
    SteinNetwork net;
    net.arch = arch;
    net.theta = Eigen::VectorXd::Zero(arch.theta_size());
    net.m = MChoice::identity();
    GaussianTarget pi = GaussianTarget::standard(1);
    Eigen::VectorXd x(1);
    x << 0.9;
    const Eigen::VectorXd s = pi.score(x);
    Eigen::VectorXd j = g_jacobian_wrt_theta(net, x, s);
    SteinNetwork probe = net;
    Eigen::VectorXd fd = fd_gradient(
        [&](const Eigen::VectorXd& t) {
            probe.theta = t;
            return stein_forward(probe, x, s).value;
        },
        net.theta);
    expect_grad_close(j, fd, 1e-5);
}

TEST(BatchEvaluator, AgreesWithSteinForward) {
    GaussianTarget pi = GaussianTarget::standard(2);
    RandomStream rng(41);
    PointSet ps = iid_sample(pi, 40, rng);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(40);

    std::vector<MChoice> choices = {MChoice::identity(),
                                    MChoice::scaled(2.5),
                                    {MKind::InverseSquareNorm, 1.0},
                                    {MKind::InverseNorm, 1.0},
                                    {MKind::DensityScaled, 1.0},
                                    {MKind::DiagX, 1.0}};
    for (const MChoice& m : choices) {
        SteinNetwork net = random_net(2, 5, 1, 67, m);
        SteinBatchEvaluator ev = make_evaluator(net, ps, f, 0.0, &pi);
        Eigen::VectorXd g = ev.g_values(net.theta);
        for (int i = 0; i < 40; ++i) {
            const Eigen::VectorXd x = ps.points.row(i).transpose();
            const double dens = std::exp(pi.log_density_unnorm(x));
            const double ref = stein_forward(net, x, ps.scores.row(i).transpose(), dens).value;
            EXPECT_NEAR(g[i], ref, 1e-12 * std::max(1.0, std::abs(ref)))
                << "m kind " << static_cast<int>(m.kind);
        }
    }
}

TEST(BatchEvaluator, ChunkingIsInvisible) {
    GaussianTarget pi = GaussianTarget::standard(2);
    RandomStream rng(43);
    PointSet ps = iid_sample(pi, 700, rng);  // spans two chunks
    Eigen::VectorXd f(700);
    for (int i = 0; i < 700; ++i) f[i] = rng.normal();
    SteinNetwork net = random_net(2, 8, 2, 3);
    SteinBatchEvaluator big(net.arch, net.m, net.boundary, ps.points, ps.scores, f, nullptr,
                            1e-4, false, 512);
    SteinBatchEvaluator small(net.arch, net.m, net.boundary, ps.points, ps.scores, f, nullptr,
                              1e-4, false, 64);
    Eigen::VectorXd ga, gb;
    const double la = big.loss_and_gradient(net.theta, ga);
    const double lb = small.loss_and_gradient(net.theta, gb);
    EXPECT_NEAR(la, lb, 1e-13 * std::max(1.0, std::abs(la)));
    EXPECT_LE((ga - gb).lpNorm<Eigen::Infinity>(), 1e-12 * (1.0 + ga.lpNorm<Eigen::Infinity>()));
}

TEST(BatchEvaluator, DeterministicBitwise) {
    GaussianTarget pi = GaussianTarget::standard(1);
    RandomStream rng(44);
    PointSet ps = iid_sample(pi, 300, rng);
    Eigen::VectorXd f(300);
    for (int i = 0; i < 300; ++i) f[i] = rng.normal();
    SteinNetwork net = random_net(1, 8, 2, 10);
    SteinBatchEvaluator ev = make_evaluator(net, ps, f, 1e-5);
    Eigen::VectorXd g1, g2;
    const double l1 = ev.loss_and_gradient(net.theta, g1);
    const double l2 = ev.loss_and_gradient(net.theta, g2);
    EXPECT_EQ(l1, l2);
    EXPECT_EQ(g1, g2);
}

TEST(BatchEvaluator, SubsetMatchesGather) {
    GaussianTarget pi = GaussianTarget::standard(2);
    RandomStream rng(45);
    PointSet ps = iid_sample(pi, 60, rng);
    Eigen::VectorXd f(60);
    for (int i = 0; i < 60; ++i) f[i] = rng.normal();
    SteinNetwork net = random_net(2, 5, 1, 11);
    SteinBatchEvaluator ev = make_evaluator(net, ps, f, 0.0);

    std::vector<Eigen::Index> rows = {3, 17, 44, 59};
    Eigen::VectorXd grad_sub;
    const double l_sub = ev.loss_and_gradient_subset(net.theta, grad_sub, rows);

    // reference: evaluator built on just those rows
    Eigen::MatrixXd px(4, 2), sx(4, 2);
    Eigen::VectorXd fx(4);
    for (int i = 0; i < 4; ++i) {
        px.row(i) = ps.points.row(rows[i]);
        sx.row(i) = ps.scores.row(rows[i]);
        fx[i] = f[rows[i]];
    }
    SteinBatchEvaluator ev_ref(net.arch, net.m, net.boundary, px, sx, fx, nullptr, 0.0);
    Eigen::VectorXd grad_ref;
    const double l_ref = ev_ref.loss_and_gradient(net.theta, grad_ref);
    EXPECT_NEAR(l_sub, l_ref, 1e-14 * std::max(1.0, std::abs(l_ref)));
    EXPECT_LE((grad_sub - grad_ref).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(ZeroMean, StatisticalOverRandomNets) {
    // quick version of the acceptance criterion: |mean(g - theta0)| within
    // five standard errors under pi = N(0, I)
    for (int d : {1, 2}) {
        GaussianTarget pi = GaussianTarget::standard(d);
        for (unsigned seed : {1u, 2u, 3u}) {
            RandomStream rng(seed);
            PointSet ps = iid_sample(pi, 20'000, rng);
            for (MChoice m : {MChoice::identity(), MChoice::scaled(2.0)}) {
                SteinNetwork net = random_net(d, 16, 2, seed * 91 + d, m);
                Eigen::VectorXd f = Eigen::VectorXd::Zero(ps.size());
                SteinBatchEvaluator ev = make_evaluator(net, ps, f, 0.0);
                Eigen::VectorXd g = ev.g_values(net.theta);
                const Eigen::ArrayXd centered = g.array() - net.theta0();
                const double mean = centered.mean();
                const double sd =
                    std::sqrt((centered - mean).square().sum() / (centered.size() - 1));
                EXPECT_LE(std::abs(mean), 5.0 * sd / std::sqrt(static_cast<double>(ps.size())))
                    << "d=" << d << " seed=" << seed;
            }
        }
    }
}

TEST(ScaleRule, StdAndMax) {
    Eigen::MatrixXd scores(2, 2);
    scores << 1.0, -1.0, 3.0, -3.0;
    EXPECT_DOUBLE_EQ(resolve_scale_c(ScaleRule::MaxAbsScore, scores), 3.0);
    EXPECT_DOUBLE_EQ(resolve_scale_c(ScaleRule::StdOfScores, scores), std::sqrt(5.0));
}

TEST(WeightsIo, RoundTripBitwise) {
    SteinNetwork net = random_net(3, 8, 2, 123, MChoice::scaled(4.0));
    BoundaryBox box;
    box.lower = Eigen::VectorXd::Constant(3, -1.0);
    box.upper = Eigen::VectorXd::Constant(3, 2.0);
    net.boundary = box;
    std::stringstream ss;
    save_network(net, ss);
    SteinNetwork back = load_network(ss);
    EXPECT_EQ(back.theta, net.theta);
    EXPECT_EQ(back.arch, net.arch);
    EXPECT_EQ(static_cast<int>(back.m.kind), static_cast<int>(net.m.kind));
    EXPECT_EQ(back.m.c, net.m.c);
    ASSERT_TRUE(back.boundary.has_value());
    EXPECT_EQ(back.boundary->lower, box.lower);
    EXPECT_EQ(back.boundary->upper, box.upper);
}

TEST(WeightsIo, TruncatedPayload) {
    SteinNetwork net = random_net(1, 4, 1, 5);
    std::stringstream ss;
    save_network(net, ss);
    std::string full = ss.str();
    std::stringstream cut(full.substr(0, full.size() / 2));
    EXPECT_THROW(load_network(cut), CorruptPayload);
}

TEST(WeightsIo, WrongMagic) {
    std::stringstream ss;
    ss << "NOPE therest";
    EXPECT_THROW(load_network(ss), VersionMismatch);
}
