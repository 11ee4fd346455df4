#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "steinquad/numerics/linalg.hpp"
#include "steinquad/numerics/quadrature.hpp"
#include "steinquad/numerics/rng.hpp"
#include "steinquad/numerics/special.hpp"

using namespace steinquad;

namespace {

// random SPD matrix with eigenvalues in [lo, hi]
DenseMatrix random_spd(int n, double lo, double hi, RandomStream& rng) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    Eigen::HouseholderQR<DenseMatrix> qr(m);
    DenseMatrix q = qr.householderQ();
    Vector eig(n);
    for (int i = 0; i < n; ++i) eig[i] = lo * std::pow(hi / lo, rng.uniform());
    return q * eig.asDiagonal() * q.transpose();
}

}  // namespace

TEST(Cholesky, IdentityCase) {
    DenseMatrix a = DenseMatrix::Identity(3, 3);
    Vector b(3);
    b << 1, 2, 3;
    Vector x = cholesky_solve(a, b);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
}

TEST(Cholesky, DiagonalCase) {
    DenseMatrix a(1, 1);
    a << 4.0;
    Vector b(1);
    b << 8.0;
    EXPECT_DOUBLE_EQ(cholesky_solve(a, b)[0], 2.0);
}

TEST(Cholesky, ResidualOracleRandomSpd) {
    RandomStream rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 5 + static_cast<int>(rng.next_below(20));
        DenseMatrix a = random_spd(n, 1e-4, 1e4, rng);  // condition up to 1e8
        Vector b(n);
        for (int i = 0; i < n; ++i) b[i] = rng.normal();
        Vector x = cholesky_solve(a, b);
        const double resid = (a * x - b).lpNorm<Eigen::Infinity>();
        EXPECT_LE(resid, 1e-8 * b.lpNorm<Eigen::Infinity>());
    }
}

TEST(Cholesky, JitterRescuesSingular) {
    // rank-deficient PSD: jitter schedule must make the solve succeed
    DenseMatrix a(3, 3);
    Vector v(3);
    v << 1, 2, 3;
    a = v * v.transpose();
    Vector b = v * 2.0;
    CholeskyFactor f(a);
    EXPECT_GT(f.jitter(), 0.0);
    Vector x = f.solve(b);
    EXPECT_NEAR((a * x - b).norm(), 0.0, 1e-5 * b.norm());
}

TEST(Cholesky, IndefiniteFailsAfterEscalation) {
    DenseMatrix a(2, 2);
    a << 1, 0, 0, -1;
    Vector b(2);
    b << 1, 1;
    EXPECT_THROW(cholesky_solve(a, b), NotPositiveDefinite);
}

TEST(Cholesky, AsymmetricRejected) {
    DenseMatrix a(2, 2);
    a << 1, 0.5, 0.1, 1;
    Vector b(2);
    b << 1, 1;
    EXPECT_THROW(cholesky_solve(a, b), NumericalError);
}

TEST(Cholesky, LogDetMatchesDiagonal) {
    RandomStream rng(3);
    DenseMatrix a = random_spd(8, 0.5, 50.0, rng);
    CholeskyFactor f(a);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    EXPECT_NEAR(f.log_det(), es.eigenvalues().array().log().sum(), 1e-9);
}

TEST(StdNormalCdf, Anchors) {
    EXPECT_DOUBLE_EQ(std_normal_cdf(0.0), 0.5);
    EXPECT_NEAR(std_normal_cdf(40.0), 1.0, 1e-15);
    EXPECT_NEAR(std_normal_cdf(1.0), 0.8413447460685429, 1e-14);
}

TEST(StdNormalCdf, SymmetryIdentity) {
    for (double x = -8.0; x <= 8.0; x += 0.0625)
        EXPECT_NEAR(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, 1e-14);
}

TEST(StdNormalQuantile, RoundTrip) {
    for (double x = -6.0; x <= 6.0; x += 0.25)
        EXPECT_NEAR(std_normal_quantile(std_normal_cdf(x)), x, 1e-9 * (1.0 + std::abs(x)));
    EXPECT_NEAR(std_normal_quantile(0.5), 0.0, 1e-12);
}

TEST(GaussHermite, OneNodeIsMean) {
    QuadratureRule r = gauss_hermite(1);
    ASSERT_EQ(r.nodes.size(), 1u);
    EXPECT_NEAR(r.nodes[0], 0.0, 1e-15);
    EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
}

TEST(GaussHermite, TwoNodesReproduceVariance) {
    QuadratureRule r = gauss_hermite(2);
    const double second = r.integrate([](double x) { return x * x; });
    EXPECT_NEAR(second, 1.0, 1e-14);
}

TEST(GaussHermite, GaussianIntegral64) {
    QuadratureRule r = gauss_hermite(64);
    const double v = r.integrate([](double x) { return std::exp(-0.5 * x * x); });
    EXPECT_NEAR(v, 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(GaussHermite, MomentsAndMass) {
    // exact for polynomials up to degree 2n-1; N(0,1) moments are
    // 0 (odd) and (k-1)!! (even)
    for (int n : {1, 2, 3, 5, 8, 16, 64}) {
        QuadratureRule r = gauss_hermite(n);
        double mass = 0.0;
        for (double w : r.weights) mass += w;
        EXPECT_NEAR(mass, 1.0, 1e-12);
        double moment = 1.0;  // (k-1)!! running product
        for (int k = 2; k <= 2 * n - 1; k += 2) {
            moment *= (k - 1);
            const double q = r.integrate([&](double x) { return std::pow(x, k); });
            EXPECT_NEAR(q / moment, 1.0, 1e-10) << "n=" << n << " k=" << k;
        }
    }
}

TEST(GaussLegendre, PolynomialExactness) {
    QuadratureRule gl = gauss_legendre(6);
    const double v = gl_integrate([](double x) { return std::pow(x, 5); }, 0.0, 1.0, gl);
    EXPECT_NEAR(v, 1.0 / 6.0, 1e-14);
}

TEST(Rng, DeterministicStreams) {
    RandomStream a(0), b(0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SeedsDiffer) {
    RandomStream a(0), b(1);
    int differing = 0;
    for (int i = 0; i < 100; ++i) differing += (a.next_u64() != b.next_u64());
    EXPECT_GT(differing, 90);
}

TEST(Rng, UniformMeanCLT) {
    RandomStream rng(12345);
    const long n = 1'000'000;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) acc += rng.uniform();
    const double sigma = std::sqrt(1.0 / 12.0);
    EXPECT_NEAR(acc / n, 0.5, 3.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST(Rng, NormalMoments) {
    RandomStream rng(99);
    const long n = 500'000;
    double s1 = 0.0, s2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(Rng, SplitIndependence) {
    RandomStream root(5);
    RandomStream c0 = root.split(0);
    RandomStream c1 = root.split(1);
    int differing = 0;
    for (int i = 0; i < 64; ++i) differing += (c0.next_u64() != c1.next_u64());
    EXPECT_GT(differing, 60);
}
