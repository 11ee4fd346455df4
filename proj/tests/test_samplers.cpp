#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "steinquad/numerics/special.hpp"
#include "steinquad/samplers/diagnostics.hpp"
#include "steinquad/samplers/grid.hpp"
#include "steinquad/samplers/halton.hpp"
#include "steinquad/samplers/mala.hpp"
#include "steinquad/samplers/point_set.hpp"
#include "steinquad/targets/builtin.hpp"

using namespace steinquad;

namespace {

// star-discrepancy estimate over the corners of a fixed lattice; the same
// estimator is applied to both point sets so only the comparison matters
double star_discrepancy_2d(const Eigen::MatrixXd& pts, int grid = 64) {
    const double n = static_cast<double>(pts.rows());
    double worst = 0.0;
    for (int i = 1; i <= grid; ++i) {
        for (int j = 1; j <= grid; ++j) {
            const double zx = static_cast<double>(i) / grid;
            const double zy = static_cast<double>(j) / grid;
            long count = 0;
            for (Eigen::Index r = 0; r < pts.rows(); ++r)
                count += (pts(r, 0) < zx && pts(r, 1) < zy) ? 1 : 0;
            worst = std::max(worst, std::abs(count / n - zx * zy));
        }
    }
    return worst;
}

double ks_statistic_vs_normal(Eigen::VectorXd samples) {
    std::vector<double> v(samples.data(), samples.data() + samples.size());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = std_normal_cdf(v[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

}  // namespace

TEST(Halton, VanDerCorputBase2) {
    Eigen::MatrixXd p = halton_points(3, 1);
    EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(p(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(p(2, 0), 0.75);
}

TEST(Halton, Bases2And3) {
    Eigen::MatrixXd p = halton_points(2, 2);
    EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
    EXPECT_NEAR(p(0, 1), 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(p(1, 0), 0.25);
    EXPECT_NEAR(p(1, 1), 2.0 / 3.0, 1e-15);
}

TEST(Halton, BeatsIidDiscrepancy) {
    Eigen::MatrixXd h = halton_points(1024, 2);
    RandomStream rng(0);
    Eigen::MatrixXd u(1024, 2);
    for (int i = 0; i < 1024; ++i)
        for (int j = 0; j < 2; ++j) u(i, j) = rng.uniform();
    EXPECT_LT(star_discrepancy_2d(h), star_discrepancy_2d(u));
}

TEST(Halton, DimensionLimit) {
    EXPECT_THROW(halton_points(4, 51), ConfigError);
    EXPECT_NO_THROW(halton_points(4, 50));
}

TEST(Qmc, GaussianMapping) {
    GaussianTarget g(Eigen::Vector2d(1.0, -2.0), Eigen::Vector2d(4.0, 0.25));
    PointSet ps = qmc_point_set(g, 16);
    EXPECT_EQ(ps.provenance, Provenance::QMC);
    // first halton point is (1/2, 1/3): maps to (mu1, mu2 + 0.5*quantile(1/3))
    EXPECT_NEAR(ps.points(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(ps.points(0, 1), -2.0 + 0.5 * std_normal_quantile(1.0 / 3.0), 1e-12);
    // scores regenerate exactly
    for (int i = 0; i < 16; ++i)
        EXPECT_EQ(ps.scores.row(i), g.score(ps.points.row(i).transpose()).transpose());
}

TEST(Grid, Linspace1d) {
    GaussianTarget g = GaussianTarget::standard(1);
    PointSet ps = grid_points(3, g);
    ASSERT_EQ(ps.size(), 3);
    EXPECT_DOUBLE_EQ(ps.points(0, 0), -5.0);
    EXPECT_DOUBLE_EQ(ps.points(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(ps.points(2, 0), 5.0);
}

TEST(Grid, CornerPoints2d) {
    GaussianTarget g = GaussianTarget::standard(2);
    PointSet ps = grid_points(2, g);
    ASSERT_EQ(ps.size(), 4);
    for (int i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(std::abs(ps.points(i, 0)), 5.0);
        EXPECT_DOUBLE_EQ(std::abs(ps.points(i, 1)), 5.0);
    }
}

TEST(Grid, ExactSpacing) {
    GaussianTarget g = GaussianTarget::standard(1);
    PointSet ps = grid_points(101, g);
    // spacing 0.1 at double-precision granularity (ulps at the +-5 scale)
    for (int i = 1; i < 101; ++i)
        EXPECT_NEAR(ps.points(i, 0) - ps.points(i - 1, 0), 0.1, 2e-15);
    EXPECT_DOUBLE_EQ(ps.points(0, 0), -5.0);
    EXPECT_DOUBLE_EQ(ps.points(100, 0), 5.0);
}

TEST(Grid, BudgetEnforced) {
    GaussianTarget g = GaussianTarget::standard(10);
    EXPECT_THROW(grid_points(10, g, 1'000'000), BudgetExceeded);
}

TEST(Mala, StationaryPointAcceptanceRatioOne) {
    // with zero score on both ends and an identical proposal the
    // Metropolis correction cancels exactly
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    const double eps = 0.3;
    const double log_alpha =
        detail::mala_log_q(x, x, zero, eps) - detail::mala_log_q(x, x, zero, eps);
    EXPECT_DOUBLE_EQ(std::exp(log_alpha), 1.0);
}

TEST(Mala, TinyStepAlwaysAccepts) {
    GaussianTarget g = GaussianTarget::standard(1);
    MalaConfig cfg;
    cfg.step_size = 1e-6;
    cfg.adapt = false;
    cfg.n_burn = 100;
    cfg.n_keep = 5000;
    cfg.init = Eigen::VectorXd::Constant(1, 0.5);
    RandomStream rng(2);
    MalaDiagnostics diag;
    mala_sample(g, cfg, rng, &diag);
    EXPECT_GE(diag.acceptance_rate, 0.99);
}

TEST(Mala, InitOutsideSupportThrows) {
    TruncatedGaussian1D t(0.0, 1.0, 0.0, std::numeric_limits<double>::infinity());
    MalaConfig cfg;
    cfg.init = Eigen::VectorXd::Constant(1, -1.0);
    RandomStream rng(0);
    EXPECT_THROW(mala_sample(t, cfg, rng), NonFiniteDensity);
}

TEST(Mala, LongChainMeanAndKs) {
    GaussianTarget g = GaussianTarget::standard(1);
    MalaConfig cfg;
    cfg.step_size = 0.5;
    cfg.n_burn = 2000;
    cfg.n_keep = 100'000;
    cfg.init = Eigen::VectorXd::Constant(1, 1.0);
    RandomStream rng(7);
    MalaDiagnostics diag;
    PointSet ps = mala_sample(g, cfg, rng, &diag);

    // adapted acceptance should sit near the Langevin optimum
    EXPECT_NEAR(diag.acceptance_rate, 0.574, 0.12);

    const Eigen::VectorXd chain = ps.points.col(0);
    const double mean = chain.mean();
    const double sd = std::sqrt((chain.array() - mean).square().sum() / (chain.size() - 1));
    const double ess = effective_sample_size(chain);
    EXPECT_GT(ess, 1000.0);
    EXPECT_LE(std::abs(mean), 5.0 * sd / std::sqrt(ess));

    // detailed-balance smoke test: KS below the 1% critical value
    const double ks = ks_statistic_vs_normal(chain);
    EXPECT_LT(ks, 1.628 / std::sqrt(ess));
}

TEST(Mala, ScoresRegenerate) {
    GaussianTarget g = GaussianTarget::standard(2);
    MalaConfig cfg;
    cfg.n_burn = 200;
    cfg.n_keep = 50;
    cfg.init = Eigen::VectorXd::Zero(2);
    RandomStream rng(1);
    PointSet ps = mala_sample(g, cfg, rng);
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(ps.scores.row(i), g.score(ps.points.row(i).transpose()).transpose());
}

TEST(Mala, PooledChains) {
    GaussianTarget g = GaussianTarget::standard(1);
    MalaConfig cfg;
    cfg.n_burn = 200;
    cfg.n_keep = 100;
    Eigen::MatrixXd inits(3, 1);
    inits << -1.0, 0.0, 1.0;
    RandomStream rng(5);
    PointSet ps = mala_sample_pooled(g, cfg, inits, rng);
    EXPECT_EQ(ps.size(), 300);
    EXPECT_EQ(ps.provenance, Provenance::MALA);
}

TEST(Ess, IidChainNearN) {
    RandomStream rng(3);
    Eigen::VectorXd v(20'000);
    for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const double ess = effective_sample_size(v);
    EXPECT_GT(ess, 0.8 * v.size());
    EXPECT_LE(ess, static_cast<double>(v.size()));
}
