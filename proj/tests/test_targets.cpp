#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "steinquad/numerics/quadrature.hpp"
#include "steinquad/numerics/special.hpp"
#include "steinquad/targets/builtin.hpp"

using namespace steinquad;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return v;
}

// central finite difference of log_density_unnorm
Eigen::VectorXd fd_score(const ScoreTarget& t, const Eigen::VectorXd& x, double h = 1e-6) {
    Eigen::VectorXd g(t.dim());
    for (int j = 0; j < t.dim(); ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        g[j] = (t.log_density_unnorm(xp) - t.log_density_unnorm(xm)) / (2.0 * h);
    }
    return g;
}

void check_score_vs_fd(const ScoreTarget& t, const Eigen::VectorXd& x) {
    const Eigen::VectorXd s = t.score(x);
    const Eigen::VectorXd f = fd_score(t, x);
    for (int j = 0; j < t.dim(); ++j)
        EXPECT_NEAR(s[j], f[j], 1e-6 * std::max(1.0, std::abs(s[j]))) << "coord " << j;
}

}  // namespace

TEST(Gaussian, StandardNormalScore) {
    GaussianTarget g = GaussianTarget::standard(1);
    EXPECT_DOUBLE_EQ(g.score(vec1(2.0))[0], -2.0);
}

TEST(Gaussian, LogDensityAtMode) {
    GaussianTarget g = GaussianTarget::standard(1);
    EXPECT_NEAR(g.log_density_unnorm(vec1(0.0)), -0.5 * std::log(2.0 * kPi), 1e-12);
}

TEST(Gaussian, SampleMeanCLT) {
    GaussianTarget g = GaussianTarget::standard(2);
    RandomStream rng(0);
    Eigen::MatrixXd x = g.sample(1'000'000, rng);
    for (int j = 0; j < 2; ++j) EXPECT_LE(std::abs(x.col(j).mean()), 0.004);
}

TEST(Gaussian, EmptySample) {
    GaussianTarget g = GaussianTarget::standard(3);
    RandomStream rng(0);
    Eigen::MatrixXd x = g.sample(0, rng);
    EXPECT_EQ(x.rows(), 0);
    EXPECT_EQ(x.cols(), 3);
}

TEST(TruncatedGaussian, InteriorScoreUnchanged) {
    TruncatedGaussian1D t(1.0, 2.0, 0.0, std::numeric_limits<double>::infinity());
    EXPECT_DOUBLE_EQ(t.score(vec1(3.0))[0], -0.5);
}

TEST(TruncatedGaussian, OutsideSupportErrors) {
    TruncatedGaussian1D t(0.0, 1.0, 0.0, std::numeric_limits<double>::infinity());
    EXPECT_THROW(t.log_density_unnorm(vec1(-1.0)), OutsideSupport);
    EXPECT_THROW(t.score(vec1(-1.0)), OutsideSupport);
    // exact boundary is an error for score by design
    EXPECT_THROW(t.score(vec1(0.0)), OutsideSupport);
}

TEST(TruncatedGaussian, HalfNormalSampleMean) {
    TruncatedGaussian1D t(0.0, 1.0, 0.0, std::numeric_limits<double>::infinity());
    RandomStream rng(1);
    Eigen::MatrixXd x = t.sample(1'000'000, rng);
    EXPECT_NEAR(x.col(0).mean(), std::sqrt(2.0 / kPi), 0.004);
}

TEST(TruncatedGaussian, DensityIntegratesToOne) {
    TruncatedGaussian1D t(0.5, 1.5, -1.0, 2.0);
    const double mass = composite_gl(
        [&](double x) { return std::exp(t.log_density_unnorm(vec1(x))); }, -1.0, 2.0, 16);
    EXPECT_NEAR(mass, 1.0, 1e-10);
}

TEST(Mixture, SymmetricScoreZero) {
    GaussianMixture1D m({0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0});
    EXPECT_NEAR(m.score(vec1(0.0))[0], 0.0, 1e-12);
    check_score_vs_fd(m, vec1(0.0));
}

TEST(Mixture, LogDensityAnchor) {
    GaussianMixture1D m({0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0});
    EXPECT_NEAR(m.log_density_unnorm(vec1(0.0)), std::log(std_normal_pdf(1.0)), 1e-12);
}

TEST(Mixture, TruncatedIntegratesToOne) {
    GaussianMixture1D m({0.3, 0.5, 0.2}, {0.0, 22.5, 33.75}, {50.0, 40.0, 8.0}, 0.0, 45.0);
    const double mass = composite_gl(
        [&](double x) { return std::exp(m.log_density_unnorm(vec1(x))); }, 0.0, 45.0, 64);
    EXPECT_NEAR(mass, 1.0, 1e-10);
}

TEST(Mixture, TruncatedSamplesStayInBox) {
    GaussianMixture1D m({0.5, 0.5}, {0.0, 22.5}, {50.0, 40.0}, 0.0, 45.0);
    RandomStream rng(3);
    Eigen::MatrixXd x = m.sample(20'000, rng);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE(x.maxCoeff(), 45.0);
    // oracle mean by quadrature
    const double mean_q = composite_gl(
        [&](double t) { return t * std::exp(m.log_density_unnorm(vec1(t))); }, 0.0, 45.0, 64);
    const double sd = std::sqrt((x.col(0).array() - x.col(0).mean()).square().sum() / 19'999.0);
    EXPECT_NEAR(x.col(0).mean(), mean_q, 5.0 * sd / std::sqrt(20'000.0));
}

TEST(ScoreFdConsistency, AllBuiltins) {
    RandomStream rng(17);
    GaussianTarget g(Eigen::Vector2d(0.3, -0.7), Eigen::Vector2d(1.5, 0.4));
    TruncatedGaussian1D t(0.2, 1.2, -0.5, 3.0);
    GaussianMixture1D m({0.4, 0.6}, {-0.5, 1.5}, {0.8, 1.7});
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd x2(2);
        x2 << rng.normal(), rng.normal();
        check_score_vs_fd(g, x2);
        check_score_vs_fd(t, vec1(rng.uniform(-0.4, 2.9)));
        check_score_vs_fd(m, vec1(rng.normal() * 1.5));
    }
}

TEST(Product, ScoreIsConcatenation) {
    auto f1 = std::make_shared<TruncatedGaussian1D>(0.0, 1.0, 0.0,
                                                    std::numeric_limits<double>::infinity());
    auto f2 = std::make_shared<GaussianMixture1D>(std::vector<double>{0.5, 0.5},
                                                  std::vector<double>{-1.0, 1.0},
                                                  std::vector<double>{1.0, 1.0});
    ProductTarget p({f1, f2});
    Eigen::VectorXd x(2);
    x << 0.7, 0.3;
    Eigen::VectorXd s = p.score(x);
    EXPECT_DOUBLE_EQ(s[0], f1->score(vec1(0.7))[0]);
    EXPECT_DOUBLE_EQ(s[1], f2->score(vec1(0.3))[0]);
    EXPECT_EQ(p.dim(), 2);
    EXPECT_FALSE(p.support().all_space);
}

TEST(Product, SamplingAndDensity) {
    auto f1 = std::make_shared<GaussianTarget>(GaussianTarget::standard(1));
    auto f2 = std::make_shared<TruncatedGaussian1D>(1.0, 2.0, 0.0,
                                                    std::numeric_limits<double>::infinity());
    ProductTarget p({f1, f2});
    RandomStream rng(4);
    Eigen::MatrixXd x = p.sample(50'000, rng);
    EXPECT_NEAR(x.col(0).mean(), 0.0, 0.02);
    EXPECT_GT(x.col(1).minCoeff(), 0.0);
    EXPECT_TRUE(p.normalized());
}

TEST(SamplingScoringConsistency, ScoreMeanVanishes) {
    // for normalized targets with vanishing boundary density the score has
    // zero mean under the target itself
    GaussianMixture1D m({0.4, 0.6}, {-0.8, 1.2}, {0.9, 1.4});
    RandomStream rng(11);
    const int n = 100'000;
    Eigen::MatrixXd x = m.sample(n, rng);
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = m.score(x.row(i).transpose())[0];
    const double mean = s.mean();
    const double sd = std::sqrt((s.array() - mean).square().sum() / (n - 1));
    EXPECT_LE(std::abs(mean), 5.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(NoSamplerTarget, Throws) {
    // minimal score-only target
    class ScoreOnly final : public ScoreTarget {
    public:
        int dim() const override { return 1; }
        Eigen::VectorXd score(const Eigen::VectorXd& x) const override { return -x; }
        double log_density_unnorm(const Eigen::VectorXd& x) const override {
            return -0.5 * x.squaredNorm();
        }
    };
    ScoreOnly t;
    RandomStream rng(0);
    EXPECT_THROW(t.sample(3, rng), NoSampler);
}
