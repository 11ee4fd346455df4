#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "steinquad/numerics/special.hpp"
#include "steinquad/targets/target.hpp"

namespace steinquad {

// Diagonal Gaussian N(mean, diag(variance)).
class GaussianTarget final : public ScoreTarget {
public:
    GaussianTarget(Eigen::VectorXd mean, Eigen::VectorXd variance_diag)
        : mean_(std::move(mean)), var_(std::move(variance_diag)) {
        if (mean_.size() != var_.size()) throw ConfigError("gaussian: mean/variance size mismatch");
        if ((var_.array() <= 0).any()) throw ConfigError("gaussian: variances must be positive");
    }

    static GaussianTarget standard(int d) {
        return GaussianTarget(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
    }

    int dim() const override { return static_cast<int>(mean_.size()); }

    Eigen::VectorXd score(const Eigen::VectorXd& x) const override {
        return -((x - mean_).array() / var_.array()).matrix();
    }

    double log_density_unnorm(const Eigen::VectorXd& x) const override {
        const Eigen::ArrayXd z2 = (x - mean_).array().square() / var_.array();
        return -0.5 * (z2.sum() + var_.array().log().sum() + dim() * kLog2Pi);
    }

    bool normalized() const override { return true; }
    bool has_sampler() const override { return true; }

    Eigen::MatrixXd sample(Eigen::Index n, RandomStream& rng) const override {
        Eigen::MatrixXd out(n, dim());
        const Eigen::ArrayXd sd = var_.array().sqrt();
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < dim(); ++j) out(i, j) = mean_[j] + sd[j] * rng.normal();
        return out;
    }

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& variance_diag() const { return var_; }

private:
    Eigen::VectorXd mean_;
    Eigen::VectorXd var_;
};

// N(mu, sigma^2) restricted to [a,b]; one side may be infinite.
// Sampling is exact inverse-CDF through the normal quantile.
class TruncatedGaussian1D final : public ScoreTarget {
public:
    TruncatedGaussian1D(double mu, double sigma, double a, double b)
        : mu_(mu), sigma_(sigma), a_(a), b_(b) {
        if (!(sigma > 0)) throw ConfigError("truncated gaussian: sigma must be positive");
        if (!(a < b)) throw ConfigError("truncated gaussian: requires a < b");
        alpha_ = (a_ - mu_) / sigma_;
        beta_ = (b_ - mu_) / sigma_;
        mass_ = std_normal_mass(alpha_, beta_);
        if (!(mass_ > 0)) throw ConfigError("truncated gaussian: vanishing mass on [a,b]");
    }

    int dim() const override { return 1; }

    Eigen::VectorXd score(const Eigen::VectorXd& x) const override {
        require_interior(x);
        Eigen::VectorXd s(1);
        s[0] = -(x[0] - mu_) / (sigma_ * sigma_);
        return s;
    }

    double log_density_unnorm(const Eigen::VectorXd& x) const override {
        require_inside(x);
        const double z = (x[0] - mu_) / sigma_;
        return std_normal_log_pdf(z) - std::log(sigma_) - std::log(mass_);
    }

    bool normalized() const override { return true; }
    bool has_sampler() const override { return true; }

    Eigen::MatrixXd sample(Eigen::Index n, RandomStream& rng) const override {
        Eigen::MatrixXd out(n, 1);
        const double lo = std_normal_cdf(alpha_);
        for (Eigen::Index i = 0; i < n; ++i)
            out(i, 0) = mu_ + sigma_ * std_normal_quantile(lo + mass_ * rng.uniform());
        return out;
    }

    Support support() const override {
        Eigen::VectorXd lo(1), hi(1);
        lo[0] = a_;
        hi[0] = b_;
        return Support::box(lo, hi);
    }

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double lower() const { return a_; }
    double upper() const { return b_; }
    double normalizer() const { return mass_; }

private:
    double mu_, sigma_, a_, b_;
    double alpha_, beta_, mass_;
};

// Mixture of 1-D Gaussians, optionally truncated to [a,b].
class GaussianMixture1D final : public ScoreTarget {
public:
    GaussianMixture1D(std::vector<double> weights, std::vector<double> means,
                      std::vector<double> variances,
                      double a = -std::numeric_limits<double>::infinity(),
                      double b = std::numeric_limits<double>::infinity())
        : w_(std::move(weights)), mu_(std::move(means)), var_(std::move(variances)), a_(a), b_(b) {
        if (w_.size() != mu_.size() || w_.size() != var_.size() || w_.empty())
            throw ConfigError("mixture: component arrays must be non-empty and equal length");
        double wsum = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            if (!(w_[i] > 0)) throw ConfigError("mixture: weights must be positive");
            if (!(var_[i] > 0)) throw ConfigError("mixture: variances must be positive");
            wsum += w_[i];
        }
        for (auto& w : w_) w /= wsum;
        // component masses inside the truncation box
        comp_mass_.resize(w_.size());
        total_mass_ = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double sd = std::sqrt(var_[i]);
            comp_mass_[i] = std_normal_mass((a_ - mu_[i]) / sd, (b_ - mu_[i]) / sd);
            total_mass_ += w_[i] * comp_mass_[i];
        }
        if (!(total_mass_ > 0)) throw ConfigError("mixture: vanishing mass on [a,b]");
    }

    int dim() const override { return 1; }

    Eigen::VectorXd score(const Eigen::VectorXd& x) const override {
        require_interior(x);
        // d/dx log sum_i w_i phi_i = sum_i r_i * (-(x-mu_i)/var_i) with
        // responsibilities r_i computed through log-sum-exp
        double max_lp = -std::numeric_limits<double>::infinity();
        std::vector<double> lp(w_.size());
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double sd = std::sqrt(var_[i]);
            lp[i] = std::log(w_[i]) + std_normal_log_pdf((x[0] - mu_[i]) / sd) - std::log(sd);
            max_lp = std::max(max_lp, lp[i]);
        }
        double denom = 0.0, num = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double e = std::exp(lp[i] - max_lp);
            denom += e;
            num += e * (-(x[0] - mu_[i]) / var_[i]);
        }
        Eigen::VectorXd s(1);
        s[0] = num / denom;
        return s;
    }

    double log_density_unnorm(const Eigen::VectorXd& x) const override {
        require_inside(x);
        double max_lp = -std::numeric_limits<double>::infinity();
        std::vector<double> lp(w_.size());
        for (std::size_t i = 0; i < w_.size(); ++i) {
            const double sd = std::sqrt(var_[i]);
            lp[i] = std::log(w_[i]) + std_normal_log_pdf((x[0] - mu_[i]) / sd) - std::log(sd);
            max_lp = std::max(max_lp, lp[i]);
        }
        double acc = 0.0;
        for (const double v : lp) acc += std::exp(v - max_lp);
        return max_lp + std::log(acc) - std::log(total_mass_);
    }

    bool normalized() const override { return true; }
    bool has_sampler() const override { return true; }

    Eigen::MatrixXd sample(Eigen::Index n, RandomStream& rng) const override {
        Eigen::MatrixXd out(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            // pick a component with probability proportional to its mass
            // inside the box, then draw from that truncated component
            double u = rng.uniform() * total_mass_;
            std::size_t k = 0;
            for (; k + 1 < w_.size(); ++k) {
                const double cell = w_[k] * comp_mass_[k];
                if (u < cell) break;
                u -= cell;
            }
            const double sd = std::sqrt(var_[k]);
            const double lo = std_normal_cdf((a_ - mu_[k]) / sd);
            out(i, 0) = mu_[k] + sd * std_normal_quantile(lo + comp_mass_[k] * rng.uniform());
        }
        return out;
    }

    Support support() const override {
        if (std::isinf(a_) && std::isinf(b_)) return Support::everywhere();
        Eigen::VectorXd lo(1), hi(1);
        lo[0] = a_;
        hi[0] = b_;
        return Support::box(lo, hi);
    }

    const std::vector<double>& weights() const { return w_; }
    const std::vector<double>& means() const { return mu_; }
    const std::vector<double>& variances() const { return var_; }
    double lower() const { return a_; }
    double upper() const { return b_; }
    double total_mass() const { return total_mass_; }

private:
    std::vector<double> w_, mu_, var_;
    double a_, b_;
    std::vector<double> comp_mass_;
    double total_mass_;
};

// Independent product of 1-D targets; the joint score is the concatenation
// of the factor scores.
class ProductTarget final : public ScoreTarget {
public:
    explicit ProductTarget(std::vector<TargetPtr> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw ConfigError("product target: no factors");
        for (const auto& f : factors_)
            if (f->dim() != 1) throw ConfigError("product target: factors must be 1-D");
    }

    int dim() const override { return static_cast<int>(factors_.size()); }

    Eigen::VectorXd score(const Eigen::VectorXd& x) const override {
        Eigen::VectorXd s(dim());
        Eigen::VectorXd xi(1);
        for (int j = 0; j < dim(); ++j) {
            xi[0] = x[j];
            s[j] = factors_[j]->score(xi)[0];
        }
        return s;
    }

    double log_density_unnorm(const Eigen::VectorXd& x) const override {
        double acc = 0.0;
        Eigen::VectorXd xi(1);
        for (int j = 0; j < dim(); ++j) {
            xi[0] = x[j];
            acc += factors_[j]->log_density_unnorm(xi);
        }
        return acc;
    }

    bool normalized() const override {
        for (const auto& f : factors_)
            if (!f->normalized()) return false;
        return true;
    }

    bool has_sampler() const override {
        for (const auto& f : factors_)
            if (!f->has_sampler()) return false;
        return true;
    }

    Eigen::MatrixXd sample(Eigen::Index n, RandomStream& rng) const override {
        Eigen::MatrixXd out(n, dim());
        for (int j = 0; j < dim(); ++j) out.col(j) = factors_[j]->sample(n, rng).col(0);
        return out;
    }

    Support support() const override {
        bool all = true;
        Eigen::VectorXd lo(dim()), hi(dim());
        for (int j = 0; j < dim(); ++j) {
            const Support s = factors_[j]->support();
            if (s.all_space) {
                lo[j] = -std::numeric_limits<double>::infinity();
                hi[j] = std::numeric_limits<double>::infinity();
            } else {
                lo[j] = s.lower[0];
                hi[j] = s.upper[0];
                all = false;
            }
        }
        return all ? Support::everywhere() : Support::box(lo, hi);
    }

    const std::vector<TargetPtr>& factors() const { return factors_; }

private:
    std::vector<TargetPtr> factors_;
};

}  // namespace steinquad
