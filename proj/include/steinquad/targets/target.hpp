#pragma once

#include <Eigen/Core>
#include <limits>
#include <memory>
#include <utility>

#include "steinquad/errors.hpp"
#include "steinquad/numerics/rng.hpp"

namespace steinquad {

// Integration domain: all of R^d or an axis-aligned box.
struct Support {
    bool all_space = true;
    Eigen::VectorXd lower;  // box bounds; entries may be +-inf
    Eigen::VectorXd upper;

    static Support everywhere() { return Support{}; }

    static Support box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
        Support s;
        s.all_space = false;
        s.lower = std::move(lo);
        s.upper = std::move(hi);
        return s;
    }

    bool contains_interior(const Eigen::VectorXd& x) const {
        if (all_space) return true;
        return (x.array() > lower.array()).all() && (x.array() < upper.array()).all();
    }

    bool contains_closed(const Eigen::VectorXd& x) const {
        if (all_space) return true;
        return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
    }
};

// A distribution known through its (possibly unnormalized) log density and
// score grad_x log pi. Optionally sampleable. Immutable after construction
// and safe to share across threads; only RandomStream is single-owner.
class ScoreTarget {
public:
    virtual ~ScoreTarget() = default;

    virtual int dim() const = 0;

    // grad_x log pi at an interior point. Throws OutsideSupport on or
    // outside the support boundary: Stein-layer evaluations must stay
    // interior and surfacing the error catches bad point sets.
    virtual Eigen::VectorXd score(const Eigen::VectorXd& x) const = 0;

    virtual bool has_log_density() const { return true; }

    // Log density; normalized for the built-in closed-form targets,
    // unnormalized for posterior-style targets.
    virtual double log_density_unnorm(const Eigen::VectorXd& x) const = 0;

    // True when log_density_unnorm is the exact normalized log density.
    virtual bool normalized() const { return false; }

    // Combined evaluation; targets whose density and score share expensive
    // work (ODE posteriors) override this with a single pass.
    virtual std::pair<double, Eigen::VectorXd> log_density_and_score(
        const Eigen::VectorXd& x) const {
        return {log_density_unnorm(x), score(x)};
    }

    virtual bool has_sampler() const { return false; }

    // n iid draws, one per row.
    virtual Eigen::MatrixXd sample(Eigen::Index n, RandomStream& rng) const {
        (void)n;
        (void)rng;
        throw NoSampler("target has no exact sampler");
    }

    virtual Support support() const { return Support::everywhere(); }

protected:
    void require_interior(const Eigen::VectorXd& x) const {
        if (!support().contains_interior(x))
            throw OutsideSupport("point on or outside the support boundary");
    }

    void require_inside(const Eigen::VectorXd& x) const {
        if (!support().contains_closed(x)) throw OutsideSupport("point outside the support");
    }
};

using TargetPtr = std::shared_ptr<const ScoreTarget>;

}  // namespace steinquad
