#pragma once

#include <Eigen/Core>

#include "steinquad/targets/target.hpp"

namespace steinquad {

enum class Provenance { IID, MALA, QMC, Grid };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::IID: return "iid";
        case Provenance::MALA: return "mala";
        case Provenance::QMC: return "qmc";
        case Provenance::Grid: return "grid";
    }
    return "?";
}

// Training/estimation design: points with their scores under the target.
// scores[i] is always target.score(points[i]) and can be regenerated.
struct PointSet {
    Eigen::MatrixXd points;  // n x d
    Eigen::MatrixXd scores;  // n x d
    Provenance provenance = Provenance::IID;

    Eigen::Index size() const { return points.rows(); }
    int dim() const { return static_cast<int>(points.cols()); }
};

inline PointSet make_point_set(const ScoreTarget& target, Eigen::MatrixXd points,
                               Provenance provenance) {
    PointSet ps;
    ps.scores.resize(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        ps.scores.row(i) = target.score(points.row(i).transpose()).transpose();
    ps.points = std::move(points);
    ps.provenance = provenance;
    return ps;
}

inline PointSet iid_sample(const ScoreTarget& target, Eigen::Index n, RandomStream& rng) {
    return make_point_set(target, target.sample(n, rng), Provenance::IID);
}

}  // namespace steinquad
