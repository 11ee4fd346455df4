#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <string>

#include "steinquad/errors.hpp"

namespace steinquad {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Diagonal-jitter escalation schedule for near-singular SPD systems
// (kernel matrices at large n with clustered samples). Jitter starts at
// rel_start * trace(A)/n and multiplies by `factor` until rel_max.
struct JitterPolicy {
    double rel_start = 1e-10;
    double rel_max = 1e-4;
    double factor = 10.0;
};

// Cholesky factorization of an SPD matrix. Construction succeeds only if
// the (possibly jittered) factorization succeeds, so holding a
// CholeskyFactor is the proof-of-SPD token the rest of the library keys on.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const DenseMatrix& a, JitterPolicy policy = {}) {
        const Eigen::Index n = a.rows();
        if (n != a.cols()) throw NumericalError("cholesky: matrix not square");
        if (n > 0 && !a.isApprox(a.transpose(), 1e-12))
            throw NumericalError("cholesky: matrix not symmetric within 1e-12");
        llt_.compute(a);
        jitter_ = 0.0;
        if (llt_.info() == Eigen::Success) return;
        const double unit = a.trace() / static_cast<double>(n);
        double rel = policy.rel_start;
        while (rel <= policy.rel_max * (1.0 + 1e-12)) {
            const double jitter = rel * unit;
            llt_.compute(a + jitter * DenseMatrix::Identity(n, n));
            if (llt_.info() == Eigen::Success) {
                jitter_ = jitter;
                return;
            }
            rel *= policy.factor;
        }
        throw NotPositiveDefinite("cholesky: factorization failed after jitter escalation");
    }

    Vector solve(const Vector& b) const { return llt_.solve(b); }
    DenseMatrix solve(const DenseMatrix& b) const { return llt_.solve(b); }

    double log_det() const {
        return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
    }

    // jitter actually added to the diagonal (0 when clean factorization)
    double jitter() const { return jitter_; }

    Eigen::Index dim() const { return llt_.matrixLLT().rows(); }

private:
    Eigen::LLT<DenseMatrix> llt_;
    double jitter_ = 0.0;
};

// Solves Ax = b for SPD A with the escalating jitter schedule.
inline Vector cholesky_solve(const DenseMatrix& a, const Vector& b, JitterPolicy policy = {}) {
    if (a.rows() != b.size()) throw NumericalError("cholesky_solve: dimension mismatch");
    return CholeskyFactor(a, policy).solve(b);
}

}  // namespace steinquad
