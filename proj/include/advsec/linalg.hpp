#pragma once

// Thin bridge between the library's Tensor/vector types and Eigen, plus the
// symmetric positive-definite solve used by Newton training, influence
// scoring and implicit-gradient computations.

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "advsec/error.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::VectorXd to_eigen(const Tensor& x) {
    if (x.ndim() != 1) throw ShapeError("to_eigen expects a 1-D tensor");
    return to_eigen(x.to_dense_vector());
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Solves H x = b for symmetric positive-definite H by Cholesky factorization.
/// If the factorization fails or the solution does not actually solve the
/// system (LLT reports success on singular matrices whose rounding noise
/// yields tiny positive pivots, and the resulting null-space components are
/// garbage), retries once with a small diagonal jitter — which damps exactly
/// those components; a jittered failure raises IllConditionedError.
inline Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& H, const Eigen::MatrixXd& B,
                                 double jitter = 1e-10) {
    if (H.rows() != H.cols()) throw ShapeError("spd_solve expects a square matrix");
    if (H.rows() != B.rows()) throw ShapeError("spd_solve dimension mismatch");
    const double scale = B.norm() + 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd X = llt.solve(B);
        if (X.allFinite() && (H * X - B).norm() <= 1e-8 * scale) return X;
    }
    Eigen::MatrixXd Hj = H;
    Hj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt2(Hj);
    if (llt2.info() == Eigen::Success) {
        Eigen::MatrixXd X = llt2.solve(B);
        if (X.allFinite()) return X;
    }
    throw IllConditionedError("symmetric factorization failed even with diagonal jitter");
}

inline Eigen::VectorXd spd_solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& b,
                                 double jitter = 1e-10) {
    return spd_solve(H, Eigen::MatrixXd(b), jitter).col(0);
}

}  // namespace advsec
