#pragma once

// Parameter-space machinery for the convex model kinds (logreg, svm-linear,
// svm-rbf): regularized training objectives with gradients and Hessians, a
// damped Newton driver, per-sample loss gradients, and the mixed second
// derivatives needed by implicit-gradient poisoning.
//
// Parameter layout: per-class blocks concatenated in class order.
//   logreg / svm-linear: block_c = (w_c in R^d, b_c), size d+1
//   svm-rbf:             block_c = (alpha_c in R^n, b_c), size n+1
//
// All objectives are mean loss + (lambda/2)·(quadratic regularizer over the
// full block, bias included), which keeps every Hessian positive definite.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "advsec/dataset.hpp"
#include "advsec/error.hpp"
#include "advsec/linalg.hpp"
#include "advsec/model_types.hpp"

namespace advsec::detail {

struct ConvexData {
    Eigen::MatrixXd X;   // n x d, dense
    std::vector<int> y;  // n labels
    int n_classes = 0;
};

inline ConvexData to_convex_data(const Dataset& ds) {
    ConvexData data;
    const std::size_t n = ds.n_samples(), d = ds.n_features();
    data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        auto row = ds.X.row(i).to_dense_vector();
        for (std::size_t j = 0; j < d; ++j) data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    data.y = ds.y;
    data.n_classes = ds.n_classes;
    return data;
}

struct ObjectiveEval {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;  // empty unless requested
};

// ---------------------------------------------------------------------------
// Multinomial logistic regression.
// ---------------------------------------------------------------------------

inline ObjectiveEval logreg_objective(const Eigen::VectorXd& theta, const ConvexData& data,
                                      double lambda, bool want_hess) {
    const Eigen::Index n = data.X.rows(), d = data.X.cols();
    const int nc = data.n_classes;
    const Eigen::Index bs = d + 1;  // block size per class
    ObjectiveEval out;
    out.grad = Eigen::VectorXd::Zero(nc * bs);
    if (want_hess) out.hess = Eigen::MatrixXd::Zero(nc * bs, nc * bs);

    std::vector<double> z(nc), p(nc);
    Eigen::VectorXd xt(bs);
    Eigen::MatrixXd outer;
    if (want_hess) outer.resize(bs, bs);

    for (Eigen::Index i = 0; i < n; ++i) {
        xt.head(d) = data.X.row(i).transpose();
        xt(d) = 1.0;
        for (int c = 0; c < nc; ++c) z[static_cast<std::size_t>(c)] = theta.segment(c * bs, d).dot(xt.head(d)) + theta(c * bs + d);
        out.value += logsumexp(z) - z[static_cast<std::size_t>(data.y[static_cast<std::size_t>(i)])];
        p = softmax(z);
        for (int c = 0; c < nc; ++c) {
            const double r = p[static_cast<std::size_t>(c)] - (c == data.y[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
            out.grad.segment(c * bs, bs) += r * xt;
        }
        if (want_hess) {
            outer.noalias() = xt * xt.transpose();
            for (int c = 0; c < nc; ++c)
                for (int cc = 0; cc < nc; ++cc) {
                    const double a = (c == cc ? p[static_cast<std::size_t>(c)] : 0.0) -
                                     p[static_cast<std::size_t>(c)] * p[static_cast<std::size_t>(cc)];
                    if (a != 0.0) out.hess.block(c * bs, cc * bs, bs, bs) += a * outer;
                }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.value = out.value * inv_n + 0.5 * lambda * theta.squaredNorm();
    out.grad = out.grad * inv_n + lambda * theta;
    if (want_hess) {
        out.hess *= inv_n;
        out.hess.diagonal().array() += lambda;
    }
    return out;
}

/// Unregularized cross-entropy loss of one sample and its theta-gradient.
inline double logreg_sample_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& x, int y,
                                 int nc) {
    const Eigen::Index d = x.size(), bs = d + 1;
    std::vector<double> z(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) z[static_cast<std::size_t>(c)] = theta.segment(c * bs, d).dot(x) + theta(c * bs + d);
    return logsumexp(z) - z[static_cast<std::size_t>(y)];
}

inline Eigen::VectorXd logreg_sample_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& x,
                                          int y, int nc) {
    const Eigen::Index d = x.size(), bs = d + 1;
    std::vector<double> z(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) z[static_cast<std::size_t>(c)] = theta.segment(c * bs, d).dot(x) + theta(c * bs + d);
    const auto p = softmax(z);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nc * bs);
    for (int c = 0; c < nc; ++c) {
        const double r = p[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
        g.segment(c * bs, d) = r * x;
        g(c * bs + d) = r;
    }
    return g;
}

/// d/dx_c of the full-training-objective theta-gradient for sample index c
/// (a P x d matrix). Only the c-th mean-loss term depends on x_c.
inline Eigen::MatrixXd logreg_mixed_partial(const Eigen::VectorXd& theta, const ConvexData& data,
                                            Eigen::Index c) {
    const Eigen::Index n = data.X.rows(), d = data.X.cols(), bs = d + 1;
    const int nc = data.n_classes;
    std::vector<double> z(static_cast<std::size_t>(nc));
    Eigen::VectorXd xc = data.X.row(c).transpose();
    for (int q = 0; q < nc; ++q) z[static_cast<std::size_t>(q)] = theta.segment(q * bs, d).dot(xc) + theta(q * bs + d);
    const auto p = softmax(z);
    const int yc = data.y[static_cast<std::size_t>(c)];

    // AW(q, k) = sum_q' A[q,q'] W[q',k] with A = diag(p) − p pᵀ.
    Eigen::MatrixXd W(nc, d);
    for (int q = 0; q < nc; ++q) W.row(q) = theta.segment(q * bs, d).transpose();
    Eigen::VectorXd pv(nc);
    for (int q = 0; q < nc; ++q) pv(q) = p[static_cast<std::size_t>(q)];
    Eigen::MatrixXd AW = pv.asDiagonal() * W - pv * (pv.transpose() * W);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nc * bs, d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int q = 0; q < nc; ++q) {
        const double r = p[static_cast<std::size_t>(q)] - (q == yc ? 1.0 : 0.0);
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index k = 0; k < d; ++k)
                M(q * bs + j, k) = inv_n * AW(q, k) * xc(j);
            M(q * bs + j, j) += inv_n * r;
        }
        for (Eigen::Index k = 0; k < d; ++k) M(q * bs + d, k) = inv_n * AW(q, k);  // bias row
    }
    return M;
}

// ---------------------------------------------------------------------------
// One-vs-rest squared-hinge SVM, linear feature map.
// ---------------------------------------------------------------------------

inline ObjectiveEval svm_linear_objective(const Eigen::VectorXd& theta, const ConvexData& data,
                                          double lambda, bool want_hess) {
    const Eigen::Index n = data.X.rows(), d = data.X.cols(), bs = d + 1;
    const int nc = data.n_classes;
    ObjectiveEval out;
    out.grad = Eigen::VectorXd::Zero(nc * bs);
    if (want_hess) out.hess = Eigen::MatrixXd::Zero(nc * bs, nc * bs);

    Eigen::VectorXd xt(bs);
    Eigen::MatrixXd outer;
    if (want_hess) outer.resize(bs, bs);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        xt.head(d) = data.X.row(i).transpose();
        xt(d) = 1.0;
        bool outer_done = false;
        for (int c = 0; c < nc; ++c) {
            const double s = (data.y[static_cast<std::size_t>(i)] == c) ? 1.0 : -1.0;
            const double f = theta.segment(c * bs, d).dot(xt.head(d)) + theta(c * bs + d);
            const double h = std::max(0.0, 1.0 - s * f);
            if (h <= 0.0) continue;
            out.value += h * h * inv_n;
            out.grad.segment(c * bs, bs) += (-2.0 * inv_n * h * s) * xt;
            if (want_hess) {
                if (!outer_done) {
                    outer.noalias() = xt * xt.transpose();
                    outer_done = true;
                }
                out.hess.block(c * bs, c * bs, bs, bs) += (2.0 * inv_n) * outer;
            }
        }
    }
    out.value += 0.5 * lambda * theta.squaredNorm();
    out.grad += lambda * theta;
    if (want_hess) out.hess.diagonal().array() += lambda;
    return out;
}

inline double svm_linear_sample_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& x, int y,
                                     int nc) {
    const Eigen::Index d = x.size(), bs = d + 1;
    double loss = 0.0;
    for (int c = 0; c < nc; ++c) {
        const double s = (y == c) ? 1.0 : -1.0;
        const double f = theta.segment(c * bs, d).dot(x) + theta(c * bs + d);
        const double h = std::max(0.0, 1.0 - s * f);
        loss += h * h;
    }
    return loss;
}

inline Eigen::VectorXd svm_linear_sample_grad(const Eigen::VectorXd& theta,
                                              const Eigen::VectorXd& x, int y, int nc) {
    const Eigen::Index d = x.size(), bs = d + 1;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nc * bs);
    for (int c = 0; c < nc; ++c) {
        const double s = (y == c) ? 1.0 : -1.0;
        const double f = theta.segment(c * bs, d).dot(x) + theta(c * bs + d);
        const double h = std::max(0.0, 1.0 - s * f);
        if (h <= 0.0) continue;
        g.segment(c * bs, d) = (-2.0 * h * s) * x;
        g(c * bs + d) = -2.0 * h * s;
    }
    return g;
}

inline Eigen::MatrixXd svm_linear_mixed_partial(const Eigen::VectorXd& theta,
                                                const ConvexData& data, Eigen::Index c) {
    const Eigen::Index n = data.X.rows(), d = data.X.cols(), bs = d + 1;
    const int nc = data.n_classes;
    Eigen::VectorXd xt(bs);
    xt.head(d) = data.X.row(c).transpose();
    xt(d) = 1.0;
    const int yc = data.y[static_cast<std::size_t>(c)];

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nc * bs, d);
    const double two_inv_n = 2.0 / static_cast<double>(n);
    for (int q = 0; q < nc; ++q) {
        const double s = (yc == q) ? 1.0 : -1.0;
        const double f = theta.segment(q * bs, d).dot(xt.head(d)) + theta(q * bs + d);
        const double h = std::max(0.0, 1.0 - s * f);
        const bool active = h > 0.0;
        for (Eigen::Index j = 0; j < bs; ++j)
            for (Eigen::Index k = 0; k < d; ++k) {
                double v = 0.0;
                if (active) v += theta(q * bs + k) * xt(j);  // w_{q,k} · x̃_j
                if (j == k) v -= s * h;
                M(q * bs + j, k) = two_inv_n * v;
            }
    }
    return M;
}

// ---------------------------------------------------------------------------
// One-vs-rest squared-hinge SVM in representer form with RBF kernel.
// Parameters live per class as (alpha in R^n, b); the Gram matrix K is
// supplied by the caller (it depends on the training points).
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma) {
    Eigen::VectorXd sq = X.rowwise().squaredNorm();
    Eigen::MatrixXd K = -2.0 * (X * X.transpose());
    K.colwise() += sq;
    K.rowwise() += sq.transpose();
    K = (-gamma * K.array().max(0.0)).exp();
    return K;
}

inline ObjectiveEval svm_rbf_objective(const Eigen::VectorXd& theta, const Eigen::MatrixXd& K,
                                       const std::vector<int>& y, int nc, double lambda,
                                       bool want_hess) {
    const Eigen::Index n = K.rows(), bs = n + 1;
    ObjectiveEval out;
    out.grad = Eigen::VectorXd::Zero(nc * bs);
    if (want_hess) out.hess = Eigen::MatrixXd::Zero(nc * bs, nc * bs);
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int c = 0; c < nc; ++c) {
        const auto alpha = theta.segment(c * bs, n);
        const double b = theta(c * bs + n);
        Eigen::VectorXd f = K * alpha;
        f.array() += b;
        Eigen::VectorXd hs = Eigen::VectorXd::Zero(n);   // h_i s_i
        Eigen::VectorXd act = Eigen::VectorXd::Zero(n);  // 1{h_i > 0}
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = (y[static_cast<std::size_t>(i)] == c) ? 1.0 : -1.0;
            const double h = std::max(0.0, 1.0 - s * f(i));
            if (h > 0.0) {
                out.value += h * h * inv_n;
                hs(i) = h * s;
                act(i) = 1.0;
            }
        }
        out.value += 0.5 * lambda * (alpha.dot(K * alpha) + b * b);
        out.grad.segment(c * bs, n) = K * (-2.0 * inv_n * hs + lambda * alpha);
        out.grad(c * bs + n) = -2.0 * inv_n * hs.sum() + lambda * b;
        if (want_hess) {
            Eigen::MatrixXd KDK = K * act.asDiagonal() * K;
            out.hess.block(c * bs, c * bs, n, n) = 2.0 * inv_n * KDK + lambda * K;
            Eigen::VectorXd Ka = K * act;
            out.hess.block(c * bs, c * bs + n, n, 1) = 2.0 * inv_n * Ka;
            out.hess.block(c * bs + n, c * bs, 1, n) = 2.0 * inv_n * Ka.transpose();
            out.hess(c * bs + n, c * bs + n) = 2.0 * inv_n * act.sum() + lambda;
        }
    }
    return out;
}

/// Per-sample squared-hinge loss for a point whose kernel column against the
/// support set is kcol.
inline double svm_rbf_sample_loss(const Eigen::VectorXd& theta, const Eigen::VectorXd& kcol, int y,
                                  int nc) {
    const Eigen::Index n = kcol.size(), bs = n + 1;
    double loss = 0.0;
    for (int c = 0; c < nc; ++c) {
        const double f = theta.segment(c * bs, n).dot(kcol) + theta(c * bs + n);
        const double s = (y == c) ? 1.0 : -1.0;
        const double h = std::max(0.0, 1.0 - s * f);
        loss += h * h;
    }
    return loss;
}

inline Eigen::VectorXd svm_rbf_sample_grad(const Eigen::VectorXd& theta,
                                           const Eigen::VectorXd& kcol, int y, int nc) {
    const Eigen::Index n = kcol.size(), bs = n + 1;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nc * bs);
    for (int c = 0; c < nc; ++c) {
        const double f = theta.segment(c * bs, n).dot(kcol) + theta(c * bs + n);
        const double s = (y == c) ? 1.0 : -1.0;
        const double h = std::max(0.0, 1.0 - s * f);
        if (h <= 0.0) continue;
        g.segment(c * bs, n) = (-2.0 * h * s) * kcol;
        g(c * bs + n) = -2.0 * h * s;
    }
    return g;
}

/// Mixed partial of the rbf training objective: d/dx_c of the theta-gradient.
/// Unlike the linear kinds, every loss term and the regularizer depend on x_c
/// through the kernel rows/columns of the moving point.
inline Eigen::MatrixXd svm_rbf_mixed_partial(const Eigen::VectorXd& theta,
                                             const Eigen::MatrixXd& K, const Eigen::MatrixXd& X,
                                             const std::vector<int>& y, int nc, double lambda,
                                             double gamma, Eigen::Index c) {
    const Eigen::Index n = K.rows(), d = X.cols(), bs = n + 1;
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::VectorXd xc = X.row(c).transpose();

    // g_i = dK(c,i)/dx_c = −2γ (x_c − x_i) K(c,i); zero for i = c.
    Eigen::MatrixXd G(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == c) {
            G.row(i).setZero();
        } else {
            G.row(i) = (-2.0 * gamma * K(c, i)) * (xc - X.row(i).transpose()).transpose();
        }
    }

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nc * bs, d);
    for (int q = 0; q < nc; ++q) {
        const auto alpha = theta.segment(q * bs, n);
        const double b = theta(q * bs + n);
        Eigen::VectorXd f = K * alpha;
        f.array() += b;
        Eigen::VectorXd hs = Eigen::VectorXd::Zero(n), act = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = (y[static_cast<std::size_t>(i)] == q) ? 1.0 : -1.0;
            const double h = std::max(0.0, 1.0 - s * f(i));
            if (h > 0.0) {
                hs(i) = h * s;
                act(i) = 1.0;
            }
        }
        // df_i/dx_c = alpha_c · g_i + (i == c) · Gq, with Gq = Σ_j alpha_j g_j.
        Eigen::RowVectorXd Gq = alpha.transpose() * G;  // g_c = 0 ⇒ the j=c term drops out
        Eigen::MatrixXd dF = alpha(c) * G;
        dF.row(c) += Gq;
        // Loss-term derivative through h: +(2/n) Σ_i act_i dF_i K(p,i) for each support row p,
        // and the same sum for the bias row.
        Eigen::MatrixXd dFa = act.asDiagonal() * dF;
        M.block(q * bs, 0, n, d) = 2.0 * inv_n * (K * dFa);
        M.block(q * bs + n, 0, 1, d) = 2.0 * inv_n * dFa.colwise().sum();
        // Loss-term derivative through the kernel factor K(p, i):
        //   row p ≠ c picks up −(2/n)·h_c s_c·g_p; row p = c picks up −(2/n)·Σ_{i≠c} h_i s_i g_i.
        Eigen::RowVectorXd S = hs.transpose() * G;  // Σ_i h_i s_i g_i (i = c contributes zero)
        for (Eigen::Index p = 0; p < n; ++p) {
            if (p == c) {
                M.block(q * bs + p, 0, 1, d) -= 2.0 * inv_n * S;
            } else {
                M.block(q * bs + p, 0, 1, d) -= 2.0 * inv_n * hs(c) * G.row(p);
            }
        }
        // Regularizer λKα: row p ≠ c gains λ·alpha_c·g_p; row p = c gains λ·Gq.
        for (Eigen::Index p = 0; p < n; ++p) {
            if (p == c) {
                M.block(q * bs + p, 0, 1, d) += lambda * Gq;
            } else {
                M.block(q * bs + p, 0, 1, d) += lambda * alpha(c) * G.row(p);
            }
        }
    }
    return M;
}

/// Explicit dependence of a validation loss on the support point x_c: the
/// validation scores f(x_v) = Σ_j alpha_j k(x_v, x_j) + b include j = c.
inline Eigen::VectorXd svm_rbf_val_explicit_grad(const Eigen::VectorXd& theta,
                                                 const Eigen::MatrixXd& Xtrain,
                                                 const ConvexData& val, int nc, double gamma,
                                                 Eigen::Index c) {
    const Eigen::Index n = Xtrain.rows(), d = Xtrain.cols(), bs = n + 1;
    const Eigen::Index m = val.X.rows();
    Eigen::VectorXd xc = Xtrain.row(c).transpose();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (Eigen::Index v = 0; v < m; ++v) {
        Eigen::VectorXd xv = val.X.row(v).transpose();
        const double kv = std::exp(-gamma * (xv - xc).squaredNorm());
        Eigen::VectorXd dk = (-2.0 * gamma * kv) * (xc - xv);  // dk(x_v, x_c)/dx_c
        // kernel column of x_v against the support set, for the scores
        Eigen::VectorXd kcol(n);
        for (Eigen::Index j = 0; j < n; ++j)
            kcol(j) = std::exp(-gamma * (xv - Xtrain.row(j).transpose()).squaredNorm());
        for (int q = 0; q < nc; ++q) {
            const double f = theta.segment(q * bs, n).dot(kcol) + theta(q * bs + n);
            const double s = (val.y[static_cast<std::size_t>(v)] == q) ? 1.0 : -1.0;
            const double h = std::max(0.0, 1.0 - s * f);
            if (h <= 0.0) continue;
            g += (-2.0 * h * s) * theta(q * bs + c) * dk;
        }
    }
    return g / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// Damped Newton driver.
// ---------------------------------------------------------------------------

/// Minimizes a smooth (or piecewise-smooth) convex objective by Newton steps
/// with step-halving, until the gradient norm drops to tol. Throws
/// ConvergenceError carrying the final gradient norm if the iteration cap is
/// reached first.
inline Eigen::VectorXd newton_minimize(
    const std::function<ObjectiveEval(const Eigen::VectorXd&, bool)>& objective,
    Eigen::VectorXd theta, double tol, int max_iter = 400) {
    ObjectiveEval eval = objective(theta, true);
    for (int iter = 0; iter < max_iter; ++iter) {
        const double gnorm = eval.grad.norm();
        if (gnorm <= tol) return theta;
        Eigen::VectorXd step = spd_solve(eval.hess, eval.grad);
        // Near the minimizer the true decrease of a Newton step can round to
        // zero at the objective's value scale while the gradient norm still
        // has digits to go; accept such steps on the gradient norm instead,
        // within a rounding-sized value slack.
        const double slack = 1e-12 * (1.0 + std::abs(eval.value));
        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd cand;
        for (int k = 0; k < 60; ++k) {
            cand = theta - t * step;
            ObjectiveEval trial = objective(cand, false);
            if (std::isfinite(trial.value) &&
                (trial.value <= eval.value ||
                 (trial.value <= eval.value + slack && trial.grad.norm() < gnorm))) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("line search stalled before reaching the gradient tolerance",
                                   gnorm);
        theta = cand;
        eval = objective(theta, true);
    }
    const double gnorm = eval.grad.norm();
    if (gnorm <= tol) return theta;
    throw ConvergenceError("iteration cap reached before the gradient tolerance", gnorm);
}

// Convenience wrappers keyed by model kind (convex kinds only).

inline Eigen::VectorXd fit_logreg_theta(const ConvexData& data, double lambda,
                                        const Eigen::VectorXd& theta0, double tol,
                                        int max_iter = 100) {
    return newton_minimize(
        [&](const Eigen::VectorXd& th, bool hess) { return logreg_objective(th, data, lambda, hess); },
        theta0, tol, max_iter);
}

inline Eigen::VectorXd fit_svm_linear_theta(const ConvexData& data, double lambda,
                                            const Eigen::VectorXd& theta0, double tol,
                                            int max_iter = 100) {
    return newton_minimize(
        [&](const Eigen::VectorXd& th, bool hess) {
            return svm_linear_objective(th, data, lambda, hess);
        },
        theta0, tol, max_iter);
}

inline Eigen::VectorXd fit_svm_rbf_theta(const Eigen::MatrixXd& K, const std::vector<int>& y,
                                         int nc, double lambda, const Eigen::VectorXd& theta0,
                                         double tol, int max_iter = 100) {
    return newton_minimize(
        [&](const Eigen::VectorXd& th, bool hess) {
            return svm_rbf_objective(th, K, y, nc, lambda, hess);
        },
        theta0, tol, max_iter);
}

// Packing between the flat theta vector and the public parameter structs.

inline Eigen::VectorXd pack_linear(const LinearParams& p) {
    const std::size_t d = p.n_features, bs = d + 1;
    Eigen::VectorXd theta(p.n_classes * bs);
    for (std::size_t c = 0; c < p.n_classes; ++c) {
        for (std::size_t j = 0; j < d; ++j) theta(static_cast<Eigen::Index>(c * bs + j)) = p.W[c * d + j];
        theta(static_cast<Eigen::Index>(c * bs + d)) = p.b[c];
    }
    return theta;
}

inline LinearParams unpack_linear(const Eigen::VectorXd& theta, std::size_t d, std::size_t nc) {
    LinearParams p;
    p.n_features = d;
    p.n_classes = nc;
    p.W.resize(nc * d);
    p.b.resize(nc);
    const std::size_t bs = d + 1;
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t j = 0; j < d; ++j) p.W[c * d + j] = theta(static_cast<Eigen::Index>(c * bs + j));
        p.b[c] = theta(static_cast<Eigen::Index>(c * bs + d));
    }
    return p;
}

inline Eigen::VectorXd pack_rbf(const RbfSvmParams& p) {
    const std::size_t m = p.n_support(), bs = m + 1;
    Eigen::VectorXd theta(p.n_classes * bs);
    for (std::size_t c = 0; c < p.n_classes; ++c) {
        for (std::size_t i = 0; i < m; ++i) theta(static_cast<Eigen::Index>(c * bs + i)) = p.alpha[c * m + i];
        theta(static_cast<Eigen::Index>(c * bs + m)) = p.b[c];
    }
    return theta;
}

inline RbfSvmParams unpack_rbf(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                               std::size_t nc, double gamma) {
    RbfSvmParams p;
    p.n_features = static_cast<std::size_t>(X.cols());
    p.n_classes = nc;
    p.gamma = gamma;
    const std::size_t m = static_cast<std::size_t>(X.rows()), bs = m + 1;
    p.support.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        p.support[i].resize(p.n_features);
        for (std::size_t j = 0; j < p.n_features; ++j) p.support[i][j] = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    p.alpha.resize(nc * m);
    p.b.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t i = 0; i < m; ++i) p.alpha[c * m + i] = theta(static_cast<Eigen::Index>(c * bs + i));
        p.b[c] = theta(static_cast<Eigen::Index>(c * bs + m));
    }
    return p;
}

}  // namespace advsec::detail
