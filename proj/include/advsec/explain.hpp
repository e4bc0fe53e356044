#pragma once

// Explanations: feature attributions (integrated gradients, local linear
// surrogate) and prototype scores (influence functions).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "advsec/dataset.hpp"
#include "advsec/detail/convex.hpp"
#include "advsec/error.hpp"
#include "advsec/linalg.hpp"
#include "advsec/model.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

/// Signed per-feature attribution of one model decision.
struct Attribution {
    Tensor per_feature;           ///< one signed score per input feature
    Tensor baseline;              ///< reference input the scores are relative to
    int target_class = 0;         ///< class whose score was explained
    std::string method;           ///< "integrated-gradients" or "linear-surrogate"
};

/// Signed per-training-point influence on one test prediction.
struct InfluenceResult {
    std::vector<double> per_training_point;  ///< positive = upweighting raises test loss
    Tensor test_x;
    int test_y = 0;
};

/// Integrated gradients of the target-class score along the straight path
/// from `baseline` to `x`, with a midpoint Riemann sum over `m_steps` segments:
///
///   IG_i = (x_i - b_i) * (1/m) * sum_k  d score_target / d x_i
///          evaluated at b + ((k - 0.5)/m) * (x - b).
///
/// The attributions sum to score(x) - score(baseline) up to quadrature error.
template <typename Model>
Attribution integrated_gradients(const Model& m, const Tensor& x, const Tensor& baseline,
                                 int target, int m_steps) {
    if (!m.differentiable())
        throw NotDifferentiableError("integrated gradients require an input-differentiable model");
    if (m_steps < 1)
        throw InvalidArgumentError("m_steps must be positive");
    if (target < 0 || target >= m.n_classes())
        throw InvalidArgumentError("target class out of range");
    const std::vector<double> xv = x.to_dense_vector();
    const std::vector<double> bv = baseline.to_dense_vector();
    if (xv.size() != m.n_features() || bv.size() != m.n_features())
        throw ShapeError("x and baseline must both have the model's feature count");

    const std::size_t d = xv.size();
    std::vector<double> acc(d, 0.0);
    std::vector<double> point(d);
    for (int k = 1; k <= m_steps; ++k) {
        const double t = (static_cast<double>(k) - 0.5) / static_cast<double>(m_steps);
        for (std::size_t i = 0; i < d; ++i) point[i] = bv[i] + t * (xv[i] - bv[i]);
        const std::vector<double> g =
            m.input_gradient(Tensor::vector(point), target).to_dense_vector();
        for (std::size_t i = 0; i < d; ++i) acc[i] += g[i];
    }
    for (std::size_t i = 0; i < d; ++i)
        acc[i] *= (xv[i] - bv[i]) / static_cast<double>(m_steps);

    Attribution a;
    a.per_feature = Tensor::vector(acc);
    a.baseline = Tensor::vector(bv);
    a.target_class = target;
    a.method = "integrated-gradients";
    return a;
}

/// Local linear surrogate of the score the model assigns to its own
/// prediction at `x`.  Draws `n_samples` Gaussian perturbations
/// z = x + 0.1 * N(0, I)  (unit per-feature range: inputs are assumed in the
/// min-max-scaled convention), weights each sample by
/// exp(-||z - x||^2 / kernel_width^2), and fits a weighted ridge regression
/// (regularizer 1e-3, unpenalized intercept via weighted centering) of the
/// predicted-class score on z.  The attributions are the fitted coefficients.
/// Works on non-differentiable models; deterministic for a fixed seed.
template <typename Model>
Attribution linear_surrogate(const Model& m, const Tensor& x, int n_samples,
                             double kernel_width, std::uint64_t seed) {
    if (n_samples < 1)
        throw InvalidArgumentError("n_samples must be positive");
    if (!(kernel_width > 0.0))
        throw InvalidArgumentError("kernel_width must be positive");
    const std::vector<double> xv = x.to_dense_vector();
    if (xv.size() != m.n_features())
        throw ShapeError("x must have the model's feature count");

    const int target = m.predict(Tensor::vector(xv));
    const Eigen::Index n = n_samples;
    const Eigen::Index d = static_cast<Eigen::Index>(xv.size());
    constexpr double kPerturbScale = 0.1;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd Z(n, d);       // perturbation offsets z - x
    Eigen::VectorXd s(n);          // target-class scores at the samples
    Eigen::VectorXd w(n);          // locality weights
    std::vector<double> zv(xv.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        double sq = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double off = kPerturbScale * gauss(rng);
            Z(k, i) = off;
            zv[static_cast<std::size_t>(i)] = xv[static_cast<std::size_t>(i)] + off;
            sq += off * off;
        }
        w(k) = std::exp(-sq / (kernel_width * kernel_width));
        s(k) = m.decision_scores(Tensor::vector(zv)).at(static_cast<std::size_t>(target));
    }
    if (w.maxCoeff() < 1e-12)
        throw KernelWidthError("kernel width too small: every sample weight is below 1e-12");

    // Weighted centering absorbs the intercept; ridge on the slope only.
    const double wsum = w.sum();
    const Eigen::RowVectorXd zbar = (w.transpose() * Z) / wsum;
    const double sbar = w.dot(s) / wsum;
    const Eigen::MatrixXd Zc = Z.rowwise() - zbar;
    const Eigen::VectorXd sc = s.array() - sbar;
    Eigen::MatrixXd A = Zc.transpose() * w.asDiagonal() * Zc;
    A.diagonal().array() += 1e-3;
    const Eigen::VectorXd rhs = Zc.transpose() * (w.asDiagonal() * sc);
    const Eigen::VectorXd beta = spd_solve(A, rhs);

    Attribution a;
    a.per_feature = Tensor::vector(from_eigen(beta));
    a.baseline = Tensor::vector(xv);
    a.target_class = target;
    a.method = "linear-surrogate";
    return a;
}

/// Influence of every training point on the loss at one test point, by the
/// classic implicit-function argument at the fitted optimum:
///
///   score_i = -grad_theta L(z_test)^T  H^{-1}  grad_theta L(z_i)
///
/// with H the regularized training Hessian and L the victim family's own
/// per-sample loss.  A positive score means upweighting z_i increases the
/// test loss (a harmful prototype).  Victim must be a smooth convex kind.
inline InfluenceResult influence(const ModelSpec& victim, const Dataset& train,
                                 const Tensor& test_x, int test_y) {
    validate_model_spec(victim);
    if (victim.kind != ModelKind::logreg && victim.kind != ModelKind::svm_linear &&
        victim.kind != ModelKind::svm_rbf)
        throw InvalidSpecError("influence requires a smooth convex victim "
                               "(logreg, svm-linear, or svm-rbf)");
    if (train.n_samples() == 0) throw EmptyDatasetError("influence requires training data");
    if (test_y < 0 || test_y >= train.n_classes)
        throw InvalidArgumentError("test label out of range");
    const std::vector<double> txv = test_x.to_dense_vector();
    if (txv.size() != train.n_features())
        throw ShapeError("test point must have the training feature count");

    const detail::ConvexData data = detail::to_convex_data(train);
    const double lambda = *victim.lambda;
    const Eigen::VectorXd tx = to_eigen(txv);
    const Eigen::Index n = data.X.rows();

    Eigen::VectorXd theta;
    detail::ObjectiveEval ev;
    Eigen::MatrixXd K;  // svm-rbf only
    switch (victim.kind) {
        case ModelKind::logreg: {
            const Eigen::Index P = data.n_classes * (data.X.cols() + 1);
            theta = detail::fit_logreg_theta(data, lambda, Eigen::VectorXd::Zero(P), 1e-10);
            ev = detail::logreg_objective(theta, data, lambda, true);
            break;
        }
        case ModelKind::svm_linear: {
            const Eigen::Index P = data.n_classes * (data.X.cols() + 1);
            theta = detail::fit_svm_linear_theta(data, lambda, Eigen::VectorXd::Zero(P), 1e-10);
            ev = detail::svm_linear_objective(theta, data, lambda, true);
            break;
        }
        default: {
            K = detail::rbf_gram(data.X, *victim.gamma);
            theta = detail::fit_svm_rbf_theta(K, data.y, data.n_classes, lambda,
                                              Eigen::VectorXd::Zero(data.n_classes * (n + 1)),
                                              1e-10);
            ev = detail::svm_rbf_objective(theta, K, data.y, data.n_classes, lambda, true);
            break;
        }
    }

    const double gamma = victim.gamma.value_or(0.0);  // set whenever the rbf branch runs
    auto sample_grad = [&](const Eigen::VectorXd& px, int py) {
        switch (victim.kind) {
            case ModelKind::logreg:
                return detail::logreg_sample_grad(theta, px, py, data.n_classes);
            case ModelKind::svm_linear:
                return detail::svm_linear_sample_grad(theta, px, py, data.n_classes);
            default: {
                Eigen::VectorXd kcol(n);
                for (Eigen::Index i = 0; i < n; ++i)
                    kcol(i) = std::exp(-gamma * (px.transpose() - data.X.row(i)).squaredNorm());
                return detail::svm_rbf_sample_grad(theta, kcol, py, data.n_classes);
            }
        }
    };

    const Eigen::VectorXd u = spd_solve(ev.hess, sample_grad(tx, test_y));
    InfluenceResult r;
    r.per_training_point.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd gi =
            sample_grad(data.X.row(i).transpose(), data.y[static_cast<std::size_t>(i)]);
        r.per_training_point[static_cast<std::size_t>(i)] = -u.dot(gi);
    }
    r.test_x = Tensor::vector(txv);
    r.test_y = test_y;
    return r;
}

}  // namespace advsec
