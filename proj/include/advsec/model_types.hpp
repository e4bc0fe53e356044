#pragma once

// Model zoo declarations: the ModelSpec describing what to train and the
// fitted-parameter containers for each kind. Kept separate from the model
// front-end so the training internals can be shared with the attack and
// explanation modules without circular includes.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "advsec/error.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

enum class ModelKind { logreg, svm_linear, svm_rbf, mlp, random_forest };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::logreg: return "logreg";
        case ModelKind::svm_linear: return "svm-linear";
        case ModelKind::svm_rbf: return "svm-rbf";
        case ModelKind::mlp: return "mlp";
        case ModelKind::random_forest: return "random-forest";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& name) {
    if (name == "logreg") return ModelKind::logreg;
    if (name == "svm-linear") return ModelKind::svm_linear;
    if (name == "svm-rbf") return ModelKind::svm_rbf;
    if (name == "mlp") return ModelKind::mlp;
    if (name == "random-forest") return ModelKind::random_forest;
    throw InvalidSpecError("unknown model kind '" + name + "'");
}

struct ModelSpec {
    ModelKind kind = ModelKind::logreg;
    std::optional<double> lambda;                   // ℓ2 regularization (differentiable kinds)
    std::optional<double> gamma;                    // RBF kernel width (svm-rbf)
    std::optional<std::vector<int>> hidden_sizes;   // mlp only, 1 or 2 layers
    std::optional<int> n_trees;                     // random-forest
    std::optional<int> max_depth;                   // random-forest
    std::uint64_t seed = 0;
};

/// Enforces that kind-specific fields are present exactly when the kind
/// requires them, and that their values are admissible.
inline void validate_model_spec(const ModelSpec& spec) {
    const std::string kind = model_kind_name(spec.kind);
    auto require = [&](bool present, const char* field) {
        if (!present)
            throw InvalidSpecError("model kind '" + kind + "' requires field '" + field + "'");
    };
    auto forbid = [&](bool present, const char* field) {
        if (present)
            throw InvalidSpecError("model kind '" + kind + "' does not accept field '" + field + "'");
    };

    const bool differentiable = spec.kind != ModelKind::random_forest;
    if (differentiable) {
        require(spec.lambda.has_value(), "lambda");
        if (!std::isfinite(*spec.lambda) || *spec.lambda <= 0.0)
            throw InvalidSpecError("lambda must be a positive finite scalar");
    } else {
        forbid(spec.lambda.has_value(), "lambda");
    }

    if (spec.kind == ModelKind::svm_rbf) {
        require(spec.gamma.has_value(), "gamma");
        if (!std::isfinite(*spec.gamma) || *spec.gamma <= 0.0)
            throw InvalidSpecError("gamma must be a positive finite scalar");
    } else {
        forbid(spec.gamma.has_value(), "gamma");
    }

    if (spec.kind == ModelKind::mlp) {
        require(spec.hidden_sizes.has_value(), "hidden_sizes");
        if (spec.hidden_sizes->empty() || spec.hidden_sizes->size() > 2)
            throw InvalidSpecError("hidden_sizes must list 1 or 2 layers");
        for (int h : *spec.hidden_sizes)
            if (h <= 0) throw InvalidSpecError("hidden layer sizes must be positive");
    } else {
        forbid(spec.hidden_sizes.has_value(), "hidden_sizes");
    }

    if (spec.kind == ModelKind::random_forest) {
        require(spec.n_trees.has_value(), "n_trees");
        require(spec.max_depth.has_value(), "max_depth");
        if (*spec.n_trees <= 0) throw InvalidSpecError("n_trees must be positive");
        if (*spec.max_depth <= 0) throw InvalidSpecError("max_depth must be positive");
    } else {
        forbid(spec.n_trees.has_value(), "n_trees");
        forbid(spec.max_depth.has_value(), "max_depth");
    }
}

/// Weights for logreg and one-vs-rest linear SVM heads: per-class rows of W
/// plus a bias, scores_c = W[c]·x + b[c].
struct LinearParams {
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    std::vector<double> W;  // row-major, n_classes x n_features
    std::vector<double> b;  // n_classes

    double weight(std::size_t c, std::size_t j) const { return W[c * n_features + j]; }
};

/// Representer-form RBF SVM: scores_c(x) = Σ_i alpha[c][i]·k(x, sv_i) + b[c]
/// with k(x,y) = exp(−gamma·‖x−y‖²). Support set = entire training set.
struct RbfSvmParams {
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    double gamma = 0.0;
    std::vector<std::vector<double>> support;  // n_support x n_features
    std::vector<double> alpha;                 // row-major, n_classes x n_support
    std::vector<double> b;                     // n_classes

    std::size_t n_support() const { return support.size(); }
    double coeff(std::size_t c, std::size_t i) const { return alpha[c * support.size() + i]; }
};

/// Fully-connected tanh network with a linear (pre-softmax) output layer.
struct MlpParams {
    std::vector<std::size_t> layer_sizes;       // [n_features, hidden..., n_classes]
    std::vector<std::vector<double>> weights;   // per layer, row-major out x in
    std::vector<std::vector<double>> biases;    // per layer, out
};

/// One node of a CART tree. Leaves carry a class distribution; internal nodes
/// route on x[feature] <= threshold.
struct TreeNode {
    int feature = -1;          // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> leaf_distribution;  // class proportions at a leaf
};

struct ForestParams {
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    std::vector<std::vector<TreeNode>> trees;  // node 0 is each tree's root
};

using ModelParams = std::variant<LinearParams, RbfSvmParams, MlpParams, ForestParams>;

namespace detail {

inline double rbf_kernel_sqdist(double sq, double gamma) { return std::exp(-gamma * sq); }

inline double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma) {
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

inline double logsumexp(const std::vector<double>& z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

inline std::vector<double> softmax(const std::vector<double>& z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double s = 0.0;
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - m);
        s += p[i];
    }
    for (double& v : p) v /= s;
    return p;
}

}  // namespace detail

}  // namespace advsec
