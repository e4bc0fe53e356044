#pragma once

// The model zoo: training, decision scores, predictions, analytic input
// gradients, attack-facing losses, and the scaler/classifier chain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "advsec/dataset.hpp"
#include "advsec/detail/convex.hpp"
#include "advsec/error.hpp"
#include "advsec/linalg.hpp"
#include "advsec/model_types.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

namespace detail {

constexpr int kMlpEpochs = 2000;
constexpr double kMlpInitialStep = 0.5;
constexpr double kFitTolerance = 1e-8;

struct MlpForward {
    std::vector<std::vector<double>> activations;  // per layer incl. input
    std::vector<double> logits;
};

inline MlpForward mlp_forward(const MlpParams& p, const std::vector<double>& x) {
    MlpForward fw;
    fw.activations.push_back(x);
    std::vector<double> cur = x;
    const std::size_t n_layers = p.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t out = p.layer_sizes[l + 1], in = p.layer_sizes[l];
        std::vector<double> next(out);
        for (std::size_t r = 0; r < out; ++r) {
            double s = p.biases[l][r];
            const double* wrow = p.weights[l].data() + r * in;
            for (std::size_t c = 0; c < in; ++c) s += wrow[c] * cur[c];
            next[r] = s;
        }
        if (l + 1 < n_layers) {
            for (double& v : next) v = std::tanh(v);
            fw.activations.push_back(next);
        } else {
            fw.logits = next;
        }
        cur = std::move(next);
    }
    return fw;
}

/// Gradient of logits[class_idx] with respect to the input, by backprop.
inline std::vector<double> mlp_input_gradient(const MlpParams& p, const std::vector<double>& x,
                                              int class_idx) {
    MlpForward fw = mlp_forward(p, x);
    const std::size_t n_layers = p.weights.size();
    // delta over the last layer's input activation
    std::vector<double> delta(p.layer_sizes[n_layers - 1]);
    {
        const std::size_t in = p.layer_sizes[n_layers - 1];
        const double* wrow = p.weights[n_layers - 1].data() + static_cast<std::size_t>(class_idx) * in;
        for (std::size_t c = 0; c < in; ++c) delta[c] = wrow[c];
    }
    for (std::size_t l = n_layers - 1; l-- > 0;) {
        // delta currently sits after the tanh of layer l; pull it through.
        const auto& act = fw.activations[l + 1];
        for (std::size_t r = 0; r < delta.size(); ++r) delta[r] *= 1.0 - act[r] * act[r];
        const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        std::vector<double> prev(in, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            const double* wrow = p.weights[l].data() + r * in;
            for (std::size_t c = 0; c < in; ++c) prev[c] += wrow[c] * delta[r];
        }
        delta = std::move(prev);
    }
    return delta;
}

struct MlpGradients {
    std::vector<std::vector<double>> dW, db;
    double loss = 0.0;
};

/// Mean cross-entropy over the batch plus (lambda/2)·‖theta‖², with gradients.
inline MlpGradients mlp_loss_and_gradients(const MlpParams& p,
                                           const std::vector<std::vector<double>>& X,
                                           const std::vector<int>& y, double lambda) {
    MlpGradients g;
    const std::size_t n_layers = p.weights.size();
    g.dW.resize(n_layers);
    g.db.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        g.dW[l].assign(p.weights[l].size(), 0.0);
        g.db[l].assign(p.biases[l].size(), 0.0);
    }
    const double inv_n = 1.0 / static_cast<double>(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        MlpForward fw = mlp_forward(p, X[i]);
        g.loss += (logsumexp(fw.logits) - fw.logits[static_cast<std::size_t>(y[i])]) * inv_n;
        std::vector<double> delta = softmax(fw.logits);
        delta[static_cast<std::size_t>(y[i])] -= 1.0;
        for (double& v : delta) v *= inv_n;
        for (std::size_t l = n_layers; l-- > 0;) {
            const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
            const auto& a_in = fw.activations[l];
            for (std::size_t r = 0; r < out; ++r) {
                g.db[l][r] += delta[r];
                double* dwrow = g.dW[l].data() + r * in;
                for (std::size_t c = 0; c < in; ++c) dwrow[c] += delta[r] * a_in[c];
            }
            if (l == 0) break;
            std::vector<double> prev(in, 0.0);
            for (std::size_t r = 0; r < out; ++r) {
                const double* wrow = p.weights[l].data() + r * in;
                for (std::size_t c = 0; c < in; ++c) prev[c] += wrow[c] * delta[r];
            }
            const auto& act = fw.activations[l];
            for (std::size_t c = 0; c < in; ++c) prev[c] *= 1.0 - act[c] * act[c];
            delta = std::move(prev);
        }
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t k = 0; k < p.weights[l].size(); ++k) {
            g.loss += 0.5 * lambda * p.weights[l][k] * p.weights[l][k];
            g.dW[l][k] += lambda * p.weights[l][k];
        }
        for (std::size_t k = 0; k < p.biases[l].size(); ++k) {
            g.loss += 0.5 * lambda * p.biases[l][k] * p.biases[l][k];
            g.db[l][k] += lambda * p.biases[l][k];
        }
    }
    return g;
}

inline MlpParams fit_mlp(const ModelSpec& spec, const Dataset& ds) {
    MlpParams p;
    p.layer_sizes.push_back(ds.n_features());
    for (int h : *spec.hidden_sizes) p.layer_sizes.push_back(static_cast<std::size_t>(h));
    p.layer_sizes.push_back(static_cast<std::size_t>(ds.n_classes));
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
        const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> W(out * in);
        for (double& w : W) w = gauss(rng) * scale;
        p.weights.push_back(std::move(W));
        p.biases.emplace_back(out, 0.0);
    }

    std::vector<std::vector<double>> X(ds.n_samples());
    for (std::size_t i = 0; i < ds.n_samples(); ++i) X[i] = ds.X.row(i).to_dense_vector();

    const double lambda = *spec.lambda;
    double step = kMlpInitialStep;
    MlpGradients g = mlp_loss_and_gradients(p, X, ds.y, lambda);
    for (int epoch = 0; epoch < kMlpEpochs; ++epoch) {
        MlpParams cand = p;
        for (std::size_t l = 0; l < p.weights.size(); ++l) {
            for (std::size_t k = 0; k < p.weights[l].size(); ++k)
                cand.weights[l][k] -= step * g.dW[l][k];
            for (std::size_t k = 0; k < p.biases[l].size(); ++k)
                cand.biases[l][k] -= step * g.db[l][k];
        }
        MlpGradients gc = mlp_loss_and_gradients(cand, X, ds.y, lambda);
        if (std::isfinite(gc.loss) && gc.loss <= g.loss) {
            p = std::move(cand);
            g = std::move(gc);
        } else {
            step *= 0.5;  // sticky: the smaller step applies from here on
            if (step < 1e-12) break;
        }
    }
    return p;
}

// --- CART forest -----------------------------------------------------------

inline double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    double imp = 1.0;
    for (std::size_t c : counts) {
        const double f = static_cast<double>(c) / static_cast<double>(total);
        imp -= f * f;
    }
    return imp;
}

struct TreeBuilder {
    const std::vector<std::vector<double>>& X;
    const std::vector<int>& y;
    int n_classes;
    int max_depth;
    std::size_t n_sub_features;
    std::mt19937_64& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t> idx, int depth) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
        for (std::size_t i : idx) counts[static_cast<std::size_t>(y[i])]++;
        const std::size_t total = idx.size();
        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](std::size_t c) { return c > 0; }) <= 1;

        int best_feature = -1;
        double best_threshold = 0.0, best_gain = 0.0;
        if (!pure && depth < max_depth && total >= 2) {
            const std::size_t d = X[0].size();
            std::vector<std::size_t> features(d);
            std::iota(features.begin(), features.end(), std::size_t{0});
            // partial Fisher-Yates draw of n_sub_features distinct features
            const std::size_t n_pick = std::min(n_sub_features, d);
            for (std::size_t k = 0; k < n_pick; ++k) {
                std::uniform_int_distribution<std::size_t> u(k, d - 1);
                std::swap(features[k], features[u(rng)]);
            }
            std::vector<std::size_t> chosen(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(n_pick));
            std::sort(chosen.begin(), chosen.end());
            const double parent_imp = gini(counts, total);
            for (std::size_t j : chosen) {
                std::vector<std::pair<double, int>> vals(total);
                for (std::size_t k = 0; k < total; ++k) vals[k] = {X[idx[k]][j], y[idx[k]]};
                std::sort(vals.begin(), vals.end());
                std::vector<std::size_t> left(static_cast<std::size_t>(n_classes), 0);
                std::vector<std::size_t> right = counts;
                for (std::size_t k = 0; k + 1 < total; ++k) {
                    left[static_cast<std::size_t>(vals[k].second)]++;
                    right[static_cast<std::size_t>(vals[k].second)]--;
                    if (vals[k].first == vals[k + 1].first) continue;
                    const std::size_t nl = k + 1, nr = total - nl;
                    const double gain = parent_imp -
                                        (static_cast<double>(nl) / static_cast<double>(total)) * gini(left, nl) -
                                        (static_cast<double>(nr) / static_cast<double>(total)) * gini(right, nr);
                    if (gain > best_gain + 1e-15) {
                        best_gain = gain;
                        best_feature = static_cast<int>(j);
                        best_threshold = 0.5 * (vals[k].first + vals[k + 1].first);
                    }
                }
            }
        }

        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (best_feature < 0) {
            nodes[static_cast<std::size_t>(node_id)].leaf_distribution.resize(static_cast<std::size_t>(n_classes));
            for (int c = 0; c < n_classes; ++c)
                nodes[static_cast<std::size_t>(node_id)].leaf_distribution[static_cast<std::size_t>(c)] =
                    static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
            return node_id;
        }
        std::vector<std::size_t> li, ri;
        for (std::size_t i : idx)
            (X[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? li : ri).push_back(i);
        nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = build(std::move(li), depth + 1);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        const int r = build(std::move(ri), depth + 1);
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

inline ForestParams fit_forest(const ModelSpec& spec, const Dataset& ds) {
    ForestParams p;
    p.n_features = ds.n_features();
    p.n_classes = static_cast<std::size_t>(ds.n_classes);
    std::vector<std::vector<double>> X(ds.n_samples());
    for (std::size_t i = 0; i < ds.n_samples(); ++i) X[i] = ds.X.row(i).to_dense_vector();
    const std::size_t n = X.size();
    const std::size_t n_sub = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(p.n_features)))));
    for (int t = 0; t < *spec.n_trees; ++t) {
        std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = pick(rng);
        TreeBuilder builder{X, ds.y, ds.n_classes, *spec.max_depth, n_sub, rng, {}};
        builder.build(std::move(idx), 0);
        p.trees.push_back(std::move(builder.nodes));
    }
    return p;
}

inline const std::vector<double>& forest_leaf(const std::vector<TreeNode>& tree, const Tensor& x) {
    int node = 0;
    while (tree[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree[static_cast<std::size_t>(node)];
        node = x.at(static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left : nd.right;
    }
    return tree[static_cast<std::size_t>(node)].leaf_distribution;
}

}  // namespace detail

/// Immutable fitted classifier. Thread-safe for concurrent reads.
class TrainedModel {
public:
    TrainedModel() = default;
    TrainedModel(ModelSpec spec, ModelParams params, std::size_t n_features, int n_classes)
        : spec_(std::move(spec)), params_(std::move(params)), n_features_(n_features),
          n_classes_(n_classes) {}

    const ModelSpec& spec() const { return spec_; }
    const ModelParams& params() const { return params_; }
    std::size_t n_features() const { return n_features_; }
    int n_classes() const { return n_classes_; }
    bool differentiable() const { return spec_.kind != ModelKind::random_forest; }

    Tensor decision_scores(const Tensor& x) const {
        check_input(x);
        std::vector<double> z(static_cast<std::size_t>(n_classes_), 0.0);
        if (const auto* lin = std::get_if<LinearParams>(&params_)) {
            for (int c = 0; c < n_classes_; ++c) {
                double s = lin->b[static_cast<std::size_t>(c)];
                const double* wrow = lin->W.data() + static_cast<std::size_t>(c) * n_features_;
                x.for_each_nonzero([&](std::size_t j, double v) { s += wrow[j] * v; });
                z[static_cast<std::size_t>(c)] = s;
            }
        } else if (const auto* rbf = std::get_if<RbfSvmParams>(&params_)) {
            const std::size_t m = rbf->n_support();
            for (std::size_t i = 0; i < m; ++i) {
                const double k = detail::rbf_kernel_sqdist(squared_distance(x, rbf->support[i]), rbf->gamma);
                for (int c = 0; c < n_classes_; ++c)
                    z[static_cast<std::size_t>(c)] += rbf->coeff(static_cast<std::size_t>(c), i) * k;
            }
            for (int c = 0; c < n_classes_; ++c) z[static_cast<std::size_t>(c)] += rbf->b[static_cast<std::size_t>(c)];
        } else if (const auto* mlp = std::get_if<MlpParams>(&params_)) {
            z = detail::mlp_forward(*mlp, x.to_dense_vector()).logits;
        } else {
            const auto& forest = std::get<ForestParams>(params_);
            for (const auto& tree : forest.trees) {
                const auto& leaf = detail::forest_leaf(tree, x);
                for (int c = 0; c < n_classes_; ++c) z[static_cast<std::size_t>(c)] += leaf[static_cast<std::size_t>(c)];
            }
            for (double& v : z) v /= static_cast<double>(forest.trees.size());
        }
        return Tensor::vector(z);
    }

    int predict(const Tensor& x) const {
        const auto z = decision_scores(x).dense_values();
        int best = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(best)]) best = c;
        return best;
    }

    Tensor input_gradient(const Tensor& x, int class_idx) const {
        if (!differentiable())
            throw NotDifferentiableError("random-forest models do not expose input gradients");
        check_input(x);
        if (class_idx < 0 || class_idx >= n_classes_)
            throw InvalidArgumentError("class index out of range");
        std::vector<double> g(n_features_, 0.0);
        if (const auto* lin = std::get_if<LinearParams>(&params_)) {
            const double* wrow = lin->W.data() + static_cast<std::size_t>(class_idx) * n_features_;
            std::copy(wrow, wrow + n_features_, g.begin());
        } else if (const auto* rbf = std::get_if<RbfSvmParams>(&params_)) {
            const auto xd = x.to_dense_vector();
            for (std::size_t i = 0; i < rbf->n_support(); ++i) {
                const double k = detail::rbf_kernel(xd, rbf->support[i], rbf->gamma);
                const double a = rbf->coeff(static_cast<std::size_t>(class_idx), i);
                for (std::size_t j = 0; j < n_features_; ++j)
                    g[j] += a * (-2.0 * rbf->gamma) * (xd[j] - rbf->support[i][j]) * k;
            }
        } else {
            const auto& mlp = std::get<MlpParams>(params_);
            g = detail::mlp_input_gradient(mlp, x.to_dense_vector(), class_idx);
        }
        return Tensor::vector(g);
    }

private:
    void check_input(const Tensor& x) const {
        if (x.ndim() != 1 || x.size() != n_features_)
            throw ShapeError("model expects a vector of " + std::to_string(n_features_) +
                             " features");
    }

    ModelSpec spec_;
    ModelParams params_;
    std::size_t n_features_ = 0;
    int n_classes_ = 0;
};

inline TrainedModel fit(const ModelSpec& spec, const Dataset& ds) {
    validate_model_spec(spec);
    if (ds.n_classes < 2) throw InvalidArgumentError("fit requires n_classes >= 2");
    std::set<int> present(ds.y.begin(), ds.y.end());
    if (present.size() < 2)
        throw DegenerateDataError("training data contains a single class; cannot fit " +
                                  std::string(model_kind_name(spec.kind)));

    switch (spec.kind) {
        case ModelKind::logreg: {
            auto data = detail::to_convex_data(ds);
            const Eigen::Index P = static_cast<Eigen::Index>(ds.n_classes) *
                                   (static_cast<Eigen::Index>(ds.n_features()) + 1);
            auto theta = detail::fit_logreg_theta(data, *spec.lambda, Eigen::VectorXd::Zero(P),
                                                  detail::kFitTolerance);
            return TrainedModel(spec, detail::unpack_linear(theta, ds.n_features(),
                                                            static_cast<std::size_t>(ds.n_classes)),
                                ds.n_features(), ds.n_classes);
        }
        case ModelKind::svm_linear: {
            auto data = detail::to_convex_data(ds);
            const Eigen::Index P = static_cast<Eigen::Index>(ds.n_classes) *
                                   (static_cast<Eigen::Index>(ds.n_features()) + 1);
            auto theta = detail::fit_svm_linear_theta(data, *spec.lambda, Eigen::VectorXd::Zero(P),
                                                      detail::kFitTolerance);
            return TrainedModel(spec, detail::unpack_linear(theta, ds.n_features(),
                                                            static_cast<std::size_t>(ds.n_classes)),
                                ds.n_features(), ds.n_classes);
        }
        case ModelKind::svm_rbf: {
            auto data = detail::to_convex_data(ds);
            const Eigen::MatrixXd K = detail::rbf_gram(data.X, *spec.gamma);
            const Eigen::Index P = static_cast<Eigen::Index>(ds.n_classes) * (K.rows() + 1);
            auto theta = detail::fit_svm_rbf_theta(K, data.y, ds.n_classes, *spec.lambda,
                                                   Eigen::VectorXd::Zero(P), detail::kFitTolerance);
            return TrainedModel(spec,
                                detail::unpack_rbf(theta, data.X,
                                                   static_cast<std::size_t>(ds.n_classes), *spec.gamma),
                                ds.n_features(), ds.n_classes);
        }
        case ModelKind::mlp:
            return TrainedModel(spec, detail::fit_mlp(spec, ds), ds.n_features(), ds.n_classes);
        case ModelKind::random_forest:
            return TrainedModel(spec, detail::fit_forest(spec, ds), ds.n_features(), ds.n_classes);
    }
    throw InvalidSpecError("unknown model kind");
}

// ---------------------------------------------------------------------------
// Attack-facing losses on decision scores.
// ---------------------------------------------------------------------------

enum class LossKind { cross_entropy, cw_logit_diff };

struct LossSpec {
    LossKind kind = LossKind::cross_entropy;
    std::optional<int> target_label;  // required for cw-logit-diff
    double kappa = 0.0;               // cw confidence margin
};

inline void validate_loss_spec(const LossSpec& spec, int n_classes) {
    if (!std::isfinite(spec.kappa) || spec.kappa < 0.0)
        throw InvalidSpecError("kappa must be a non-negative finite scalar");
    if (spec.target_label && (*spec.target_label < 0 || *spec.target_label >= n_classes))
        throw InvalidSpecError("target_label out of range");
    if (spec.kind == LossKind::cw_logit_diff && !spec.target_label)
        throw InvalidSpecError("cw-logit-diff loss requires target_label");
}

/// Loss of the model's scores at x against label y, with its input gradient.
/// Cross-entropy uses y; the CW logit-difference loss uses spec.target_label.
template <typename M>
std::pair<double, Tensor> loss_value_and_gradient(const M& m, const Tensor& x, int y,
                                                  const LossSpec& spec) {
    validate_loss_spec(spec, m.n_classes());
    const auto z = m.decision_scores(x).dense_values();
    const int nc = m.n_classes();
    if (spec.kind == LossKind::cross_entropy) {
        if (y < 0 || y >= nc) throw InvalidArgumentError("label out of range");
        const double value = detail::logsumexp(z) - z[static_cast<std::size_t>(y)];
        const auto p = detail::softmax(z);
        std::vector<double> g(m.n_features(), 0.0);
        for (int c = 0; c < nc; ++c) {
            const double r = p[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
            if (r == 0.0) continue;
            const auto gc = m.input_gradient(x, c).dense_values();
            for (std::size_t j = 0; j < g.size(); ++j) g[j] += r * gc[j];
        }
        return {value, Tensor::vector(g)};
    }
    // cw-logit-diff: max(max_{i != t} z_i − z_t, −kappa)
    const int t = *spec.target_label;
    int rival = (t == 0) ? 1 : 0;
    for (int c = 0; c < nc; ++c)
        if (c != t && z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(rival)]) rival = c;
    const double margin = z[static_cast<std::size_t>(rival)] - z[static_cast<std::size_t>(t)];
    if (margin <= -spec.kappa)
        return {-spec.kappa, Tensor::vector(std::vector<double>(m.n_features(), 0.0))};
    const auto gr = m.input_gradient(x, rival).dense_values();
    const auto gt = m.input_gradient(x, t).dense_values();
    std::vector<double> g(m.n_features());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = gr[j] - gt[j];
    return {margin, Tensor::vector(g)};
}

// ---------------------------------------------------------------------------
// Min-max scaler and the scaler+model chain.
// ---------------------------------------------------------------------------

/// Per-feature affine map of the training range onto [0,1]. Constant features
/// map to 0.5 and contribute zero to the chain Jacobian.
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t n_features() const { return min.size(); }

    std::vector<double> transform(const Tensor& x) const {
        if (x.ndim() != 1 || x.size() != min.size())
            throw ShapeError("scaler expects a vector of " + std::to_string(min.size()) +
                             " features");
        const auto xd = x.to_dense_vector();
        std::vector<double> out(xd.size());
        for (std::size_t j = 0; j < xd.size(); ++j)
            out[j] = max[j] > min[j] ? (xd[j] - min[j]) / (max[j] - min[j]) : 0.5;
        return out;
    }

    double jacobian_diag(std::size_t j) const {
        return max[j] > min[j] ? 1.0 / (max[j] - min[j]) : 0.0;
    }
};

inline MinMaxScaler fit_scaler(const Dataset& ds) {
    MinMaxScaler s;
    const std::size_t d = ds.n_features();
    s.min.assign(d, std::numeric_limits<double>::infinity());
    s.max.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
        const auto row = ds.X.row(i).to_dense_vector();
        for (std::size_t j = 0; j < d; ++j) {
            s.min[j] = std::min(s.min[j], row[j]);
            s.max[j] = std::max(s.max[j], row[j]);
        }
    }
    return s;
}

/// A preprocessing scaler chained in front of a trained model; exposes the
/// same scoring interface with end-to-end gradients via the chain rule.
class ModuleChain {
public:
    ModuleChain() = default;
    ModuleChain(TrainedModel model, MinMaxScaler scaler)
        : model_(std::move(model)), scaler_(std::move(scaler)) {
        if (scaler_.n_features() != model_.n_features())
            throw ShapeError("scaler feature count does not match the model");
    }

    const TrainedModel& model() const { return model_; }
    const MinMaxScaler& scaler() const { return scaler_; }
    std::size_t n_features() const { return model_.n_features(); }
    int n_classes() const { return model_.n_classes(); }
    bool differentiable() const { return model_.differentiable(); }

    Tensor decision_scores(const Tensor& x) const {
        return model_.decision_scores(Tensor::vector(scaler_.transform(x)));
    }

    int predict(const Tensor& x) const {
        return model_.predict(Tensor::vector(scaler_.transform(x)));
    }

    Tensor input_gradient(const Tensor& x, int class_idx) const {
        const Tensor inner = Tensor::vector(scaler_.transform(x));
        auto g = model_.input_gradient(inner, class_idx).dense_values();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] *= scaler_.jacobian_diag(j);
        return Tensor::vector(g);
    }

private:
    TrainedModel model_;
    MinMaxScaler scaler_;
};

inline ModuleChain chain(TrainedModel model, MinMaxScaler scaler) {
    return ModuleChain(std::move(model), std::move(scaler));
}

inline std::pair<Tensor, Tensor> chain_scores_and_gradient(const ModuleChain& c, const Tensor& x,
                                                           int class_idx) {
    return {c.decision_scores(x), c.input_gradient(x, class_idx)};
}

}  // namespace advsec
