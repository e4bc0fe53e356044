#pragma once

// Evasion attacks, training-time poisoning via implicit differentiation, and
// security-evaluation curves. Attacks are phrased as constrained minimization
// problems handed to the solvers in optim.hpp, so any solver can drive any
// attack whose model supports it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "advsec/dataset.hpp"
#include "advsec/detail/convex.hpp"
#include "advsec/error.hpp"
#include "advsec/linalg.hpp"
#include "advsec/model.hpp"
#include "advsec/optim.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

// ---------------------------------------------------------------------------
// Evasion.
// ---------------------------------------------------------------------------

/// Declarative description of an evasion attack. The perturbation budget is
/// an epsilon-ball in the given norm around the clean input; a patch mask
/// restricts the perturbation to the masked coordinates (unbounded there when
/// epsilon is absent); input_bounds clamps every coordinate to a global box.
struct EvasionSpec {
    LossSpec loss;
    Norm norm = Norm::l2;
    std::optional<double> epsilon;
    std::optional<std::vector<bool>> patch_mask;
    std::optional<std::pair<double, double>> input_bounds;
};

inline void validate_evasion_spec(const EvasionSpec& spec, std::size_t n_features,
                                  int n_classes) {
    validate_loss_spec(spec.loss, n_classes);
    if (spec.norm != Norm::l2 && spec.norm != Norm::linf)
        throw InvalidSpecError("evasion norm must be l2 or linf");
    if (!spec.epsilon && !spec.patch_mask)
        throw InvalidSpecError("evasion spec requires epsilon, a patch mask, or both");
    if (spec.epsilon && (!std::isfinite(*spec.epsilon) || *spec.epsilon < 0.0))
        throw InvalidSpecError("epsilon must be a non-negative finite scalar");
    if (spec.patch_mask && spec.patch_mask->size() != n_features)
        throw InvalidSpecError("patch_mask length must equal the feature count");
    if (spec.input_bounds && !(spec.input_bounds->first <= spec.input_bounds->second))
        throw InvalidSpecError("input_bounds requires lo <= hi");
}

struct AttackResult {
    Tensor x_adv;
    bool success = false;
    int initial_label = 0;
    int final_label = 0;
    SolverTrace trace;
    // Decision scores recomputed at every trace point; same length as
    // trace.points. Powers the per-iteration confidence plots.
    std::vector<std::vector<double>> per_iteration_scores;
};

namespace detail {

/// Objective value only (no input gradients); used for solver probe steps.
template <typename M>
double loss_value(const M& m, const Tensor& x, int y, const LossSpec& spec) {
    const auto z = m.decision_scores(x).dense_values();
    if (spec.kind == LossKind::cross_entropy)
        return logsumexp(z) - z[static_cast<std::size_t>(y)];
    const int t = *spec.target_label;
    const int nc = static_cast<int>(z.size());
    int rival = (t == 0) ? 1 : 0;
    for (int c = 0; c < nc; ++c)
        if (c != t && z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(rival)]) rival = c;
    const double margin = z[static_cast<std::size_t>(rival)] - z[static_cast<std::size_t>(t)];
    return std::max(margin, -spec.kappa);
}

/// Feasible set of an evasion attack around the clean input x: the
/// epsilon-ball (restricted to the patch when masked) intersected with the
/// global input box.
inline Constraint evasion_constraint(const EvasionSpec& spec, const std::vector<double>& x) {
    const auto ball = [&](std::vector<double> center) {
        return spec.norm == Norm::l2 ? Constraint::l2_ball(std::move(center), *spec.epsilon)
                                     : Constraint::linf_ball(std::move(center), *spec.epsilon);
    };
    const auto bounds_box = [&](std::size_t dim) {
        return Constraint::box(std::vector<double>(dim, spec.input_bounds->first),
                               std::vector<double>(dim, spec.input_bounds->second));
    };

    if (spec.patch_mask) {
        std::vector<double> sub;
        for (std::size_t j = 0; j < x.size(); ++j)
            if ((*spec.patch_mask)[j]) sub.push_back(x[j]);
        Constraint inner = [&]() {
            if (spec.epsilon && spec.input_bounds)
                return Constraint::intersection(ball(sub), bounds_box(sub.size()));
            if (spec.epsilon) return ball(sub);
            if (spec.input_bounds) return bounds_box(sub.size());
            // Unbounded patch: the masked coordinates may move freely.
            const double inf = std::numeric_limits<double>::infinity();
            return Constraint::box(std::vector<double>(sub.size(), -inf),
                                   std::vector<double>(sub.size(), inf));
        }();
        return Constraint::masked(std::move(inner), *spec.patch_mask, x);
    }

    Constraint b = ball(x);
    if (spec.input_bounds) return Constraint::intersection(std::move(b), bounds_box(x.size()));
    return b;
}

/// Core evasion run with an explicit start point (used by the warm-start
/// nesting of security_evaluation; the public entry starts at x itself).
template <typename M>
AttackResult run_evasion_from(const M& m, const Tensor& x, const Tensor& x0, int y_true,
                              const EvasionSpec& spec, const SolverConfig& cfg) {
    validate_evasion_spec(spec, m.n_features(), m.n_classes());
    validate_solver_config(cfg);
    if (x.ndim() != 1 || x.size() != m.n_features())
        throw ShapeError("run_evasion expects a vector of " + std::to_string(m.n_features()) +
                         " features");
    if (y_true < 0 || y_true >= m.n_classes())
        throw InvalidArgumentError("y_true out of range");
    const bool targeted = spec.loss.target_label.has_value();
    if (targeted && *spec.loss.target_label == y_true)
        throw InvalidSpecError("targeted attack requires target_label != y_true");
    if (cfg.solver != SolverKind::random_search && !m.differentiable())
        throw NotDifferentiableError("gradient-based solver requires a differentiable model; "
                                     "use random-search");

    const LossSpec ls = spec.loss;
    // Untargeted attacks maximize the true-label cross-entropy, so the solver
    // minimizes its negation; targeted attacks minimize toward the target.
    const double sign = targeted ? 1.0 : -1.0;
    const int label = targeted ? *ls.target_label : y_true;
    const int target = targeted ? *ls.target_label : -1;

    AttackResult res;
    res.initial_label = m.predict(x);

    bool empty_patch = false;
    if (spec.patch_mask)
        empty_patch = std::none_of(spec.patch_mask->begin(), spec.patch_mask->end(),
                                   [](bool b) { return b; });
    if ((spec.epsilon && *spec.epsilon == 0.0) || empty_patch) {
        // Degenerate budget: no feasible perturbation, so the clean point is
        // the attack's output.
        res.x_adv = x;
        res.final_label = res.initial_label;
        res.success = targeted ? res.final_label == target : res.final_label != y_true;
        res.trace.points = {x.to_dense_vector()};
        res.trace.losses = {sign * loss_value(m, x, label, ls)};
        res.trace.n_fun_evals = 1;
        res.trace.stop_reason = "tol-reached";
        res.per_iteration_scores = {m.decision_scores(x).dense_values()};
        return res;
    }

    Problem prob;
    prob.constraint = evasion_constraint(spec, x.to_dense_vector());
    const M* mp = &m;
    prob.objective = [mp, ls, label, sign](const Tensor& z) {
        return sign * loss_value(*mp, z, label, ls);
    };
    if (m.differentiable()) {
        prob.gradient = [mp, ls, label, sign](const Tensor& z) {
            auto [value, grad] = loss_value_and_gradient(*mp, z, label, ls);
            (void)value;
            if (sign < 0.0) {
                auto g = grad.dense_values();
                for (double& v : g) v = -v;
                return Tensor::vector(std::move(g));
            }
            return grad;
        };
    }

    auto [best, trace] = solve(prob, x0, cfg);
    res.x_adv = std::move(best);
    res.trace = std::move(trace);
    res.final_label = m.predict(res.x_adv);
    res.success = targeted ? res.final_label == target : res.final_label != y_true;
    res.per_iteration_scores.reserve(res.trace.points.size());
    for (const auto& pt : res.trace.points)
        res.per_iteration_scores.push_back(m.decision_scores(Tensor::vector(pt)).dense_values());
    return res;
}

}  // namespace detail

/// Attack a single input: minimize the configured loss over the spec's
/// feasible set, starting from the clean point.
template <typename M>
AttackResult run_evasion(const M& m, const Tensor& x, int y_true, const EvasionSpec& spec,
                         const SolverConfig& cfg) {
    return detail::run_evasion_from(m, x, x, y_true, spec, cfg);
}

// ---------------------------------------------------------------------------
// Security-evaluation curves.
// ---------------------------------------------------------------------------

struct SecurityEvalCurve {
    std::vector<double> eps_grid;
    std::vector<double> accuracy_at_eps;
    std::vector<double> mean_confidence_drop;  // mean decrease of the true-class score
    EvasionSpec spec;                          // provenance (epsilon comes from the grid)
    SolverConfig solver;                       // provenance
};

/// Accuracy of a scoring module over a labeled dataset.
template <typename M>
double evaluate_accuracy(const M& m, const Dataset& ds) {
    if (ds.n_samples() == 0) throw EmptyDatasetError("evaluate_accuracy: empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
        if (m.predict(ds.X.row(i)) == ds.y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.n_samples());
}

/// Attack every test sample at each budget of eps_grid, warm-starting each
/// budget from the previous one's adversarial point. Budget nesting plus an
/// evasion latch make accuracy_at_eps non-increasing by construction.
template <typename M>
SecurityEvalCurve security_evaluation(const M& m, const Dataset& test, const EvasionSpec& spec,
                                      const std::vector<double>& eps_grid,
                                      const SolverConfig& cfg) {
    if (eps_grid.empty() || eps_grid.front() != 0.0)
        throw InvalidArgumentError("eps_grid must start at 0");
    for (std::size_t j = 0; j < eps_grid.size(); ++j) {
        if (!std::isfinite(eps_grid[j]))
            throw InvalidArgumentError("eps_grid values must be finite");
        if (j > 0 && !(eps_grid[j] > eps_grid[j - 1]))
            throw InvalidArgumentError("eps_grid must be strictly increasing");
    }
    if (test.n_samples() == 0) throw EmptyDatasetError("security_evaluation: empty test set");
    {
        EvasionSpec probe = spec;
        probe.epsilon = 1.0;  // grid supplies the budget; validate the rest
        validate_evasion_spec(probe, m.n_features(), m.n_classes());
    }
    validate_solver_config(cfg);
    if (cfg.solver != SolverKind::random_search && !m.differentiable())
        throw NotDifferentiableError("gradient-based solver requires a differentiable model; "
                                     "use random-search");

    const std::size_t n = test.n_samples();
    const std::size_t g = eps_grid.size();
    const bool targeted = spec.loss.target_label.has_value();
    std::vector<double> correct_at(g, 0.0), drop_at(g, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const Tensor xi = test.X.row(i);
        const int yi = test.y[i];
        const auto clean_scores = m.decision_scores(xi).dense_values();
        const double clean_conf = clean_scores[static_cast<std::size_t>(yi)];
        bool evaded = m.predict(xi) != yi;
        if (!evaded) correct_at[0] += 1.0;

        // A targeted spec cannot be posed for samples already of the target
        // class; they are left unattacked and stay at their clean state.
        if (targeted && *spec.loss.target_label == yi) {
            for (std::size_t j = 1; j < g; ++j)
                if (!evaded) correct_at[j] += 1.0;
            continue;
        }

        SolverConfig sample_cfg = cfg;
        if (sample_cfg.seed) *sample_cfg.seed += i;  // decorrelate stochastic solvers

        Tensor z = xi;
        for (std::size_t j = 1; j < g; ++j) {
            EvasionSpec step = spec;
            step.epsilon = eps_grid[j];
            AttackResult r = detail::run_evasion_from(m, xi, z, yi, step, sample_cfg);
            z = r.x_adv;
            // Latch: a point evaded at a smaller budget remains feasible (and
            // counted as evaded) at every larger one.
            evaded = evaded || r.final_label != yi;
            if (!evaded) correct_at[j] += 1.0;
            const auto s = m.decision_scores(z).dense_values();
            drop_at[j] += clean_conf - s[static_cast<std::size_t>(yi)];
        }
    }

    SecurityEvalCurve curve;
    curve.eps_grid = eps_grid;
    curve.spec = spec;
    curve.solver = cfg;
    curve.accuracy_at_eps.resize(g);
    curve.mean_confidence_drop.resize(g);
    for (std::size_t j = 0; j < g; ++j) {
        curve.accuracy_at_eps[j] = correct_at[j] / static_cast<double>(n);
        curve.mean_confidence_drop[j] = drop_at[j] / static_cast<double>(n);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Poisoning.
// ---------------------------------------------------------------------------

/// Training-time attack description. The victim must be one of the smooth
/// convex kinds (logreg, svm-linear, svm-rbf) so the training problem can be
/// implicitly differentiated. `seed` draws the training points whose
/// flipped-label copies initialize the poison points.
struct PoisoningSpec {
    ModelSpec victim;
    int n_poison = 0;
    int poison_label = 0;
    std::vector<std::pair<double, double>> feature_box;
    SolverConfig solver;
    std::uint64_t seed = 0;
};

inline void validate_poisoning_spec(const PoisoningSpec& spec, const Dataset& train) {
    validate_model_spec(spec.victim);
    if (spec.victim.kind != ModelKind::logreg && spec.victim.kind != ModelKind::svm_linear &&
        spec.victim.kind != ModelKind::svm_rbf)
        throw InvalidSpecError("poisoning victim must be a smooth convex kind "
                               "(logreg, svm-linear, svm-rbf)");
    if (spec.n_poison < 0) throw InvalidSpecError("n_poison must be non-negative");
    if (static_cast<double>(spec.n_poison) > 0.2 * static_cast<double>(train.n_samples()))
        throw InvalidSpecError("n_poison exceeds the cap of 20% of the training size");
    if (spec.poison_label < 0 || spec.poison_label >= train.n_classes)
        throw InvalidSpecError("poison_label out of range");
    if (spec.feature_box.size() != train.n_features())
        throw InvalidSpecError("feature_box must give (lo, hi) per feature");
    for (const auto& [lo, hi] : spec.feature_box)
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi))
            throw InvalidSpecError("feature_box requires finite lo <= hi per feature");
}

namespace detail {

inline constexpr double kPoisonFitTolerance = 1e-10;

/// Victim state for implicit-differentiation poisoning: the training set
/// carries the mutable poison point as its last row, and retraining warm
/// starts from the previous minimizer.
struct PoisonModel {
    ModelKind kind = ModelKind::logreg;
    double lambda = 0.0;
    double gamma = 0.0;  // svm-rbf only
    ConvexData tr;       // poison point last
    ConvexData val;
    Eigen::MatrixXd K;   // rbf gram of tr.X, kept in sync
    Eigen::VectorXd theta;

    Eigen::Index poison_row() const { return tr.X.rows() - 1; }

    void set_poison(const Eigen::VectorXd& xc) {
        const Eigen::Index c = poison_row();
        tr.X.row(c) = xc.transpose();
        if (kind == ModelKind::svm_rbf) {
            for (Eigen::Index i = 0; i < tr.X.rows(); ++i) {
                const double k =
                    std::exp(-gamma * (tr.X.row(c) - tr.X.row(i)).squaredNorm());
                K(c, i) = k;
                K(i, c) = k;
            }
            K(c, c) = 1.0;
        }
    }

    void retrain(double tol) {
        switch (kind) {
            case ModelKind::logreg:
                theta = fit_logreg_theta(tr, lambda, theta, tol);
                return;
            case ModelKind::svm_linear:
                theta = fit_svm_linear_theta(tr, lambda, theta, tol);
                return;
            case ModelKind::svm_rbf:
                theta = fit_svm_rbf_theta(K, tr.y, tr.n_classes, lambda, theta, tol);
                symmetrize_duplicates();
                return;
            default:
                throw InvalidSpecError("poisoning victim must be a smooth convex kind");
        }
    }

    /// When the poison point coincides exactly with a training point, their
    /// kernel columns are identical and the kernel-expansion objective is flat
    /// in how the shared coefficient mass is split between the two rows, so
    /// the fit lands on an arbitrary split.  Every downstream quantity except
    /// the hypergradient's explicit term is invariant to the split; that term
    /// is linear in the poison row's own coefficients, and the split selected
    /// in the limit by perturbing the poison point off the duplicate is the
    /// even one.  Average the tied coefficients so the gradient at the exact
    /// duplicate agrees with that limit.  The objective value, the scores,
    /// and stationarity are all unchanged.
    void symmetrize_duplicates() {
        const Eigen::Index c = poison_row();
        const Eigen::Index n = tr.X.rows();
        std::vector<Eigen::Index> tied;
        for (Eigen::Index i = 0; i < n; ++i)
            if (i == c || (tr.X.row(i) - tr.X.row(c)).squaredNorm() == 0.0)
                tied.push_back(i);
        if (tied.size() < 2) return;
        for (int cl = 0; cl < tr.n_classes; ++cl) {
            const Eigen::Index base = static_cast<Eigen::Index>(cl) * (n + 1);
            double sum = 0.0;
            for (Eigen::Index i : tied) sum += theta(base + i);
            const double mean = sum / static_cast<double>(tied.size());
            for (Eigen::Index i : tied) theta(base + i) = mean;
        }
    }

    Eigen::VectorXd val_kernel_col(Eigen::Index v) const {
        const Eigen::Index n = tr.X.rows();
        Eigen::VectorXd kv(n);
        for (Eigen::Index i = 0; i < n; ++i)
            kv(i) = std::exp(-gamma * (val.X.row(v) - tr.X.row(i)).squaredNorm());
        return kv;
    }

    /// Mean unregularized per-sample loss of the victim's own family on val.
    double val_loss() const {
        const Eigen::Index m = val.X.rows();
        double s = 0.0;
        for (Eigen::Index v = 0; v < m; ++v) {
            const int yv = val.y[static_cast<std::size_t>(v)];
            switch (kind) {
                case ModelKind::logreg:
                    s += logreg_sample_loss(theta, val.X.row(v).transpose(), yv, tr.n_classes);
                    break;
                case ModelKind::svm_linear:
                    s += svm_linear_sample_loss(theta, val.X.row(v).transpose(), yv,
                                                tr.n_classes);
                    break;
                default:
                    s += svm_rbf_sample_loss(theta, val_kernel_col(v), yv, tr.n_classes);
                    break;
            }
        }
        return s / static_cast<double>(m);
    }

    Eigen::VectorXd val_theta_grad() const {
        const Eigen::Index m = val.X.rows();
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        for (Eigen::Index v = 0; v < m; ++v) {
            const int yv = val.y[static_cast<std::size_t>(v)];
            switch (kind) {
                case ModelKind::logreg:
                    g += logreg_sample_grad(theta, val.X.row(v).transpose(), yv, tr.n_classes);
                    break;
                case ModelKind::svm_linear:
                    g += svm_linear_sample_grad(theta, val.X.row(v).transpose(), yv,
                                                tr.n_classes);
                    break;
                default:
                    g += svm_rbf_sample_grad(theta, val_kernel_col(v), yv, tr.n_classes);
                    break;
            }
        }
        return g / static_cast<double>(m);
    }

    /// d val_loss / d x_c at the current minimizer, by the implicit function
    /// theorem; the rbf victim adds the explicit dependence of the validation
    /// scores on the poison point (it is a support point of the kernel
    /// expansion).
    Eigen::VectorXd hyper_gradient() const {
        const Eigen::Index c = poison_row();
        ObjectiveEval ev;
        Eigen::MatrixXd M;
        switch (kind) {
            case ModelKind::logreg:
                ev = logreg_objective(theta, tr, lambda, true);
                M = logreg_mixed_partial(theta, tr, c);
                break;
            case ModelKind::svm_linear:
                ev = svm_linear_objective(theta, tr, lambda, true);
                M = svm_linear_mixed_partial(theta, tr, c);
                break;
            default:
                ev = svm_rbf_objective(theta, K, tr.y, tr.n_classes, lambda, true);
                M = svm_rbf_mixed_partial(theta, K, tr.X, tr.y, tr.n_classes, lambda, gamma, c);
                break;
        }
        const Eigen::VectorXd hinv_g = spd_solve(ev.hess, val_theta_grad());
        Eigen::VectorXd g = -M.transpose() * hinv_g;
        if (kind == ModelKind::svm_rbf)
            g += svm_rbf_val_explicit_grad(theta, tr.X, val, tr.n_classes, gamma, c);
        return g;
    }
};

inline PoisonModel make_poison_model(const ModelSpec& victim, const ConvexData& train,
                                     const ConvexData& val, const Eigen::VectorXd& xc, int yc) {
    PoisonModel pm;
    pm.kind = victim.kind;
    pm.lambda = *victim.lambda;
    pm.gamma = victim.gamma ? *victim.gamma : 0.0;
    const Eigen::Index n = train.X.rows(), d = train.X.cols();
    pm.tr.X.resize(n + 1, d);
    pm.tr.X.topRows(n) = train.X;
    pm.tr.X.row(n) = xc.transpose();
    pm.tr.y = train.y;
    pm.tr.y.push_back(yc);
    pm.tr.n_classes = train.n_classes;
    pm.val = val;
    const Eigen::Index bs = (victim.kind == ModelKind::svm_rbf) ? n + 2 : d + 1;
    pm.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(train.n_classes) * bs);
    if (victim.kind == ModelKind::svm_rbf) pm.K = rbf_gram(pm.tr.X, pm.gamma);
    return pm;
}

inline void check_poison_inputs(const ModelSpec& victim, const Dataset& train,
                                const Dataset& val) {
    validate_model_spec(victim);
    if (victim.kind != ModelKind::logreg && victim.kind != ModelKind::svm_linear &&
        victim.kind != ModelKind::svm_rbf)
        throw InvalidSpecError("poisoning victim must be a smooth convex kind "
                               "(logreg, svm-linear, svm-rbf)");
    if (train.n_samples() == 0) throw EmptyDatasetError("poisoning: empty training set");
    if (val.n_samples() == 0) throw EmptyDatasetError("poisoning: empty validation set");
    if (val.n_classes != train.n_classes)
        throw InvalidArgumentError("training and validation class counts differ");
    if (val.n_features() != train.n_features())
        throw ShapeError("training and validation feature counts differ");
}

}  // namespace detail

/// Gradient of the validation loss with respect to a poison point (xc, yc)
/// through the retrained victim parameters.
inline Tensor poison_gradient(const ModelSpec& victim, const Dataset& train, const Dataset& val,
                              const Tensor& xc, int yc) {
    detail::check_poison_inputs(victim, train, val);
    if (xc.ndim() != 1 || xc.size() != train.n_features())
        throw ShapeError("poison point must be a vector of " +
                         std::to_string(train.n_features()) + " features");
    if (yc < 0 || yc >= train.n_classes) throw InvalidArgumentError("poison label out of range");
    std::set<int> present(train.y.begin(), train.y.end());
    present.insert(yc);
    if (present.size() < 2)
        throw DegenerateDataError("poisoned training set contains a single class");

    detail::PoisonModel pm = detail::make_poison_model(
        victim, detail::to_convex_data(train), detail::to_convex_data(val), to_eigen(xc), yc);
    pm.retrain(detail::kPoisonFitTolerance);
    return Tensor::vector(from_eigen(pm.hyper_gradient()));
}

struct PoisoningResult {
    Dataset poison_points;
    std::vector<SolverTrace> traces;  // one per poison point
    double val_accuracy_before = 0.0;
    double val_accuracy_after = 0.0;
};

/// Greedy sequential poisoning: each point maximizes the validation loss of
/// the victim retrained on the training set plus all points accepted so far.
inline PoisoningResult run_poisoning(const PoisoningSpec& spec, const Dataset& train,
                                     const Dataset& val) {
    validate_poisoning_spec(spec, train);
    validate_solver_config(spec.solver);
    detail::check_poison_inputs(spec.victim, train, val);

    PoisoningResult out;
    {
        const TrainedModel clean = fit(spec.victim, train);
        out.val_accuracy_before = evaluate_accuracy(clean, val);
    }
    const std::size_t d = train.n_features();
    if (spec.n_poison == 0) {
        out.poison_points = make_dataset(Tensor::dense({0, d}, {}), {}, train.n_classes);
        out.val_accuracy_after = out.val_accuracy_before;
        return out;
    }

    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < train.n_samples(); ++i)
        if (train.y[i] != spec.poison_label) pool.push_back(i);
    if (pool.empty())
        throw DegenerateDataError("every training point already carries poison_label; "
                                  "nothing to flip");
    std::mt19937_64 rng(spec.seed);

    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        lo[j] = spec.feature_box[j].first;
        hi[j] = spec.feature_box[j].second;
    }
    const Constraint box = Constraint::box(lo, hi);

    const detail::ConvexData base = detail::to_convex_data(train);
    const detail::ConvexData vdata = detail::to_convex_data(val);
    detail::ConvexData current = base;

    std::vector<double> poison_values;
    poison_values.reserve(static_cast<std::size_t>(spec.n_poison) * d);

    for (int c = 0; c < spec.n_poison; ++c) {
        const std::size_t idx =
            pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        const std::vector<double> x0 = box.project(from_eigen(base.X.row(idx).transpose()));

        detail::PoisonModel pm =
            detail::make_poison_model(spec.victim, current, vdata, to_eigen(x0),
                                      spec.poison_label);
        pm.retrain(detail::kPoisonFitTolerance);

        detail::PoisonModel* pmp = &pm;
        Problem prob;
        prob.constraint = box;
        prob.objective = [pmp](const Tensor& z) {
            pmp->set_poison(to_eigen(z));
            pmp->retrain(detail::kPoisonFitTolerance);
            return -pmp->val_loss();
        };
        prob.gradient = [pmp](const Tensor& z) {
            pmp->set_poison(to_eigen(z));
            pmp->retrain(detail::kPoisonFitTolerance);
            return Tensor::vector(from_eigen(((-1.0) * pmp->hyper_gradient()).eval()));
        };

        auto [best, trace] = solve(prob, Tensor::vector(x0), spec.solver);
        out.traces.push_back(std::move(trace));

        const std::vector<double> bv = best.to_dense_vector();
        poison_values.insert(poison_values.end(), bv.begin(), bv.end());
        const Eigen::Index n = current.X.rows();
        current.X.conservativeResize(n + 1, static_cast<Eigen::Index>(d));
        current.X.row(n) = to_eigen(bv).transpose();
        current.y.push_back(spec.poison_label);
    }

    // Retrain the victim on the poisoned set through the public path.
    std::vector<double> all_values(static_cast<std::size_t>(current.X.rows()) * d);
    for (Eigen::Index i = 0; i < current.X.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            all_values[static_cast<std::size_t>(i) * d + j] =
                current.X(i, static_cast<Eigen::Index>(j));
    const Dataset poisoned = make_dataset(
        Tensor::dense({static_cast<std::size_t>(current.X.rows()), d}, std::move(all_values)),
        current.y, train.n_classes);
    const TrainedModel after = fit(spec.victim, poisoned);
    out.val_accuracy_after = evaluate_accuracy(after, val);

    out.poison_points = make_dataset(
        Tensor::dense({static_cast<std::size_t>(spec.n_poison), d}, std::move(poison_values)),
        std::vector<int>(static_cast<std::size_t>(spec.n_poison), spec.poison_label),
        train.n_classes);
    return out;
}

}  // namespace advsec
