#pragma once

// Constrained-optimization core: feasible sets with projections, a Problem
// abstraction decoupled from solvers, and three interchangeable solvers
// (fixed-step PGD, PGD with a bisect line search, gradient-free random
// search). All solvers minimize, accept only non-worsening iterates, and
// record full execution traces.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "advsec/error.hpp"
#include "advsec/tensor.hpp"

namespace advsec {

// ---------------------------------------------------------------------------
// Constraints.
// ---------------------------------------------------------------------------

/// A feasible set with an exact Euclidean (or coordinatewise) projection.
/// Variants: l2-ball, linf-ball, box, masked(inner), and the intersection of
/// a ball with a box (projection composes ball-first-then-clamp, which is
/// exact when the ball's center lies inside the box).
class Constraint {
public:
    static Constraint l2_ball(std::vector<double> center, double radius) {
        check_radius(radius);
        Constraint c;
        c.kind_ = Kind::l2_ball;
        c.center_ = std::move(center);
        c.radius_ = radius;
        c.dim_ = c.center_.size();
        return c;
    }

    static Constraint linf_ball(std::vector<double> center, double radius) {
        check_radius(radius);
        Constraint c;
        c.kind_ = Kind::linf_ball;
        c.center_ = std::move(center);
        c.radius_ = radius;
        c.dim_ = c.center_.size();
        return c;
    }

    static Constraint box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size()) throw ShapeError("box bounds must have equal length");
        for (std::size_t j = 0; j < lo.size(); ++j)
            if (!(lo[j] <= hi[j]))
                throw InvalidArgumentError("box requires lo <= hi at every coordinate");
        Constraint c;
        c.kind_ = Kind::box;
        c.lo_ = std::move(lo);
        c.hi_ = std::move(hi);
        c.dim_ = c.lo_.size();
        return c;
    }

    /// Unmasked coordinates are pinned to `reference`; the inner constraint
    /// acts on the subvector of masked coordinates.
    static Constraint masked(Constraint inner, std::vector<bool> mask,
                             std::vector<double> reference) {
        if (mask.size() != reference.size())
            throw ShapeError("mask and reference must have equal length");
        std::size_t n_masked = 0;
        for (bool b : mask) n_masked += b ? 1 : 0;
        if (inner.dim() != n_masked)
            throw ShapeError("inner constraint dimension must equal the masked coordinate count");
        Constraint c;
        c.kind_ = Kind::masked;
        c.inner_ = std::make_shared<Constraint>(std::move(inner));
        c.mask_ = std::move(mask);
        c.reference_ = std::move(reference);
        c.dim_ = c.mask_.size();
        return c;
    }

    /// Intersection of a norm ball with a box. Projection is ball-then-clamp,
    /// which lands inside both sets and is idempotent provided the ball center
    /// lies in the box; the factory clamps the center to guarantee that.
    static Constraint intersection(Constraint ball, Constraint bounds) {
        if (bounds.kind_ != Kind::box)
            throw InvalidArgumentError("intersection expects a box as its second member");
        if (ball.kind_ != Kind::l2_ball && ball.kind_ != Kind::linf_ball)
            throw InvalidArgumentError("intersection expects a norm ball as its first member");
        if (ball.dim() != bounds.dim()) throw ShapeError("intersection dimension mismatch");
        for (std::size_t j = 0; j < ball.center_.size(); ++j)
            ball.center_[j] = std::min(std::max(ball.center_[j], bounds.lo_[j]), bounds.hi_[j]);
        Constraint c;
        c.kind_ = Kind::intersection;
        c.inner_ = std::make_shared<Constraint>(std::move(ball));
        c.lo_ = bounds.lo_;
        c.hi_ = bounds.hi_;
        c.dim_ = c.lo_.size();
        return c;
    }

    std::size_t dim() const { return dim_; }

    std::vector<double> project(const std::vector<double>& x) const {
        if (x.size() != dim_) throw ShapeError("project: dimension mismatch");
        switch (kind_) {
            case Kind::l2_ball: {
                double sq = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const double d = x[j] - center_[j];
                    sq += d * d;
                }
                const double norm = std::sqrt(sq);
                if (norm <= radius_) return x;
                std::vector<double> out(x.size());
                const double scale = radius_ / norm;
                for (std::size_t j = 0; j < x.size(); ++j)
                    out[j] = center_[j] + scale * (x[j] - center_[j]);
                return out;
            }
            case Kind::linf_ball: {
                std::vector<double> out(x.size());
                for (std::size_t j = 0; j < x.size(); ++j)
                    out[j] = std::min(std::max(x[j], center_[j] - radius_), center_[j] + radius_);
                return out;
            }
            case Kind::box: {
                std::vector<double> out(x.size());
                for (std::size_t j = 0; j < x.size(); ++j)
                    out[j] = std::min(std::max(x[j], lo_[j]), hi_[j]);
                return out;
            }
            case Kind::masked: {
                std::vector<double> sub;
                sub.reserve(inner_->dim());
                for (std::size_t j = 0; j < x.size(); ++j)
                    if (mask_[j]) sub.push_back(x[j]);
                const std::vector<double> proj = inner_->project(sub);
                std::vector<double> out(x.size());
                std::size_t k = 0;
                for (std::size_t j = 0; j < x.size(); ++j)
                    out[j] = mask_[j] ? proj[k++] : reference_[j];
                return out;
            }
            case Kind::intersection: {
                std::vector<double> out = inner_->project(x);
                for (std::size_t j = 0; j < out.size(); ++j)
                    out[j] = std::min(std::max(out[j], lo_[j]), hi_[j]);
                return out;
            }
        }
        throw InvalidArgumentError("unknown constraint kind");
    }

    bool contains(const std::vector<double>& x, double tol = 1e-9) const {
        if (x.size() != dim_) throw ShapeError("contains: dimension mismatch");
        switch (kind_) {
            case Kind::l2_ball: {
                double sq = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    const double d = x[j] - center_[j];
                    sq += d * d;
                }
                return std::sqrt(sq) <= radius_ + tol;
            }
            case Kind::linf_ball: {
                for (std::size_t j = 0; j < x.size(); ++j)
                    if (std::abs(x[j] - center_[j]) > radius_ + tol) return false;
                return true;
            }
            case Kind::box: {
                for (std::size_t j = 0; j < x.size(); ++j)
                    if (x[j] < lo_[j] - tol || x[j] > hi_[j] + tol) return false;
                return true;
            }
            case Kind::masked: {
                std::vector<double> sub;
                sub.reserve(inner_->dim());
                for (std::size_t j = 0; j < x.size(); ++j) {
                    if (mask_[j]) {
                        sub.push_back(x[j]);
                    } else if (std::abs(x[j] - reference_[j]) > tol) {
                        return false;
                    }
                }
                return inner_->contains(sub, tol);
            }
            case Kind::intersection: {
                if (!inner_->contains(x, tol)) return false;
                for (std::size_t j = 0; j < x.size(); ++j)
                    if (x[j] < lo_[j] - tol || x[j] > hi_[j] + tol) return false;
                return true;
            }
        }
        return false;
    }

private:
    enum class Kind { l2_ball, linf_ball, box, masked, intersection };

    static void check_radius(double r) {
        if (!std::isfinite(r) || r <= 0.0)
            throw InvalidArgumentError("ball radius must be positive");
    }

    Kind kind_ = Kind::box;
    std::vector<double> center_, lo_, hi_, reference_;
    std::vector<bool> mask_;
    double radius_ = 0.0;
    std::shared_ptr<const Constraint> inner_;
    std::size_t dim_ = 0;
};

inline Tensor project(const Constraint& c, const Tensor& x) {
    if (x.ndim() != 1) throw ShapeError("project expects a 1-D tensor");
    return Tensor::vector(c.project(x.to_dense_vector()));
}

// ---------------------------------------------------------------------------
// Problem and solver configuration.
// ---------------------------------------------------------------------------

/// A minimization problem over a feasible set. The gradient handle may be
/// left empty, in which case only gradient-free solvers accept the problem.
struct Problem {
    std::function<double(const Tensor&)> objective;
    std::function<Tensor(const Tensor&)> gradient;
    Constraint constraint;
};

enum class SolverKind { pgd, pgd_ls, random_search };

inline const char* solver_kind_name(SolverKind k) {
    switch (k) {
        case SolverKind::pgd: return "pgd";
        case SolverKind::pgd_ls: return "pgd-ls";
        case SolverKind::random_search: return "random-search";
    }
    return "?";
}

inline SolverKind solver_kind_from_name(const std::string& name) {
    if (name == "pgd") return SolverKind::pgd;
    if (name == "pgd-ls") return SolverKind::pgd_ls;
    if (name == "random-search") return SolverKind::random_search;
    throw InvalidSpecError("unknown solver '" + name + "'");
}

struct SolverConfig {
    SolverKind solver = SolverKind::pgd;
    int max_iter = 50;
    double stop_tol = 0.0;              // windowed decrease threshold; 0 disables
    std::uint64_t max_fun_evals = 0;    // objective-evaluation budget; 0 = unlimited
    std::optional<double> step_size;    // pgd
    std::optional<int> ls_max_evals;    // pgd-ls: probe budget per iteration
    std::optional<double> ls_min_step;  // pgd-ls: growth start and bisection tolerance
    std::optional<double> sigma;        // random-search: perturbation scale
    std::optional<int> trials;          // random-search: draws per iteration
    std::optional<std::uint64_t> seed;  // random-search
};

inline void validate_solver_config(const SolverConfig& cfg) {
    const std::string name = solver_kind_name(cfg.solver);
    auto require = [&](bool present, const char* field) {
        if (!present)
            throw InvalidSpecError("solver '" + name + "' requires field '" + field + "'");
    };
    auto forbid = [&](bool present, const char* field) {
        if (present)
            throw InvalidSpecError("solver '" + name + "' does not accept field '" + field + "'");
    };
    if (cfg.max_iter <= 0) throw InvalidSpecError("max_iter must be positive");
    if (!std::isfinite(cfg.stop_tol) || cfg.stop_tol < 0.0)
        throw InvalidSpecError("stop_tol must be non-negative");

    const bool is_pgd = cfg.solver == SolverKind::pgd;
    const bool is_ls = cfg.solver == SolverKind::pgd_ls;
    const bool is_rs = cfg.solver == SolverKind::random_search;

    if (is_pgd) {
        require(cfg.step_size.has_value(), "step_size");
        if (!std::isfinite(*cfg.step_size) || *cfg.step_size <= 0.0)
            throw InvalidSpecError("step_size must be positive");
    } else {
        forbid(cfg.step_size.has_value(), "step_size");
    }
    if (is_ls) {
        require(cfg.ls_max_evals.has_value(), "ls_max_evals");
        require(cfg.ls_min_step.has_value(), "ls_min_step");
        if (*cfg.ls_max_evals <= 0) throw InvalidSpecError("ls_max_evals must be positive");
        if (!std::isfinite(*cfg.ls_min_step) || *cfg.ls_min_step <= 0.0)
            throw InvalidSpecError("ls_min_step must be positive");
    } else {
        forbid(cfg.ls_max_evals.has_value(), "ls_max_evals");
        forbid(cfg.ls_min_step.has_value(), "ls_min_step");
    }
    if (is_rs) {
        require(cfg.sigma.has_value(), "sigma");
        require(cfg.trials.has_value(), "trials");
        require(cfg.seed.has_value(), "seed");
        if (!std::isfinite(*cfg.sigma) || *cfg.sigma <= 0.0)
            throw InvalidSpecError("sigma must be positive");
        if (*cfg.trials <= 0) throw InvalidSpecError("trials must be positive");
    } else {
        forbid(cfg.sigma.has_value(), "sigma");
        forbid(cfg.trials.has_value(), "trials");
        forbid(cfg.seed.has_value(), "seed");
    }
}

struct SolverTrace {
    std::vector<std::vector<double>> points;  // accepted iterates, x0 first
    std::vector<double> losses;               // objective value per point
    std::uint64_t n_fun_evals = 0;
    std::uint64_t n_grad_evals = 0;
    std::string stop_reason;  // "max-iter" | "tol-reached" | "budget-exhausted"
};

namespace detail {

struct SolverState {
    const Problem& problem;
    SolverTrace trace;

    double eval_objective(const std::vector<double>& x) {
        for (double v : x)
            if (!std::isfinite(v))
                throw NumericalError("non-finite iterate reached the objective", x);
        trace.n_fun_evals++;
        const double f = problem.objective(Tensor::vector(x));
        if (!std::isfinite(f))
            throw NumericalError("objective evaluated to a non-finite value", x);
        return f;
    }

    std::vector<double> eval_gradient(const std::vector<double>& x) {
        trace.n_grad_evals++;
        return problem.gradient(Tensor::vector(x)).to_dense_vector();
    }

    void record(const std::vector<double>& x, double f) {
        trace.points.push_back(x);
        trace.losses.push_back(f);
    }

    bool budget_exhausted(const SolverConfig& cfg) const {
        return cfg.max_fun_evals > 0 && trace.n_fun_evals >= cfg.max_fun_evals;
    }
};

/// Windowed stop test: best-objective improvement over the last 5 iterations
/// fell below stop_tol. History holds the running best after each iteration.
inline bool window_converged(const std::vector<double>& best_history, double stop_tol) {
    constexpr std::size_t kWindow = 5;
    if (stop_tol <= 0.0 || best_history.size() < kWindow + 1) return false;
    const double before = best_history[best_history.size() - kWindow - 1];
    return before - best_history.back() < stop_tol;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Solvers.
// ---------------------------------------------------------------------------

/// Fixed-step projected gradient descent with per-step halving. A candidate
/// step is accepted only if the objective does not increase; after 10 failed
/// halvings the iterate is kept unchanged and iteration counting continues.
inline std::pair<Tensor, SolverTrace> solve_pgd(const Problem& p, const Tensor& x0,
                                                const SolverConfig& cfg) {
    validate_solver_config(cfg);
    if (cfg.solver != SolverKind::pgd) throw InvalidSpecError("config is not for pgd");
    if (!p.gradient) throw InvalidSpecError("pgd requires a gradient handle");

    detail::SolverState st{p, {}};
    std::vector<double> x = p.constraint.project(x0.to_dense_vector());
    double f = st.eval_objective(x);
    st.record(x, f);
    std::vector<double> best_x = x;
    double best_f = f;
    std::vector<double> best_history{best_f};
    int unchanged_streak = 0;
    st.trace.stop_reason = "max-iter";

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (st.budget_exhausted(cfg)) {
            st.trace.stop_reason = "budget-exhausted";
            break;
        }
        const std::vector<double> g = st.eval_gradient(x);
        double eta = *cfg.step_size;
        bool accepted = false;
        std::vector<double> cand;
        double fc = 0.0;
        for (int halving = 0; halving <= 10; ++halving) {
            cand = x;
            for (std::size_t j = 0; j < cand.size(); ++j) cand[j] -= eta * g[j];
            cand = p.constraint.project(cand);
            fc = st.eval_objective(cand);
            if (fc <= f) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (accepted) {
            x = std::move(cand);
            f = fc;
            st.record(x, f);
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
            unchanged_streak = 0;
        } else {
            unchanged_streak++;
        }
        best_history.push_back(best_f);
        if (unchanged_streak >= 5 || detail::window_converged(best_history, cfg.stop_tol)) {
            st.trace.stop_reason = "tol-reached";
            break;
        }
    }
    return {Tensor::vector(best_x), std::move(st.trace)};
}

/// PGD with a bisect line search: one gradient evaluation per iteration fixes
/// the normalized descent direction; the step is found by doubling from
/// ls_min_step while the projected objective improves, then bisecting between
/// the last improving and first non-improving lengths. At most ls_max_evals
/// objective probes are spent per iteration, all counted.
inline std::pair<Tensor, SolverTrace> solve_pgd_ls(const Problem& p, const Tensor& x0,
                                                   const SolverConfig& cfg) {
    validate_solver_config(cfg);
    if (cfg.solver != SolverKind::pgd_ls) throw InvalidSpecError("config is not for pgd-ls");
    if (!p.gradient) throw InvalidSpecError("pgd-ls requires a gradient handle");

    detail::SolverState st{p, {}};
    std::vector<double> x = p.constraint.project(x0.to_dense_vector());
    double f = st.eval_objective(x);
    st.record(x, f);
    std::vector<double> best_x = x;
    double best_f = f;
    std::vector<double> best_history{best_f};
    int unchanged_streak = 0;
    st.trace.stop_reason = "max-iter";

    const double t_min = *cfg.ls_min_step;
    const int probe_budget = *cfg.ls_max_evals;

    auto probe_point = [&](const std::vector<double>& base, const std::vector<double>& dir,
                           double t) {
        std::vector<double> cand = base;
        for (std::size_t j = 0; j < cand.size(); ++j) cand[j] += t * dir[j];
        return p.constraint.project(cand);
    };

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (st.budget_exhausted(cfg)) {
            st.trace.stop_reason = "budget-exhausted";
            break;
        }
        std::vector<double> g = st.eval_gradient(x);
        double gnorm = 0.0;
        for (double v : g) gnorm += v * v;
        gnorm = std::sqrt(gnorm);

        bool improved = false;
        if (gnorm > 0.0) {
            std::vector<double> dir(g.size());
            for (std::size_t j = 0; j < g.size(); ++j) dir[j] = -g[j] / gnorm;

            int evals = 0;
            double t_best = 0.0, f_best = f;
            std::vector<double> x_best_probe;
            std::optional<double> t_fail;  // first non-improving length
            // growth phase: double while the probe improves on the best so far
            for (double t = t_min; evals < probe_budget; t *= 2.0) {
                std::vector<double> cand = probe_point(x, dir, t);
                const double fc = st.eval_objective(cand);
                evals++;
                if (fc < f_best) {
                    f_best = fc;
                    t_best = t;
                    x_best_probe = std::move(cand);
                } else {
                    t_fail = t;
                    break;
                }
            }
            // bisection phase between the last improving and first non-improving lengths
            if (t_best > 0.0 && t_fail) {
                double a = t_best, b = *t_fail;
                while (b - a > t_min && evals < probe_budget) {
                    const double mid = 0.5 * (a + b);
                    std::vector<double> cand = probe_point(x, dir, mid);
                    const double fc = st.eval_objective(cand);
                    evals++;
                    if (fc < f_best) {
                        f_best = fc;
                        t_best = mid;
                        x_best_probe = std::move(cand);
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
            }
            if (t_best > 0.0) {
                x = std::move(x_best_probe);
                f = f_best;
                st.record(x, f);
                if (f < best_f) {
                    best_f = f;
                    best_x = x;
                }
                improved = true;
            }
        }
        if (improved) {
            unchanged_streak = 0;
        } else {
            unchanged_streak++;
        }
        best_history.push_back(best_f);
        if (unchanged_streak >= 5 || detail::window_converged(best_history, cfg.stop_tol)) {
            st.trace.stop_reason = "tol-reached";
            break;
        }
    }
    return {Tensor::vector(best_x), std::move(st.trace)};
}

/// Seeded (1+1)-style Gaussian random search. Per iteration, `trials`
/// perturbations x + sigma·N(0, I) are projected and evaluated; the best is
/// accepted if it strictly improves. sigma shrinks by 0.8 after a rejecting
/// iteration and grows by 1.2 after an accepting one. No gradient calls.
inline std::pair<Tensor, SolverTrace> solve_random_search(const Problem& p, const Tensor& x0,
                                                          const SolverConfig& cfg) {
    validate_solver_config(cfg);
    if (cfg.solver != SolverKind::random_search)
        throw InvalidSpecError("config is not for random-search");

    detail::SolverState st{p, {}};
    std::vector<double> x = p.constraint.project(x0.to_dense_vector());
    double f = st.eval_objective(x);
    st.record(x, f);
    std::vector<double> best_x = x;
    double best_f = f;
    std::vector<double> best_history{best_f};
    st.trace.stop_reason = "max-iter";

    std::mt19937_64 rng(*cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sigma = *cfg.sigma;

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (st.budget_exhausted(cfg)) {
            st.trace.stop_reason = "budget-exhausted";
            break;
        }
        double f_trial_best = std::numeric_limits<double>::infinity();
        std::vector<double> x_trial_best;
        for (int trial = 0; trial < *cfg.trials; ++trial) {
            std::vector<double> cand(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) cand[j] = x[j] + sigma * gauss(rng);
            cand = p.constraint.project(cand);
            const double fc = st.eval_objective(cand);
            if (fc < f_trial_best) {
                f_trial_best = fc;
                x_trial_best = std::move(cand);
            }
        }
        if (f_trial_best < f) {
            x = std::move(x_trial_best);
            f = f_trial_best;
            st.record(x, f);
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
            sigma *= 1.2;
        } else {
            sigma *= 0.8;
        }
        best_history.push_back(best_f);
        if (detail::window_converged(best_history, cfg.stop_tol)) {
            st.trace.stop_reason = "tol-reached";
            break;
        }
    }
    return {Tensor::vector(best_x), std::move(st.trace)};
}

/// Dispatch on the configured solver; changing solvers means changing only
/// the SolverConfig.
inline std::pair<Tensor, SolverTrace> solve(const Problem& p, const Tensor& x0,
                                            const SolverConfig& cfg) {
    switch (cfg.solver) {
        case SolverKind::pgd: return solve_pgd(p, x0, cfg);
        case SolverKind::pgd_ls: return solve_pgd_ls(p, x0, cfg);
        case SolverKind::random_search: return solve_random_search(p, x0, cfg);
    }
    throw InvalidSpecError("unknown solver kind");
}

}  // namespace advsec
