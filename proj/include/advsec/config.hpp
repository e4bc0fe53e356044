#pragma once

// Experiment configuration: strict JSON ingestion for the CLI. Every block
// rejects unknown keys and every complaint names the offending field by its
// dotted path, so typos in attack hyperparameters fail loudly up front.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"

#include "advsec/attack.hpp"
#include "advsec/dataset.hpp"
#include "advsec/error.hpp"
#include "advsec/log.hpp"
#include "advsec/model.hpp"
#include "advsec/optim.hpp"

namespace advsec {

namespace detail {

/// Strict view over one JSON object: fields are taken by name, and anything
/// left over is an error naming the first unknown key.
class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("field '" + path_ + "' must be an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const nlohmann::json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const nlohmann::json& require(const char* key) {
        const nlohmann::json* v = find(key);
        if (!v) throw ConfigError("missing required field '" + dotted(key) + "'");
        return *v;
    }

    std::string dotted(const char* key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    /// Call after all takes: any unconsumed key is a config error.
    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("unknown field '" + dotted(it.key().c_str()) + "'");
    }

    double number(const char* key) { return as_number(require(key), dotted(key)); }
    std::optional<double> opt_number(const char* key) {
        const nlohmann::json* v = find(key);
        if (!v) return std::nullopt;
        return as_number(*v, dotted(key));
    }

    long long integer(const char* key) { return as_integer(require(key), dotted(key)); }
    std::optional<long long> opt_integer(const char* key) {
        const nlohmann::json* v = find(key);
        if (!v) return std::nullopt;
        return as_integer(*v, dotted(key));
    }

    std::string string(const char* key) { return as_string(require(key), dotted(key)); }
    std::optional<std::string> opt_string(const char* key) {
        const nlohmann::json* v = find(key);
        if (!v) return std::nullopt;
        return as_string(*v, dotted(key));
    }

    bool boolean(const char* key, bool fallback) {
        const nlohmann::json* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError("field '" + dotted(key) + "' must be a boolean");
        return v->get<bool>();
    }

    std::optional<std::vector<double>> opt_number_array(const char* key) {
        const nlohmann::json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_array()) throw ConfigError("field '" + dotted(key) + "' must be an array");
        std::vector<double> out;
        out.reserve(v->size());
        for (const auto& e : *v) out.push_back(as_number(e, dotted(key)));
        return out;
    }

private:
    static double as_number(const nlohmann::json& v, const std::string& path) {
        if (!v.is_number()) throw ConfigError("field '" + path + "' must be a number");
        return v.get<double>();
    }
    static long long as_integer(const nlohmann::json& v, const std::string& path) {
        if (!v.is_number_integer()) throw ConfigError("field '" + path + "' must be an integer");
        return v.get<long long>();
    }
    static std::string as_string(const nlohmann::json& v, const std::string& path) {
        if (!v.is_string()) throw ConfigError("field '" + path + "' must be a string");
        return v.get<std::string>();
    }

    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsed blocks

struct DatasetConfig {
    std::string generator;  // "blobs" | "moons" | "plates" | "csv"
    std::size_t n = 0;
    std::vector<Tensor> centers;        // blobs
    double spread = 1.0;                // blobs
    double noise = 0.1;                 // moons
    std::string path;                   // csv
    std::size_t label_column = 0;       // csv
    double split = 0.25;                // test fraction; 0 = no split
    std::uint64_t seed = 0;
};

struct ModelConfig {
    std::optional<ModelSpec> spec;      // train from scratch
    bool scaler = false;
    std::optional<std::string> file;    // load a trained model instead
};

struct AttackBlockConfig {
    EvasionSpec evasion;                // epsilon empty for seceval configs
    SolverConfig solver;
    std::vector<double> eps_grid;       // seceval only
    std::vector<std::size_t> samples;   // explicit test-sample indices
    std::size_t n_samples = 0;          // or: first n test samples
};

struct PoisonBlockConfig {
    PoisoningSpec spec;                 // feature_box may be empty -> data bounds
    bool box_from_data = false;
};

struct ExplainBlockConfig {
    std::string method;                 // integrated-gradients | linear-surrogate | influence
    std::size_t sample_index = 0;       // test sample to explain
    // integrated gradients
    std::optional<std::vector<double>> baseline;  // default: zeros
    std::optional<int> target;                    // default: predicted class
    int m_steps = 300;
    // linear surrogate
    int n_samples = 2000;
    double kernel_width = 1.0;
    std::uint64_t seed = 0;
    // influence
    std::optional<ModelSpec> victim;
};

struct ExperimentConfig {
    std::optional<DatasetConfig> dataset;
    std::optional<ModelConfig> model;
    std::optional<AttackBlockConfig> attack;
    std::optional<PoisonBlockConfig> poison;
    std::optional<ExplainBlockConfig> explain;
    std::string out = "run-output";
    int workers = 1;
    std::string log_level = "info";
};

// ---------------------------------------------------------------------------
// Block parsers

namespace detail {

inline ModelSpec parse_model_spec(StrictObject& o) {
    ModelSpec spec;
    spec.kind = model_kind_from_name(o.string("kind"));
    if (auto v = o.opt_number("lambda")) spec.lambda = *v;
    if (auto v = o.opt_number("gamma")) spec.gamma = *v;
    if (const nlohmann::json* v = o.find("hidden_sizes")) {
        if (!v->is_array())
            throw ConfigError("field '" + o.dotted("hidden_sizes") + "' must be an array");
        std::vector<int> hs;
        for (const auto& e : *v) {
            if (!e.is_number_integer())
                throw ConfigError("field '" + o.dotted("hidden_sizes") +
                                  "' must hold integers");
            hs.push_back(e.get<int>());
        }
        spec.hidden_sizes = std::move(hs);
    }
    if (auto v = o.opt_integer("n_trees")) spec.n_trees = static_cast<int>(*v);
    if (auto v = o.opt_integer("max_depth")) spec.max_depth = static_cast<int>(*v);
    if (auto v = o.opt_integer("seed")) spec.seed = static_cast<std::uint64_t>(*v);
    try {
        validate_model_spec(spec);
    } catch (const Error& e) {
        throw ConfigError(std::string("model spec invalid: ") + e.what());
    }
    return spec;
}

inline DatasetConfig parse_dataset(const nlohmann::json& j, const std::string& path) {
    StrictObject o(j, path);
    DatasetConfig d;
    d.generator = o.string("generator");
    if (d.generator != "blobs" && d.generator != "moons" && d.generator != "plates" &&
        d.generator != "csv")
        throw ConfigError("field '" + o.dotted("generator") +
                          "' must be one of blobs|moons|plates|csv");
    if (auto v = o.opt_integer("n")) {
        if (*v <= 0) throw ConfigError("field '" + o.dotted("n") + "' must be positive");
        d.n = static_cast<std::size_t>(*v);
    }
    if (const nlohmann::json* v = o.find("centers")) {
        if (!v->is_array() || v->empty())
            throw ConfigError("field '" + o.dotted("centers") +
                              "' must be a non-empty array of vectors");
        for (const auto& c : *v) {
            if (!c.is_array() || c.empty())
                throw ConfigError("field '" + o.dotted("centers") +
                                  "' must hold non-empty numeric vectors");
            std::vector<double> vals;
            for (const auto& e : c) {
                if (!e.is_number())
                    throw ConfigError("field '" + o.dotted("centers") + "' must hold numbers");
                vals.push_back(e.get<double>());
            }
            d.centers.push_back(Tensor::vector(vals));
        }
    }
    if (auto v = o.opt_number("spread")) d.spread = *v;
    if (auto v = o.opt_number("noise")) d.noise = *v;
    if (auto v = o.opt_string("path")) d.path = *v;
    if (auto v = o.opt_integer("label_column")) {
        if (*v < 0)
            throw ConfigError("field '" + o.dotted("label_column") + "' must be non-negative");
        d.label_column = static_cast<std::size_t>(*v);
    }
    if (auto v = o.opt_number("split")) {
        if (!(*v >= 0.0 && *v < 1.0))
            throw ConfigError("field '" + o.dotted("split") + "' must lie in [0, 1)");
        d.split = *v;
    }
    if (auto v = o.opt_integer("seed")) d.seed = static_cast<std::uint64_t>(*v);

    if (d.generator == "csv") {
        if (d.path.empty())
            throw ConfigError("missing required field '" + o.dotted("path") +
                              "' (csv generator)");
    } else if (d.n == 0) {
        throw ConfigError("missing required field '" + o.dotted("n") + "'");
    }
    if (d.generator == "blobs" && d.centers.empty())
        throw ConfigError("missing required field '" + o.dotted("centers") +
                          "' (blobs generator)");
    o.reject_unknown();
    return d;
}

inline ModelConfig parse_model(const nlohmann::json& j, const std::string& path) {
    StrictObject o(j, path);
    ModelConfig m;
    if (auto v = o.opt_string("file")) m.file = *v;
    m.scaler = o.boolean("scaler", false);
    if (o.has("kind")) {
        m.spec = parse_model_spec(o);
    }
    o.reject_unknown();
    if (m.file && m.spec)
        throw ConfigError("field '" + o.dotted("file") +
                          "' excludes inline model spec fields: pick one");
    if (!m.file && !m.spec)
        throw ConfigError("missing required field '" + o.dotted("kind") +
                          "' (or 'file' to load a trained model)");
    return m;
}

inline SolverConfig parse_solver(const nlohmann::json& j, const std::string& path) {
    StrictObject o(j, path);
    SolverConfig cfg;
    const std::string kind = o.string("kind");
    if (kind == "pgd") {
        cfg.solver = SolverKind::pgd;
    } else if (kind == "pgd-ls") {
        cfg.solver = SolverKind::pgd_ls;
    } else if (kind == "random-search") {
        cfg.solver = SolverKind::random_search;
    } else {
        throw ConfigError("field '" + o.dotted("kind") +
                          "' must be one of pgd|pgd-ls|random-search");
    }
    if (auto v = o.opt_integer("max_iter")) cfg.max_iter = static_cast<int>(*v);
    if (auto v = o.opt_number("stop_tol")) cfg.stop_tol = *v;
    if (auto v = o.opt_integer("max_fun_evals"))
        cfg.max_fun_evals = static_cast<std::uint64_t>(*v);
    if (auto v = o.opt_number("step_size")) cfg.step_size = *v;
    if (auto v = o.opt_integer("ls_max_evals")) cfg.ls_max_evals = static_cast<int>(*v);
    if (auto v = o.opt_number("ls_min_step")) cfg.ls_min_step = *v;
    if (auto v = o.opt_number("sigma")) cfg.sigma = *v;
    if (auto v = o.opt_integer("trials")) cfg.trials = static_cast<int>(*v);
    if (auto v = o.opt_integer("seed")) cfg.seed = static_cast<std::uint64_t>(*v);
    o.reject_unknown();
    return cfg;
}

inline AttackBlockConfig parse_attack(const nlohmann::json& j, const std::string& path,
                                      bool seceval) {
    StrictObject o(j, path);
    AttackBlockConfig a;

    const std::string loss = o.string("loss");
    if (loss == "cross-entropy") {
        a.evasion.loss.kind = LossKind::cross_entropy;
    } else if (loss == "cw") {
        a.evasion.loss.kind = LossKind::cw_logit_diff;
    } else {
        throw ConfigError("field '" + o.dotted("loss") + "' must be cross-entropy or cw");
    }
    if (auto v = o.opt_integer("target"))
        a.evasion.loss.target_label = static_cast<int>(*v);
    if (auto v = o.opt_number("kappa")) a.evasion.loss.kappa = *v;

    const std::string norm = o.string("norm");
    if (norm == "l2") {
        a.evasion.norm = Norm::l2;
    } else if (norm == "linf") {
        a.evasion.norm = Norm::linf;
    } else {
        throw ConfigError("field '" + o.dotted("norm") + "' must be l2 or linf");
    }

    if (auto v = o.opt_number("epsilon")) a.evasion.epsilon = *v;
    if (const nlohmann::json* v = o.find("patch_mask")) {
        if (!v->is_array())
            throw ConfigError("field '" + o.dotted("patch_mask") +
                              "' must be an array of 0/1");
        std::vector<bool> mask;
        for (const auto& e : *v) {
            if (e.is_boolean()) {
                mask.push_back(e.get<bool>());
            } else if (e.is_number_integer()) {
                mask.push_back(e.get<long long>() != 0);
            } else {
                throw ConfigError("field '" + o.dotted("patch_mask") +
                                  "' must hold booleans or 0/1");
            }
        }
        a.evasion.patch_mask = std::move(mask);
    }
    if (const nlohmann::json* v = o.find("patch_rect")) {
        if (a.evasion.patch_mask)
            throw ConfigError("field '" + o.dotted("patch_rect") +
                              "' excludes 'patch_mask': pick one");
        StrictObject rect(*v, o.dotted("patch_rect"));
        const auto side = static_cast<std::size_t>(rect.integer("side"));
        const auto r0 = static_cast<std::size_t>(rect.integer("row0"));
        const auto r1 = static_cast<std::size_t>(rect.integer("row1"));
        const auto c0 = static_cast<std::size_t>(rect.integer("col0"));
        const auto c1 = static_cast<std::size_t>(rect.integer("col1"));
        rect.reject_unknown();
        if (side == 0 || r0 > r1 || c0 > c1 || r1 >= side || c1 >= side)
            throw ConfigError("field '" + o.dotted("patch_rect") +
                              "' must satisfy row0<=row1<side, col0<=col1<side");
        std::vector<bool> mask(side * side, false);
        for (std::size_t r = r0; r <= r1; ++r)
            for (std::size_t c = c0; c <= c1; ++c) mask[r * side + c] = true;
        a.evasion.patch_mask = std::move(mask);
    }
    if (auto v = o.opt_number_array("input_bounds")) {
        if (v->size() != 2)
            throw ConfigError("field '" + o.dotted("input_bounds") + "' must be [lo, hi]");
        a.evasion.input_bounds = std::make_pair((*v)[0], (*v)[1]);
    }

    a.solver = parse_solver(o.require("solver"), o.dotted("solver"));

    if (seceval) {
        auto grid = o.opt_number_array("eps_grid");
        if (!grid) throw ConfigError("missing required field '" + o.dotted("eps_grid") + "'");
        a.eps_grid = std::move(*grid);
        if (a.evasion.epsilon)
            throw ConfigError("field '" + o.dotted("epsilon") +
                              "' is not allowed with eps_grid: the grid supplies it");
    }

    if (const nlohmann::json* v = o.find("samples")) {
        if (!v->is_array())
            throw ConfigError("field '" + o.dotted("samples") +
                              "' must be an array of indices");
        for (const auto& e : *v) {
            if (!e.is_number_integer() || e.get<long long>() < 0)
                throw ConfigError("field '" + o.dotted("samples") +
                                  "' must hold non-negative integers");
            a.samples.push_back(static_cast<std::size_t>(e.get<long long>()));
        }
    }
    if (auto v = o.opt_integer("n_samples")) {
        if (*v <= 0) throw ConfigError("field '" + o.dotted("n_samples") + "' must be positive");
        a.n_samples = static_cast<std::size_t>(*v);
    }
    o.reject_unknown();
    return a;
}

inline PoisonBlockConfig parse_poison(const nlohmann::json& j, const std::string& path) {
    StrictObject o(j, path);
    PoisonBlockConfig p;
    {
        StrictObject victim(o.require("victim"), o.dotted("victim"));
        p.spec.victim = parse_model_spec(victim);
        victim.reject_unknown();
    }
    p.spec.n_poison = static_cast<int>(o.integer("n_poison"));
    p.spec.poison_label = static_cast<int>(o.integer("poison_label"));
    if (const nlohmann::json* v = o.find("feature_box")) {
        if (!v->is_array())
            throw ConfigError("field '" + o.dotted("feature_box") +
                              "' must be an array of [lo, hi] pairs");
        for (const auto& e : *v) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ConfigError("field '" + o.dotted("feature_box") +
                                  "' must hold [lo, hi] pairs");
            p.spec.feature_box.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
    } else {
        p.box_from_data = true;  // derive the box from the training data bounds
    }
    p.spec.solver = parse_solver(o.require("solver"), o.dotted("solver"));
    if (auto v = o.opt_integer("seed")) p.spec.seed = static_cast<std::uint64_t>(*v);
    o.reject_unknown();
    return p;
}

inline ExplainBlockConfig parse_explain(const nlohmann::json& j, const std::string& path) {
    StrictObject o(j, path);
    ExplainBlockConfig e;
    e.method = o.string("method");
    if (e.method != "integrated-gradients" && e.method != "linear-surrogate" &&
        e.method != "influence")
        throw ConfigError("field '" + o.dotted("method") +
                          "' must be integrated-gradients|linear-surrogate|influence");
    if (auto v = o.opt_integer("sample_index")) {
        if (*v < 0)
            throw ConfigError("field '" + o.dotted("sample_index") + "' must be non-negative");
        e.sample_index = static_cast<std::size_t>(*v);
    }
    if (auto v = o.opt_number_array("baseline")) e.baseline = std::move(*v);
    if (auto v = o.opt_integer("target")) e.target = static_cast<int>(*v);
    if (auto v = o.opt_integer("m_steps")) e.m_steps = static_cast<int>(*v);
    if (auto v = o.opt_integer("n_samples")) e.n_samples = static_cast<int>(*v);
    if (auto v = o.opt_number("kernel_width")) e.kernel_width = *v;
    if (auto v = o.opt_integer("seed")) e.seed = static_cast<std::uint64_t>(*v);
    if (o.has("victim")) {
        StrictObject victim(o.require("victim"), o.dotted("victim"));
        e.victim = parse_model_spec(victim);
        victim.reject_unknown();
    }
    o.reject_unknown();
    if (e.method == "influence" && !e.victim)
        throw ConfigError("missing required field '" + o.dotted("victim") +
                          "' (influence method)");
    return e;
}

}  // namespace detail

/// Parses and validates the full experiment config. `for_seceval` switches the
/// attack block between single-epsilon and grid form.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                                bool for_seceval = false) {
    detail::StrictObject o(j, "");
    ExperimentConfig cfg;
    if (const nlohmann::json* v = o.find("dataset"))
        cfg.dataset = detail::parse_dataset(*v, "dataset");
    if (const nlohmann::json* v = o.find("model")) cfg.model = detail::parse_model(*v, "model");
    if (const nlohmann::json* v = o.find("attack"))
        cfg.attack = detail::parse_attack(*v, "attack", for_seceval);
    if (const nlohmann::json* v = o.find("poison"))
        cfg.poison = detail::parse_poison(*v, "poison");
    if (const nlohmann::json* v = o.find("explain"))
        cfg.explain = detail::parse_explain(*v, "explain");
    if (auto v = o.opt_string("out")) cfg.out = *v;
    if (auto v = o.opt_integer("workers")) {
        if (*v < 1) throw ConfigError("field 'workers' must be at least 1");
        cfg.workers = static_cast<int>(*v);
    }
    if (auto v = o.opt_string("log_level")) {
        try {
            log_level_from_name(*v);
        } catch (const Error&) {
            throw ConfigError("field 'log_level' must be debug|info|warn|error");
        }
        cfg.log_level = *v;
    }
    o.reject_unknown();
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& text, bool for_seceval) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_experiment_config(j, for_seceval);
}

}  // namespace advsec
