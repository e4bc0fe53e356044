#pragma once

// Experiment runner behind the CLI: materializes datasets and models from an
// ExperimentConfig, drives the five subcommands, and writes every artifact
// (model/trace/curve/attribution files, SVG diagnostics, log, manifest) into
// the output directory. The manifest records a sha256 content hash per file
// so reproducibility is checkable by diffing two manifests.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"

#include "advsec/attack.hpp"
#include "advsec/config.hpp"
#include "advsec/detail/sha256.hpp"
#include "advsec/explain.hpp"
#include "advsec/io.hpp"
#include "advsec/log.hpp"
#include "advsec/parallel.hpp"
#include "advsec/svg.hpp"
#include "advsec/version.hpp"

namespace advsec {

struct CliOverrides {
    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> log_level;
};

struct RunArtifacts {
    std::string out_dir;
    std::vector<std::string> files;  // relative paths, as listed in the manifest
    nlohmann::json manifest;
};

namespace detail {

/// Collects emitted files under one directory and hashes their content.
class ArtifactSink {
public:
    explicit ArtifactSink(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, const std::string& content) {
        write_text_file((dir_ / name).string(), content);
        record(name, content);
    }

    /// For files written by someone else (the log): hash what is on disk.
    void record_existing(const std::string& name) {
        record(name, read_text_file((dir_ / name).string()));
    }

    nlohmann::json files_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : entries_)
            arr.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
        return arr;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.path);
        return out;
    }

private:
    struct Entry {
        std::string path;
        std::string sha256;
        std::size_t bytes;
    };

    void record(const std::string& name, const std::string& content) {
        entries_.push_back({name, sha256_hex(content), content.size()});
    }

    std::filesystem::path dir_;
    std::vector<Entry> entries_;
};

inline Dataset build_dataset(const DatasetConfig& d) {
    if (d.generator == "blobs") return make_blobs(d.n, d.centers, d.spread, d.seed);
    if (d.generator == "moons") return make_moons(d.n, d.noise, d.seed);
    if (d.generator == "plates") return make_plates(d.n, d.seed);
    return load_csv(d.path, d.label_column);
}

inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, const DatasetConfig& d) {
    if (d.split == 0.0) return {ds, ds};  // no held-out part: evaluate in-sample
    return train_test_split(ds, d.split, d.seed + 1);
}

inline Dataset transform_dataset(const MinMaxScaler& s, const Dataset& ds) {
    const std::size_t n = ds.n_samples();
    const std::size_t d = ds.n_features();
    std::vector<double> values;
    values.reserve(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = s.transform(ds.X.row(i));
        values.insert(values.end(), row.begin(), row.end());
    }
    return make_dataset(Tensor::dense({n, d}, std::move(values)), ds.y, ds.n_classes);
}

struct LoadedModel {
    TrainedModel model;
    std::optional<MinMaxScaler> scaler;
};

/// Either loads the referenced model file or fits the inline spec on the
/// training split. Missing files are a config error (exit code 2).
inline LoadedModel obtain_model(const ExperimentConfig& cfg, const Dataset& train,
                                Logger& log) {
    if (!cfg.model) throw ConfigError("missing required field 'model'");
    LoadedModel lm;
    if (cfg.model->file) {
        try {
            auto [m, s] = load_model(*cfg.model->file);
            lm.model = std::move(m);
            lm.scaler = std::move(s);
        } catch (const ParseError& e) {
            throw ConfigError("field 'model.file': " + std::string(e.what()));
        } catch (const InvalidArgumentError& e) {
            throw ConfigError("field 'model.file': " + std::string(e.what()));
        }
        log.info("loaded " + std::string(model_kind_name(lm.model.spec().kind)) +
                 " model from '" + *cfg.model->file + "'");
        return lm;
    }
    if (cfg.model->scaler) {
        lm.scaler = fit_scaler(train);
        lm.model = fit(cfg.model->spec.value(), transform_dataset(*lm.scaler, train));
    } else {
        lm.model = fit(cfg.model->spec.value(), train);
    }
    log.info("fitted " + std::string(model_kind_name(lm.model.spec().kind)) + " model on " +
             std::to_string(train.n_samples()) + " samples");
    return lm;
}

/// Runs `fn` against the bare model or the scaler chain, whichever applies.
template <typename F>
auto with_module(const LoadedModel& lm, F&& fn) {
    if (lm.scaler) return fn(ModuleChain(lm.model, *lm.scaler));
    return fn(lm.model);
}

/// Test-sample indices an attack/explain run operates on.
inline std::vector<std::size_t> select_samples(const AttackBlockConfig& a,
                                               std::size_t test_n) {
    std::vector<std::size_t> idx;
    if (!a.samples.empty()) {
        for (std::size_t i : a.samples) {
            if (i >= test_n)
                throw ConfigError("field 'attack.samples' index " + std::to_string(i) +
                                  " is out of range for " + std::to_string(test_n) +
                                  " test samples");
            idx.push_back(i);
        }
        return idx;
    }
    const std::size_t n = a.n_samples > 0 ? std::min(a.n_samples, test_n)
                                          : std::min<std::size_t>(10, test_n);
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
}

/// Second series of the per-sample confidence plot: the class the attack is
/// trying to reach (explicit target, else whatever class the point ended in;
/// for a failed untargeted run, the strongest competitor at the last iterate).
inline int plot_target_class(const AttackResult& r, const EvasionSpec& spec) {
    if (spec.loss.target_label) return *spec.loss.target_label;
    if (r.final_label != r.initial_label) return r.final_label;
    const auto& last = r.per_iteration_scores.back();
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < last.size(); ++k) {
        if (static_cast<int>(k) == r.initial_label) continue;
        if (last[k] > best_score) {
            best_score = last[k];
            best = static_cast<int>(k);
        }
    }
    return best;
}

inline std::vector<double> iteration_axis(std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
    return x;
}

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// -----------------------------------------------------------------------
// Subcommands. Each returns manifest extras; artifacts go through the sink.

inline nlohmann::json cmd_train_impl(const ExperimentConfig& cfg, ArtifactSink& sink,
                                     Logger& log) {
    if (!cfg.dataset) throw ConfigError("missing required field 'dataset'");
    if (!cfg.model) throw ConfigError("missing required field 'model'");
    if (!cfg.model->spec)
        throw ConfigError("field 'model.kind' is required for train (cannot train from "
                          "'model.file')");
    const Dataset ds = build_dataset(*cfg.dataset);
    const auto [train, test] = split_dataset(ds, *cfg.dataset);
    const LoadedModel lm = obtain_model(cfg, train, log);

    const double acc_train =
        with_module(lm, [&](const auto& m) { return evaluate_accuracy(m, train); });
    const double acc_test =
        with_module(lm, [&](const auto& m) { return evaluate_accuracy(m, test); });

    sink.add("model.txt", model_to_string(lm.model, lm.scaler));
    log.info("wrote model.txt");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "train accuracy: %.4f", acc_train);
    std::cout << buf << "\n";
    std::snprintf(buf, sizeof(buf), "test accuracy: %.4f", acc_test);
    std::cout << buf << "\n";

    return {{"train_accuracy", acc_train}, {"test_accuracy", acc_test}};
}

inline nlohmann::json cmd_attack_impl(const ExperimentConfig& cfg, ArtifactSink& sink,
                                      Logger& log) {
    if (!cfg.dataset) throw ConfigError("missing required field 'dataset'");
    if (!cfg.attack) throw ConfigError("missing required field 'attack'");
    const Dataset ds = build_dataset(*cfg.dataset);
    const auto [train, test] = split_dataset(ds, *cfg.dataset);
    const LoadedModel lm = obtain_model(cfg, train, log);
    const std::vector<std::size_t> idx = select_samples(*cfg.attack, test.n_samples());

    const auto results = with_module(lm, [&](const auto& m) {
        auto worker = [&](std::size_t k) {
            const Tensor x = test.X.row(idx[k]);
            const int y = test.y[idx[k]];
            const EvasionSpec& spec = cfg.attack->evasion;
            if (spec.loss.target_label && *spec.loss.target_label == y) {
                // Already labeled as the target: nothing to move. Counted as
                // not evaded, same convention as the security evaluation.
                AttackResult r;
                r.x_adv = x;
                r.initial_label = m.predict(x);
                r.final_label = r.initial_label;
                r.trace.points = {x.to_dense_vector()};
                r.trace.losses = {loss_value(m, x, *spec.loss.target_label, spec.loss)};
                r.trace.n_fun_evals = 1;
                r.trace.stop_reason = "tol-reached";
                r.per_iteration_scores = {m.decision_scores(x).dense_values()};
                return r;
            }
            SolverConfig solver = cfg.attack->solver;
            if (solver.solver == SolverKind::random_search)
                solver.seed = solver.seed.value_or(0) + idx[k];
            return run_evasion(m, x, y, spec, solver);
        };
        return parallel_map<AttackResult>(idx.size(), worker, cfg.workers);
    });

    std::size_t n_success = 0;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const AttackResult& r = results[k];
        if (r.success) ++n_success;
        const std::string tag = std::to_string(idx[k]);
        sink.add("trace_" + tag + ".json", json_text(attack_result_to_json(r)));

        const auto xs = iteration_axis(r.trace.losses.size());
        sink.add("loss_" + tag + ".svg",
                 render_line_chart("attack loss, sample " + tag, "iteration", "loss",
                                   {Series{"loss", xs, r.trace.losses, false}}));

        const int source = r.initial_label;
        const int target = plot_target_class(r, cfg.attack->evasion);
        std::vector<double> src_scores, tgt_scores;
        for (const auto& scores : r.per_iteration_scores) {
            src_scores.push_back(scores[static_cast<std::size_t>(source)]);
            tgt_scores.push_back(scores[static_cast<std::size_t>(target)]);
        }
        sink.add("scores_" + tag + ".svg",
                 render_line_chart("class scores, sample " + tag, "iteration", "score",
                                   {Series{"source score", xs, src_scores, false},
                                    Series{"target score", xs, tgt_scores, true}}));
        log.info("sample " + tag + (r.success ? " evaded" : " held") + " (label " +
                 std::to_string(r.initial_label) + " -> " + std::to_string(r.final_label) +
                 ")");
    }

    std::cout << "success rate: " << n_success << "/" << results.size() << "\n";
    return {{"n_samples", results.size()}, {"n_success", n_success}};
}

inline nlohmann::json cmd_seceval_impl(const ExperimentConfig& cfg, ArtifactSink& sink,
                                       Logger& log) {
    if (!cfg.dataset) throw ConfigError("missing required field 'dataset'");
    if (!cfg.attack) throw ConfigError("missing required field 'attack'");
    const Dataset ds = build_dataset(*cfg.dataset);
    const auto [train, test] = split_dataset(ds, *cfg.dataset);
    const LoadedModel lm = obtain_model(cfg, train, log);
    const std::vector<std::size_t> idx = select_samples(*cfg.attack, test.n_samples());
    const Dataset subset = gather_rows(test, idx);

    const SecurityEvalCurve curve = with_module(lm, [&](const auto& m) {
        return security_evaluation(m, subset, cfg.attack->evasion, cfg.attack->eps_grid,
                                   cfg.attack->solver);
    });

    sink.add("curve.csv", curve_to_csv(curve));
    sink.add("curve.json", json_text(curve_to_json(curve)));
    sink.add("curve.svg",
             render_line_chart("security evaluation", "epsilon", "accuracy",
                               {Series{"accuracy", curve.eps_grid, curve.accuracy_at_eps,
                                       false}}));
    log.info("evaluated " + std::to_string(curve.eps_grid.size()) + " epsilon values on " +
             std::to_string(subset.n_samples()) + " samples");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "clean accuracy: %.4f", curve.accuracy_at_eps.front());
    std::cout << buf << "\n";
    std::snprintf(buf, sizeof(buf), "accuracy at max epsilon: %.4f",
                  curve.accuracy_at_eps.back());
    std::cout << buf << "\n";
    return {{"clean_accuracy", curve.accuracy_at_eps.front()},
            {"accuracy_at_max_eps", curve.accuracy_at_eps.back()}};
}

inline nlohmann::json cmd_poison_impl(const ExperimentConfig& cfg, ArtifactSink& sink,
                                      Logger& log) {
    if (!cfg.dataset) throw ConfigError("missing required field 'dataset'");
    if (!cfg.poison) throw ConfigError("missing required field 'poison'");
    const Dataset ds = build_dataset(*cfg.dataset);
    const auto [train, val] = split_dataset(ds, *cfg.dataset);

    PoisoningSpec spec = cfg.poison->spec;
    if (cfg.poison->box_from_data) {
        // No explicit box: poison points may roam the training data's bounding box.
        const std::size_t d = train.n_features();
        spec.feature_box.assign(d, {std::numeric_limits<double>::infinity(),
                                    -std::numeric_limits<double>::infinity()});
        for (std::size_t i = 0; i < train.n_samples(); ++i) {
            const auto row = train.X.row(i).to_dense_vector();
            for (std::size_t j = 0; j < d; ++j) {
                spec.feature_box[j].first = std::min(spec.feature_box[j].first, row[j]);
                spec.feature_box[j].second = std::max(spec.feature_box[j].second, row[j]);
            }
        }
    }

    const PoisoningResult result = run_poisoning(spec, train, val);

    std::string csv;
    for (std::size_t j = 0; j < train.n_features(); ++j)
        csv += "f" + std::to_string(j) + ",";
    csv += "label\n";
    for (std::size_t i = 0; i < result.poison_points.n_samples(); ++i) {
        const auto row = result.poison_points.X.row(i).to_dense_vector();
        for (double v : row) csv += round_trip(v) + ",";
        csv += std::to_string(result.poison_points.y[i]) + "\n";
    }
    sink.add("poison_points.csv", csv);
    for (std::size_t k = 0; k < result.traces.size(); ++k)
        sink.add("poison_trace_" + std::to_string(k) + ".json",
                 json_text(trace_to_json(result.traces[k])));
    log.info("placed " + std::to_string(result.poison_points.n_samples()) +
             " poison points");

    char buf[128];
    std::snprintf(buf, sizeof(buf), "validation accuracy before: %.4f",
                  result.val_accuracy_before);
    std::cout << buf << "\n";
    std::snprintf(buf, sizeof(buf), "validation accuracy after: %.4f",
                  result.val_accuracy_after);
    std::cout << buf << "\n";
    return {{"accuracy_before", result.val_accuracy_before},
            {"accuracy_after", result.val_accuracy_after},
            {"n_poison", result.poison_points.n_samples()}};
}

inline nlohmann::json cmd_explain_impl(const ExperimentConfig& cfg, ArtifactSink& sink,
                                       Logger& log) {
    if (!cfg.dataset) throw ConfigError("missing required field 'dataset'");
    if (!cfg.explain) throw ConfigError("missing required field 'explain'");
    const ExplainBlockConfig& ex = *cfg.explain;
    const Dataset ds = build_dataset(*cfg.dataset);
    const auto [train, test] = split_dataset(ds, *cfg.dataset);
    if (ex.sample_index >= test.n_samples())
        throw ConfigError("field 'explain.sample_index' is out of range for " +
                          std::to_string(test.n_samples()) + " test samples");
    const Tensor x = test.X.row(ex.sample_index);

    if (ex.method == "influence") {
        const InfluenceResult result =
            influence(ex.victim.value(), train, x, test.y[ex.sample_index]);
        std::string csv = "train_index,score\n";
        for (std::size_t i = 0; i < result.per_training_point.size(); ++i)
            csv += std::to_string(i) + "," +
                   round_trip(result.per_training_point[i]) + "\n";
        sink.add("influence.csv", csv);
        sink.add("influence.json", json_text(influence_to_json(result)));
        sink.add("influence.svg",
                 render_bar_chart("influence, sample " + std::to_string(ex.sample_index),
                                  "training point", "score", "influence",
                                  result.per_training_point));
        log.info("scored " + std::to_string(result.per_training_point.size()) +
                 " training points");
        std::cout << "wrote influence scores for " << result.per_training_point.size()
                  << " training points\n";
        return {{"method", ex.method}};
    }

    const LoadedModel lm = obtain_model(cfg, train, log);
    const Attribution att = with_module(lm, [&](const auto& m) {
        if (ex.method == "integrated-gradients") {
            std::vector<double> base(test.n_features(), 0.0);
            if (ex.baseline) {
                if (ex.baseline->size() != test.n_features())
                    throw ConfigError("field 'explain.baseline' must have " +
                                      std::to_string(test.n_features()) + " entries");
                base = *ex.baseline;
            }
            const int target = ex.target ? *ex.target : m.predict(x);
            return integrated_gradients(m, x, Tensor::vector(base), target, ex.m_steps);
        }
        return linear_surrogate(m, x, ex.n_samples, ex.kernel_width, ex.seed);
    });

    sink.add("attribution.csv", attribution_to_csv(att));
    sink.add("attribution.json", json_text(attribution_to_json(att)));
    sink.add("attribution.svg",
             render_bar_chart(att.method + ", sample " + std::to_string(ex.sample_index),
                              "feature", "score", att.method,
                              att.per_feature.to_dense_vector()));
    log.info("wrote " + std::to_string(att.per_feature.size()) +
             " feature attributions (" + att.method + ")");
    std::cout << "explained class " << att.target_class << " with " << att.method << "\n";
    return {{"method", ex.method}, {"target_class", att.target_class}};
}

inline void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov) {
    if (ov.out) cfg.out = *ov.out;
    if (ov.workers) {
        if (*ov.workers < 1) throw ConfigError("field 'workers' must be at least 1");
        cfg.workers = *ov.workers;
    }
    if (ov.log_level) {
        try {
            log_level_from_name(*ov.log_level);
        } catch (const Error&) {
            throw ConfigError("field 'log_level' must be debug|info|warn|error");
        }
        cfg.log_level = *ov.log_level;
    }
    if (ov.seed) {
        // A command-line seed re-seeds every stochastic component at once.
        const std::uint64_t s = *ov.seed;
        if (cfg.dataset) cfg.dataset->seed = s;
        if (cfg.model && cfg.model->spec) cfg.model->spec->seed = s;
        // Only the randomized solver takes a seed; gradient solvers reject one.
        if (cfg.attack && cfg.attack->solver.solver == SolverKind::random_search)
            cfg.attack->solver.seed = s;
        if (cfg.poison) {
            cfg.poison->spec.seed = s;
            if (cfg.poison->spec.solver.solver == SolverKind::random_search)
                cfg.poison->spec.solver.seed = s;
        }
        if (cfg.explain) cfg.explain->seed = s;
    }
}

/// Block-presence and referenced-file checks, before any artifact is written.
inline void validate_for_command(const std::string& command, const ExperimentConfig& cfg) {
    if (!cfg.dataset) throw ConfigError("missing required field 'dataset'");
    if (command == "train" || command == "attack" || command == "seceval" ||
        (command == "explain" && cfg.explain && cfg.explain->method != "influence")) {
        if (!cfg.model) throw ConfigError("missing required field 'model'");
        if (cfg.model->file && !std::filesystem::exists(*cfg.model->file))
            throw ConfigError("field 'model.file': no such file '" + *cfg.model->file + "'");
    }
    if (command == "train" && cfg.model && !cfg.model->spec)
        throw ConfigError("field 'model.kind' is required for train (cannot train from "
                          "'model.file')");
    if ((command == "attack" || command == "seceval") && !cfg.attack)
        throw ConfigError("missing required field 'attack'");
    if (command == "poison" && !cfg.poison)
        throw ConfigError("missing required field 'poison'");
    if (command == "explain" && !cfg.explain)
        throw ConfigError("missing required field 'explain'");
    if (cfg.dataset->generator == "csv" && !std::filesystem::exists(cfg.dataset->path))
        throw ConfigError("field 'dataset.path': no such file '" + cfg.dataset->path + "'");
}

inline nlohmann::json seeds_json(const ExperimentConfig& cfg) {
    nlohmann::json seeds = nlohmann::json::object();
    if (cfg.dataset) seeds["dataset"] = cfg.dataset->seed;
    if (cfg.model && cfg.model->spec) seeds["model"] = cfg.model->spec->seed;
    if (cfg.attack && cfg.attack->solver.seed) seeds["solver"] = *cfg.attack->solver.seed;
    if (cfg.poison) seeds["poison"] = cfg.poison->spec.seed;
    if (cfg.explain) seeds["explain"] = cfg.explain->seed;
    return seeds;
}

}  // namespace detail

/// Parses the config text, applies command-line overrides, runs the named
/// subcommand, and writes all artifacts plus manifest.json into the output
/// directory. Throws ConfigError for validation problems (exit code 2) and
/// other advsec errors for runtime failures (exit code 3).
inline RunArtifacts run_command(const std::string& command, const std::string& config_text,
                                const CliOverrides& overrides = {}) {
    if (command != "train" && command != "attack" && command != "seceval" &&
        command != "poison" && command != "explain")
        throw ConfigError("unknown command '" + command + "'");

    ExperimentConfig cfg = load_experiment_config(config_text, command == "seceval");
    detail::apply_overrides(cfg, overrides);
    if (command == "seceval" && cfg.attack &&
        (cfg.attack->eps_grid.empty() || cfg.attack->eps_grid.front() != 0.0))
        throw ConfigError("field 'attack.eps_grid' must start at 0");
    detail::validate_for_command(command, cfg);

    std::filesystem::create_directories(cfg.out);
    detail::ArtifactSink sink{std::filesystem::path(cfg.out)};
    Logger log(log_level_from_name(cfg.log_level));
    log.open_file((std::filesystem::path(cfg.out) / "run.log").string());
    log.info("advsec " + std::string(kLibraryVersion) + " " + command + " -> " + cfg.out);

    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json extra;
    if (command == "train") {
        extra = detail::cmd_train_impl(cfg, sink, log);
    } else if (command == "attack") {
        extra = detail::cmd_attack_impl(cfg, sink, log);
    } else if (command == "seceval") {
        extra = detail::cmd_seceval_impl(cfg, sink, log);
    } else if (command == "poison") {
        extra = detail::cmd_poison_impl(cfg, sink, log);
    } else {
        extra = detail::cmd_explain_impl(cfg, sink, log);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.info("done");
    sink.record_existing("run.log");

    RunArtifacts out;
    out.out_dir = cfg.out;
    out.files = sink.names();
    out.manifest = {{"manifest_version", kManifestFormatVersion},
                    {"library_version", kLibraryVersion},
                    {"command", command},
                    {"config", nlohmann::json::parse(config_text)},
                    {"workers", cfg.workers},
                    {"seeds", detail::seeds_json(cfg)},
                    {"wall_clock_seconds", wall},
                    {"results", extra},
                    {"files", sink.files_json()}};
    write_text_file((std::filesystem::path(cfg.out) / "manifest.json").string(),
                    detail::json_text(out.manifest));
    return out;
}

}  // namespace advsec
