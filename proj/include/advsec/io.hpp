#pragma once

// Serialization: the versioned model file, JSON payloads for traces, attack
// results, curves, and explanations, and the CSV exports. All floating-point
// text is emitted with round-trip precision so identical inputs produce
// byte-identical artifacts.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlohmann/json.hpp"

#include "advsec/attack.hpp"
#include "advsec/error.hpp"
#include "advsec/explain.hpp"
#include "advsec/model.hpp"
#include "advsec/optim.hpp"
#include "advsec/version.hpp"

namespace advsec {

namespace detail {

/// Shortest text that parses back to exactly the same double.
inline std::string round_trip(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) os << ' ' << round_trip(x);
}

class TokenReader {
public:
    explicit TokenReader(std::istream& is) : is_(is) {}

    std::string word(const char* what) {
        std::string t;
        if (!(is_ >> t)) throw ParseError(std::string("model file ended while reading ") + what);
        return t;
    }

    void expect(const char* literal) {
        const std::string t = word(literal);
        if (t != literal)
            throw ParseError(std::string("model file: expected '") + literal + "', got '" + t +
                             "'");
    }

    double number(const char* what) {
        const std::string t = word(what);
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ParseError(std::string("model file: bad number for ") + what + ": '" + t +
                             "'");
        }
    }

    long long integer(const char* what) {
        const std::string t = word(what);
        try {
            std::size_t used = 0;
            const long long v = std::stoll(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ParseError(std::string("model file: bad integer for ") + what + ": '" + t +
                             "'");
        }
    }

    std::vector<double> doubles(std::size_t n, const char* what) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = number(what);
        return out;
    }

private:
    std::istream& is_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Model file: a versioned, self-describing text encoding of the spec, the
// fitted parameters, and the optional preprocessing scaler.

inline std::string model_to_string(const TrainedModel& m,
                                   const std::optional<MinMaxScaler>& scaler = std::nullopt) {
    std::ostringstream os;
    os << "advsec-model v" << kModelFormatVersion << "\n";
    const ModelSpec& spec = m.spec();
    os << "kind " << model_kind_name(spec.kind) << "\n";
    os << "n_features " << m.n_features() << "\n";
    os << "n_classes " << m.n_classes() << "\n";
    if (spec.lambda) os << "spec_lambda " << detail::round_trip(*spec.lambda) << "\n";
    if (spec.gamma) os << "spec_gamma " << detail::round_trip(*spec.gamma) << "\n";
    if (spec.hidden_sizes) {
        os << "spec_hidden_sizes " << spec.hidden_sizes->size();
        for (int h : *spec.hidden_sizes) os << ' ' << h;
        os << "\n";
    }
    if (spec.n_trees) os << "spec_n_trees " << *spec.n_trees << "\n";
    if (spec.max_depth) os << "spec_max_depth " << *spec.max_depth << "\n";
    os << "spec_seed " << spec.seed << "\n";

    if (scaler) {
        os << "scaler minmax\n";
        os << "scaler_min";
        detail::write_doubles(os, scaler->min);
        os << "\nscaler_max";
        detail::write_doubles(os, scaler->max);
        os << "\n";
    } else {
        os << "scaler none\n";
    }

    if (const auto* lin = std::get_if<LinearParams>(&m.params())) {
        os << "params linear\n";
        os << "W";
        detail::write_doubles(os, lin->W);
        os << "\nb";
        detail::write_doubles(os, lin->b);
        os << "\n";
    } else if (const auto* rbf = std::get_if<RbfSvmParams>(&m.params())) {
        os << "params rbf\n";
        os << "gamma " << detail::round_trip(rbf->gamma) << "\n";
        os << "n_support " << rbf->n_support() << "\n";
        for (const auto& sv : rbf->support) {
            os << "sv";
            detail::write_doubles(os, sv);
            os << "\n";
        }
        os << "alpha";
        detail::write_doubles(os, rbf->alpha);
        os << "\nb";
        detail::write_doubles(os, rbf->b);
        os << "\n";
    } else if (const auto* mlp = std::get_if<MlpParams>(&m.params())) {
        os << "params mlp\n";
        os << "layers " << mlp->layer_sizes.size();
        for (std::size_t s : mlp->layer_sizes) os << ' ' << s;
        os << "\n";
        for (std::size_t l = 0; l < mlp->weights.size(); ++l) {
            os << "W" << l;
            detail::write_doubles(os, mlp->weights[l]);
            os << "\nb" << l;
            detail::write_doubles(os, mlp->biases[l]);
            os << "\n";
        }
    } else if (const auto* forest = std::get_if<ForestParams>(&m.params())) {
        os << "params forest\n";
        os << "n_trees " << forest->trees.size() << "\n";
        for (const auto& tree : forest->trees) {
            os << "tree " << tree.size() << "\n";
            for (const auto& node : tree) {
                os << "node " << node.feature << ' ' << detail::round_trip(node.threshold)
                   << ' ' << node.left << ' ' << node.right << ' '
                   << node.leaf_distribution.size();
                detail::write_doubles(os, node.leaf_distribution);
                os << "\n";
            }
        }
    }
    os << "end\n";
    return os.str();
}

inline std::pair<TrainedModel, std::optional<MinMaxScaler>> model_from_string(
    const std::string& text) {
    std::istringstream is(text);
    detail::TokenReader r(is);

    r.expect("advsec-model");
    const std::string version = r.word("format version");
    if (version != "v" + std::to_string(kModelFormatVersion))
        throw ParseError("unsupported model file version '" + version + "'");
    r.expect("kind");
    ModelKind kind;
    {
        const std::string name = r.word("model kind");
        try {
            kind = model_kind_from_name(name);
        } catch (const Error&) {
            throw ParseError("unknown model kind '" + name + "'");
        }
    }
    r.expect("n_features");
    const auto n_features = static_cast<std::size_t>(r.integer("n_features"));
    r.expect("n_classes");
    const int n_classes = static_cast<int>(r.integer("n_classes"));

    ModelSpec spec;
    spec.kind = kind;
    std::string tok = r.word("spec field or scaler");
    while (tok.rfind("spec_", 0) == 0) {
        if (tok == "spec_lambda") {
            spec.lambda = r.number("lambda");
        } else if (tok == "spec_gamma") {
            spec.gamma = r.number("gamma");
        } else if (tok == "spec_hidden_sizes") {
            const auto k = static_cast<std::size_t>(r.integer("hidden layer count"));
            std::vector<int> hs(k);
            for (auto& h : hs) h = static_cast<int>(r.integer("hidden size"));
            spec.hidden_sizes = std::move(hs);
        } else if (tok == "spec_n_trees") {
            spec.n_trees = static_cast<int>(r.integer("n_trees"));
        } else if (tok == "spec_max_depth") {
            spec.max_depth = static_cast<int>(r.integer("max_depth"));
        } else if (tok == "spec_seed") {
            spec.seed = static_cast<std::uint64_t>(r.integer("seed"));
        } else {
            throw ParseError("model file: unknown spec field '" + tok + "'");
        }
        tok = r.word("spec field or scaler");
    }

    if (tok != "scaler") throw ParseError("model file: expected 'scaler', got '" + tok + "'");
    std::optional<MinMaxScaler> scaler;
    const std::string scaler_kind = r.word("scaler kind");
    if (scaler_kind == "minmax") {
        MinMaxScaler s;
        r.expect("scaler_min");
        s.min = r.doubles(n_features, "scaler min");
        r.expect("scaler_max");
        s.max = r.doubles(n_features, "scaler max");
        scaler = std::move(s);
    } else if (scaler_kind != "none") {
        throw ParseError("model file: unknown scaler kind '" + scaler_kind + "'");
    }

    r.expect("params");
    const std::string params_kind = r.word("params kind");
    ModelParams params;
    if (params_kind == "linear") {
        LinearParams p;
        p.n_features = n_features;
        p.n_classes = static_cast<std::size_t>(n_classes);
        r.expect("W");
        p.W = r.doubles(p.n_classes * p.n_features, "linear weights");
        r.expect("b");
        p.b = r.doubles(p.n_classes, "linear biases");
        params = std::move(p);
    } else if (params_kind == "rbf") {
        RbfSvmParams p;
        p.n_features = n_features;
        p.n_classes = static_cast<std::size_t>(n_classes);
        r.expect("gamma");
        p.gamma = r.number("gamma");
        r.expect("n_support");
        const auto ns = static_cast<std::size_t>(r.integer("n_support"));
        p.support.resize(ns);
        for (auto& sv : p.support) {
            r.expect("sv");
            sv = r.doubles(n_features, "support vector");
        }
        r.expect("alpha");
        p.alpha = r.doubles(p.n_classes * ns, "alpha");
        r.expect("b");
        p.b = r.doubles(p.n_classes, "rbf biases");
        params = std::move(p);
    } else if (params_kind == "mlp") {
        MlpParams p;
        r.expect("layers");
        const auto nl = static_cast<std::size_t>(r.integer("layer count"));
        p.layer_sizes.resize(nl);
        for (auto& s : p.layer_sizes) s = static_cast<std::size_t>(r.integer("layer size"));
        p.weights.resize(nl - 1);
        p.biases.resize(nl - 1);
        for (std::size_t l = 0; l + 1 < nl; ++l) {
            r.expect(("W" + std::to_string(l)).c_str());
            p.weights[l] = r.doubles(p.layer_sizes[l + 1] * p.layer_sizes[l], "mlp weights");
            r.expect(("b" + std::to_string(l)).c_str());
            p.biases[l] = r.doubles(p.layer_sizes[l + 1], "mlp biases");
        }
        params = std::move(p);
    } else if (params_kind == "forest") {
        ForestParams p;
        p.n_features = n_features;
        p.n_classes = static_cast<std::size_t>(n_classes);
        r.expect("n_trees");
        const auto nt = static_cast<std::size_t>(r.integer("tree count"));
        p.trees.resize(nt);
        for (auto& tree : p.trees) {
            r.expect("tree");
            const auto nn = static_cast<std::size_t>(r.integer("node count"));
            tree.resize(nn);
            for (auto& node : tree) {
                r.expect("node");
                node.feature = static_cast<int>(r.integer("node feature"));
                node.threshold = r.number("node threshold");
                node.left = static_cast<int>(r.integer("node left"));
                node.right = static_cast<int>(r.integer("node right"));
                const auto k = static_cast<std::size_t>(r.integer("leaf distribution size"));
                node.leaf_distribution = r.doubles(k, "leaf distribution");
            }
        }
        params = std::move(p);
    } else {
        throw ParseError("model file: unknown params kind '" + params_kind + "'");
    }
    r.expect("end");

    return {TrainedModel(spec, std::move(params), n_features, n_classes), std::move(scaler)};
}

inline void save_model(const TrainedModel& m, const std::string& path,
                       const std::optional<MinMaxScaler>& scaler = std::nullopt) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw InvalidArgumentError("cannot write model file '" + path + "'");
    os << model_to_string(m, scaler);
}

inline std::pair<TrainedModel, std::optional<MinMaxScaler>> load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgumentError("cannot read model file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return model_from_string(buf.str());
}

// ---------------------------------------------------------------------------
// JSON payloads. nlohmann::json objects keep keys sorted, so dumps are
// deterministic for identical values.

inline nlohmann::json trace_to_json(const SolverTrace& t) {
    return nlohmann::json{{"points", t.points},
                          {"losses", t.losses},
                          {"n_fun_evals", t.n_fun_evals},
                          {"n_grad_evals", t.n_grad_evals},
                          {"stop_reason", t.stop_reason}};
}

inline nlohmann::json attack_result_to_json(const AttackResult& r) {
    return nlohmann::json{{"x_adv", r.x_adv.to_dense_vector()},
                          {"success", r.success},
                          {"initial_label", r.initial_label},
                          {"final_label", r.final_label},
                          {"trace", trace_to_json(r.trace)},
                          {"per_iteration_scores", r.per_iteration_scores}};
}

inline nlohmann::json curve_to_json(const SecurityEvalCurve& c) {
    return nlohmann::json{{"eps_grid", c.eps_grid},
                          {"accuracy_at_eps", c.accuracy_at_eps},
                          {"mean_confidence_drop", c.mean_confidence_drop}};
}

inline std::string curve_to_csv(const SecurityEvalCurve& c) {
    std::string out = "eps,accuracy,mean_confidence_drop\n";
    for (std::size_t i = 0; i < c.eps_grid.size(); ++i) {
        out += detail::round_trip(c.eps_grid[i]) + "," +
               detail::round_trip(c.accuracy_at_eps[i]) + "," +
               detail::round_trip(c.mean_confidence_drop[i]) + "\n";
    }
    return out;
}

inline nlohmann::json attribution_to_json(const Attribution& a) {
    return nlohmann::json{{"per_feature", a.per_feature.to_dense_vector()},
                          {"baseline", a.baseline.to_dense_vector()},
                          {"target_class", a.target_class},
                          {"method", a.method}};
}

inline std::string attribution_to_csv(const Attribution& a) {
    std::string out = "feature_index,score\n";
    const auto v = a.per_feature.to_dense_vector();
    for (std::size_t i = 0; i < v.size(); ++i)
        out += std::to_string(i) + "," + detail::round_trip(v[i]) + "\n";
    return out;
}

inline nlohmann::json influence_to_json(const InfluenceResult& r) {
    return nlohmann::json{{"per_training_point", r.per_training_point},
                          {"test_x", r.test_x.to_dense_vector()},
                          {"test_y", r.test_y}};
}

// ---------------------------------------------------------------------------
// Small file helpers shared by the runner and the tests.

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw InvalidArgumentError("cannot write file '" + path + "'");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgumentError("cannot read file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

}  // namespace advsec
