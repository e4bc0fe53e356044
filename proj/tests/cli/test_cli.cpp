#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "nlohmann/json.hpp"

#include "advsec/io.hpp"
#include "advsec/runner.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = ADVSEC_CLI_PATH;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

/// Fresh working directory for one test case, under the test binary's cwd.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::path("cli_scratch") / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    fs::path operator/(const std::string& name) const { return dir / name; }

    void write_config(const std::string& name, const json& j) const {
        std::ofstream os(dir / name);
        os << j.dump(2) << "\n";
    }

    RunResult run(const std::string& args) const {
        static int counter = 0;
        const fs::path out_f = dir / ("stdout." + std::to_string(counter));
        const fs::path err_f = dir / ("stderr." + std::to_string(counter));
        ++counter;
        const std::string cmd =
            kCli + " " + args + " >" + out_f.string() + " 2>" + err_f.string();
        const int rc = std::system(cmd.c_str());
        RunResult r;
        r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
        r.out = slurp(out_f);
        r.err = slurp(err_f);
        return r;
    }
};

json blobs_dataset(std::size_t n = 120, double split = 0.25, std::uint64_t seed = 5) {
    return {{"generator", "blobs"},
            {"n", n},
            {"centers", json::array({json::array({-2.0, 0.0}), json::array({2.0, 0.0})})},
            {"spread", 1.0},
            {"split", split},
            {"seed", seed}};
}

json pgd_solver(int max_iter = 30, double step = 100.0) {
    return {{"kind", "pgd"}, {"max_iter", max_iter}, {"step_size", step}};
}

std::map<std::string, std::string> manifest_hashes(const fs::path& out_dir) {
    const json m = json::parse(slurp(out_dir / "manifest.json"));
    std::map<std::string, std::string> h;
    for (const auto& f : m["files"]) h[f["path"]] = f["sha256"];
    return h;
}

/// Minimal XML well-formedness check: declaration, balanced tags, quoted
/// attribute values. Enough to catch truncated or mis-nested SVG output.
bool well_formed_xml(const std::string& s) {
    std::size_t i = 0;
    if (s.rfind("<?xml", 0) != 0) return false;
    i = s.find("?>");
    if (i == std::string::npos) return false;
    i += 2;
    std::vector<std::string> stack;
    while (i < s.size()) {
        if (s[i] != '<') {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        const bool closing = j < s.size() && s[j] == '/';
        if (closing) ++j;
        std::size_t name_start = j;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-'))
            ++j;
        const std::string name = s.substr(name_start, j - name_start);
        if (name.empty()) return false;
        // scan to the tag end, honoring quoted attribute values
        bool self_closing = false;
        while (j < s.size() && s[j] != '>') {
            if (s[j] == '"') {
                j = s.find('"', j + 1);
                if (j == std::string::npos) return false;
            }
            ++j;
        }
        if (j >= s.size()) return false;
        if (s[j - 1] == '/') self_closing = true;
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
        i = j + 1;
    }
    return stack.empty();
}

}  // namespace

TEST_CASE("train writes a hashed model file and prints accuracies") {
    Scratch ws("train_happy");
    ws.write_config("train.json", {{"dataset", blobs_dataset()},
                                   {"model", {{"kind", "logreg"}, {"lambda", 0.01}}},
                                   {"out", (ws / "out").string()}});
    const auto r = ws.run("train --config " + (ws / "train.json").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("train accuracy") != std::string::npos);
    CHECK(r.out.find("test accuracy") != std::string::npos);
    REQUIRE(fs::exists(ws / "out" / "model.txt"));
    REQUIRE(fs::exists(ws / "out" / "manifest.json"));

    const json m = json::parse(slurp(ws / "out" / "manifest.json"));
    CHECK(m["command"] == "train");
    CHECK(m["library_version"] == "0.1.0");
    CHECK(m["manifest_version"] == 1);
    CHECK(m["wall_clock_seconds"].get<double>() >= 0.0);
    const auto hashes = manifest_hashes(ws / "out");
    REQUIRE(hashes.count("model.txt") == 1);
    CHECK(hashes.at("model.txt").size() == 64);
    CHECK(hashes.count("run.log") == 1);
}

TEST_CASE("identical train configs produce identical model hashes") {
    Scratch ws("train_determinism");
    for (const char* out : {"out-a", "out-b"}) {
        ws.write_config(std::string("train_") + out + ".json",
                        {{"dataset", blobs_dataset()},
                         {"model", {{"kind", "svm-rbf"}, {"lambda", 0.01}, {"gamma", 2.0}}},
                         {"out", (ws / out).string()}});
        REQUIRE(ws.run("train --config " + (ws / (std::string("train_") + out + ".json")).string())
                    .code == 0);
    }
    CHECK(manifest_hashes(ws / "out-a").at("model.txt") ==
          manifest_hashes(ws / "out-b").at("model.txt"));
}

TEST_CASE("attack emits traces and per-sample SVG diagnostics") {
    Scratch ws("attack_happy");
    ws.write_config("train.json", {{"dataset", blobs_dataset()},
                                   {"model", {{"kind", "logreg"}, {"lambda", 0.01}}},
                                   {"out", (ws / "model-out").string()}});
    REQUIRE(ws.run("train --config " + (ws / "train.json").string()).code == 0);

    ws.write_config("attack.json",
                    {{"dataset", blobs_dataset()},
                     {"model", {{"file", (ws / "model-out" / "model.txt").string()}}},
                     {"attack",
                      {{"loss", "cw"},
                       {"target", 1},
                       {"norm", "l2"},
                       {"epsilon", 4.0},
                       {"samples", json::array({0, 1, 2})},
                       {"solver", pgd_solver(40)}}},
                     {"out", (ws / "out").string()}});
    const auto r = ws.run("attack --config " + (ws / "attack.json").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("success rate: ") != std::string::npos);
    CHECK(r.out.find("/3") != std::string::npos);

    for (int i : {0, 1, 2}) {
        const std::string tag = std::to_string(i);
        REQUIRE(fs::exists(ws / "out" / ("trace_" + tag + ".json")));
        const json t = json::parse(slurp(ws / "out" / ("trace_" + tag + ".json")));
        const auto& losses = t["trace"]["losses"];
        REQUIRE(!losses.empty());
        CHECK(losses.back().get<double>() <= losses.front().get<double>());
        CHECK(t["per_iteration_scores"].size() == t["trace"]["points"].size());

        for (const char* prefix : {"loss_", "scores_"}) {
            const std::string svg = slurp(ws / "out" / (prefix + tag + ".svg"));
            INFO(prefix << tag);
            CHECK(well_formed_xml(svg));
        }
        const std::string scores_svg = slurp(ws / "out" / ("scores_" + tag + ".svg"));
        CHECK(scores_svg.find("data-label=\"source score\"") != std::string::npos);
        CHECK(scores_svg.find("data-label=\"target score\"") != std::string::npos);
    }
}

TEST_CASE("epsilon zero yields a zero success rate") {
    Scratch ws("attack_eps0");
    ws.write_config("cfg.json", {{"dataset", blobs_dataset()},
                                 {"model", {{"kind", "logreg"}, {"lambda", 0.01}}},
                                 {"attack",
                                  {{"loss", "cross-entropy"},
                                   {"norm", "l2"},
                                   {"epsilon", 0.0},
                                   {"n_samples", 4},
                                   {"solver", pgd_solver()}}},
                                 {"out", (ws / "out").string()}});
    const auto r = ws.run("attack --config " + (ws / "cfg.json").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0/4") != std::string::npos);
}

TEST_CASE("config without a model block exits 2 naming the field") {
    Scratch ws("missing_model");
    ws.write_config("cfg.json", {{"dataset", blobs_dataset()}, {"out", (ws / "out").string()}});
    const auto r = ws.run("train --config " + (ws / "cfg.json").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("model") != std::string::npos);
    CHECK_FALSE(fs::exists(ws / "out"));
}

TEST_CASE("unknown config keys exit 2 naming the key") {
    Scratch ws("unknown_key");
    json ds = blobs_dataset();
    ds["spreadd"] = 2.0;
    ws.write_config("cfg.json", {{"dataset", ds},
                                 {"model", {{"kind", "logreg"}}},
                                 {"out", (ws / "out").string()}});
    const auto r = ws.run("train --config " + (ws / "cfg.json").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("dataset.spreadd") != std::string::npos);
}

TEST_CASE("missing config file exits 2") {
    Scratch ws("missing_config");
    const auto r = ws.run("train --config " + (ws / "nope.json").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("config") != std::string::npos);
}

TEST_CASE("gradient solver against a random forest exits 3") {
    Scratch ws("forest_grad");
    ws.write_config("train.json",
                    {{"dataset", blobs_dataset(80)},
                     {"model", {{"kind", "random-forest"}, {"n_trees", 5}, {"max_depth", 3},
                                {"seed", 1}}},
                     {"out", (ws / "model-out").string()}});
    REQUIRE(ws.run("train --config " + (ws / "train.json").string()).code == 0);

    ws.write_config("attack.json",
                    {{"dataset", blobs_dataset(80)},
                     {"model", {{"file", (ws / "model-out" / "model.txt").string()}}},
                     {"attack",
                      {{"loss", "cross-entropy"},
                       {"norm", "l2"},
                       {"epsilon", 1.0},
                       {"n_samples", 2},
                       {"solver", pgd_solver(10, 1.0)}}},
                     {"out", (ws / "out").string()}});
    const auto r = ws.run("attack --config " + (ws / "attack.json").string());
    CHECK(r.code == 3);
    CHECK(r.err.find("differentiable") != std::string::npos);
}

TEST_CASE("worker counts do not change attack artifacts") {
    Scratch ws("workers");
    const json attack = {{"loss", "cross-entropy"},
                         {"norm", "l2"},
                         {"epsilon", 1.5},
                         {"n_samples", 8},
                         {"solver",
                          {{"kind", "random-search"},
                           {"max_iter", 20},
                           {"sigma", 0.5},
                           {"trials", 4},
                           {"seed", 42}}}};
    for (const char* out : {"out-w1", "out-w4"}) {
        ws.write_config(std::string(out) + ".json",
                        {{"dataset", blobs_dataset()},
                         {"model", {{"kind", "svm-linear"}, {"lambda", 0.01}}},
                         {"attack", attack},
                         {"out", (ws / out).string()}});
    }
    REQUIRE(ws.run("attack --config " + (ws / "out-w1.json").string() + " --workers 1").code ==
            0);
    REQUIRE(ws.run("attack --config " + (ws / "out-w4.json").string() + " --workers 4").code ==
            0);

    const auto h1 = manifest_hashes(ws / "out-w1");
    const auto h4 = manifest_hashes(ws / "out-w4");
    REQUIRE(h1.size() == h4.size());
    for (const auto& [path, hash] : h1) {
        if (path == "run.log") continue;  // embeds the out-dir name
        INFO(path);
        CHECK(h4.at(path) == hash);
    }
    for (int i = 0; i < 8; ++i) {
        const std::string name = "trace_" + std::to_string(i) + ".json";
        CHECK(slurp(ws / "out-w1" / name) == slurp(ws / "out-w4" / name));
    }
}

TEST_CASE("seceval with the degenerate grid reports clean accuracy") {
    Scratch ws("seceval_zero");
    ws.write_config("cfg.json", {{"dataset", blobs_dataset()},
                                 {"model", {{"kind", "logreg"}, {"lambda", 0.01}}},
                                 {"attack",
                                  {{"loss", "cross-entropy"},
                                   {"norm", "l2"},
                                   {"eps_grid", json::array({0.0})},
                                   {"n_samples", 10},
                                   {"solver", pgd_solver()}}},
                                 {"out", (ws / "out").string()}});
    const auto r = ws.run("seceval --config " + (ws / "cfg.json").string());
    REQUIRE(r.code == 0);

    const std::string csv = slurp(ws / "out" / "curve.csv");
    REQUIRE(csv.rfind("eps,accuracy,mean_confidence_drop\n", 0) == 0);
    const auto body = csv.substr(csv.find('\n') + 1);
    CHECK(std::count(body.begin(), body.end(), '\n') == 1);  // single data row
    CHECK(body.rfind("0,", 0) == 0);

    const json m = json::parse(slurp(ws / "out" / "manifest.json"));
    const double clean = m["results"]["clean_accuracy"].get<double>();
    CHECK(body == "0," + advsec::detail::round_trip(clean) + ",0\n");
    CHECK(well_formed_xml(slurp(ws / "out" / "curve.svg")));
}

TEST_CASE("seceval rejects a grid that does not start at zero") {
    Scratch ws("seceval_badgrid");
    ws.write_config("cfg.json", {{"dataset", blobs_dataset()},
                                 {"model", {{"kind", "logreg"}, {"lambda", 0.01}}},
                                 {"attack",
                                  {{"loss", "cross-entropy"},
                                   {"norm", "l2"},
                                   {"eps_grid", json::array({0.5, 1.0})},
                                   {"solver", pgd_solver()}}},
                                 {"out", (ws / "out").string()}});
    const auto r = ws.run("seceval --config " + (ws / "cfg.json").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("eps_grid") != std::string::npos);
}

TEST_CASE("poison with zero points leaves accuracy unchanged") {
    Scratch ws("poison_noop");
    ws.write_config("cfg.json",
                    {{"dataset", blobs_dataset(80, 0.5, 9)},
                     {"poison",
                      {{"victim", {{"kind", "logreg"}, {"lambda", 0.01}}},
                       {"n_poison", 0},
                       {"poison_label", 1},
                       {"solver", pgd_solver(10, 1.0)},
                       {"seed", 3}}},
                     {"out", (ws / "out").string()}});
    const auto r = ws.run("poison --config " + (ws / "cfg.json").string());
    REQUIRE(r.code == 0);
    const json m = json::parse(slurp(ws / "out" / "manifest.json"));
    CHECK(m["results"]["accuracy_before"] == m["results"]["accuracy_after"]);
    CHECK(m["results"]["n_poison"] == 0);
    const std::string csv = slurp(ws / "out" / "poison_points.csv");
    CHECK(csv == "f0,f1,label\n");  // header only
}

TEST_CASE("explain integrated-gradients reproduces the linear identity") {
    Scratch ws("explain_ig");
    ws.write_config("train.json", {{"dataset", blobs_dataset()},
                                   {"model", {{"kind", "svm-linear"}, {"lambda", 0.01}}},
                                   {"out", (ws / "model-out").string()}});
    REQUIRE(ws.run("train --config " + (ws / "train.json").string()).code == 0);

    ws.write_config("explain.json",
                    {{"dataset", blobs_dataset()},
                     {"model", {{"file", (ws / "model-out" / "model.txt").string()}}},
                     {"explain",
                      {{"method", "integrated-gradients"}, {"sample_index", 0},
                       {"m_steps", 64}}},
                     {"out", (ws / "out").string()}});
    const auto r = ws.run("explain --config " + (ws / "explain.json").string());
    REQUIRE(r.code == 0);

    // Reconstruct the same test sample and weights the binary used.
    advsec::DatasetConfig dc;
    dc.generator = "blobs";
    dc.n = 120;
    dc.centers = {advsec::Tensor::vector({-2.0, 0.0}), advsec::Tensor::vector({2.0, 0.0})};
    dc.spread = 1.0;
    dc.split = 0.25;
    dc.seed = 5;
    const advsec::Dataset ds = advsec::detail::build_dataset(dc);
    const auto [train, test] = advsec::detail::split_dataset(ds, dc);
    auto [model, scaler] = advsec::load_model((ws / "model-out" / "model.txt").string());
    REQUIRE_FALSE(scaler.has_value());

    const auto x = test.X.row(0).to_dense_vector();
    const int target = model.predict(test.X.row(0));
    const auto& lin = std::get<advsec::LinearParams>(model.params());

    const std::string csv = slurp(ws / "out" / "attribution.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    REQUIRE(line == "feature_index,score");
    std::size_t i = 0;
    while (std::getline(is, line)) {
        const auto comma = line.find(',');
        REQUIRE(std::stoul(line.substr(0, comma)) == i);
        const double score = std::stod(line.substr(comma + 1));
        const double expected =
            lin.W[static_cast<std::size_t>(target) * test.n_features() + i] * x[i];
        CHECK(std::abs(score - expected) <= 1e-9);
        ++i;
    }
    CHECK(i == test.n_features());
    CHECK(well_formed_xml(slurp(ws / "out" / "attribution.svg")));
}

TEST_CASE("explain influence runs end to end") {
    Scratch ws("explain_influence");
    ws.write_config("cfg.json",
                    {{"dataset", blobs_dataset(60, 0.25, 5)},
                     {"explain",
                      {{"method", "influence"}, {"sample_index", 1},
                       {"victim", {{"kind", "logreg"}, {"lambda", 0.1}}}}},
                     {"out", (ws / "out").string()}});
    const auto r = ws.run("explain --config " + (ws / "cfg.json").string());
    REQUIRE(r.code == 0);
    const std::string csv = slurp(ws / "out" / "influence.csv");
    CHECK(csv.rfind("train_index,score\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 46);  // header + 45 training rows
    CHECK(well_formed_xml(slurp(ws / "out" / "influence.svg")));
}

TEST_CASE("csv datasets load through the dataset block") {
    Scratch ws("csv_dataset");
    std::ofstream os(ws / "data.csv");
    os << "a,b,label\n";
    for (int i = 0; i < 10; ++i) {
        const double v = i < 5 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
        os << v << "," << -v << "," << (i < 5 ? 0 : 1) << "\n";
    }
    os.close();
    ws.write_config("cfg.json", {{"dataset",
                                  {{"generator", "csv"},
                                   {"path", (ws / "data.csv").string()},
                                   {"label_column", 2},
                                   {"split", 0.0},
                                   {"seed", 1}}},
                                 {"model", {{"kind", "logreg"}, {"lambda", 0.01}}},
                                 {"out", (ws / "out").string()}});
    const auto r = ws.run("train --config " + (ws / "cfg.json").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("train accuracy: 1.0000") != std::string::npos);
}

TEST_CASE("bad command-line usage fails without writing artifacts") {
    Scratch ws("bad_usage");
    const auto r1 = ws.run("demolish --config x.json");
    CHECK(r1.code != 0);
    const auto r2 = ws.run("train");
    CHECK(r2.code != 0);
}
