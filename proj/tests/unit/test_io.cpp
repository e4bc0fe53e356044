#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <string>

#include "advsec/dataset.hpp"
#include "advsec/detail/sha256.hpp"
#include "advsec/explain.hpp"
#include "advsec/io.hpp"
#include "advsec/model.hpp"
#include "advsec/svg.hpp"

using namespace advsec;

namespace {

Dataset small_blobs(std::uint64_t seed = 4) {
    return make_blobs(40, {Tensor::vector({-2.0, 0.0}), Tensor::vector({2.0, 0.0})}, 1.0,
                      seed);
}

ModelSpec spec_of(ModelKind kind) {
    ModelSpec s;
    s.kind = kind;
    switch (kind) {
        case ModelKind::logreg:
        case ModelKind::svm_linear:
            s.lambda = 0.01;
            break;
        case ModelKind::svm_rbf:
            s.lambda = 0.01;
            s.gamma = 2.0;
            break;
        case ModelKind::mlp:
            s.lambda = 1e-3;
            s.hidden_sizes = std::vector<int>{8};
            s.seed = 3;
            break;
        case ModelKind::random_forest:
            s.n_trees = 5;
            s.max_depth = 3;
            s.seed = 1;
            break;
    }
    return s;
}

}  // namespace

TEST_CASE("model text round-trips byte-identically for every kind") {
    const Dataset ds = small_blobs();
    for (ModelKind kind : {ModelKind::logreg, ModelKind::svm_linear, ModelKind::svm_rbf,
                           ModelKind::mlp, ModelKind::random_forest}) {
        INFO("kind " << model_kind_name(kind));
        const TrainedModel m = fit(spec_of(kind), ds);
        const std::string text = model_to_string(m, std::nullopt);
        auto [m2, scaler] = model_from_string(text);
        CHECK_FALSE(scaler.has_value());
        CHECK(model_to_string(m2, std::nullopt) == text);

        // Parameters round-trip exactly, so scores agree bit for bit.
        for (std::size_t i = 0; i < 5; ++i) {
            const auto a = m.decision_scores(ds.X.row(i)).dense_values();
            const auto b = m2.decision_scores(ds.X.row(i)).dense_values();
            REQUIRE(a.size() == b.size());
            for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
        }
    }
}

TEST_CASE("model file carries the scaler block") {
    const Dataset ds = small_blobs(9);
    const MinMaxScaler scaler = fit_scaler(ds);
    const TrainedModel m = fit(spec_of(ModelKind::logreg), ds);

    const std::string text = model_to_string(m, scaler);
    auto [m2, s2] = model_from_string(text);
    REQUIRE(s2.has_value());
    REQUIRE(s2->min.size() == scaler.min.size());
    for (std::size_t j = 0; j < scaler.min.size(); ++j) {
        CHECK(s2->min[j] == scaler.min[j]);
        CHECK(s2->max[j] == scaler.max[j]);
    }
    CHECK(model_to_string(m2, s2) == text);
}

TEST_CASE("model save/load through a file") {
    const Dataset ds = small_blobs(7);
    const TrainedModel m = fit(spec_of(ModelKind::svm_rbf), ds);
    const std::string path = "io_test_model.txt";
    save_model(m, path);
    auto [m2, scaler] = load_model(path);
    CHECK(model_to_string(m2, scaler) == model_to_string(m, std::nullopt));
    std::remove(path.c_str());
}

TEST_CASE("model parser rejects malformed input") {
    const Dataset ds = small_blobs();
    const std::string good = model_to_string(fit(spec_of(ModelKind::logreg), ds), std::nullopt);

    SECTION("wrong magic") {
        CHECK_THROWS_AS(model_from_string("not-a-model v1\n"), ParseError);
    }
    SECTION("unsupported version") {
        std::string bad = good;
        bad.replace(bad.find("v1"), 2, "v9");
        CHECK_THROWS_AS(model_from_string(bad), ParseError);
    }
    SECTION("truncated file") {
        CHECK_THROWS_AS(model_from_string(good.substr(0, good.size() / 2)), ParseError);
    }
    SECTION("unknown model kind") {
        std::string bad = good;
        bad.replace(bad.find("logreg"), 6, "krieger");
        CHECK_THROWS_AS(model_from_string(bad), ParseError);
    }
    SECTION("garbage where a number belongs") {
        std::string bad = good;
        const auto pos = bad.find("lambda ");
        bad.replace(pos + 7, 1, "x");
        CHECK_THROWS_AS(model_from_string(bad), ParseError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_model("definitely_not_here.txt"), InvalidArgumentError);
    }
}

TEST_CASE("solver trace serializes to the documented JSON shape") {
    SolverTrace t;
    t.points = {{1.0, 2.0}, {3.0, 4.0}};
    t.losses = {0.5, 0.25};
    t.n_fun_evals = 7;
    t.n_grad_evals = 3;
    t.stop_reason = "max-iter";

    const nlohmann::json j = trace_to_json(t);
    CHECK(j.dump() ==
          R"({"losses":[0.5,0.25],"n_fun_evals":7,"n_grad_evals":3,)"
          R"("points":[[1.0,2.0],[3.0,4.0]],"stop_reason":"max-iter"})");
}

TEST_CASE("attack result JSON carries labels, success, and scores") {
    AttackResult r;
    r.x_adv = Tensor::vector({0.5, -0.5});
    r.success = true;
    r.initial_label = 0;
    r.final_label = 1;
    r.trace.points = {{0.0, 0.0}};
    r.trace.losses = {1.0};
    r.trace.stop_reason = "max-iter";
    r.per_iteration_scores = {{0.9, 0.1}};

    const nlohmann::json j = attack_result_to_json(r);
    CHECK(j["success"] == true);
    CHECK(j["initial_label"] == 0);
    CHECK(j["final_label"] == 1);
    CHECK(j["x_adv"] == nlohmann::json::array({0.5, -0.5}));
    CHECK(j["trace"]["losses"] == nlohmann::json::array({1.0}));
    CHECK(j["per_iteration_scores"][0][0] == 0.9);
}

TEST_CASE("curve CSV has the documented header and one row per epsilon") {
    SecurityEvalCurve c;
    c.eps_grid = {0.0, 0.5};
    c.accuracy_at_eps = {1.0, 0.75};
    c.mean_confidence_drop = {0.0, 0.125};

    const std::string csv = curve_to_csv(c);
    CHECK(csv == "eps,accuracy,mean_confidence_drop\n0,1,0\n0.5,0.75,0.125\n");

    const nlohmann::json j = curve_to_json(c);
    CHECK(j["eps_grid"] == nlohmann::json::array({0.0, 0.5}));
    CHECK(j["accuracy_at_eps"][1] == 0.75);
}

TEST_CASE("attribution CSV lists feature_index,score rows") {
    Attribution a;
    a.per_feature = Tensor::vector({0.25, -1.5, 3.0});
    a.baseline = Tensor::vector({0.0, 0.0, 0.0});
    a.target_class = 1;
    a.method = "integrated-gradients";

    const std::string csv = attribution_to_csv(a);
    CHECK(csv == "feature_index,score\n0,0.25\n1,-1.5\n2,3\n");
    const nlohmann::json j = attribution_to_json(a);
    CHECK(j["method"] == "integrated-gradients");
    CHECK(j["target_class"] == 1);
    CHECK(j["per_feature"].size() == 3);
}

TEST_CASE("doubles survive the text round-trip at full precision") {
    for (double v : {0.1, 1.0 / 3.0, -2.718281828459045e-7, 1e300, -0.0}) {
        const std::string s = detail::round_trip(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("sha256 matches the reference vectors") {
    CHECK(detail::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(detail::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(detail::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("line charts are deterministic and carry labeled series") {
    const std::vector<double> xs = {0.0, 1.0, 2.0};
    const std::vector<double> ys = {0.5, 0.25, 0.125};
    const std::vector<Series> series = {Series{"loss", xs, ys, false},
                                        Series{"target score", xs, ys, true}};
    const std::string svg = render_line_chart("demo", "iteration", "loss", series);

    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("data-label=\"loss\"") != std::string::npos);
    CHECK(svg.find("data-label=\"target score\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(render_line_chart("demo", "iteration", "loss", series) == svg);
}

TEST_CASE("bar charts label the series and split signs") {
    const std::string svg =
        render_bar_chart("attr", "feature", "score", "influence", {1.0, -2.0, 0.5});
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("data-label=\"influence\"") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("chart rendering rejects bad input") {
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", {}), InvalidArgumentError);
    CHECK_THROWS_AS(
        render_line_chart("t", "x", "y", {Series{"s", {0.0, 1.0}, {1.0}, false}}),
        ShapeError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(
        render_line_chart("t", "x", "y", {Series{"s", {0.0, 1.0}, {1.0, nan}, false}}),
        InvalidValueError);
    CHECK_THROWS_AS(render_bar_chart("t", "x", "y", "s", {}), InvalidArgumentError);
}

TEST_CASE("text files round-trip bytes") {
    const std::string path = "io_test_roundtrip.txt";
    const std::string content = "line one\nline two\n\ttabbed\n";
    write_text_file(path, content);
    CHECK(read_text_file(path) == content);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_text_file(path), InvalidArgumentError);
}
