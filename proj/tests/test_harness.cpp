#include "helpers.hpp"

#include "kstab/experiments.hpp"
#include "kstab/harness.hpp"
#include "kstab/io.hpp"
#include "kstab/svg.hpp"

#include <doctest.h>

#include <filesystem>

using namespace kstab;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.generator = "fig1_four_clusters";
    c.n = 120;
    c.restarts = 20;
    c.k_min = 2;
    c.k_max = 5;
    c.b_max = 10;
    c.seed = 9;
    return c;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("kstab_test_" + name)).string();
}

} // namespace

TEST_CASE("config parsing") {
    const auto kv = parse_config_text("# comment\ngenerator = fig2_uniform\n\n k-max=6 \nseed = 3\n");
    CHECK(kv.at("generator") == "fig2_uniform");
    CHECK(kv.at("k-max") == "6");
    ExperimentConfig c;
    for (const auto& [k, v] : kv) {
        apply_setting(c, k, v);
    }
    CHECK(c.k_max == 6);
    CHECK(*c.seed == 3);
    CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "k-max", "six"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
}

TEST_CASE("resolve fills defaults and rejects bad configs") {
    const ExperimentConfig r = resolve(small_config());
    CHECK(*r.scheme == PerturbationKind::fresh_sample);
    CHECK(*r.comparison == Comparison::center_extend);
    CHECK(*r.normalization == Normalization::null_uniform);

    auto expect_error = [](auto change) {
        ExperimentConfig c = small_config();
        change(c);
        CHECK_THROWS_AS(resolve(c), ConfigError);
    };
    expect_error([](ExperimentConfig& c) { c.b_max = 1; });
    expect_error([](ExperimentConfig& c) { c.k_min = 1; });
    expect_error([](ExperimentConfig& c) { c.k_max = 1; });
    expect_error([](ExperimentConfig& c) { c.seed.reset(); });
    expect_error([](ExperimentConfig& c) { c.generator = "nope"; });
    expect_error([](ExperimentConfig& c) { c.input = "x.csv"; });
    expect_error([](ExperimentConfig& c) { c.comparison = Comparison::overlap_restrict; });
    expect_error([](ExperimentConfig& c) {
        c.normalization = Normalization::none;
        c.selection = SelectionRule::significance;
    });
    expect_error([](ExperimentConfig& c) {
        c.normalization = Normalization::permutation;
        c.protocol = Protocol::disjoint_pairs;
    });
    expect_error([](ExperimentConfig& c) { c.n = 3; });
}

TEST_CASE("stability runs are reproducible and independent of the thread count") {
    ExperimentConfig c = small_config();
    const ExperimentResult a = run_stability(c);
    c.threads = 2;
    const ExperimentResult b = run_stability(c);
    CHECK(deterministic_dump(to_json(a)) == deterministic_dump(to_json(b)));
    CHECK(a.curve.rows.size() == 4);
    CHECK(a.curve.selected_k == 4);
    CHECK(a.curve.selection_rule == "argmin_normalized");
    validate(a.curve);
    const Json doc = to_json(a);
    CHECK(doc.contains("wall_clock_seconds"));
    CHECK(deterministic_dump(doc).find("wall_clock_seconds") == std::string::npos);
    CHECK_FALSE(doc["config"].contains("threads"));
}

TEST_CASE("stability on a fixed data set") {
    ExperimentConfig c = small_config();
    c.generator.clear();
    c.input = "memory";
    c.restarts = 5;
    c.b_max = 6;
    c.normalization = Normalization::permutation;
    Matrix p(60, 2);
    Rng rng = make_rng(Seed{2, {}});
    std::normal_distribution<double> g(0.0, 0.3);
    for (Index i = 0; i < p.rows(); ++i) {
        p(i, 0) = (i % 3) * 5 + g(rng);
        p(i, 1) = g(rng);
    }
    const ExperimentResult r = run_stability(c, make_dataset(p, std::nullopt, "memory"));
    CHECK(*r.config.scheme == PerturbationKind::subsample);
    CHECK(*r.config.comparison == Comparison::overlap_restrict);
    CHECK(r.curve.rows[1].raw == 0.0);
    CHECK(r.curve.selected_k == 3);
    CHECK(r.raw[0].distances.size() == 36);
}

TEST_CASE("significance selection through the harness") {
    ExperimentConfig c = small_config();
    c.selection = SelectionRule::significance;
    c.resamples = 200;
    const ExperimentResult r = run_stability(c);
    CHECK(r.curve.selection_rule == "significance");
    for (const auto& row : r.curve.rows) {
        REQUIRE(row.p_value);
        CHECK(*row.p_value > 0.0);
        CHECK(*row.p_value <= 1.0);
    }
    CHECK(r.curve.selected_k == 4);
}

TEST_CASE("dataset CSV roundtrip") {
    const std::string path = temp_path("data.csv");
    const DataSet plain = make_dataset(testing::line({0.1, 1.0 / 3.0, -2e-300}));
    write_dataset_csv(path, plain);
    CHECK(read_text_file(path).rfind("x1\n", 0) == 0);
    CHECK(read_dataset_csv(path).points() == plain.points());

    Matrix pts(2, 2);
    pts << 1, 2, 3, 4;
    Vector w(2);
    w << 2, 0.5;
    const DataSet weighted = make_dataset(pts, w);
    write_dataset_csv(path, weighted);
    const DataSet back = read_dataset_csv(path);
    CHECK(back.points() == pts);
    CHECK(back.weights() == w);

    write_text_file(path, "x1,x2\n1,2\n3\n");
    CHECK_THROWS(read_dataset_csv(path));
    write_text_file(path, "x1\n1\nabc\n");
    CHECK_THROWS(read_dataset_csv(path));
    CHECK_THROWS_AS(read_dataset_csv(temp_path("missing.csv")), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("curve CSV roundtrip") {
    StabilityCurve c;
    c.rows.push_back({2, 0.25, 0.5, 0.5, std::nullopt, std::nullopt});
    c.rows.push_back({3, 0.1, 0.5, 0.2, std::nullopt, std::nullopt});
    c.selected_k = 3;
    const std::string text = curve_csv(c);
    CHECK(text.rfind("k,raw,null,normalized,rescaled,p_value,selected\n", 0) == 0);
    const std::string path = temp_path("curve.csv");
    write_text_file(path, text);
    const StabilityCurve back = read_curve_csv(path);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[1].normalized == doctest::Approx(0.2));
    CHECK_FALSE(back.rows[0].rescaled.has_value());
    CHECK(back.selected_k == 3);
    write_text_file(path, "kk,raw\n2,0.1\n");
    CHECK_THROWS(read_curve_csv(path));
    std::filesystem::remove(path);
}

TEST_CASE("svg output") {
    const std::vector<svg::Series> s{{"a", {2, 3, 4}, {0.5, 0.2, 0.9}}};
    const std::string first = svg::line_chart("t", "k", "y", s);
    CHECK(first == svg::line_chart("t", "k", "y", s));
    CHECK(first.rfind("<svg", 0) == 0);
    const std::string single = svg::line_chart("t", "k", "y", {{"a", {2}, {0.3}}});
    CHECK(single.find("nan") == std::string::npos);
    CHECK(single.find("inf") == std::string::npos);
    const std::string bars = svg::bar_chart("t", "y", {"x", "y"}, {0.0, 0.0});
    CHECK(bars.find("nan") == std::string::npos);
    CHECK(svg::histogram("h", "x", {0.1, 0.2, 0.9}, 0, 1, 5).find("</svg>") != std::string::npos);
}

TEST_CASE("experiment registry") {
    const auto& names = experiment_names();
    CHECK(names.size() == 7);
    CHECK_THROWS_AS(run_experiment("nope", 1), ConfigError);
    CHECK(oversampling_for(2, 2) == 2);
    CHECK(oversampling_for(2, 3) == 4);
    CHECK(oversampling_for(3, 2) == 4);
}
