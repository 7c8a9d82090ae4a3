#include "kstab/harness.hpp"

#include "kstab/io.hpp"
#include "kstab/synthgen.hpp"

#include <chrono>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace kstab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("--" + key + ": '" + value + "' is not a valid integer");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    char* end = nullptr;
    errno = 0;
    const double out = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE || !std::isfinite(out)) {
        throw ConfigError("--" + key + ": '" + value + "' is not a finite number");
    }
    return out;
}

template <class F>
auto parse_name(const std::string& key, const std::string& value, F parse) {
    try {
        return parse(value);
    } catch (const InvalidArgument& e) {
        throw ConfigError("--" + key + ": " + e.what());
    }
}

AlgorithmMode parse_mode(std::string_view s) {
    if (s == "idealized") {
        return AlgorithmMode::idealized;
    }
    if (s == "realistic") {
        return AlgorithmMode::realistic;
    }
    throw InvalidArgument("unknown mode '" + std::string(s) + "' (expected idealized or realistic)");
}

InitMethod parse_init(std::string_view s) {
    if (s == "uniform") {
        return InitMethod::uniform;
    }
    if (s == "scheme_i") {
        return InitMethod::scheme_i;
    }
    throw InvalidArgument("unknown init '" + std::string(s) + "' (expected uniform or scheme_i)");
}

Normalization parse_normalization(std::string_view s) {
    for (auto v : {Normalization::none, Normalization::null_uniform, Normalization::null_scramble, Normalization::permutation}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw InvalidArgument("unknown normalization '" + std::string(s) + "'");
}

SelectionRule parse_selection(std::string_view s) {
    if (s == "argmin") {
        return SelectionRule::argmin;
    }
    if (s == "significance") {
        return SelectionRule::significance;
    }
    throw InvalidArgument("unknown selection rule '" + std::string(s) + "' (expected argmin or significance)");
}

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json estimate_json(const InstabilityEstimate& e) {
    Json out;
    out["n"] = e.n;
    out["mean"] = e.mean;
    out["stdev"] = e.stdev;
    out["num_pairs"] = e.num_pairs;
    out["protocol"] = to_string(e.protocol);
    out["distance"] = to_string(e.distance);
    out["distances"] = e.distances;
    return out;
}

/// Distances entering the significance test: the off-diagonal ones for all_pairs.
std::vector<double> test_set(const InstabilityEstimate& e) {
    if (e.protocol != Protocol::all_pairs) {
        return e.distances;
    }
    const auto b = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(e.distances.size()))));
    std::vector<double> out;
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            if (i != j) {
                out.push_back(e.distances[i * b + j]);
            }
        }
    }
    return out;
}

} // namespace

std::string to_string(AlgorithmMode mode) {
    return mode == AlgorithmMode::idealized ? "idealized" : "realistic";
}

std::string to_string(Normalization normalization) {
    switch (normalization) {
    case Normalization::none:
        return "none";
    case Normalization::null_uniform:
        return "null_uniform";
    case Normalization::null_scramble:
        return "null_scramble";
    case Normalization::permutation:
        return "permutation";
    }
    return "unknown";
}

std::string to_string(SelectionRule rule) {
    return rule == SelectionRule::argmin ? "argmin" : "significance";
}

std::string to_string(InitMethod init) {
    return init == InitMethod::uniform ? "uniform" : "scheme_i";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "generator", "input", "n", "mode", "restarts", "init", "preliminary", "min-mass", "max-iter", "tol",
        "scheme", "fraction", "sigma", "target-dim", "protocol", "comparison", "distance", "k-min", "k-max",
        "b-max", "normalization", "selection", "alpha", "resamples", "seed", "threads"};
    return keys;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw_value) {
    const std::string value = trim(raw_value);
    if (key == "generator") {
        c.generator = value;
    } else if (key == "input") {
        c.input = value;
    } else if (key == "n") {
        c.n = parse_integer<Index>(key, value);
    } else if (key == "mode") {
        c.mode = parse_name(key, value, parse_mode);
    } else if (key == "restarts") {
        c.restarts = parse_integer<int>(key, value);
    } else if (key == "init") {
        c.init = parse_name(key, value, parse_init);
    } else if (key == "preliminary") {
        c.preliminary = parse_integer<int>(key, value);
    } else if (key == "min-mass") {
        c.min_mass = parse_real(key, value);
    } else if (key == "max-iter") {
        c.max_iter = parse_integer<int>(key, value);
    } else if (key == "tol") {
        c.tol = parse_real(key, value);
    } else if (key == "scheme") {
        c.scheme = parse_name(key, value, parse_perturbation);
    } else if (key == "fraction") {
        c.fraction = parse_real(key, value);
    } else if (key == "sigma") {
        c.sigma = parse_real(key, value);
    } else if (key == "target-dim") {
        c.target_dim = parse_integer<int>(key, value);
    } else if (key == "protocol") {
        c.protocol = parse_name(key, value, parse_protocol);
    } else if (key == "comparison") {
        c.comparison = parse_name(key, value, parse_comparison);
    } else if (key == "distance") {
        c.distance = parse_name(key, value, parse_distance);
    } else if (key == "k-min") {
        c.k_min = parse_integer<int>(key, value);
    } else if (key == "k-max") {
        c.k_max = parse_integer<int>(key, value);
    } else if (key == "b-max") {
        c.b_max = parse_integer<int>(key, value);
    } else if (key == "normalization") {
        c.normalization = parse_name(key, value, parse_normalization);
    } else if (key == "selection") {
        c.selection = parse_name(key, value, parse_selection);
    } else if (key == "alpha") {
        c.alpha = parse_real(key, value);
    } else if (key == "resamples") {
        c.resamples = parse_integer<int>(key, value);
    } else if (key == "seed") {
        c.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "threads") {
        c.threads = parse_integer<int>(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        out[key] = trim(t.substr(eq + 1));
    }
    return out;
}

ExperimentConfig resolve(ExperimentConfig c) {
    if (c.generator.empty() == c.input.empty()) {
        throw ConfigError("exactly one of generator and input must be given");
    }
    if (!c.generator.empty()) {
        parse_name("generator", c.generator, [](const std::string& name) { return preset(name); });
    }
    if (!c.seed) {
        throw ConfigError("a seed is required");
    }
    const bool synthetic = !c.generator.empty();
    if (!c.scheme) {
        c.scheme = synthetic ? PerturbationKind::fresh_sample : PerturbationKind::subsample;
    }
    if (*c.scheme == PerturbationKind::fresh_sample && !synthetic) {
        throw ConfigError("fresh_sample needs a generator; a file-loaded data set cannot be resampled from its source");
    }
    if (!c.comparison) {
        c.comparison = *c.scheme == PerturbationKind::fresh_sample ? Comparison::center_extend : Comparison::overlap_restrict;
    }
    if (*c.scheme == PerturbationKind::fresh_sample && *c.comparison == Comparison::overlap_restrict) {
        throw ConfigError("fresh samples share no points; use comparison center_extend");
    }
    if (*c.scheme == PerturbationKind::projection && *c.comparison == Comparison::center_extend) {
        throw ConfigError("projected replicates live in different spaces; use comparison overlap_restrict");
    }
    if (!c.normalization) {
        c.normalization = synthetic ? Normalization::null_uniform : Normalization::null_scramble;
    }
    if (*c.normalization == Normalization::permutation && c.protocol != Protocol::all_pairs) {
        throw ConfigError("permutation normalization is defined for the all_pairs protocol only");
    }
    if (c.selection == SelectionRule::significance && *c.normalization == Normalization::none) {
        throw ConfigError("significance selection needs a null distribution (normalization other than none)");
    }
    if (c.k_min < 2) {
        throw ConfigError("k-min must be at least 2");
    }
    if (c.k_max < c.k_min) {
        throw ConfigError("k-max must be at least k-min");
    }
    if (c.b_max < 2) {
        throw ConfigError("b-max must be at least 2");
    }
    if (synthetic && c.n < c.k_max) {
        throw ConfigError("n must be at least k-max");
    }
    if (c.restarts < 1) {
        throw ConfigError("restarts must be at least 1");
    }
    if (c.preliminary && *c.preliminary < c.k_max) {
        throw ConfigError("preliminary must be at least k-max");
    }
    if (c.min_mass && !(*c.min_mass > 0 && *c.min_mass < 1)) {
        throw ConfigError("min-mass must lie in (0, 1)");
    }
    if (c.max_iter < 1) {
        throw ConfigError("max-iter must be at least 1");
    }
    if (!(c.tol >= 0)) {
        throw ConfigError("tol must be non-negative");
    }
    if (!(c.alpha > 0 && c.alpha < 1)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    if (c.resamples < 1) {
        throw ConfigError("resamples must be at least 1");
    }
    if (c.threads < 1) {
        throw ConfigError("threads must be at least 1");
    }
    PerturbationScheme scheme{*c.scheme, c.fraction, c.sigma, c.target_dim};
    if (synthetic) {
        parse_name("scheme", "", [&](const std::string&) {
            validate(scheme, dimension(preset(c.generator).generator));
            return 0;
        });
    }
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json out;
    out["generator"] = c.generator.empty() ? Json(nullptr) : Json(c.generator);
    out["input"] = c.input.empty() ? Json(nullptr) : Json(c.input);
    out["n"] = c.n;
    out["mode"] = to_string(c.mode);
    out["restarts"] = c.restarts;
    out["init"] = to_string(c.init);
    out["preliminary"] = optional_json(c.preliminary);
    out["min_mass"] = optional_json(c.min_mass);
    out["max_iter"] = c.max_iter;
    out["tol"] = c.tol;
    out["scheme"] = c.scheme ? Json(to_string(*c.scheme)) : Json(nullptr);
    out["fraction"] = c.fraction;
    out["sigma"] = c.sigma;
    out["target_dim"] = c.target_dim;
    out["protocol"] = to_string(c.protocol);
    out["comparison"] = c.comparison ? Json(to_string(*c.comparison)) : Json(nullptr);
    out["distance"] = to_string(c.distance);
    out["k_min"] = c.k_min;
    out["k_max"] = c.k_max;
    out["b_max"] = c.b_max;
    out["normalization"] = c.normalization ? Json(to_string(*c.normalization)) : Json(nullptr);
    out["selection"] = to_string(c.selection);
    out["alpha"] = c.alpha;
    out["resamples"] = c.resamples;
    out["seed"] = optional_json(c.seed);
    return out;
}

KMeansResult cluster_with(const ExperimentConfig& c, const DataSet& data, int k, const Seed& seed) {
    const LloydOptions options{c.max_iter, c.tol};
    if (c.mode == AlgorithmMode::idealized) {
        return idealized_kmeans(data, k, c.restarts, seed, options);
    }
    return realistic_kmeans(data, k, c.init, seed, options, SchemeIOptions{c.preliminary, c.min_mass});
}

ExperimentResult run_stability(const ExperimentConfig& config, const std::optional<DataSet>& input) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result;
    ExperimentConfig c = resolve(config);
    const Seed root{*c.seed, {}};
    const bool fresh = *c.scheme == PerturbationKind::fresh_sample;
    const PerturbationScheme scheme{*c.scheme, c.fraction, c.sigma, c.target_dim};

    std::optional<Generator> gen;
    std::optional<DataSet> base;
    if (!c.generator.empty()) {
        gen = preset(c.generator).generator;
        base = sample(*gen, c.n, root.child(0)).data;
    } else {
        base = input ? *input : read_dataset_csv(c.input);
        c.n = base->size();
        try {
            validate(scheme, base->dim());
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("--scheme: ") + e.what());
        }
        if (c.n < c.k_max) {
            throw ConfigError("the data set has fewer points than k-max");
        }
    }
    result.config = c;

    std::optional<DataSet> null_base;
    if (*c.normalization == Normalization::null_uniform) {
        null_base = null_uniform_box(*base, base->size(), root.child(3));
    } else if (*c.normalization == Normalization::null_scramble) {
        null_base = null_scramble(*base, root.child(3));
    }

    auto raw_sample = [&](const Seed& s) {
        return fresh ? sample(*gen, c.n, s).data : perturb(*base, scheme, s);
    };
    auto null_sample = [&](const Seed& s) {
        if (!fresh) {
            return perturb(*null_base, scheme, s);
        }
        if (*c.normalization == Normalization::null_uniform) {
            return null_uniform_box(*base, c.n, s);
        }
        return null_scramble(sample(*gen, c.n, s.child(0)).data, s);
    };

    const int runs = c.protocol == Protocol::disjoint_pairs ? 2 * (c.b_max / 2) : c.b_max;
    using SampleFn = std::function<DataSet(const Seed&)>;
    auto replicate_cell = [&](int k, const Seed& cell, const SampleFn& draw, RunDiagnostics* diag) {
        std::vector<std::optional<Replicate>> slots(runs);
        std::vector<KMeansResult> fits(runs);
        parallel_for(runs, c.threads, [&](Index b) {
            try {
                const Seed s = cell.child(static_cast<std::uint64_t>(b));
                DataSet d = draw(s);
                fits[b] = cluster_with(c, d, k, s.child(1));
                slots[b].emplace(Replicate{std::move(d), fits[b].clustering});
            } catch (const std::exception& e) {
                throw RunError("k=" + std::to_string(k) + ", replicate=" + std::to_string(b) + ": " + e.what());
            }
        });
        std::vector<Replicate> out;
        for (int b = 0; b < runs; ++b) {
            out.push_back(std::move(*slots[b]));
            if (diag) {
                diag->objectives.push_back(fits[b].objective);
                diag->iterations.push_back(fits[b].iterations);
                diag->converged.push_back(fits[b].converged);
            }
        }
        return out;
    };
    auto estimate = [&](int k, std::span<const Replicate> reps, const DataSet& reference_data, const Seed& ref_seed) {
        try {
            switch (c.protocol) {
            case Protocol::all_pairs:
                return estimate_instability_all_pairs(reps, c.distance, *c.comparison, c.threads);
            case Protocol::disjoint_pairs:
                return estimate_instability_disjoint_pairs(reps, c.distance, *c.comparison, c.threads);
            case Protocol::vs_original:
                break;
            }
            const Replicate reference{reference_data, cluster_with(c, reference_data, k, ref_seed).clustering};
            return estimate_instability_vs_original(reference, reps, c.distance, *c.comparison, c.threads);
        } catch (const std::exception& e) {
            throw RunError("k=" + std::to_string(k) + ": " + e.what());
        }
    };

    StabilityCurve raw_curve;
    StabilityCurve null_curve;
    for (int k = c.k_min; k <= c.k_max; ++k) {
        const auto kk = static_cast<std::uint64_t>(k);
        RunDiagnostics diag;
        diag.k = k;
        const auto reps = replicate_cell(k, root.child(1).child(kk), raw_sample, &diag);
        InstabilityEstimate raw = estimate(k, reps, *base, root.child(5).child(kk));
        raw.k = k;
        CurveRow row{k, raw.mean, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
        if (c.protocol == Protocol::disjoint_pairs) {
            row.rescaled = rescale(raw);
        }
        raw_curve.rows.push_back(row);

        if (*c.normalization == Normalization::permutation) {
            result.null.push_back(permutation_null(reps, c.distance, *c.comparison, root.child(4).child(kk)));
        } else if (*c.normalization != Normalization::none) {
            const auto null_reps = replicate_cell(k, root.child(2).child(kk), null_sample, nullptr);
            result.null.push_back(estimate(k, null_reps, *null_base, root.child(6).child(kk)));
        }
        if (!result.null.empty()) {
            result.null.back().k = k;
            null_curve.rows.push_back(CurveRow{k, result.null.back().mean, std::nullopt, std::nullopt, std::nullopt, std::nullopt});
        }
        result.raw.push_back(std::move(raw));
        result.diagnostics.push_back(std::move(diag));
    }

    StabilityCurve curve = raw_curve;
    if (!null_curve.rows.empty()) {
        try {
            curve = normalize_curve(raw_curve, null_curve);
        } catch (const InvalidArgument& e) {
            throw RunError(std::string("normalization failed: ") + e.what());
        }
        for (std::size_t i = 0; i < curve.rows.size(); ++i) {
            curve.rows[i].rescaled = raw_curve.rows[i].rescaled;
        }
    }
    result.selected_k_raw = select_k_argmin(curve, false);
    if (c.selection == SelectionRule::argmin) {
        const bool normalized = *c.normalization != Normalization::none;
        curve.selected_k = select_k_argmin(curve, normalized);
        curve.selection_rule = normalized ? "argmin_normalized" : "argmin_raw";
    } else {
        std::vector<int> ks;
        std::vector<std::vector<double>> raw_sets;
        std::vector<std::vector<double>> null_sets;
        for (std::size_t i = 0; i < result.raw.size(); ++i) {
            ks.push_back(result.raw[i].k);
            raw_sets.push_back(test_set(result.raw[i]));
            null_sets.push_back(test_set(result.null[i]));
        }
        const SignificanceResult sig = select_k_significance(ks, raw_sets, null_sets, c.alpha, root.child(7), c.resamples);
        for (std::size_t i = 0; i < curve.rows.size(); ++i) {
            curve.rows[i].p_value = sig.p_values[i];
        }
        curve.selected_k = sig.selected_k;
        curve.selection_rule = "significance";
    }
    validate(curve);
    result.curve = std::move(curve);
    result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

Json to_json(const ExperimentResult& r) {
    Json out;
    out["config"] = to_json(r.config);
    Json rows = Json::array();
    for (const auto& row : r.curve.rows) {
        Json j;
        j["k"] = row.k;
        j["raw"] = row.raw;
        j["null"] = optional_json(row.null);
        j["normalized"] = optional_json(row.normalized);
        j["rescaled"] = optional_json(row.rescaled);
        j["p_value"] = optional_json(row.p_value);
        rows.push_back(std::move(j));
    }
    out["curve"] = std::move(rows);
    out["selected_k"] = optional_json(r.curve.selected_k);
    out["selection_rule"] = r.curve.selection_rule;
    out["selected_k_raw"] = r.selected_k_raw;
    Json estimates = Json::array();
    for (std::size_t i = 0; i < r.raw.size(); ++i) {
        Json j;
        j["k"] = r.raw[i].k;
        j["raw"] = estimate_json(r.raw[i]);
        j["null"] = i < r.null.size() ? estimate_json(r.null[i]) : Json(nullptr);
        estimates.push_back(std::move(j));
    }
    out["estimates"] = std::move(estimates);
    Json diags = Json::array();
    for (const auto& d : r.diagnostics) {
        Json j;
        j["k"] = d.k;
        j["objectives"] = d.objectives;
        j["iterations"] = d.iterations;
        j["converged"] = d.converged;
        diags.push_back(std::move(j));
    }
    out["diagnostics"] = std::move(diags);
    out["wall_clock_seconds"] = r.wall_clock_seconds;
    return out;
}

std::string deterministic_dump(Json document) {
    if (document.is_object()) {
        document.erase("wall_clock_seconds");
    }
    return document.dump(2);
}

void write_result(const ExperimentResult& result, const std::string& prefix) {
    write_text_file(prefix + ".json", to_json(result).dump(2) + "\n");
    write_text_file(prefix + ".csv", curve_csv(result.curve));
}

} // namespace kstab
