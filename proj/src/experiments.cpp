#include "kstab/experiments.hpp"

#include "kstab/io.hpp"
#include "kstab/svg.hpp"
#include "kstab/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>

namespace kstab {

namespace {

struct Context {
    std::uint64_t seed;
    int threads;
    Seed root;
};

/// Accumulates named checks for a summary document.
class Checks {
public:
    void at_most(const std::string& name, double value, double limit) { add(name, value, "<=", limit, value <= limit); }
    void at_least(const std::string& name, double value, double limit) { add(name, value, ">=", limit, value >= limit); }
    void less_than(const std::string& name, double value, double limit) { add(name, value, "<", limit, value < limit); }
    void within(const std::string& name, double value, double lo, double hi) {
        Json j;
        j["name"] = name;
        j["value"] = value;
        j["relation"] = "in";
        j["threshold"] = {lo, hi};
        j["pass"] = value >= lo && value <= hi;
        pass_ = pass_ && value >= lo && value <= hi;
        list_.push_back(std::move(j));
    }

    Json list() const { return list_; }
    bool pass() const { return pass_; }

private:
    void add(const std::string& name, double value, const char* relation, double threshold, bool ok) {
        Json j;
        j["name"] = name;
        j["value"] = value;
        j["relation"] = relation;
        j["threshold"] = threshold;
        j["pass"] = ok;
        pass_ = pass_ && ok;
        list_.push_back(std::move(j));
    }

    Json list_ = Json::array();
    bool pass_ = true;
};

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(double v) {
    return format_double(v);
}

Generator generator_of(const std::string& name) {
    return preset(name).generator;
}

Matrix true_means(const std::string& name) {
    return std::get<MixtureSpec>(generator_of(name)).means();
}

ExperimentReport finish(const std::string& name, const Context& ctx, Json parameters, Json measurements, const Checks& checks,
                        std::string csv, std::string svg) {
    ExperimentReport r;
    r.name = name;
    r.summary["experiment"] = name;
    r.summary["seed"] = ctx.seed;
    r.summary["parameters"] = std::move(parameters);
    r.summary["measurements"] = std::move(measurements);
    r.summary["checks"] = checks.list();
    r.summary["pass"] = checks.pass();
    r.csv = std::move(csv);
    r.svg = std::move(svg);
    return r;
}

// Theorem 1: a unique 2-means optimum gives vanishing instability, a symmetric
// configuration with several optima does not.
ExperimentReport thm1_symmetry(const Context& ctx) {
    const int k = 2, restarts = 50, m = 30;
    const Index n = 500;
    const std::vector<std::string> names{"fig3a_asym", "fig3b_sym"};
    std::string csv = "preset,pair,distance\n";
    Json meas;
    std::vector<double> means;
    for (std::size_t p = 0; p < names.size(); ++p) {
        const Generator gen = generator_of(names[p]);
        const Sampler sampler = [&](Index size, const Seed& s) { return sample(gen, size, s).data; };
        const ClusterFn algo = [&](const DataSet& d, int kk, const Seed& s) {
            return idealized_kmeans(d, kk, restarts, s).clustering;
        };
        const auto est = estimate_instability_disjoint_pairs(sampler, algo, k, n, m, ctx.root.child(p), ctx.threads);
        for (std::size_t i = 0; i < est.distances.size(); ++i) {
            csv += names[p] + "," + std::to_string(i) + "," + fmt(est.distances[i]) + "\n";
        }
        meas[names[p]] = {{"instability", est.mean}, {"stdev", est.stdev}, {"rescaled", rescale(est)}};
        means.push_back(est.mean);
    }
    Checks checks;
    checks.at_most("fig3a_asym instability", means[0], 0.05);
    checks.at_least("fig3b_sym instability", means[1], 0.2);
    Json params{{"k", k}, {"restarts", restarts}, {"n", n}, {"pairs", m}, {"estimator", "disjoint_pairs"}, {"distance", "mmd"}};
    return finish("thm1_symmetry", ctx, params, meas, checks, csv,
                  svg::bar_chart("2-means instability, n=500, 30 disjoint pairs", "instability", names, means));
}

// Theorem 4: with initialization (I) on two separated Gaussians, K=2 almost always finds
// one center per Gaussian and K=3 splits either Gaussian with probability near 1/2.
ExperimentReport thm4_jump(const Context& ctx) {
    const std::string name = "thm4_two_gauss_1d";
    const Generator gen = generator_of(name);
    const Matrix means = true_means(name);
    const Index n = 500;
    const int runs = 200;
    const double radius = 2.0;
    std::string csv = "k,run,final_first,final_second,init_first,init_second\n";
    Json meas;
    double good2 = 0, split_first = 0, split_second = 0;
    for (int k : {2, 3}) {
        std::vector<InitConfigurationReport> final_cfg(runs), init_cfg(runs);
        const SchemeIOptions opts{oversampling_for(k, 2), std::nullopt};
        parallel_for(runs, ctx.threads, [&](Index r) {
            const Seed s = ctx.root.child(static_cast<std::uint64_t>(k)).child(static_cast<std::uint64_t>(r));
            const DataSet data = sample(gen, n, s.child(0)).data;
            const KMeansResult fit = realistic_kmeans(data, k, InitMethod::scheme_i, s.child(1), {}, opts);
            final_cfg[r] = report_configuration(fit.centers(), means, radius);
            init_cfg[r] = report_configuration(fit.init_centers, means, radius);
        });
        int count_a = 0, count_b = 0;
        for (int r = 0; r < runs; ++r) {
            const auto& f = final_cfg[r].counts;
            const auto& i = init_cfg[r].counts;
            csv += std::to_string(k) + "," + std::to_string(r) + "," + std::to_string(f[0]) + "," + std::to_string(f[1]) + "," +
                   std::to_string(i[0]) + "," + std::to_string(i[1]) + "\n";
            if (k == 2) {
                count_a += f == std::vector<int>{1, 1};
            } else {
                count_a += f == std::vector<int>{2, 1};
                count_b += f == std::vector<int>{1, 2};
            }
        }
        if (k == 2) {
            good2 = static_cast<double>(count_a) / runs;
            meas["k2"] = {{"one_center_per_gaussian", good2}};
        } else {
            split_first = static_cast<double>(count_a) / runs;
            split_second = static_cast<double>(count_b) / runs;
            meas["k3"] = {{"split_first", split_first}, {"split_second", split_second}};
        }
    }
    Checks checks;
    checks.at_least("K=2 one center per Gaussian", good2, 0.95);
    checks.within("K=3 split first Gaussian", split_first, 0.35, 0.65);
    Json params{{"preset", name}, {"n", n}, {"runs", runs}, {"init", "scheme_i"},
                {"preliminary", {{"2", oversampling_for(2, 2)}, {"3", oversampling_for(3, 2)}}}, {"radius", radius}};
    return finish("thm4_jump", ctx, params, meas, checks, csv,
                  svg::bar_chart("K=3 final configurations over 200 runs", "fraction", {"(2,1)", "(1,2)", "other"},
                                 {split_first, split_second, 1.0 - split_first - split_second}));
}

// Fig. 5: K=2 on three Gaussians. Equal weights almost always merge the top pair; a heavy
// top-right cluster makes both merges occur.
ExperimentReport fig5_weights(const Context& ctx) {
    const std::vector<std::string> names{"fig5_equal", "fig5_unequal"};
    const Index n = 1000;
    const int runs = 200, k = 2;
    const int preliminary = oversampling_for(k, 3);
    std::string csv = "preset,run,pattern,objective\n";
    Json meas;
    std::vector<double> top(2), left(2);
    for (std::size_t p = 0; p < names.size(); ++p) {
        const Generator gen = generator_of(names[p]);
        const Matrix means = true_means(names[p]);
        std::vector<std::string> pattern(runs);
        std::vector<double> objective(runs);
        parallel_for(runs, ctx.threads, [&](Index r) {
            const Seed s = ctx.root.child(p).child(static_cast<std::uint64_t>(r));
            const DataSet data = sample(gen, n, s.child(0)).data;
            const KMeansResult fit = realistic_kmeans(data, k, InitMethod::scheme_i, s.child(1), {}, {preliminary, std::nullopt});
            const Labels lab = assign_labels(means, fit.centers());
            if (lab[1] == lab[2] && lab[0] != lab[1]) {
                pattern[r] = "top";
            } else if (lab[0] == lab[1] && lab[1] != lab[2]) {
                pattern[r] = "left";
            } else {
                pattern[r] = "other";
            }
            objective[r] = fit.objective;
        });
        for (int r = 0; r < runs; ++r) {
            csv += names[p] + "," + std::to_string(r) + "," + pattern[r] + "," + fmt(objective[r]) + "\n";
        }
        top[p] = static_cast<double>(std::count(pattern.begin(), pattern.end(), "top")) / runs;
        left[p] = static_cast<double>(std::count(pattern.begin(), pattern.end(), "left")) / runs;
        const double other = static_cast<double>(std::count(pattern.begin(), pattern.end(), "other")) / runs;
        meas[names[p]] = {{"top_merged", top[p]}, {"left_merged", left[p]}, {"other", other}};
    }
    Checks checks;
    checks.at_least("fig5_equal top pair merged", top[0], 0.9);
    checks.at_least("fig5_unequal top pair merged", top[1], 0.2);
    checks.at_least("fig5_unequal left pair merged", left[1], 0.2);
    Json params{{"k", k}, {"n", n}, {"runs", runs}, {"init", "scheme_i"}, {"preliminary", preliminary}};
    return finish("fig5_weights", ctx, params, meas, checks, csv,
                  svg::bar_chart("K=2 merge frequencies", "fraction", {"equal: top", "equal: left", "unequal: top", "unequal: left"},
                                 {top[0], left[0], top[1], left[1]}));
}

// Fig. 2: normalized instability picks the true k on four Gaussians and stays near 1 on
// structureless uniform data.
ExperimentReport fig2_selection(const Context& ctx) {
    const std::vector<std::string> names{"fig2_four_gauss", "fig2_uniform"};
    const int reps = 20;
    ExperimentConfig base;
    base.n = 800;
    base.mode = AlgorithmMode::idealized;
    base.restarts = 50;
    base.scheme = PerturbationKind::fresh_sample;
    base.k_min = 2;
    base.k_max = 15;
    base.b_max = 20;
    base.normalization = Normalization::null_uniform;
    base.threads = ctx.threads;

    std::string csv = "preset,rep,k,raw,null,normalized,selected\n";
    Json meas;
    std::vector<svg::Series> series;
    double hit4 = 0, in_range = 0;
    for (std::size_t p = 0; p < names.size(); ++p) {
        ExperimentConfig cfg = base;
        cfg.generator = names[p];
        std::vector<int> selected;
        std::vector<double> avg(base.k_max - base.k_min + 1, 0.0);
        int hits = 0, ranged = 0;
        for (int r = 0; r < reps; ++r) {
            cfg.seed = ctx.root.child(p).child(static_cast<std::uint64_t>(r)).key();
            const ExperimentResult res = run_stability(cfg);
            bool ok = true;
            for (std::size_t i = 0; i < res.curve.rows.size(); ++i) {
                const auto& row = res.curve.rows[i];
                csv += names[p] + "," + std::to_string(r) + "," + std::to_string(row.k) + "," + fmt(row.raw) + "," + fmt(*row.null) +
                       "," + fmt(*row.normalized) + "," + (res.curve.selected_k == row.k ? "1" : "0") + "\n";
                ok = ok && *row.normalized >= 0.8 && *row.normalized <= 1.25;
                avg[i] += *row.normalized / reps;
            }
            selected.push_back(*res.curve.selected_k);
            hits += *res.curve.selected_k == 4;
            ranged += ok;
        }
        meas[names[p]] = {{"selected_k", selected},
                          {"fraction_selected_4", static_cast<double>(hits) / reps},
                          {"fraction_normalized_in_range", static_cast<double>(ranged) / reps}};
        if (p == 0) {
            hit4 = static_cast<double>(hits) / reps;
        } else {
            in_range = static_cast<double>(ranged) / reps;
        }
        svg::Series s{names[p], {}, avg};
        for (int k = base.k_min; k <= base.k_max; ++k) {
            s.x.push_back(k);
        }
        series.push_back(std::move(s));
    }
    Checks checks;
    checks.at_least("fig2_four_gauss selects k=4", hit4, 0.8);
    checks.at_least("fig2_uniform normalized curve within [0.8, 1.25]", in_range, 0.8);
    Json params = to_json(base);
    params.erase("generator");
    params.erase("seed");
    params["repetitions"] = reps;
    return finish("fig2_selection", ctx, params, meas, checks, csv,
                  svg::line_chart("Mean normalized instability over 20 repetitions", "k", "normalized instability", series));
}

// Theorem 2: with a unique optimum the raw instability vanishes while sqrt(n) times it
// settles to a constant.
ExperimentReport thm2_rescaling(const Context& ctx) {
    const std::string name = "fig3a_asym";
    const Generator gen = generator_of(name);
    const int k = 2, restarts = 50, m = 30;
    const std::vector<Index> sizes{100, 400, 1600};
    const Sampler sampler = [&](Index size, const Seed& s) { return sample(gen, size, s).data; };
    const ClusterFn algo = [&](const DataSet& d, int kk, const Seed& s) { return idealized_kmeans(d, kk, restarts, s).clustering; };
    std::string csv = "n,pair,distance\n";
    std::vector<double> inst, resc, xs;
    Json meas = Json::array();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto est = estimate_instability_disjoint_pairs(sampler, algo, k, sizes[i], m, ctx.root.child(i), ctx.threads);
        for (std::size_t j = 0; j < est.distances.size(); ++j) {
            csv += std::to_string(sizes[i]) + "," + std::to_string(j) + "," + fmt(est.distances[j]) + "\n";
        }
        inst.push_back(est.mean);
        resc.push_back(rescale(est));
        xs.push_back(static_cast<double>(sizes[i]));
        meas.push_back({{"n", sizes[i]}, {"instability", est.mean}, {"stdev", est.stdev}, {"rescaled", rescale(est)}});
    }
    const double top = std::max(resc[1], resc[2]);
    const double rel = top > 0 ? std::abs(resc[1] - resc[2]) / top : 0.0;
    Checks checks;
    checks.at_most("relative difference of rescaled instability, n=400 vs n=1600", rel, 0.25);
    checks.at_most("instability ratio n=1600 / n=100", inst[0] > 0 ? inst[2] / inst[0] : 1.0, 0.5);
    Json params{{"preset", name}, {"k", k}, {"restarts", restarts}, {"pairs", m}, {"sizes", sizes}};
    Json out{{"per_n", meas}, {"relative_difference", rel}};
    return finish("thm2_rescaling", ctx, params, out, checks, csv,
                  svg::line_chart("Raw and rescaled instability, fig3a_asym, K=2", "n", "value",
                                  {{"instability", xs, inst}, {"sqrt(n) * instability", xs, resc}}));
}

// Conclusion 1: a boundary in the density valley has little tube mass and is stable, a
// boundary through the middle of a Gaussian has much more of both.
ExperimentReport tube_diagnostic(const Context& ctx) {
    const std::string name = "thm4_two_gauss_1d";
    const Generator gen = generator_of(name);
    const Matrix means = true_means(name);
    const Index n = 500, n_eval = 5000;
    const int trials = 100, pairs = 10, restarts = 50;
    const double gamma = 0.5;
    Matrix forced(3, 1);
    forced << means(0, 0) - 1.0, means(0, 0) + 1.0, means(1, 0);

    // Each trial: 2 * pairs samples, both configurations fitted on the same samples.
    std::vector<double> tube_valley(trials), tube_mid(trials), d_valley(trials), d_mid(trials);
    parallel_for(trials, ctx.threads, [&](Index t) {
        const Seed s = ctx.root.child(static_cast<std::uint64_t>(t));
        const DataSet eval = sample(gen, n_eval, s.child(0)).data;
        std::vector<Replicate> valley, mid;
        double tv = 0, tm = 0;
        for (int j = 0; j < 2 * pairs; ++j) {
            const Seed sj = s.child(1).child(static_cast<std::uint64_t>(j));
            const DataSet d = sample(gen, n, sj.child(0)).data;
            valley.push_back({d, idealized_kmeans(d, 2, restarts, sj.child(1)).clustering});
            mid.push_back({d, run_lloyd(d, forced).clustering});
            tv += tube_mass(*valley.back().clustering.centers, eval, gamma) / (2 * pairs);
            tm += tube_mass(*mid.back().clustering.centers, eval, gamma) / (2 * pairs);
        }
        tube_valley[t] = tv;
        tube_mid[t] = tm;
        d_valley[t] = estimate_instability_disjoint_pairs(valley, DistanceKind::minimal_matching, Comparison::center_extend).mean;
        d_mid[t] = estimate_instability_disjoint_pairs(mid, DistanceKind::minimal_matching, Comparison::center_extend).mean;
    });
    std::string csv = "trial,tube_valley,tube_mid,instability_valley,instability_mid\n";
    int ordered = 0;
    for (int t = 0; t < trials; ++t) {
        csv += std::to_string(t) + "," + fmt(tube_valley[t]) + "," + fmt(tube_mid[t]) + "," + fmt(d_valley[t]) + "," + fmt(d_mid[t]) + "\n";
        ordered += d_valley[t] < d_mid[t];
    }
    const double tv = mean(tube_valley), tm = mean(tube_mid);
    const double frac = static_cast<double>(ordered) / trials;
    Checks checks;
    checks.at_most("valley tube mass / mid tube mass", tm > 0 ? tv / tm : 1.0, 0.1);
    checks.at_least("fraction of trials with valley run strictly more stable", frac, 0.95);
    Json params{{"preset", name}, {"n", n}, {"eval_n", n_eval}, {"trials", trials}, {"pairs_per_trial", pairs}, {"gamma", gamma},
                {"valley", "idealized 2-means, 50 restarts"},
                {"mid", "Lloyd with 3 centers from (mu1 - 1, mu1 + 1, mu2)"}};
    Json meas{{"mean_tube_valley", tv}, {"mean_tube_mid", tm}, {"mean_instability_valley", mean(d_valley)},
              {"mean_instability_mid", mean(d_mid)}, {"fraction_valley_more_stable", frac}};
    return finish("tube_diagnostic", ctx, params, meas, checks, csv,
                  svg::bar_chart("Tube mass (gamma=0.5) and instability", "value",
                                 {"tube valley", "tube mid", "instab valley", "instab mid"}, {tv, tm, mean(d_valley), mean(d_mid)}));
}

// Section 3.4: distances between runs in the same local optimum (jitter) are small compared
// with distances between runs in different optima (jumps).
ExperimentReport jitter_vs_jump(const Context& ctx) {
    const std::string name = "thm4_two_gauss_1d";
    const Generator gen = generator_of(name);
    const Matrix means = true_means(name);
    const Index n = 500;
    const int runs = 60, k = 3;
    const double radius = 2.0;
    const SchemeIOptions opts{oversampling_for(k, 2), std::nullopt};

    std::vector<std::optional<Replicate>> reps(runs);
    std::vector<std::string> config(runs);
    parallel_for(runs, ctx.threads, [&](Index r) {
        const Seed s = ctx.root.child(static_cast<std::uint64_t>(r));
        DataSet data = sample(gen, n, s.child(0)).data;
        const KMeansResult fit = realistic_kmeans(data, k, InitMethod::scheme_i, s.child(1), {}, opts);
        const auto counts = report_configuration(fit.centers(), means, radius).counts;
        config[r] = "(" + std::to_string(counts[0]) + "," + std::to_string(counts[1]) + ")";
        reps[r].emplace(Replicate{std::move(data), fit.clustering});
    });
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < runs; ++i) {
        for (int j = i + 1; j < runs; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    std::vector<double> dist(pairs.size());
    parallel_for(static_cast<Index>(pairs.size()), ctx.threads, [&](Index p) {
        dist[p] = compare(*reps[pairs[p].first], *reps[pairs[p].second], DistanceKind::minimal_matching, Comparison::center_extend);
    });
    std::string csv = "run_a,run_b,config_a,config_b,distance\n";
    std::vector<double> within, cross;
    const std::vector<std::string> optima{"(2,1)", "(1,2)"};
    auto is_optimum = [&](const std::string& c) { return std::find(optima.begin(), optima.end(), c) != optima.end(); };
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& ca = config[pairs[p].first];
        const auto& cb = config[pairs[p].second];
        csv += std::to_string(pairs[p].first) + "," + std::to_string(pairs[p].second) + "," + ca + "," + cb + "," + fmt(dist[p]) + "\n";
        if (is_optimum(ca) && is_optimum(cb)) {
            (ca == cb ? within : cross).push_back(dist[p]);
        }
    }
    Json counts;
    for (const auto& c : optima) {
        counts[c] = std::count(config.begin(), config.end(), c);
    }
    counts["other"] = runs - counts["(2,1)"].get<int>() - counts["(1,2)"].get<int>();
    Checks checks;
    const double mw = mean(within);
    const double mc = cross.empty() ? 0.0 : mean(cross);
    checks.less_than("mean within-optimum distance minus mean cross-optimum distance", mw - mc, 0.0);
    Json params{{"preset", name}, {"k", k}, {"n", n}, {"runs", runs}, {"init", "scheme_i"}, {"preliminary", *opts.preliminary},
                {"radius", radius}};
    Json meas{{"configurations", counts}, {"within_pairs", within.size()}, {"cross_pairs", cross.size()},
              {"mean_within", mw}, {"mean_cross", mc}};
    return finish("jitter_vs_jump", ctx, params, meas, checks, csv,
                  svg::bar_chart("Pairwise distances, K=3 realistic runs", "mean distance", {"within optimum", "across optima"},
                                 {mw, mc}));
}

using Runner = ExperimentReport (*)(const Context&);

const std::vector<std::pair<std::string, Runner>>& registry() {
    static const std::vector<std::pair<std::string, Runner>> table{
        {"thm1_symmetry", thm1_symmetry}, {"thm4_jump", thm4_jump},           {"fig5_weights", fig5_weights},
        {"fig2_selection", fig2_selection}, {"thm2_rescaling", thm2_rescaling}, {"tube_diagnostic", tube_diagnostic},
        {"jitter_vs_jump", jitter_vs_jump}};
    return table;
}

} // namespace

int oversampling_for(int k, int k_true) {
    auto l = [](int m) { return static_cast<int>(std::ceil(m * std::log(std::max(m, 2)))); };
    return std::max({l(k), l(k_true), k});
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : registry()) {
            out.push_back(name);
        }
        return out;
    }();
    return names;
}

ExperimentReport run_experiment(const std::string& name, std::uint64_t seed, int threads) {
    for (const auto& [key, runner] : registry()) {
        if (key == name) {
            if (threads < 1) {
                throw ConfigError("threads must be at least 1");
            }
            const auto start = std::chrono::steady_clock::now();
            ExperimentReport report = runner(Context{seed, threads, Seed{seed, {}}});
            report.summary["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return report;
        }
    }
    throw ConfigError("unknown experiment '" + name + "'");
}

void write_report(const ExperimentReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string stem = (std::filesystem::path(dir) / report.name).string();
    write_text_file(stem + ".csv", report.csv);
    write_text_file(stem + ".json", report.summary.dump(2) + "\n");
    write_text_file(stem + ".svg", report.svg);
}

} // namespace kstab
