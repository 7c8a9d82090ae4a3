#include "kstab/experiments.hpp"
#include "kstab/harness.hpp"
#include "kstab/io.hpp"
#include "kstab/svg.hpp"
#include "kstab/synthgen.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace kstab;

namespace {

Generator generator_from_spec_file(const std::string& path) {
    Json doc;
    try {
        doc = Json::parse(read_text_file(path));
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    MixtureSpec spec;
    try {
        for (const auto& c : doc.at("components")) {
            const auto mean = c.at("mean").get<std::vector<double>>();
            spec.components.push_back({Eigen::Map<const Vector>(mean.data(), static_cast<Index>(mean.size())),
                                       c.value("stdev", 1.0), c.at("weight").get<double>()});
        }
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (spec.components.empty()) {
        throw ConfigError(path + ": no components");
    }
    spec.dim = spec.components.front().mean.size();
    try {
        validate(spec);
    } catch (const InvalidArgument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return spec;
}

Json generator_json(const Generator& gen) {
    if (const auto* spec = std::get_if<MixtureSpec>(&gen)) {
        Json comps = Json::array();
        for (const auto& c : spec->components) {
            comps.push_back({{"mean", std::vector<double>(c.mean.begin(), c.mean.end())}, {"stdev", c.stdev}, {"weight", c.weight}});
        }
        return {{"type", "mixture"}, {"dim", spec->dim}, {"components", comps}};
    }
    return {{"type", "uniform_square"}, {"dim", 2}};
}

Json matrix_json(const Matrix& m) {
    Json out = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        std::vector<double> row(m.cols());
        for (Index j = 0; j < m.cols(); ++j) {
            row[j] = m(i, j);
        }
        out.push_back(row);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability-based selection of the number of clusters for k-means"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Sample a synthetic data set");
    std::string gen_preset, gen_spec, gen_out;
    Index gen_n = 0;
    std::uint64_t gen_seed = 0;
    bool gen_list = false;
    gen->add_option("--preset", gen_preset, "Preset name");
    gen->add_option("--spec", gen_spec, "JSON mixture spec file");
    gen->add_option("--n", gen_n, "Number of points");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--out", gen_out, "Output prefix; writes <out>.csv and <out>.json");
    gen->add_flag("--list", gen_list, "List presets and exit");

    // cluster
    auto* clu = app.add_subcommand("cluster", "Run k-means on a CSV data set");
    std::string clu_input, clu_out, clu_mode = "idealized", clu_init = "uniform";
    int clu_k = 0, clu_restarts = 50, clu_max_iter = 300;
    double clu_tol = 1e-8;
    std::uint64_t clu_seed = 0;
    clu->add_option("--input", clu_input, "Data set CSV")->required();
    clu->add_option("--k", clu_k, "Number of clusters")->required();
    clu->add_option("--seed", clu_seed, "Random seed")->required();
    clu->add_option("--mode", clu_mode, "idealized or realistic");
    clu->add_option("--restarts", clu_restarts, "Restarts in idealized mode");
    clu->add_option("--init", clu_init, "uniform or scheme_i (realistic mode)");
    clu->add_option("--max-iter", clu_max_iter, "Lloyd iteration cap");
    clu->add_option("--tol", clu_tol, "Center movement tolerance");
    clu->add_option("--out", clu_out, "Output prefix; writes <out>.csv (labels) and <out>.json")->required();

    // stability
    auto* stab = app.add_subcommand("stability", "Instability curve over k and selection of k");
    std::string stab_config, stab_out;
    std::map<std::string, std::string> stab_flags;
    std::map<std::string, CLI::Option*> stab_opts;
    stab->add_option("--config", stab_config, "Flat key = value config file; flags override it");
    stab->add_option("--out", stab_out, "Output prefix; writes <out>.json and <out>.csv")->required();
    for (const auto& key : config_keys()) {
        stab_opts[key] = stab->add_option("--" + key, stab_flags[key]);
    }

    // select-k
    auto* sel = app.add_subcommand("select-k", "Select k from a curve CSV or a result JSON");
    std::string sel_curve, sel_result, sel_rule = "argmin", sel_column = "normalized";
    double sel_alpha = 0.05;
    int sel_resamples = 1000;
    std::uint64_t sel_seed = 0;
    sel->add_option("--curve", sel_curve, "Curve CSV (argmin rule)");
    sel->add_option("--result", sel_result, "Result JSON from the stability command");
    sel->add_option("--rule", sel_rule, "argmin or significance");
    sel->add_option("--column", sel_column, "raw or normalized (argmin rule)");
    sel->add_option("--alpha", sel_alpha, "Significance level");
    sel->add_option("--resamples", sel_resamples, "Bootstrap resamples");
    sel->add_option("--seed", sel_seed, "Random seed for the bootstrap");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a named synthetic experiment");
    std::string exp_name, exp_out = ".";
    std::uint64_t exp_seed = 0;
    int exp_threads = 1;
    exp->add_option("name", exp_name, "Experiment name")->required();
    exp->add_option("--seed", exp_seed, "Random seed")->required();
    exp->add_option("--out", exp_out, "Output directory");
    exp->add_option("--threads", exp_threads, "Worker threads");

    // plot
    auto* plot = app.add_subcommand("plot", "Line chart of a curve CSV");
    std::string plot_curve, plot_out;
    plot->add_option("--curve", plot_curve, "Curve CSV")->required();
    plot->add_option("--out", plot_out, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            if (gen_list) {
                for (const auto& name : preset_names()) {
                    std::cout << name << "\t" << preset(name).description << "\n";
                }
                return 0;
            }
            if (gen_preset.empty() == gen_spec.empty()) {
                throw ConfigError("give exactly one of --preset and --spec");
            }
            if (gen->count("--n") == 0 || gen->count("--seed") == 0 || gen_out.empty()) {
                throw ConfigError("--n, --seed and --out are required");
            }
            if (gen_n < 1) {
                throw ConfigError("--n must be at least 1");
            }
            Generator g;
            Json meta;
            if (!gen_preset.empty()) {
                Preset p;
                try {
                    p = preset(gen_preset);
                } catch (const InvalidArgument& e) {
                    throw ConfigError(e.what());
                }
                g = p.generator;
                meta["preset"] = p.name;
                meta["description"] = p.description;
            } else {
                g = generator_from_spec_file(gen_spec);
                meta["spec_file"] = gen_spec;
            }
            const LabeledSample s = sample(g, gen_n, Seed{gen_seed, {}});
            meta["generator"] = generator_json(g);
            meta["n"] = gen_n;
            meta["seed"] = gen_seed;
            meta["true_component"] = s.components;
            write_dataset_csv(gen_out + ".csv", s.data);
            write_text_file(gen_out + ".json", meta.dump(2) + "\n");
        } else if (*clu) {
            ExperimentConfig c;
            apply_setting(c, "mode", clu_mode);
            apply_setting(c, "init", clu_init);
            c.restarts = clu_restarts;
            c.max_iter = clu_max_iter;
            c.tol = clu_tol;
            if (clu_k < 1 || clu_restarts < 1 || clu_max_iter < 1 || !(clu_tol >= 0)) {
                throw ConfigError("--k, --restarts and --max-iter must be positive and --tol non-negative");
            }
            const DataSet data = read_dataset_csv(clu_input);
            const KMeansResult fit = cluster_with(c, data, clu_k, Seed{clu_seed, {}});
            std::string labels = "label\n";
            for (int l : fit.clustering.labels) {
                labels += std::to_string(l) + "\n";
            }
            write_text_file(clu_out + ".csv", labels);
            Json doc;
            doc["input"] = clu_input;
            doc["k"] = clu_k;
            doc["seed"] = clu_seed;
            doc["mode"] = clu_mode;
            doc["restarts"] = clu_restarts;
            doc["init"] = clu_init;
            doc["max_iter"] = clu_max_iter;
            doc["tol"] = clu_tol;
            doc["objective"] = fit.objective;
            doc["iterations"] = fit.iterations;
            doc["converged"] = fit.converged;
            doc["centers"] = matrix_json(fit.centers());
            write_text_file(clu_out + ".json", doc.dump(2) + "\n");
        } else if (*stab) {
            ExperimentConfig c;
            if (!stab_config.empty()) {
                for (const auto& [key, value] : parse_config_text(read_text_file(stab_config))) {
                    apply_setting(c, key, value);
                }
            }
            for (const auto& key : config_keys()) {
                if (stab_opts[key]->count() > 0) {
                    apply_setting(c, key, stab_flags[key]);
                }
            }
            const ExperimentResult r = run_stability(c);
            write_result(r, stab_out);
            std::cout << "selected_k=" << (r.curve.selected_k ? std::to_string(*r.curve.selected_k) : "none") << "\n";
        } else if (*sel) {
            if (sel_curve.empty() == sel_result.empty()) {
                throw ConfigError("give exactly one of --curve and --result");
            }
            if (sel_rule == "argmin") {
                if (sel_column != "raw" && sel_column != "normalized") {
                    throw ConfigError("--column must be raw or normalized");
                }
                StabilityCurve curve;
                if (!sel_curve.empty()) {
                    curve = read_curve_csv(sel_curve);
                } else {
                    const Json doc = Json::parse(read_text_file(sel_result));
                    for (const auto& row : doc.at("curve")) {
                        CurveRow r;
                        r.k = row.at("k").get<int>();
                        r.raw = row.at("raw").get<double>();
                        if (!row.at("normalized").is_null()) {
                            r.normalized = row.at("normalized").get<double>();
                        }
                        curve.rows.push_back(r);
                    }
                }
                std::cout << select_k_argmin(curve, sel_column == "normalized") << "\n";
            } else if (sel_rule == "significance") {
                if (sel_result.empty()) {
                    throw ConfigError("significance selection needs --result (it uses the per-k distance sets)");
                }
                const Json doc = Json::parse(read_text_file(sel_result));
                std::vector<int> ks;
                std::vector<std::vector<double>> raw_sets, null_sets;
                for (const auto& e : doc.at("estimates")) {
                    if (e.at("null").is_null()) {
                        throw ConfigError("the result has no null distances; rerun with a normalization");
                    }
                    ks.push_back(e.at("k").get<int>());
                    raw_sets.push_back(e.at("raw").at("distances").get<std::vector<double>>());
                    null_sets.push_back(e.at("null").at("distances").get<std::vector<double>>());
                }
                SignificanceResult res;
                try {
                    res = select_k_significance(ks, raw_sets, null_sets, sel_alpha, Seed{sel_seed, {}}, sel_resamples);
                } catch (const InvalidArgument& e) {
                    throw ConfigError(e.what());
                }
                for (std::size_t i = 0; i < ks.size(); ++i) {
                    std::cout << "k=" << ks[i] << " p=" << format_double(res.p_values[i]) << "\n";
                }
                std::cout << "selected_k=" << (res.selected_k ? std::to_string(*res.selected_k) : "none") << "\n";
            } else {
                throw ConfigError("--rule must be argmin or significance");
            }
        } else if (*exp) {
            const ExperimentReport r = run_experiment(exp_name, exp_seed, exp_threads);
            write_report(r, exp_out);
            std::cout << exp_name << ": " << (r.summary["pass"].get<bool>() ? "pass" : "FAIL") << "\n";
        } else if (*plot) {
            const StabilityCurve curve = read_curve_csv(plot_curve);
            std::vector<svg::Series> series;
            svg::Series raw{"raw", {}, {}}, null{"null", {}, {}}, norm{"normalized", {}, {}};
            for (const auto& row : curve.rows) {
                raw.x.push_back(row.k);
                raw.y.push_back(row.raw);
                if (row.null) {
                    null.x.push_back(row.k);
                    null.y.push_back(*row.null);
                }
                if (row.normalized) {
                    norm.x.push_back(row.k);
                    norm.y.push_back(*row.normalized);
                }
            }
            for (auto* s : {&raw, &null, &norm}) {
                if (!s->x.empty()) {
                    series.push_back(*s);
                }
            }
            write_text_file(plot_out, svg::line_chart("Instability by k", "k", "instability", series));
        }
    } catch (const InvalidArgument& e) {
        // ConfigError derives from InvalidArgument; other invalid arguments come from data.
        std::cerr << "error: " << e.what() << "\n";
        return dynamic_cast<const ConfigError*>(&e) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
