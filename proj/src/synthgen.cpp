#include "kstab/synthgen.hpp"

#include <cmath>
#include <map>

namespace kstab {

namespace {

MixtureSpec mixture(std::initializer_list<std::vector<double>> means, std::initializer_list<double> weights, double stdev = 1.0) {
    MixtureSpec spec;
    auto w = weights.begin();
    for (const auto& m : means) {
        spec.components.push_back({Eigen::Map<const Vector>(m.data(), static_cast<Index>(m.size())), stdev, *w++});
    }
    spec.dim = spec.components.front().mean.size();
    return spec;
}

std::map<std::string, Preset> make_presets() {
    const double third = 1.0 / 3.0;
    const double triangle_height = 10.0 * std::sqrt(3.0) / 2.0;
    std::map<std::string, Preset> out;
    auto add = [&](std::string name, std::string description, Generator gen) {
        out.emplace(name, Preset{name, std::move(description), std::move(gen)});
    };
    add("fig1_four_clusters", "four unit-variance Gaussians on the corners of a square of side 10",
        mixture({{0, 0}, {10, 0}, {0, 10}, {10, 10}}, {0.25, 0.25, 0.25, 0.25}));
    add("fig2_four_gauss", "four well-separated unit-variance Gaussians on the corners of a square of side 10",
        mixture({{0, 0}, {10, 0}, {0, 10}, {10, 10}}, {0.25, 0.25, 0.25, 0.25}));
    add("fig2_uniform", "uniform density on the unit square", UniformSquare{});
    add("fig3a_asym", "three unit Gaussians at (0,0), (2,0), (1,3.5): a close pair and a farther third (unique 2-means optimum)",
        mixture({{0, 0}, {2, 0}, {1, 3.5}}, {third, third, third}));
    add("fig3b_sym", "three unit Gaussians on an equilateral triangle of side 10 (three 2-means optima)",
        mixture({{0, 0}, {10, 0}, {5, triangle_height}}, {third, third, third}));
    add("fig5_equal", "three unit Gaussians at (-5,-7), (-5,7), (5,7), equal weights",
        mixture({{-5, -7}, {-5, 7}, {5, 7}}, {third, third, third}));
    add("fig5_unequal", "three unit Gaussians at (-5,-7), (-5,7), (5,7), weights 0.2, 0.2, 0.6",
        mixture({{-5, -7}, {-5, 7}, {5, 7}}, {0.2, 0.2, 0.6}));
    add("thm4_two_gauss_1d", "two unit Gaussians on the line at 0 and 20, equal weights",
        mixture({{0}, {20}}, {0.5, 0.5}));
    return out;
}

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> table = make_presets();
    return table;
}

} // namespace

Matrix MixtureSpec::means() const {
    Matrix out(static_cast<Index>(components.size()), dim);
    for (std::size_t c = 0; c < components.size(); ++c) {
        out.row(static_cast<Index>(c)) = components[c].mean.transpose();
    }
    return out;
}

void validate(const MixtureSpec& spec) {
    if (spec.components.empty() || spec.dim < 1) {
        throw InvalidArgument("mixture needs at least one component and dimension >= 1");
    }
    double total = 0;
    for (const auto& c : spec.components) {
        if (c.mean.size() != spec.dim) {
            throw InvalidArgument("mixture component mean has the wrong dimension");
        }
        if (!(c.stdev > 0)) {
            throw InvalidArgument("mixture component stdev must be positive");
        }
        if (!(c.weight >= 0)) {
            throw InvalidArgument("mixture component weight must be non-negative");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument("mixture weights must sum to 1");
    }
}

LabeledSample sample_mixture(const MixtureSpec& spec, Index n, const Seed& seed) {
    validate(spec);
    if (n < 1) {
        throw InvalidArgument("sample size must be at least 1");
    }
    std::vector<double> weights;
    for (const auto& c : spec.components) {
        weights.push_back(c.weight);
    }
    Rng rng = make_rng(seed);
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix pts(n, spec.dim);
    Labels labels(n);
    for (Index i = 0; i < n; ++i) {
        const int c = pick(rng);
        labels[i] = c;
        const auto& comp = spec.components[c];
        for (Index j = 0; j < spec.dim; ++j) {
            pts(i, j) = comp.mean[j] + comp.stdev * gauss(rng);
        }
    }
    return {make_dataset(std::move(pts), std::nullopt, tagged_id("mixture", seed)), std::move(labels)};
}

DataSet sample_uniform_square(Index n, const Seed& seed) {
    if (n < 1) {
        throw InvalidArgument("sample size must be at least 1");
    }
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix pts(n, 2);
    for (Index i = 0; i < n; ++i) {
        pts(i, 0) = unit(rng);
        pts(i, 1) = unit(rng);
    }
    return make_dataset(std::move(pts), std::nullopt, tagged_id("uniform", seed));
}

Preset preset(const std::string& name) {
    const auto& table = presets();
    auto it = table.find(name);
    if (it == table.end()) {
        throw InvalidArgument("unknown preset '" + name + "'");
    }
    return it->second;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : presets()) {
        out.push_back(name);
    }
    return out;
}

Index dimension(const Generator& generator) {
    if (const auto* spec = std::get_if<MixtureSpec>(&generator)) {
        return spec->dim;
    }
    return 2;
}

LabeledSample sample(const Generator& generator, Index n, const Seed& seed) {
    if (const auto* spec = std::get_if<MixtureSpec>(&generator)) {
        return sample_mixture(*spec, n, seed);
    }
    return {sample_uniform_square(n, seed), Labels(n, 0)};
}

} // namespace kstab
