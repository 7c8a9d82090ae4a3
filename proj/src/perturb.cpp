#include "kstab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kstab {

std::string to_string(PerturbationKind kind) {
    switch (kind) {
    case PerturbationKind::subsample:
        return "subsample";
    case PerturbationKind::bootstrap:
        return "bootstrap";
    case PerturbationKind::noise:
        return "noise";
    case PerturbationKind::projection:
        return "projection";
    case PerturbationKind::fresh_sample:
        return "fresh_sample";
    }
    return "unknown";
}

PerturbationKind parse_perturbation(std::string_view name) {
    for (auto kind : {PerturbationKind::subsample, PerturbationKind::bootstrap, PerturbationKind::noise,
                      PerturbationKind::projection, PerturbationKind::fresh_sample}) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw InvalidArgument("unknown perturbation scheme '" + std::string(name) + "'");
}

void validate(const PerturbationScheme& scheme, Index dim) {
    switch (scheme.kind) {
    case PerturbationKind::subsample:
        if (!(scheme.fraction > 0 && scheme.fraction <= 1)) {
            throw InvalidArgument("subsample fraction must lie in (0, 1]");
        }
        break;
    case PerturbationKind::noise:
        if (!(scheme.sigma > 0)) {
            throw InvalidArgument("noise sigma must be positive");
        }
        break;
    case PerturbationKind::projection:
        if (scheme.target_dim < 1 || scheme.target_dim >= dim) {
            throw InvalidArgument("projection target dimension must lie in [1, " + std::to_string(dim) + ")");
        }
        break;
    case PerturbationKind::bootstrap:
    case PerturbationKind::fresh_sample:
        break;
    }
}

DataSet subsample(const DataSet& data, double fraction, const Seed& seed) {
    if (!(fraction > 0 && fraction <= 1)) {
        throw InvalidArgument("subsample fraction must lie in (0, 1]");
    }
    const Index n = data.size();
    const Index m = std::min<Index>(n, static_cast<Index>(std::ceil(fraction * static_cast<double>(n))));
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng = make_rng(seed);
    // partial Fisher-Yates
    for (Index i = 0; i < m; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    order.resize(m);
    return subset(data, order);
}

DataSet bootstrap(const DataSet& data, const Seed& seed) {
    const Index n = data.size();
    Rng rng = make_rng(seed);
    std::discrete_distribution<Index> draw(data.weights().data(), data.weights().data() + n);
    std::vector<Index> counts(n, 0);
    for (Index i = 0; i < n; ++i) {
        ++counts[draw(rng)];
    }
    std::vector<Index> kept;
    for (Index i = 0; i < n; ++i) {
        if (counts[i] > 0) {
            kept.push_back(i);
        }
    }
    const DataSet picked = subset(data, kept);
    Vector w(static_cast<Index>(kept.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) {
        w[static_cast<Index>(r)] = static_cast<double>(counts[kept[r]]);
    }
    return DataSet(picked.points(), std::move(w), picked.root_id(), picked.origin());
}

DataSet add_noise(const DataSet& data, double sigma, const Seed& seed) {
    if (!(sigma > 0)) {
        throw InvalidArgument("noise sigma must be positive");
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    Matrix pts = data.points();
    for (Index i = 0; i < pts.rows(); ++i) {
        for (Index j = 0; j < pts.cols(); ++j) {
            pts(i, j) += gauss(rng);
        }
    }
    return with_points(data, std::move(pts));
}

DataSet random_projection(const DataSet& data, int target_dim, const Seed& seed) {
    if (target_dim < 1 || target_dim >= data.dim()) {
        throw InvalidArgument("projection target dimension must lie in [1, " + std::to_string(data.dim()) + ")");
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(target_dim)));
    Matrix proj(data.dim(), target_dim);
    for (Index i = 0; i < proj.rows(); ++i) {
        for (Index j = 0; j < proj.cols(); ++j) {
            proj(i, j) = gauss(rng);
        }
    }
    return with_points(data, data.points() * proj);
}

DataSet null_uniform_box(const DataSet& data, Index m, const Seed& seed) {
    if (m < 1) {
        throw InvalidArgument("null sample size must be at least 1");
    }
    const Eigen::RowVectorXd lo = data.points().colwise().minCoeff();
    const Eigen::RowVectorXd hi = data.points().colwise().maxCoeff();
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix pts(m, data.dim());
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < data.dim(); ++j) {
            pts(i, j) = hi[j] > lo[j] ? lo[j] + (hi[j] - lo[j]) * unit(rng) : lo[j];
        }
    }
    return make_dataset(std::move(pts), std::nullopt, tagged_id("null_uniform_box", seed));
}

DataSet null_scramble(const DataSet& data, const Seed& seed) {
    if (data.size() < 2) {
        throw InvalidArgument("scrambling needs at least two points");
    }
    Rng rng = make_rng(seed);
    Matrix pts = data.points();
    for (Index j = 0; j < pts.cols(); ++j) {
        std::vector<double> column(pts.col(j).begin(), pts.col(j).end());
        std::shuffle(column.begin(), column.end(), rng);
        pts.col(j) = Eigen::Map<const Vector>(column.data(), pts.rows());
    }
    return make_dataset(std::move(pts), data.weights(), tagged_id("null_scramble", seed));
}

DataSet perturb(const DataSet& data, const PerturbationScheme& scheme, const Seed& seed) {
    validate(scheme, data.dim());
    switch (scheme.kind) {
    case PerturbationKind::subsample:
        return subsample(data, scheme.fraction, seed);
    case PerturbationKind::bootstrap:
        return bootstrap(data, seed);
    case PerturbationKind::noise:
        return add_noise(data, scheme.sigma, seed);
    case PerturbationKind::projection:
        return random_projection(data, scheme.target_dim, seed);
    case PerturbationKind::fresh_sample:
        break;
    }
    throw InvalidArgument("fresh_sample perturbation needs a known generator, not a fixed data set");
}

} // namespace kstab
