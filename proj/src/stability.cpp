#include "kstab/stability.hpp"

#include "kstab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace kstab {

namespace {

double sample_stdev(std::span<const double> values) {
    if (values.size() < 2) {
        return 0;
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double mean_of(std::span<const double> values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

/// Union of the two point sets; shared root points appear once.
Matrix union_points(const DataSet& a, const DataSet& b) {
    std::vector<Index> extra;
    if (a.root_id() == b.root_id()) {
        std::unordered_set<Index> seen(a.origin().begin(), a.origin().end());
        for (Index i = 0; i < b.size(); ++i) {
            if (seen.insert(b.origin()[i]).second) {
                extra.push_back(i);
            }
        }
    } else {
        extra.resize(b.size());
        std::iota(extra.begin(), extra.end(), Index{0});
    }
    Matrix out(a.size() + static_cast<Index>(extra.size()), a.dim());
    out.topRows(a.size()) = a.points();
    for (std::size_t r = 0; r < extra.size(); ++r) {
        out.row(a.size() + static_cast<Index>(r)) = b.points().row(extra[r]);
    }
    return out;
}

void permute_in_place(Labels& labels, Rng& rng) {
    std::shuffle(labels.begin(), labels.end(), rng);
}

InstabilityEstimate all_pairs_from(std::span<const Replicate> replicates, DistanceKind distance, int threads,
                                   const std::function<double(Index, Index)>& pair_distance) {
    const Index b = static_cast<Index>(replicates.size());
    if (b < 2) {
        throw InvalidArgument("all-pairs instability needs at least two clusterings");
    }
    std::vector<std::pair<Index, Index>> pairs;
    for (Index i = 0; i < b; ++i) {
        for (Index j = i + 1; j < b; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    std::vector<double> upper(pairs.size());
    parallel_for(static_cast<Index>(pairs.size()), threads,
                 [&](Index p) { upper[p] = pair_distance(pairs[p].first, pairs[p].second); });

    Matrix full = Matrix::Zero(b, b);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        full(pairs[p].first, pairs[p].second) = upper[p];
        full(pairs[p].second, pairs[p].first) = upper[p];
    }

    InstabilityEstimate out;
    out.k = replicates[0].clustering.k;
    out.n = replicates[0].data.size();
    out.distance = distance;
    out.protocol = Protocol::all_pairs;
    out.num_pairs = b * b;
    out.distances.reserve(b * b);
    for (Index i = 0; i < b; ++i) {
        for (Index j = 0; j < b; ++j) {
            out.distances.push_back(full(i, j));
        }
    }
    out.mean = mean_of(out.distances);
    out.stdev = sample_stdev(upper);
    return out;
}

} // namespace

std::string to_string(Comparison comparison) {
    return comparison == Comparison::overlap_restrict ? "overlap_restrict" : "center_extend";
}

std::string to_string(Protocol protocol) {
    switch (protocol) {
    case Protocol::all_pairs:
        return "all_pairs";
    case Protocol::disjoint_pairs:
        return "disjoint_pairs";
    case Protocol::vs_original:
        return "vs_original";
    }
    return "unknown";
}

Comparison parse_comparison(std::string_view name) {
    if (name == "overlap_restrict") {
        return Comparison::overlap_restrict;
    }
    if (name == "center_extend") {
        return Comparison::center_extend;
    }
    throw InvalidArgument("unknown comparison '" + std::string(name) + "' (expected overlap_restrict or center_extend)");
}

Protocol parse_protocol(std::string_view name) {
    for (auto p : {Protocol::all_pairs, Protocol::disjoint_pairs, Protocol::vs_original}) {
        if (name == to_string(p)) {
            return p;
        }
    }
    throw InvalidArgument("unknown protocol '" + std::string(name) + "'");
}

LabelPair common_domain(const Replicate& a, const Replicate& b, Comparison comparison) {
    if (comparison == Comparison::overlap_restrict) {
        return restrict_to_overlap(a.clustering, b.clustering);
    }
    if (!a.clustering.centers || !b.clustering.centers) {
        throw InvalidArgument("center extension needs clusterings that carry their centers");
    }
    if (a.data.dim() != b.data.dim()) {
        throw InvalidArgument("center extension needs both clusterings in the same space");
    }
    const Matrix domain = union_points(a.data, b.data);
    return LabelPair{extend_by_centers(a.clustering, domain), extend_by_centers(b.clustering, domain), a.clustering.k,
                     b.clustering.k};
}

double compare(const Replicate& a, const Replicate& b, DistanceKind distance, Comparison comparison) {
    return kstab::distance(distance, common_domain(a, b, comparison));
}

InstabilityEstimate estimate_instability_all_pairs(std::span<const Replicate> replicates, DistanceKind distance,
                                                   Comparison comparison, int threads) {
    return all_pairs_from(replicates, distance, threads, [&](Index i, Index j) {
        return compare(replicates[i], replicates[j], distance, comparison);
    });
}

InstabilityEstimate estimate_instability_vs_original(const Replicate& reference, std::span<const Replicate> replicates,
                                                     DistanceKind distance, Comparison comparison, int threads) {
    if (replicates.empty()) {
        throw InvalidArgument("need at least one replicate to compare with the original clustering");
    }
    InstabilityEstimate out;
    out.k = reference.clustering.k;
    out.n = replicates[0].data.size();
    out.distance = distance;
    out.protocol = Protocol::vs_original;
    out.distances.resize(replicates.size());
    parallel_for(static_cast<Index>(replicates.size()), threads,
                 [&](Index b) { out.distances[b] = compare(reference, replicates[b], distance, comparison); });
    out.num_pairs = static_cast<Index>(replicates.size());
    out.mean = mean_of(out.distances);
    out.stdev = sample_stdev(out.distances);
    return out;
}

InstabilityEstimate estimate_instability_disjoint_pairs(const Sampler& sampler, const ClusterFn& algorithm, int k,
                                                        Index n, int m, const Seed& seed, int threads) {
    if (m < 1) {
        throw InvalidArgument("disjoint-pairs instability needs m >= 1 pairs");
    }
    if (k > n) {
        throw InvalidArgument("cannot cluster " + std::to_string(n) + " points into " + std::to_string(k) + " groups");
    }
    std::vector<std::optional<Replicate>> runs(2 * static_cast<std::size_t>(m));
    parallel_for(2 * m, threads, [&](Index j) {
        const Seed s = seed.child(static_cast<std::uint64_t>(j));
        DataSet data = sampler(n, s);
        Clustering c = algorithm(data, k, s.child(1));
        runs[j].emplace(Replicate{std::move(data), std::move(c)});
    });
    std::vector<Replicate> flat;
    flat.reserve(runs.size());
    for (auto& r : runs) {
        flat.push_back(std::move(*r));
    }
    return estimate_instability_disjoint_pairs(flat, DistanceKind::minimal_matching, Comparison::center_extend, threads);
}

InstabilityEstimate estimate_instability_disjoint_pairs(std::span<const Replicate> runs, DistanceKind distance,
                                                        Comparison comparison, int threads) {
    if (runs.size() < 2 || runs.size() % 2 != 0) {
        throw InvalidArgument("disjoint-pairs instability needs a positive even number of runs");
    }
    const Index m = static_cast<Index>(runs.size() / 2);
    InstabilityEstimate out;
    out.k = runs[0].clustering.k;
    out.n = runs[0].data.size();
    out.distance = distance;
    out.protocol = Protocol::disjoint_pairs;
    out.num_pairs = m;
    out.distances.resize(m);
    parallel_for(m, threads, [&](Index i) {
        out.distances[i] = compare(runs[2 * i], runs[2 * i + 1], distance, comparison);
    });
    out.mean = mean_of(out.distances);
    out.stdev = sample_stdev(out.distances);
    return out;
}

double area_under_cdf_score(std::span<const double> distances) {
    if (distances.empty()) {
        throw InvalidArgument("area under the CDF needs at least one distance");
    }
    for (double d : distances) {
        if (!(d >= 0 && d <= 1)) {
            throw InvalidArgument("distances must lie in [0, 1] for the area-under-CDF score");
        }
    }
    return 1.0 - mean_of(distances);
}

InstabilityEstimate permutation_null(std::span<const Replicate> replicates, DistanceKind distance,
                                     Comparison comparison, const Seed& seed) {
    if (comparison == Comparison::overlap_restrict) {
        std::vector<Replicate> permuted(replicates.begin(), replicates.end());
        for (std::size_t b = 0; b < permuted.size(); ++b) {
            Rng rng = make_rng(seed.child(b));
            permute_in_place(permuted[b].clustering.labels, rng);
            permuted[b].clustering.centers.reset();
        }
        return estimate_instability_all_pairs(permuted, distance, comparison);
    }
    return all_pairs_from(replicates, distance, 1, [&](Index i, Index j) {
        LabelPair pair = common_domain(replicates[i], replicates[j], comparison);
        Rng rng_a = make_rng(seed.child(static_cast<std::uint64_t>(i)).child(static_cast<std::uint64_t>(j)));
        Rng rng_b = make_rng(seed.child(static_cast<std::uint64_t>(j)).child(static_cast<std::uint64_t>(i)));
        permute_in_place(pair.a, rng_a);
        permute_in_place(pair.b, rng_b);
        return kstab::distance(distance, pair);
    });
}

double rescale(const InstabilityEstimate& estimate) {
    if (estimate.n < 1) {
        throw InvalidArgument("rescaling needs the sample size recorded in the estimate");
    }
    return std::sqrt(static_cast<double>(estimate.n)) * estimate.mean;
}

void validate(const StabilityCurve& curve) {
    for (std::size_t r = 0; r < curve.rows.size(); ++r) {
        const CurveRow& row = curve.rows[r];
        if (r > 0 && row.k <= curve.rows[r - 1].k) {
            throw InvalidArgument("curve k values must be strictly increasing");
        }
        if (row.null && row.normalized && *row.null > 0 && std::abs(*row.normalized - row.raw / *row.null) > 1e-12) {
            throw InvalidArgument("normalized column inconsistent with raw / null at k=" + std::to_string(row.k));
        }
    }
}

StabilityCurve normalize_curve(const StabilityCurve& raw, const StabilityCurve& null) {
    if (raw.rows.size() != null.rows.size()) {
        throw InvalidArgument("raw and null curves cover different k grids");
    }
    StabilityCurve out = raw;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (raw.rows[r].k != null.rows[r].k) {
            throw InvalidArgument("raw and null curves cover different k grids");
        }
        const double ref = null.rows[r].raw;
        if (!(ref > 0)) {
            throw InvalidArgument("null instability at k=" + std::to_string(raw.rows[r].k) + " is zero");
        }
        out.rows[r].null = ref;
        out.rows[r].normalized = raw.rows[r].raw / ref;
    }
    return out;
}

int select_k_argmin(const StabilityCurve& curve, bool use_normalized) {
    if (curve.rows.empty()) {
        throw InvalidArgument("cannot select k from an empty curve");
    }
    std::optional<int> best_k;
    double best = 0;
    for (const CurveRow& row : curve.rows) {
        if (use_normalized && !row.normalized) {
            throw InvalidArgument("normalized instability missing at k=" + std::to_string(row.k));
        }
        const double value = use_normalized ? *row.normalized : row.raw;
        if (!best_k || value < best) {
            best = value;
            best_k = row.k;
        }
    }
    return *best_k;
}

SignificanceResult select_k_significance(std::span<const int> ks, std::span<const std::vector<double>> raw_sets,
                                         std::span<const std::vector<double>> null_sets, double alpha,
                                         const Seed& seed, int resamples) {
    if (!(alpha > 0 && alpha < 1)) {
        throw InvalidArgument("significance level must lie in (0, 1)");
    }
    if (ks.size() != raw_sets.size() || ks.size() != null_sets.size()) {
        throw InvalidArgument("need one raw and one null distance set per k");
    }
    if (resamples < 1) {
        throw InvalidArgument("need at least one bootstrap resample");
    }

    SignificanceResult out;
    std::optional<std::size_t> best;
    double best_ratio = 0;
    for (std::size_t r = 0; r < ks.size(); ++r) {
        const auto& raw = raw_sets[r];
        const auto& null = null_sets[r];
        if (raw.empty() || null.empty()) {
            throw InvalidArgument("empty distance set at k=" + std::to_string(ks[r]));
        }
        const double observed = mean_of(raw);
        const double null_mean = mean_of(null);

        Rng rng = make_rng(seed.child(r));
        std::uniform_int_distribution<std::size_t> pick(0, null.size() - 1);
        int at_or_below = 0;
        for (int s = 0; s < resamples; ++s) {
            double total = 0;
            for (std::size_t i = 0; i < null.size(); ++i) {
                total += null[pick(rng)];
            }
            if (total / static_cast<double>(null.size()) <= observed) {
                ++at_or_below;
            }
        }
        const double p = (1.0 + at_or_below) / (1.0 + resamples);
        out.p_values.push_back(p);

        const double ratio = null_mean > 0 ? observed / null_mean : std::numeric_limits<double>::infinity();
        if (p < alpha) {
            const bool better = !best || p < out.p_values[*best] || (p == out.p_values[*best] && ratio < best_ratio);
            if (better) {
                best = r;
                best_ratio = ratio;
            }
        }
    }
    if (best) {
        out.selected_k = ks[*best];
    }
    return out;
}

double boundary_distance(const Eigen::RowVectorXd& x, const Matrix& centers) {
    const Labels own = assign_labels(x, centers);
    const Index i = own[0];
    const double di = (x - centers.row(i)).squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < centers.rows(); ++j) {
        if (j == i) {
            continue;
        }
        const double gap = (centers.row(i) - centers.row(j)).norm();
        const double dj = (x - centers.row(j)).squaredNorm();
        best = std::min(best, std::abs(dj - di) / (2 * gap));
    }
    return best;
}

double tube_mass(const Matrix& centers, const DataSet& eval_points, double gamma) {
    if (!(gamma >= 0)) {
        throw InvalidArgument("tube width must be non-negative");
    }
    if (centers.rows() < 2) {
        throw InvalidArgument("tube mass needs at least two centers");
    }
    if (centers.cols() != eval_points.dim()) {
        throw InvalidArgument("centers and evaluation points differ in dimension");
    }
    for (Index a = 0; a < centers.rows(); ++a) {
        for (Index b = a + 1; b < centers.rows(); ++b) {
            if ((centers.row(a) - centers.row(b)).norm() == 0) {
                throw InvalidArgument("coincident centers have no decision boundary");
            }
        }
    }
    double inside = 0;
    for (Index p = 0; p < eval_points.size(); ++p) {
        if (boundary_distance(eval_points.points().row(p), centers) <= gamma) {
            inside += eval_points.weights()[p];
        }
    }
    return inside / eval_points.total_weight();
}

} // namespace kstab
