#ifndef KSTAB_STABILITY_HPP
#define KSTAB_STABILITY_HPP

#include "kstab/core.hpp"
#include "kstab/distances.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file stability.hpp
 *
 * @brief Instability estimators, normalization, selection of the number of clusters and
 * the boundary tube-mass diagnostic.
 *
 * The basic quantity is the mean distance between clusterings of perturbed versions of
 * the data. The all-pairs estimator averages d(C_b, C_b') over all b_max^2 ordered pairs,
 * including the zero diagonal. The disjoint-pairs estimator averages over m independent
 * pairs of fresh samples, and its mean scaled by sqrt(n) is the rescaled instability.
 */

namespace kstab {

/// How two clusterings on different point sets are put on a common domain.
enum class Comparison {
    /// Keep only the points both were computed on.
    overlap_restrict,
    /// Label the union of both point sets with each clustering's nearest center.
    center_extend,
};

enum class Protocol { all_pairs, disjoint_pairs, vs_original };

std::string to_string(Comparison comparison);
std::string to_string(Protocol protocol);
Comparison parse_comparison(std::string_view name);
Protocol parse_protocol(std::string_view name);

struct InstabilityEstimate {
    int k = 0;
    /// Points per clustered sample.
    Index n = 0;
    double mean = 0;
    /// Sample standard deviation over the non-diagonal distances.
    double stdev = 0;
    Index num_pairs = 0;
    DistanceKind distance = DistanceKind::minimal_matching;
    Protocol protocol = Protocol::all_pairs;
    /// Every distance entering the mean; for all_pairs the full b_max^2 matrix row by row.
    std::vector<double> distances;
};

/// A clustering together with the data it was computed on.
struct Replicate {
    DataSet data;
    Clustering clustering;
};

LabelPair common_domain(const Replicate& a, const Replicate& b, Comparison comparison);

double compare(const Replicate& a, const Replicate& b, DistanceKind distance, Comparison comparison);

InstabilityEstimate estimate_instability_all_pairs(std::span<const Replicate> replicates, DistanceKind distance,
                                                   Comparison comparison, int threads = 1);

/// Mean distance between a reference clustering (usually of the unperturbed data) and each replicate.
InstabilityEstimate estimate_instability_vs_original(const Replicate& reference, std::span<const Replicate> replicates,
                                                     DistanceKind distance, Comparison comparison, int threads = 1);

/// Draws a data set of the requested size.
using Sampler = std::function<DataSet(Index n, const Seed& seed)>;
/// Clusters a data set into k groups; the result must carry its centers.
using ClusterFn = std::function<Clustering(const DataSet& data, int k, const Seed& seed)>;

/**
 * Mean minimal matching distance over m independent pairs of size-n samples; sample j
 * uses seed.child(j) for drawing and seed.child(j).child(1) for clustering. Pairs are
 * compared on the union of both samples through nearest-center extension.
 */
InstabilityEstimate estimate_instability_disjoint_pairs(const Sampler& sampler, const ClusterFn& algorithm, int k,
                                                        Index n, int m, const Seed& seed, int threads = 1);

/// Same estimate from already clustered runs, paired as (0,1), (2,3), ...
InstabilityEstimate estimate_instability_disjoint_pairs(std::span<const Replicate> runs, DistanceKind distance,
                                                        Comparison comparison, int threads = 1);

/// Integral of the empirical CDF of the distances over [0,1]; higher means more stable.
double area_under_cdf_score(std::span<const double> distances);

/**
 * Instability of randomly relabeled clusterings: each clustering's labels are permuted
 * over its points. Under center extension the permutation acts on the extended labels
 * of every compared pair.
 */
InstabilityEstimate permutation_null(std::span<const Replicate> replicates, DistanceKind distance,
                                     Comparison comparison, const Seed& seed);

/// sqrt(n) * mean.
double rescale(const InstabilityEstimate& estimate);

struct CurveRow {
    int k = 0;
    double raw = 0;
    std::optional<double> null;
    std::optional<double> normalized;
    std::optional<double> rescaled;
    std::optional<double> p_value;
};

struct StabilityCurve {
    std::vector<CurveRow> rows;
    std::optional<int> selected_k;
    std::string selection_rule;
};

/// Throws unless k is strictly increasing and normalized = raw/null wherever both are present.
void validate(const StabilityCurve& curve);

/// raw(k) / null(k) for every k; the null curve's `raw` column holds the null instability.
StabilityCurve normalize_curve(const StabilityCurve& raw, const StabilityCurve& null);

/// k minimizing the raw or normalized column; ties go to the smallest k.
int select_k_argmin(const StabilityCurve& curve, bool use_normalized);

struct SignificanceResult {
    std::optional<int> selected_k;
    std::vector<double> p_values;
};

/**
 * One-sided bootstrap percentile test per k: p = (1 + #{null bootstrap means <= observed mean}) / (resamples + 1).
 * Selects the passing k (p < alpha) with the smallest p; equal p prefer the smaller
 * observed/null mean ratio, then the smaller k.
 */
SignificanceResult select_k_significance(std::span<const int> ks, std::span<const std::vector<double>> raw_sets,
                                         std::span<const std::vector<double>> null_sets, double alpha,
                                         const Seed& seed, int resamples = 1000);

/// Distance from x to the decision boundary of its nearest center.
double boundary_distance(const Eigen::RowVectorXd& x, const Matrix& centers);

/// Weight fraction of points within gamma of the nearest-center decision boundary.
double tube_mass(const Matrix& centers, const DataSet& eval_points, double gamma);

} // namespace kstab

#endif
