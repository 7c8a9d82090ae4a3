#ifndef KSTAB_DISTANCES_HPP
#define KSTAB_DISTANCES_HPP

#include "kstab/core.hpp"

#include <string>
#include <string_view>

/**
 * @file distances.hpp
 *
 * @brief Distances between two labelings of the same points, and the operators that put
 * two clusterings on a common domain.
 */

namespace kstab {

/// Two labelings of the same n points; labels of `a` lie in 0..k_a-1, labels of `b` in 0..k_b-1.
struct LabelPair {
    Labels a;
    Labels b;
    int k_a = 0;
    int k_b = 0;

    Index size() const { return static_cast<Index>(a.size()); }
};

/// Validates lengths and label ranges. With k omitted, it is one more than the largest label.
LabelPair make_label_pair(Labels a, Labels b, std::optional<int> k_a = std::nullopt, std::optional<int> k_b = std::nullopt);

/// Joint label counts, k_a x k_b.
Eigen::MatrixXi contingency_table(const LabelPair& pair);

/// Fraction of points mislabeled under the best label permutation. Unequal k are padded with empty clusters.
double minimal_matching_distance(const LabelPair& pair);
double hamming_distance(const LabelPair& pair);
/// 1 - (agreeing point pairs) / (n choose 2).
double rand_distance(const LabelPair& pair);
/// 1 - |co-clustered in both| / |co-clustered in either|; 0 when no pair is co-clustered at all.
double jaccard_distance(const LabelPair& pair);
/// H(A) + H(B) - 2 I(A;B), natural log.
double variation_of_information(const LabelPair& pair);

enum class DistanceKind { minimal_matching, hamming, rand, jaccard, variation_of_information };

double distance(DistanceKind kind, const LabelPair& pair);
std::string to_string(DistanceKind kind);
DistanceKind parse_distance(std::string_view name);

/// Labels of `points` under the clustering's nearest-center rule.
Labels extend_by_centers(const Clustering& clustering, const Matrix& points);

/// Both labelings on the points the two clusterings share, in root-index order.
LabelPair restrict_to_overlap(const Clustering& a, const Clustering& b);

} // namespace kstab

#endif
