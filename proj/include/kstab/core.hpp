#ifndef KSTAB_CORE_HPP
#define KSTAB_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file core.hpp
 *
 * @brief Data sets, clusterings and seeded random streams shared by every module.
 */

namespace kstab {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cluster labels are zero-based: a K-clustering uses labels 0..K-1.
using Labels = std::vector<int>;

/// Raised when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * @brief A weighted point set.
 *
 * Points are stored row-wise (n x d). Every point carries a positive weight and an
 * origin index into the root data set it was derived from; derived sets (subsamples,
 * bootstrap resamples) keep the root's `root_id` so clusterings on them can be
 * restricted to common points.
 */
class DataSet {
public:
    DataSet(Matrix points, Vector weights, std::string root_id, std::vector<Index> origin);

    const Matrix& points() const { return points_; }
    const Vector& weights() const { return weights_; }
    Index size() const { return points_.rows(); }
    Index dim() const { return points_.cols(); }
    double total_weight() const { return total_weight_; }

    /// Identifier of the root data set; shared by every subset of it.
    const std::string& root_id() const { return root_id_; }

    /// For each row, the row index in the root data set.
    const std::vector<Index>& origin() const { return origin_; }

    bool unit_weights() const;

private:
    Matrix points_;
    Vector weights_;
    std::string root_id_;
    std::vector<Index> origin_;
    double total_weight_ = 0;
};

/// Builds a root data set; weights default to 1 and origin to the identity.
DataSet make_dataset(Matrix points, std::optional<Vector> weights = std::nullopt, std::string id = "data");

/// Rows `indices` of `data`, in order; duplicates allowed.
DataSet subset(const DataSet& data, std::span<const Index> indices);

/// Same points as `data` with different coordinates (noise, projection), keeping weights and provenance.
DataSet with_points(const DataSet& data, Matrix points);

/**
 * @brief A labeling of a point set into `k` groups.
 *
 * `domain` holds the root-origin index of each labeled point (see `DataSet::origin()`)
 * and `root_id` names the root data set those indices refer to.
 */
struct Clustering {
    Labels labels;
    int k = 0;
    std::optional<Matrix> centers;
    std::string root_id;
    std::vector<Index> domain;
};

/// Throws if labels fall outside 0..k-1, the centers have the wrong row count, or the domain length differs.
void validate(const Clustering& clustering);

/// Attaches the provenance of `data` to a label vector.
Clustering make_clustering(const DataSet& data, Labels labels, int k, std::optional<Matrix> centers = std::nullopt);

/**
 * @brief Node in a counter-based tree of random streams.
 *
 * A stream is identified by the root value and the path of child indices leading to it.
 * Equal (root, path) pairs always give the same engine state.
 */
struct Seed {
    std::uint64_t root = 0;
    std::vector<std::uint64_t> path;

    Seed child(std::uint64_t index) const;

    /// 64-bit key mixing the root and every path element.
    std::uint64_t key() const;

    bool operator==(const Seed&) const = default;
};

Seed derive_stream(const Seed& seed, std::uint64_t index);

using Rng = std::mt19937_64;

Rng make_rng(const Seed& seed);

/// Root id for a generated data set: `kind` followed by the seed key in hex.
std::string tagged_id(std::string_view kind, const Seed& seed);

/// Runs `task(i)` for i in [0, count) on up to `threads` workers. Each index runs exactly once.
void parallel_for(Index count, int threads, const std::function<void(Index)>& task);

} // namespace kstab

#endif
