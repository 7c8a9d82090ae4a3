#ifndef KSTAB_KMEANS_HPP
#define KSTAB_KMEANS_HPP

#include "kstab/core.hpp"

#include <limits>
#include <optional>
#include <vector>

/**
 * @file kmeans.hpp
 *
 * @brief Weighted Lloyd iterations, initialization schemes and the idealized (best-of-restarts) variant.
 */

namespace kstab {

/**
 * Index of the nearest center for every row of `points`.
 * Ties go to the lowest center index. This is also the extension operator for
 * center-based clusterings: new points get the label of their closest center.
 */
template <typename DerivedP, typename DerivedC>
Labels assign_labels(const Eigen::MatrixBase<DerivedP>& points, const Eigen::MatrixBase<DerivedC>& centers) {
    using Scalar = typename DerivedP::Scalar;
    if (centers.rows() < 1) {
        throw InvalidArgument("assign_labels needs at least one center");
    }
    if (points.cols() != centers.cols()) {
        throw InvalidArgument("points and centers differ in dimension");
    }
    const Index n = points.rows();
    const Index k = centers.rows();
    Labels labels(n);
    for (Index i = 0; i < n; ++i) {
        Scalar best = std::numeric_limits<Scalar>::infinity();
        int arg = 0;
        for (Index c = 0; c < k; ++c) {
            const Scalar dist = (points.row(i) - centers.row(c)).squaredNorm();
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
        labels[i] = arg;
    }
    return labels;
}

/// Squared distance from every row of `points` to its nearest center.
template <typename DerivedP, typename DerivedC>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1>
nearest_squared_distances(const Eigen::MatrixBase<DerivedP>& points, const Eigen::MatrixBase<DerivedC>& centers) {
    using Scalar = typename DerivedP::Scalar;
    if (centers.rows() < 1 || points.cols() != centers.cols()) {
        throw InvalidArgument("nearest_squared_distances: bad center matrix");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(points.rows());
    for (Index i = 0; i < points.rows(); ++i) {
        Scalar best = std::numeric_limits<Scalar>::infinity();
        for (Index c = 0; c < centers.rows(); ++c) {
            best = std::min(best, (points.row(i) - centers.row(c)).squaredNorm());
        }
        out[i] = best;
    }
    return out;
}

/// Weighted mean squared distance to the nearest center, (1/W) sum_i w_i min_k |x_i - c_k|^2.
double eval_objective(const DataSet& data, const Matrix& centers);

struct LloydStep {
    Matrix centers;
    /// Assignment to the input centers, from which `centers` were computed.
    Labels labels;
    /// Objective of the input centers.
    double objective = 0;
};

/**
 * One assignment + mean update. A center that receives no weight keeps its position.
 */
LloydStep lloyd_step(const DataSet& data, const Matrix& centers);

struct LloydOptions {
    int max_iter = 300;
    /// Stop once no center moves farther than this.
    double tol = 1e-8;
};

struct KMeansResult {
    /// Nearest-center labels for the final centers, which are stored in `clustering.centers`.
    Clustering clustering;
    double objective = 0;
    int iterations = 0;
    bool converged = false;
    Matrix init_centers;
    /// Objective at the initial centers followed by the objective after each iteration.
    std::vector<double> objective_trace;

    const Matrix& centers() const { return *clustering.centers; }
};

KMeansResult run_lloyd(const DataSet& data, const Matrix& init_centers, const LloydOptions& options = {});

/// Number of pairwise distinct rows.
Index count_distinct_points(const Matrix& points);

/**
 * `k` distinct data points drawn without replacement, each draw proportional to weight.
 * Rows equal to an already chosen row are excluded from later draws.
 */
Matrix init_uniform_points(const DataSet& data, int k, const Seed& seed);

struct SchemeIOptions {
    /// Number of preliminary centers; default ceil(k ln max(k, 2)), at least k.
    std::optional<int> preliminary;
    /// Minimum weight fraction a preliminary center must attract; default 1 / (2L).
    std::optional<double> min_mass;
};

/**
 * Oversample-prune-spread initialization:
 *  1. draw L preliminary centers from the data;
 *  2. run one Lloyd step;
 *  3. drop centers holding less than `min_mass` of the total weight;
 *  4. pick the first survivor at random, then repeatedly the survivor farthest from those chosen.
 *
 * If fewer than k centers survive step 3, the k heaviest preliminary centers are kept instead.
 */
Matrix init_scheme_i(const DataSet& data, int k, const Seed& seed, const SchemeIOptions& options = {});

enum class InitMethod { uniform, scheme_i };

/// A single Lloyd run from a random initialization.
KMeansResult realistic_kmeans(const DataSet& data, int k, InitMethod init, const Seed& seed,
                              const LloydOptions& options = {}, const SchemeIOptions& scheme = {});

/**
 * Approximates the global minimizer by the best of `restarts` Lloyd runs, restart r
 * initialized by init_uniform_points with seed.child(r). Ties keep the lowest restart.
 */
KMeansResult idealized_kmeans(const DataSet& data, int k, int restarts, const Seed& seed, const LloydOptions& options = {});

struct InitConfigurationReport {
    /// Centers within `radius` of each true mean.
    std::vector<int> counts;
    bool covered = false;
    /// Region (true-mean index) of each center, or nullopt when it lies in no ball.
    std::vector<std::optional<int>> region_assignments;
};

/// Counts centers per ball of `radius` around each true mean. The balls must be disjoint.
InitConfigurationReport report_configuration(const Matrix& centers, const Matrix& true_means, double radius);

} // namespace kstab

#endif
