#ifndef KSTAB_PERTURB_HPP
#define KSTAB_PERTURB_HPP

#include "kstab/core.hpp"

#include <string>
#include <string_view>

/**
 * @file perturb.hpp
 *
 * @brief Perturbed versions of a data set, and structure-free null references.
 *
 * Subsamples and bootstrap resamples keep the root provenance of their input, so the
 * points they share can be matched by `restrict_to_overlap()`.
 */

namespace kstab {

enum class PerturbationKind { subsample, bootstrap, noise, projection, fresh_sample };

struct PerturbationScheme {
    PerturbationKind kind = PerturbationKind::subsample;
    double fraction = 0.8;
    double sigma = 0.1;
    int target_dim = 1;
};

std::string to_string(PerturbationKind kind);
PerturbationKind parse_perturbation(std::string_view name);

/// Throws if the scheme's parameters are invalid for its kind (or for data of dimension `dim`).
void validate(const PerturbationScheme& scheme, Index dim);

/// ceil(fraction * n) distinct points drawn uniformly without replacement, in draw order.
DataSet subsample(const DataSet& data, double fraction, const Seed& seed);

/**
 * n weight-proportional draws with replacement, returned as the distinct points drawn
 * with their draw counts as weights, in input order.
 */
DataSet bootstrap(const DataSet& data, const Seed& seed);

/// Adds independent N(0, sigma^2) noise to every coordinate.
DataSet add_noise(const DataSet& data, double sigma, const Seed& seed);

/// Maps points by a d x target_dim matrix of i.i.d. N(0, 1/target_dim) entries.
DataSet random_projection(const DataSet& data, int target_dim, const Seed& seed);

/// `m` points uniform on the bounding box of `data`. Zero-width coordinates stay constant.
DataSet null_uniform_box(const DataSet& data, Index m, const Seed& seed);

/// Every coordinate column permuted independently.
DataSet null_scramble(const DataSet& data, const Seed& seed);

/// Applies a data-derived scheme; `fresh_sample` needs a generator and is rejected here.
DataSet perturb(const DataSet& data, const PerturbationScheme& scheme, const Seed& seed);

} // namespace kstab

#endif
