#ifndef KSTAB_SYNTHGEN_HPP
#define KSTAB_SYNTHGEN_HPP

#include "kstab/core.hpp"

#include <string>
#include <variant>
#include <vector>

/**
 * @file synthgen.hpp
 *
 * @brief Seeded synthetic distributions: isotropic Gaussian mixtures and the uniform unit square,
 * plus the named presets used by the experiments.
 */

namespace kstab {

struct MixtureComponent {
    Vector mean;
    double stdev = 1;
    double weight = 1;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    Index dim = 0;

    /// Component means stacked row-wise.
    Matrix means() const;
};

/// Throws unless the spec has components of matching dimension, stdev > 0, weight >= 0 and weights summing to 1 (1e-9).
void validate(const MixtureSpec& spec);

struct LabeledSample {
    DataSet data;
    /// Generating component of each point.
    Labels components;
};

LabeledSample sample_mixture(const MixtureSpec& spec, Index n, const Seed& seed);

DataSet sample_uniform_square(Index n, const Seed& seed);

/// The uniform density on [0,1]^2.
struct UniformSquare {};

using Generator = std::variant<MixtureSpec, UniformSquare>;

struct Preset {
    std::string name;
    std::string description;
    Generator generator;
};

/// Looks up a preset by name; throws InvalidArgument for unknown names.
Preset preset(const std::string& name);

std::vector<std::string> preset_names();

Index dimension(const Generator& generator);

/// n points from the generator; true labels are all zero for the uniform square.
LabeledSample sample(const Generator& generator, Index n, const Seed& seed);

} // namespace kstab

#endif
