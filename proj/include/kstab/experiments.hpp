#ifndef KSTAB_EXPERIMENTS_HPP
#define KSTAB_EXPERIMENTS_HPP

#include "kstab/harness.hpp"

#include <cstdint>
#include <string>
#include <vector>

/**
 * @file experiments.hpp
 *
 * @brief Scripted Monte-Carlo experiments on the synthetic presets.
 *
 * Each experiment produces raw measurements (CSV), a JSON summary with its checks and an
 * SVG chart. The summary holds "wall_clock_seconds" at top level; everything else is a
 * function of the seed alone.
 */

namespace kstab {

struct ExperimentReport {
    std::string name;
    Json summary;
    std::string csv;
    std::string svg;
};

const std::vector<std::string>& experiment_names();

/// Throws ConfigError for an unknown name.
ExperimentReport run_experiment(const std::string& name, std::uint64_t seed, int threads = 1);

/// Writes `<dir>/<name>.csv`, `.json` and `.svg`.
void write_report(const ExperimentReport& report, const std::string& dir);

/// Scheme I oversampling for k centers when the data hold k_true groups: max(ceil(k ln k), ceil(k_true ln k_true), k).
int oversampling_for(int k, int k_true);

} // namespace kstab

#endif
