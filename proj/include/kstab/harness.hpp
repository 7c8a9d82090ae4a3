#ifndef KSTAB_HARNESS_HPP
#define KSTAB_HARNESS_HPP

#include "kstab/core.hpp"
#include "kstab/kmeans.hpp"
#include "kstab/perturb.hpp"
#include "kstab/stability.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

/**
 * @file harness.hpp
 *
 * @brief Declarative stability runs: configuration, the perturb-cluster-compare loop over
 * k, normalization, selection and the JSON/CSV result documents.
 */

namespace kstab {

using Json = nlohmann::ordered_json;

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Failure while a valid configuration runs (CLI exit code 1).
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AlgorithmMode { idealized, realistic };
enum class Normalization { none, null_uniform, null_scramble, permutation };
enum class SelectionRule { argmin, significance };

std::string to_string(AlgorithmMode mode);
std::string to_string(Normalization normalization);
std::string to_string(SelectionRule rule);
std::string to_string(InitMethod init);

/**
 * @brief One stability run.
 *
 * Exactly one of `generator` (a preset name) and `input` (a CSV path) is set. Optional
 * fields are filled by resolve(): the scheme defaults to fresh_sample for generators and
 * subsample for files, the comparison to center_extend for fresh samples and
 * overlap_restrict otherwise, the normalization to null_uniform for generators and
 * null_scramble for files.
 */
struct ExperimentConfig {
    std::string generator;
    std::string input;
    Index n = 800;
    AlgorithmMode mode = AlgorithmMode::idealized;
    int restarts = 50;
    InitMethod init = InitMethod::uniform;
    std::optional<int> preliminary;
    std::optional<double> min_mass;
    int max_iter = 300;
    double tol = 1e-8;
    std::optional<PerturbationKind> scheme;
    double fraction = 0.8;
    double sigma = 0.1;
    int target_dim = 1;
    Protocol protocol = Protocol::all_pairs;
    std::optional<Comparison> comparison;
    DistanceKind distance = DistanceKind::minimal_matching;
    int k_min = 2;
    int k_max = 15;
    int b_max = 20;
    std::optional<Normalization> normalization;
    SelectionRule selection = SelectionRule::argmin;
    double alpha = 0.05;
    int resamples = 1000;
    std::optional<std::uint64_t> seed;
    /// Worker threads; results do not depend on it.
    int threads = 1;
};

/// Keys accepted by apply_setting, in the kebab-case used by flags and config files.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual form; throws ConfigError on an unknown key or bad value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Fills defaults and checks consistency; throws ConfigError.
ExperimentConfig resolve(ExperimentConfig config);

/// Every field except `threads`, so equal runs give equal documents regardless of parallelism.
Json to_json(const ExperimentConfig& config);

struct RunDiagnostics {
    int k = 0;
    std::vector<double> objectives;
    std::vector<int> iterations;
    std::vector<bool> converged;
};

struct ExperimentResult {
    ExperimentConfig config;
    StabilityCurve curve;
    /// argmin of the raw column, kept next to the configured selection.
    int selected_k_raw = 0;
    std::vector<InstabilityEstimate> raw;
    /// Empty without normalization.
    std::vector<InstabilityEstimate> null;
    std::vector<RunDiagnostics> diagnostics;
    double wall_clock_seconds = 0;
};

/// Clusters with the configured algorithm mode.
KMeansResult cluster_with(const ExperimentConfig& config, const DataSet& data, int k, const Seed& seed);

/**
 * Runs the full loop for k = k_min..k_max. `input` overrides reading `config.input`.
 * Replicate b of cell k draws from root.child(1).child(k).child(b) (null replicates
 * from root.child(2).child(k).child(b)).
 */
ExperimentResult run_stability(const ExperimentConfig& config, const std::optional<DataSet>& input = std::nullopt);

Json to_json(const ExperimentResult& result);

/// Serialized document with the top-level "wall_clock_seconds" member removed.
std::string deterministic_dump(Json document);

/// Writes `<prefix>.json` and `<prefix>.csv`.
void write_result(const ExperimentResult& result, const std::string& prefix);

} // namespace kstab

#endif
