#ifndef GKB_HARNESS_EXPERIMENT_HPP
#define GKB_HARNESS_EXPERIMENT_HPP

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "gkb/environment.hpp"
#include "gkb/harness/config.hpp"

namespace gkb::harness {

struct ReplicationResult {
    std::string label;
    int replication = 0;
    bool ok = true;
    std::string error;
    /// Rounds completed before a failure, or all T rounds.
    std::vector<RunRecord> records;
};

struct ExperimentResult {
    /// Policy-major order: all replications of the first policy, then the next.
    std::vector<ReplicationResult> runs;

    bool all_ok() const;
    /// Mean of the final cumulative regret over successful replications of `label`; NaN if none.
    double mean_final_regret(const std::string& label) const;
    /// Mean cumulative regret at round t over successful replications of `label`.
    double mean_regret_at(const std::string& label, int t) const;
};

/// Runs every (policy, replication) pair on `workers` threads. Output does not depend on `workers`.
ExperimentResult run_replications(const ExperimentConfig& config, const Environment& environment, int workers);

/// Per-round CSV with the fixed header.
std::string records_csv(const ReplicationResult& run, bool record_timing);
/// Mean and median cumulative regret per round per policy.
std::string aggregate_csv(const ExperimentConfig& config, const ExperimentResult& result);
/// x*, kappa constants, f* per arm and the instance geometry.
Json environment_summary(const ExperimentConfig& config, const Environment& environment);
Json manifest(const ExperimentConfig& config, const ExperimentResult& result);

std::filesystem::path run_file(const std::string& label, int replication);

/// Full run-experiment: runs, then writes CSVs, manifest and environment sidecar under
/// config.output_dir. Returns 0 when every replication succeeded and 1 otherwise.
int run_experiment(const ExperimentConfig& config, int workers, std::ostream& log);

/// Tool version string baked in at build time.
std::string tool_version();

} // namespace gkb::harness

#endif
