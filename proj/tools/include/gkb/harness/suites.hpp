#ifndef GKB_HARNESS_SUITES_HPP
#define GKB_HARNESS_SUITES_HPP

#include <ostream>
#include <string>
#include <vector>

#include "gkb/coverage.hpp"
#include "gkb/harness/config.hpp"

namespace gkb::harness {

struct SuiteResult {
    std::string name;
    bool passed = false;
    /// Measured quantity, its limit and how they compare ("<=" or ">=").
    std::string metric;
    double measured = 0.0;
    double limit = 0.0;
    std::string relation;
    double seconds = 0.0;
    Json details = Json::object();
    /// Per-replication rows for coverage suites; empty otherwise.
    std::string replications_csv;
};

/// Names accepted under verify.suites, in default run order.
const std::vector<std::string>& suite_names();
bool is_coverage_suite(const std::string& name);

/// Runs one suite. bound_multiplier scales every upper bound the suite checks (1 outside negative
/// controls); equalities are unaffected.
SuiteResult run_suite(const std::string& name, const Section& params, const ExperimentConfig& config, int workers);

std::string coverage_csv(const CoverageReport& report);

/*
 * verify: runs the configured suites (all of them when none are listed;
 * coverage_only restricts to the concentration coverage suites), writes
 * verify_report.json plus per-replication CSVs under config.output_dir and
 * prints one line per suite. Returns 0 when every suite passed, 1 otherwise.
 */
int run_verify(const ExperimentConfig& config, int workers, bool coverage_only, std::ostream& log);

} // namespace gkb::harness

#endif
