#ifndef GKB_COVERAGE_HPP
#define GKB_COVERAGE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gkb/concentration.hpp"
#include "gkb/environment.hpp"
#include "gkb/policy.hpp"

namespace gkb {

/// Which high-probability statement a coverage run checks.
enum class CoverageInequality {
    /// Stitched Freedman bound on a Rademacher walk with v_t = t R^2.
    freedman,
    /// Self-normalized bound on ||S_t|| in the f*-weighted norm.
    bernstein,
    /// ||g_t(f*) - g_t(f_hat)||_{H^{-1}(lambda; f*)} <= B_t(delta; f*).
    good_event,
    /// max_x ucb(x) >= f*(x*) under the optimistic policy.
    optimism,
};

std::string to_string(CoverageInequality inequality);
CoverageInequality parse_coverage_inequality(const std::string& name);

struct CoverageSpec {
    CoverageInequality inequality = CoverageInequality::bernstein;
    int replications = 500;
    /// Number of observations T; the bound is checked at every t = 1, ..., T + 1.
    int horizon = 300;
    double delta = 0.1;
    double lambda = 1.0;
    /// Instance for the kernel-based checks (ignored by freedman).
    InstanceSpec instance;
    /// Arm selection for bernstein and good_event; optimism always uses eff_gkb_ucb.
    PolicyKind selection = PolicyKind::uniform_random;
    /// Increment bound of the Rademacher walk (freedman only).
    double R = 1.0;
    StitchingParams stitching;
    /// Rewards equal their means (no noise).
    bool zero_noise = false;
    /// Scales every bound; 1 in normal use, < 1 only for negative controls.
    double bound_multiplier = 1.0;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct ReplicationOutcome {
    int replication = 0;
    bool covered = true;
    /// First t at which the bound failed; 0 when it never did.
    int first_violation = 0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    double final_statistic = 0.0;
    double final_bound = 0.0;
};

struct CoverageReport {
    std::string inequality;
    int replications = 0;
    int horizon = 0;
    double delta = 0.0;
    double coverage = 0.0;
    /// 1 - delta - 3 sqrt(delta (1 - delta) / M).
    double required = 0.0;
    /// Mean over replications and rounds of statistic / bound.
    double mean_tightness = 0.0;
    double max_ratio_median = 0.0;
    double max_ratio_q90 = 0.0;
    double max_ratio_max = 0.0;
    std::vector<ReplicationOutcome> outcomes;

    bool passed() const { return coverage >= required; }
};

/// 1 - delta - 3 sqrt(delta (1 - delta) / M).
double coverage_threshold(double delta, int replications);

/// Runs the replications (in parallel when workers > 1); results do not depend on the worker count.
CoverageReport coverage_experiment(const CoverageSpec& spec);

} // namespace gkb

#endif
