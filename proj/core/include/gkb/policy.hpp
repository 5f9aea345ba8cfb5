#ifndef GKB_POLICY_HPP
#define GKB_POLICY_HPP

#include <string>
#include <vector>

#include "gkb/confidence.hpp"
#include "gkb/ef_models.hpp"
#include "gkb/environment.hpp"
#include "gkb/estimation.hpp"
#include "gkb/kernels.hpp"

namespace gkb {

enum class PolicyKind { eff_gkb_ucb, kb_ucb_hoeffding, greedy, uniform_random };

std::string to_string(PolicyKind kind);
/// Throws InputError on an unknown name.
PolicyKind parse_policy_kind(const std::string& name);

/// Settings of the optimistic program solver (multiplier search over eta).
struct OptimisticSolverOptions {
    int max_bisection_steps = 60;
    /// Relative tolerance |gap - D| <= tol * D.
    double gap_tolerance = 1e-6;
    double eta_max = 18446744073709551616.0; // 2^64
};

struct PolicyConfig {
    PolicyKind kind = PolicyKind::eff_gkb_ucb;
    ConfidenceConfig confidence;
    NewtonOptions newton;
    OptimisticSolverOptions solver;
};

/*
 * Per-replication learner state over a finite decision set.
 *
 * Observations are kept both as the raw history and grouped per arm
 * (Design); the grouped form indexes its support in first-pull order and is
 * what the estimator and the optimistic program operate on. The MLE is
 * refit after every observation, warm-started from the previous estimate.
 */
class PolicyState {
public:
    PolicyState(PolicyConfig config, Kernel kernel, EFModel model, std::vector<Point> decision_set);

    /// Records (x_arm, y) and refits the MLE.
    void observe(Index arm, double reward);

    /// Current round t; the history holds t - 1 observations.
    int round() const { return static_cast<int>(history_.size()) + 1; }

    const PolicyConfig& config() const { return config_; }
    const Kernel& kernel() const { return kernel_; }
    const EFModel& model() const { return model_; }
    const std::vector<Point>& decision_set() const { return decision_set_; }
    Index num_arms() const { return static_cast<Index>(decision_set_.size()); }
    const History& history() const { return history_; }
    const Design& design() const { return design_; }
    const Vector& mle_coeffs() const { return mle_coeffs_; }
    /// Newton iterations spent on the most recent refit.
    int last_fit_iterations() const { return last_fit_iterations_; }

    /// f_hat as a function in representer form over the grouped support.
    DualFunction mle() const;
    double mle_value(const Point& x) const;

    /// log det(lambda^{-1}(lambda I + K_t)) over the full history.
    double logdet_unweighted() const;
    /// log det(lambda^{-1} H_t(lambda; f)) with weights mu'(f(x_s)) / g(tau).
    double logdet_weighted(const DualFunction& f) const;

    /// D_t(delta; H) and B_t(delta; H) at the current round.
    double radius_D() const;
    double radius_B() const;

    /// Per-arm scores computed by the most recent select_action.
    const Vector& last_scores() const { return last_scores_; }
    int last_newton_iterations() const { return last_newton_; }
    int last_bisection_iterations() const { return last_bisection_; }

    double cumulative_regret() const { return cumulative_regret_; }

private:
    friend Index select_action(PolicyState& state, Rng& rng);
    friend Index baseline_kb_ucb(PolicyState& state);
    friend RunRecord run_round(PolicyState& state, const Environment& environment, Rng& rng);

    PolicyConfig config_;
    Kernel kernel_;
    EFModel model_;
    std::vector<Point> decision_set_;
    History history_;
    Design design_;
    std::vector<Index> support_of_arm_;
    Vector mle_coeffs_;
    int last_fit_iterations_ = 0;
    Vector last_scores_;
    int last_newton_ = 0;
    int last_bisection_ = 0;
    double cumulative_regret_ = 0.0;
};

struct UcbSolution {
    double value = 0.0;
    /// Maximizer over the (possibly augmented) support; the last entry belongs to x_hat when it
    /// had to be added.
    Vector alpha;
    double loss_gap = 0.0;
    int newton_iterations = 0;
    int bisection_iterations = 0;
    /// Set when the budget could not be exhausted up to eta_max.
    bool budget_unreached = false;
};

/*
 * Optimistic value of x_hat:
 *
 *   max <alpha, k(x_hat)>  s.t.  L(alpha) <= L(alpha_hat) + budget.
 *
 * The program is solved through its Lagrangian: for a multiplier eta the
 * tilted loss L(alpha) - eta f_alpha(x_hat) is minimized by Newton, and the
 * loss gap g(eta) = L(alpha_eta) - L(alpha_hat), which is continuous and
 * non-decreasing in eta, is driven to the budget by doubling then
 * bisection. x_hat joins the representer support (with zero multiplicity)
 * when it has not been observed, so the maximum is over the whole RKHS.
 */
UcbSolution ucb_value(const PolicyState& state, const Point& x_hat, double budget);

/// ucb_value at the round's own budget D_t(delta; H).
double ucb_value(const PolicyState& state, Index arm);

/// ||phi(x)||_{V_t^{-1}(lambda)} = sqrt((k(x,x) - k_t(x)^T (lambda I + K_t)^{-1} k_t(x)) / lambda).
double exploration_width(const PolicyState& state, const Point& x);

/// Index of the arm maximizing f_hat + (Hoeffding radius + sqrt(lambda) B) * width; ties lowest.
Index baseline_kb_ucb(PolicyState& state);

/// Dispatches on the policy kind. Cold start (empty history) draws a uniform arm for
/// eff_gkb_ucb, greedy and uniform_random.
Index select_action(PolicyState& state, Rng& rng);

/// One interaction: select, sample, account regret, refit.
RunRecord run_round(PolicyState& state, const Environment& environment, Rng& rng);

} // namespace gkb

#endif
