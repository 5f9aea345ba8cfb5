#ifndef GKB_ENVIRONMENT_HPP
#define GKB_ENVIRONMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gkb/ef_models.hpp"
#include "gkb/estimation.hpp"
#include "gkb/kernels.hpp"

namespace gkb {

/// Axis-aligned box [low, high]^dimension from which arms and anchors are drawn.
struct DomainBox {
    int dimension = 1;
    double low = 0.0;
    double high = 1.0;
};

struct InstanceSpec {
    std::uint64_t seed = 0;
    Kernel kernel = Kernel::rbf(1.0);
    EFModel model = EFModel::bernoulli();
    int num_arms = 10;
    int num_anchors = 5;
    /// Target RKHS norm of f*.
    double B = 1.0;
    DomainBox domain;
};

/*
 * Synthetic problem instance: finite decision set, ground truth
 * f* = sum_i c_i k(., z_i) over random anchors z_i, and the reward model.
 * Immutable after construction.
 */
class Environment {
public:
    Environment(std::vector<Point> decision_set, DualFunction f_star, EFModel model);

    const std::vector<Point>& decision_set() const { return decision_set_; }
    Index num_arms() const { return static_cast<Index>(decision_set_.size()); }
    const DualFunction& f_star() const { return f_star_; }
    const EFModel& model() const { return model_; }
    /// f*(x) for every arm, in arm order.
    const Vector& f_values() const { return f_values_; }
    Index x_star_index() const { return x_star_index_; }
    double kappa_star() const { return kappa_.kappa_star; }
    double kappa_x() const { return kappa_.kappa_x; }
    double f_star_norm() const { return std::sqrt(std::max(0.0, f_star_.rkhs_norm_sq())); }

    /// Reward draw y ~ p(. | x_arm; f*).
    double step(Index arm, Rng& rng) const;

    /// mu(f*(x*)) - mu(f*(x_arm)).
    double instant_regret(Index arm) const;

private:
    void check_arm(Index arm) const;

    std::vector<Point> decision_set_;
    DualFunction f_star_;
    EFModel model_;
    Vector f_values_;
    Index x_star_index_ = 0;
    KappaConstants kappa_{};
};

/// One row of the per-round experiment log.
struct RunRecord {
    int t = 0;
    Index arm = 0;
    double reward = 0.0;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    double D_t = 0.0;
    double B_t = 0.0;
    int newton_iters = 0;
    int bisection_iters = 0;
    double wall_ms = 0.0;
};

/// Seed-deterministic instance with ||f*|| = B exactly; retries with a perturbed seed (at most 5
/// attempts) when the anchor Gram is degenerate.
Environment make_instance(const InstanceSpec& spec);

/// Lowest index attaining the maximum.
Index argmax_lowest(const Vector& values);

} // namespace gkb

#endif
