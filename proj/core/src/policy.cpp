#include "gkb/policy.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "gkb/concentration.hpp"

namespace gkb {

std::string to_string(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::eff_gkb_ucb:
        return "eff_gkb_ucb";
    case PolicyKind::kb_ucb_hoeffding:
        return "kb_ucb_hoeffding";
    case PolicyKind::greedy:
        return "greedy";
    case PolicyKind::uniform_random:
        return "uniform_random";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name)
{
    for (auto kind : {PolicyKind::eff_gkb_ucb, PolicyKind::kb_ucb_hoeffding, PolicyKind::greedy,
                      PolicyKind::uniform_random}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw InputError("unknown policy '" + name + "'");
}

PolicyState::PolicyState(PolicyConfig config, Kernel kernel, EFModel model, std::vector<Point> decision_set)
    : config_(std::move(config)),
      kernel_(std::move(kernel)),
      model_(std::move(model)),
      decision_set_(std::move(decision_set)),
      history_(kernel_, config_.confidence.lambda),
      support_of_arm_(decision_set_.size(), -1),
      mle_coeffs_(0),
      last_scores_(Vector::Zero(static_cast<Index>(decision_set_.size())))
{
    config_.confidence.validate();
    if (decision_set_.empty()) {
        throw InputError("policy: empty decision set");
    }
    design_.gram.resize(0, 0);
    design_.counts.resize(0);
    design_.reward_sums.resize(0);
}

void PolicyState::observe(Index arm, double reward)
{
    if (arm < 0 || arm >= num_arms()) {
        throw InputError("policy: arm index out of range");
    }
    const auto slot = static_cast<std::size_t>(arm);
    history_.append(decision_set_[slot], reward);
    if (support_of_arm_[slot] < 0) {
        support_of_arm_[slot] = design_.add_support(kernel_, decision_set_[slot]);
        mle_coeffs_.conservativeResize(design_.size());
        mle_coeffs_(design_.size() - 1) = 0.0;
    }
    const Index a = support_of_arm_[slot];
    design_.counts(a) += 1.0;
    design_.reward_sums(a) += reward;

    NewtonResult fit = fit_mle(design_, model_, config_.confidence.lambda, &mle_coeffs_, config_.newton);
    mle_coeffs_ = std::move(fit.alpha);
    last_fit_iterations_ = fit.iterations;
}

DualFunction PolicyState::mle() const { return DualFunction(kernel_, design_.support, mle_coeffs_); }

double PolicyState::mle_value(const Point& x) const
{
    double value = 0.0;
    for (Index a = 0; a < design_.size(); ++a) {
        value += mle_coeffs_(a) * kernel_(x, design_.support[static_cast<std::size_t>(a)]);
    }
    return value;
}

double PolicyState::logdet_unweighted() const
{
    if (design_.size() == 0) {
        return 0.0;
    }
    const Vector w = design_.counts.array().sqrt();
    return log_det_ratio(scale_symmetric(design_.gram, w), config_.confidence.lambda);
}

double PolicyState::logdet_weighted(const DualFunction& f) const
{
    if (design_.size() == 0) {
        return 0.0;
    }
    Vector w(design_.size());
    for (Index a = 0; a < design_.size(); ++a) {
        const double z = f(design_.support[static_cast<std::size_t>(a)]);
        w(a) = std::sqrt(design_.counts(a) * model_.mu_dot(z) / model_.dispersion());
    }
    return log_det_ratio(scale_symmetric(design_.gram, w), config_.confidence.lambda);
}

double PolicyState::radius_D() const { return gkb::radius_D(round(), config_.confidence, logdet_unweighted()); }

double PolicyState::radius_B() const { return radius_B_sup(round(), config_.confidence, logdet_unweighted()); }

namespace {

double support_value(const Design& design, const Vector& alpha, Index index)
{
    return design.gram.row(index).dot(alpha);
}

Index find_support(const Design& design, const Point& x)
{
    for (Index a = 0; a < design.size(); ++a) {
        const Point& p = design.support[static_cast<std::size_t>(a)];
        if (p.size() == x.size() && p == x) {
            return a;
        }
    }
    return -1;
}

} // namespace

UcbSolution ucb_value(const PolicyState& state, const Point& x_hat, double budget)
{
    if (state.history().empty()) {
        throw InputError("ucb_value: empty history");
    }
    if (!(budget >= 0.0)) {
        throw InputError("ucb_value: budget must be non-negative");
    }
    const double lambda = state.config().confidence.lambda;
    const auto& options = state.config().solver;
    const EFModel& model = state.model();

    Design design = state.design();
    Vector alpha_hat = state.mle_coeffs();
    Index target = find_support(design, x_hat);
    if (target < 0) {
        target = design.add_support(state.kernel(), x_hat);
        alpha_hat.conservativeResize(design.size());
        alpha_hat(target) = 0.0;
    }

    UcbSolution out;
    out.alpha = alpha_hat;
    out.value = support_value(design, alpha_hat, target);
    if (budget == 0.0) {
        return out;
    }

    const double base_loss = loss(design, model, lambda, alpha_hat);
    Vector tilt = Vector::Zero(design.size());
    tilt(target) = 1.0;
    const double tolerance = options.gap_tolerance * budget;

    struct Probe {
        Vector alpha;
        double gap;
    };
    auto solve = [&](double eta, const Vector& warm) {
        NewtonResult r = minimize_tilted_loss(design, model, lambda, tilt, eta, &warm, state.config().newton);
        out.newton_iterations += r.iterations;
        const double gap = loss(design, model, lambda, r.alpha) - base_loss;
        return Probe{std::move(r.alpha), gap};
    };
    auto finish = [&](Probe&& p) {
        out.value = support_value(design, p.alpha, target);
        out.loss_gap = p.gap;
        out.alpha = std::move(p.alpha);
        return out;
    };

    // Bracket: g(lo) < budget <= g(hi).
    double lo = 0.0;
    Probe lo_probe{alpha_hat, 0.0};
    double hi = 1.0;
    Probe hi_probe = solve(hi, alpha_hat);
    while (hi_probe.gap < budget) {
        if (std::abs(hi_probe.gap - budget) <= tolerance) {
            return finish(std::move(hi_probe));
        }
        lo = hi;
        lo_probe = std::move(hi_probe);
        hi *= 2.0;
        if (hi > options.eta_max) {
            std::cerr << "warning: optimistic program budget unreached at eta_max; reporting the last iterate\n";
            out.budget_unreached = true;
            return finish(std::move(lo_probe));
        }
        hi_probe = solve(hi, lo_probe.alpha);
    }
    if (std::abs(hi_probe.gap - budget) <= tolerance) {
        return finish(std::move(hi_probe));
    }

    for (int step = 0; step < options.max_bisection_steps; ++step) {
        ++out.bisection_iterations;
        const double mid = 0.5 * (lo + hi);
        Probe probe = solve(mid, lo_probe.alpha);
        if (std::abs(probe.gap - budget) <= tolerance) {
            return finish(std::move(probe));
        }
        if (probe.gap < budget) {
            lo = mid;
            lo_probe = std::move(probe);
        } else {
            hi = mid;
            hi_probe = std::move(probe);
        }
    }
    // The lower end is always feasible.
    return finish(std::move(lo_probe));
}

double ucb_value(const PolicyState& state, Index arm)
{
    if (arm < 0 || arm >= state.num_arms()) {
        throw InputError("ucb_value: arm index out of range");
    }
    return ucb_value(state, state.decision_set()[static_cast<std::size_t>(arm)], state.radius_D()).value;
}

double exploration_width(const PolicyState& state, const Point& x)
{
    const double lambda = state.config().confidence.lambda;
    const Design& design = state.design();
    const double self = state.kernel()(x, x);
    if (design.size() == 0) {
        return std::sqrt(std::max(0.0, self) / lambda);
    }
    // phi(x) against V = sum_a n_a phi_a phi_a^T + lambda I
    const Vector w = design.counts.array().sqrt();
    const Vector kx = kernel_column(state.kernel(), design.support, x);
    const auto llt = regularized_cholesky(scale_symmetric(design.gram, w), lambda);
    const Vector u = w.asDiagonal() * kx;
    const double explained = u.dot(llt.solve(u));
    return std::sqrt(std::max(0.0, self - explained) / lambda);
}

Index baseline_kb_ucb(PolicyState& state)
{
    const auto& conf = state.config().confidence;
    const double radius = hoeffding_radius(conf, state.logdet_unweighted()) + std::sqrt(conf.lambda) * conf.B;
    Vector scores(state.num_arms());
    for (Index a = 0; a < state.num_arms(); ++a) {
        const Point& x = state.decision_set()[static_cast<std::size_t>(a)];
        scores(a) = state.mle_value(x) + radius * exploration_width(state, x);
    }
    state.last_scores_ = scores;
    state.last_newton_ = 0;
    state.last_bisection_ = 0;
    return argmax_lowest(scores);
}

Index select_action(PolicyState& state, Rng& rng)
{
    const PolicyKind kind = state.config().kind;
    if (kind == PolicyKind::kb_ucb_hoeffding) {
        return baseline_kb_ucb(state);
    }
    state.last_newton_ = 0;
    state.last_bisection_ = 0;
    if (kind == PolicyKind::uniform_random || state.history().empty()) {
        std::uniform_int_distribution<Index> pick(0, state.num_arms() - 1);
        state.last_scores_.setZero();
        return pick(rng);
    }
    Vector scores(state.num_arms());
    if (kind == PolicyKind::greedy) {
        for (Index a = 0; a < state.num_arms(); ++a) {
            scores(a) = state.mle_value(state.decision_set()[static_cast<std::size_t>(a)]);
        }
    } else {
        const double budget = state.radius_D();
        for (Index a = 0; a < state.num_arms(); ++a) {
            UcbSolution s = ucb_value(state, state.decision_set()[static_cast<std::size_t>(a)], budget);
            scores(a) = s.value;
            state.last_newton_ += s.newton_iterations;
            state.last_bisection_ += s.bisection_iterations;
        }
    }
    state.last_scores_ = scores;
    return argmax_lowest(scores);
}

RunRecord run_round(PolicyState& state, const Environment& environment, Rng& rng)
{
    const auto start = std::chrono::steady_clock::now();
    RunRecord record;
    record.t = state.round();
    record.D_t = state.radius_D();
    record.B_t = state.radius_B();
    record.arm = select_action(state, rng);
    record.reward = environment.step(record.arm, rng);
    record.inst_regret = environment.instant_regret(record.arm);
    state.cumulative_regret_ += record.inst_regret;
    record.cum_regret = state.cumulative_regret_;
    state.observe(record.arm, record.reward);
    record.newton_iters = state.last_newton_ + state.last_fit_iterations();
    record.bisection_iters = state.last_bisection_;
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return record;
}

} // namespace gkb
