#include "gkb/environment.hpp"

#include <cmath>

namespace gkb {

Index argmax_lowest(const Vector& values)
{
    if (values.size() == 0) {
        throw InputError("argmax over an empty vector");
    }
    Index best = 0;
    for (Index i = 1; i < values.size(); ++i) {
        if (values(i) > values(best)) {
            best = i;
        }
    }
    return best;
}

Environment::Environment(std::vector<Point> decision_set, DualFunction f_star, EFModel model)
    : decision_set_(std::move(decision_set)), f_star_(std::move(f_star)), model_(std::move(model))
{
    if (decision_set_.size() < 2) {
        throw InputError("environment: need at least two arms");
    }
    f_values_.resize(num_arms());
    for (Index a = 0; a < num_arms(); ++a) {
        f_values_(a) = f_star_(decision_set_[static_cast<std::size_t>(a)]);
    }
    x_star_index_ = argmax_lowest(f_values_);

    std::vector<double> ordered;
    ordered.reserve(decision_set_.size());
    ordered.push_back(f_values_(x_star_index_));
    for (Index a = 0; a < num_arms(); ++a) {
        ordered.push_back(f_values_(a));
    }
    kappa_ = kappa_constants(model_, ordered);
}

void Environment::check_arm(Index arm) const
{
    if (arm < 0 || arm >= num_arms()) {
        throw InputError("environment: arm index out of range");
    }
}

double Environment::step(Index arm, Rng& rng) const
{
    check_arm(arm);
    return model_.sample(f_values_(arm), rng);
}

double Environment::instant_regret(Index arm) const
{
    check_arm(arm);
    return std::max(0.0, model_.mu(f_values_(x_star_index_)) - model_.mu(f_values_(arm)));
}

namespace {

std::vector<Point> sample_box(const DomainBox& box, int count, Rng& rng)
{
    std::uniform_real_distribution<double> unif(box.low, box.high);
    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Point p(box.dimension);
        for (int d = 0; d < box.dimension; ++d) {
            p(d) = unif(rng);
        }
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace

Environment make_instance(const InstanceSpec& spec)
{
    if (spec.num_arms < 2) {
        throw InputError("make_instance: num_arms must be at least 2");
    }
    if (spec.num_anchors < 1) {
        throw InputError("make_instance: num_anchors must be positive");
    }
    if (!(spec.B > 0.0)) {
        throw InputError("make_instance: B must be positive");
    }
    if (spec.domain.dimension < 1 || !(spec.domain.high > spec.domain.low)) {
        throw InputError("make_instance: invalid domain box");
    }

    constexpr int max_attempts = 5;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(spec.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt));
        std::vector<Point> arms = sample_box(spec.domain, spec.num_arms, rng);
        std::vector<Point> anchors = sample_box(spec.domain, spec.num_anchors, rng);

        std::normal_distribution<double> normal(0.0, 1.0);
        Vector c(spec.num_anchors);
        for (int i = 0; i < spec.num_anchors; ++i) {
            c(i) = normal(rng);
        }
        const Matrix k_anchor = cross_gram(spec.kernel, anchors, anchors);
        const double norm_sq = c.dot(k_anchor * c);
        if (!(norm_sq > 1e-12)) {
            continue;
        }
        c *= spec.B / std::sqrt(norm_sq);

        // Stationary kernels have K = 1; others take K from the arms actually drawn.
        Kernel kernel = spec.kernel;
        if (kernel.kind() == KernelKind::linear || kernel.kind() == KernelKind::explicit_features) {
            kernel = kernel.with_bound_from_points(arms);
        }
        return Environment(std::move(arms), DualFunction(kernel, std::move(anchors), std::move(c)), spec.model);
    }
    throw NumericalError("make_instance: degenerate anchor Gram after 5 attempts");
}

} // namespace gkb
