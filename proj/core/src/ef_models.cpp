#include "gkb/ef_models.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace gkb {

EFModel EFModel::gaussian(double variance, double noise_bound)
{
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw InputError("gaussian model: variance must be positive");
    }
    if (!(noise_bound > 0.0)) {
        throw InputError("gaussian model: noise bound must be positive");
    }
    EFModel m;
    m.kind_ = ModelKind::gaussian;
    m.variance_ = variance;
    m.dispersion_ = variance;
    m.noise_bound_ = noise_bound;
    m.self_concordance_ = 0.0;
    m.mu_dot_sup_ = 1.0;
    return m;
}

EFModel EFModel::bernoulli()
{
    EFModel m;
    m.kind_ = ModelKind::bernoulli;
    m.variance_ = 1.0;
    m.dispersion_ = 1.0;
    m.noise_bound_ = 1.0;
    m.self_concordance_ = 1.0;
    m.mu_dot_sup_ = 0.25;
    return m;
}

std::string EFModel::name() const { return kind_ == ModelKind::gaussian ? "gaussian" : "bernoulli"; }

double EFModel::mu(double z) const
{
    if (kind_ == ModelKind::gaussian) {
        return z;
    }
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double EFModel::mu_dot(double z) const
{
    if (kind_ == ModelKind::gaussian) {
        return 1.0;
    }
    // sigma(z) sigma(-z), evaluated without cancellation in 1 - sigma(z)
    const double e = std::exp(-std::abs(z));
    return e / ((1.0 + e) * (1.0 + e));
}

double EFModel::mu_ddot(double z) const
{
    if (kind_ == ModelKind::gaussian) {
        return 0.0;
    }
    const double p = mu(z);
    const double q = mu(-z);
    return mu_dot(z) * (q - p);
}

double EFModel::log_partition(double z) const
{
    if (kind_ == ModelKind::gaussian) {
        return 0.5 * z * z;
    }
    if (z > 0.0) {
        return z + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z));
}

double EFModel::sample(double z, Rng& rng) const
{
    const double mean = mu(z);
    if (kind_ == ModelKind::bernoulli) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        return unif(rng) < mean ? 1.0 : 0.0;
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(variance_));
    for (;;) {
        const double eps = normal(rng);
        if (std::abs(eps) <= noise_bound_) {
            return mean + eps;
        }
    }
}

double gaussian_noise_bound(double sigma, int horizon, double delta)
{
    if (!(sigma > 0.0) || horizon < 1 || !(delta > 0.0 && delta < 1.0)) {
        throw InputError("gaussian_noise_bound: need sigma > 0, horizon >= 1, delta in (0,1)");
    }
    return sigma * std::sqrt(2.0 * std::log(2.0 * horizon / delta));
}

KappaConstants kappa_constants(const EFModel& model, std::span<const double> values)
{
    if (values.empty()) {
        throw InputError("kappa_constants: empty value list");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    KappaConstants out{0.0, 0.0, false};
    auto inverse_slope = [&](double z) {
        const double slope = model.mu_dot(z);
        if (slope <= 0.0) {
            out.degenerate = true;
            return inf;
        }
        return 1.0 / slope;
    };
    out.kappa_star = inverse_slope(values.front());
    for (double z : values) {
        out.kappa_x = std::max(out.kappa_x, inverse_slope(z));
    }
    if (out.degenerate) {
        std::cerr << "warning: mu' vanished on the decision set; kappa reported as +inf\n";
    }
    return out;
}

} // namespace gkb
