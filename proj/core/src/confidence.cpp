#include "gkb/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gkb/concentration.hpp"

namespace gkb {

ConfidenceConfig ConfidenceConfig::from_model(const EFModel& model, double delta, double lambda, double B, double K)
{
    ConfidenceConfig c;
    c.delta = delta;
    c.lambda = lambda;
    c.B = B;
    c.K = K;
    c.R = model.noise_bound();
    c.dispersion = model.dispersion();
    c.self_concordance = model.self_concordance();
    c.mu_dot_sup = model.mu_dot_sup();
    c.validate();
    return c;
}

void ConfidenceConfig::validate() const
{
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InputError("confidence: delta must lie in (0, 1)");
    }
    if (!(lambda > 0.0) || !(B > 0.0) || !(K > 0.0) || !(R > 0.0) || !(dispersion > 0.0) || !(mu_dot_sup > 0.0)) {
        throw InputError("confidence: lambda, B, K, R, g(tau), R_mu_dot must be positive");
    }
    if (!(self_concordance >= 0.0)) {
        throw InputError("confidence: self-concordance constant must be non-negative");
    }
}

int rho(int t, double R, double K, double lambda)
{
    if (t <= 1) {
        return 0;
    }
    const double rk2 = R * R * K * K;
    const double steps = static_cast<double>(t - 1);
    const double inner = 8.0 * rk2 * steps * steps * steps / lambda * std::log1p(rk2 / lambda);
    if (!(inner > 0.0)) {
        return 0;
    }
    return std::max(0, static_cast<int>(std::ceil(std::log(inner))));
}

int rho(int t, const ConfidenceConfig& config) { return rho(t, config.R, config.K, config.lambda); }

double confidence_log_term(int t, double R, double K, double lambda, double delta)
{
    const double level = static_cast<double>(rho(t, R, K, lambda)) + 1.0;
    return std::log(std::numbers::pi * std::numbers::pi * level * level / (3.0 * delta));
}

double radius_B(int t, const ConfidenceConfig& config, double logdet_weighted)
{
    const double concentration =
        bernstein_bound(t, logdet_weighted, config.R, config.K, config.lambda, config.delta);
    return std::sqrt(config.lambda) * config.B + concentration / config.dispersion;
}

double radius_B_sup(int t, const ConfidenceConfig& config, double logdet_unweighted)
{
    const double factor = std::max(1.0, config.mu_dot_sup / config.dispersion);
    return radius_B(t, config, factor * logdet_unweighted);
}

double radius_D(int t, const ConfidenceConfig& config, double logdet_unweighted)
{
    return (1.0 + 2.0 * config.self_concordance * config.B * config.K) * radius_B_sup(t, config, logdet_unweighted);
}

double beta_diagnostic_approx(int t, const ConfidenceConfig& config, double weighted_information_gain)
{
    // sqrt(146 Gamma) == sqrt(73 * 2 Gamma)
    return radius_B(t, config, 2.0 * weighted_information_gain);
}

double hoeffding_radius(const ConfidenceConfig& config, double logdet_unweighted)
{
    return config.R * std::sqrt(2.0 * std::log(1.0 / config.delta) + std::max(0.0, logdet_unweighted));
}

} // namespace gkb
