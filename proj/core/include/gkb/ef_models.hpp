#ifndef GKB_EF_MODELS_HPP
#define GKB_EF_MODELS_HPP

#include <span>
#include <string>

#include "gkb/types.hpp"

namespace gkb {

enum class ModelKind { gaussian, bernoulli };

/*
 * Canonical exponential-family reward model
 *
 *   p(y | z) = exp((y z - m(z)) / g(tau) + h(y, tau)),   z = f(x),
 *
 * with inverse link mu = m'. Constants follow the usual assumptions:
 * |y - mu(z)| <= R almost surely, |mu''| <= R_s mu', and mu' <= R_mu_dot.
 *
 * Gaussian rewards are truncated to [mu - R, mu + R] when sampled so that
 * the bounded-noise assumption holds literally.
 */
class EFModel {
public:
    /// Gaussian with identity link; noise_bound is R (see gaussian_noise_bound()).
    static EFModel gaussian(double variance, double noise_bound);
    static EFModel bernoulli();

    ModelKind kind() const { return kind_; }
    std::string name() const;

    double mu(double z) const;
    double mu_dot(double z) const;
    double mu_ddot(double z) const;
    /// Log-partition m(z).
    double log_partition(double z) const;

    /// Reward draw with mean mu(z) and variance g(tau) mu'(z).
    double sample(double z, Rng& rng) const;

    double variance() const { return variance_; }
    double dispersion() const { return dispersion_; }
    double noise_bound() const { return noise_bound_; }
    double self_concordance() const { return self_concordance_; }
    double mu_dot_sup() const { return mu_dot_sup_; }

private:
    EFModel() = default;

    ModelKind kind_ = ModelKind::bernoulli;
    double variance_ = 1.0;
    double dispersion_ = 1.0;
    double noise_bound_ = 1.0;
    double self_concordance_ = 1.0;
    double mu_dot_sup_ = 0.25;
};

/// R = sigma * sqrt(2 log(2T / delta)) for sigma^2-subgaussian noise over a horizon T.
double gaussian_noise_bound(double sigma, int horizon, double delta);

struct KappaConstants {
    double kappa_star;
    double kappa_x;
    /// True when some mu' underflowed to zero and a constant is +infinity.
    bool degenerate = false;
};

/// (1 / mu'(values[0]), max_i 1 / mu'(values[i])) where values[0] is f*(x*).
KappaConstants kappa_constants(const EFModel& model, std::span<const double> values);

} // namespace gkb

#endif
