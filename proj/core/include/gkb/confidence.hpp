#ifndef GKB_CONFIDENCE_HPP
#define GKB_CONFIDENCE_HPP

#include "gkb/ef_models.hpp"

namespace gkb {

/// Constants entering the confidence radii.
struct ConfidenceConfig {
    double delta = 0.1;
    /// Ridge parameter.
    double lambda = 1.0;
    /// RKHS norm bound on f*.
    double B = 1.0;
    /// Kernel bound, sup_x k(x, x) <= K^2.
    double K = 1.0;
    /// Almost-sure noise bound.
    double R = 1.0;
    double dispersion = 1.0;
    double self_concordance = 0.0;
    double mu_dot_sup = 1.0;

    /// Takes R, g(tau), R_s and R_mu_dot from the model.
    static ConfidenceConfig from_model(const EFModel& model, double delta, double lambda, double B, double K);

    /// Throws InputError unless all constants are positive and delta lies in (0, 1).
    void validate() const;
};

/// max{0, ceil(log(8 R^2 K^2 (t-1)^3 / lambda * log(1 + K^2 R^2 / lambda)))}; 0 for t <= 1.
int rho(int t, double R, double K, double lambda);
int rho(int t, const ConfidenceConfig& config);

/// log(pi^2 (rho + 1)^2 / (3 delta)), the union-bound level shared by the radius and the
/// self-normalized bound.
double confidence_log_term(int t, double R, double K, double lambda, double delta);

/// B_t(delta; f) for a weighted log-determinant log det(lambda^{-1} H_t(lambda; f)).
double radius_B(int t, const ConfidenceConfig& config, double logdet_weighted);

/// B_t(delta; H) with the weighted log-determinant replaced by
/// max{1, R_mu_dot / g(tau)} * log det(lambda^{-1} K_t(lambda)).
double radius_B_sup(int t, const ConfidenceConfig& config, double logdet_unweighted);

/// D_t(delta; H) = (1 + 2 R_s B K) B_t(delta; H): loss-gap budget of the relaxed confidence set.
double radius_D(int t, const ConfidenceConfig& config, double logdet_unweighted);

/*
 * Diagnostic only: beta_t(delta; f) evaluated with the data-driven gain
 * Gamma~_t(f) standing in for the maximal gain gamma~_t(f). Numerically it
 * coincides with radius_B; it is not a valid worst-case radius.
 */
double beta_diagnostic_approx(int t, const ConfidenceConfig& config, double weighted_information_gain);

/// Hoeffding-style radius R sqrt(2 log(1/delta) + log det(lambda^{-1} K_t(lambda))) used by the
/// kernel-UCB baseline.
double hoeffding_radius(const ConfidenceConfig& config, double logdet_unweighted);

} // namespace gkb

#endif
