#ifndef GKB_CONCENTRATION_HPP
#define GKB_CONCENTRATION_HPP

#include <numbers>
#include <span>

#include "gkb/kernels.hpp"
#include "gkb/types.hpp"

namespace gkb {

/// Geometric variance grid {eta^l v0 : l = 0, 1, ...} used by the stitched bound.
struct StitchingParams {
    double eta = std::numbers::e;
    double v0 = 1.0;

    void validate() const;
};

/// l = max{0, ceil(log_eta(v_t / v0))}.
int stitching_level(double v_t, const StitchingParams& params);

/*
 * Data-driven Freedman bound on sum_{s<=t} z_s for a martingale difference
 * sequence with z_s <= R and predictable variance proxy v_t:
 *
 *   sqrt(2 max{v0, eta v_t} L) + (R/3) L,   L = log(pi^2 (l+1)^2 / (6 delta)).
 *
 * Holds uniformly over t with probability at least 1 - delta.
 */
double stitched_freedman_bound(double v_t, double R, double delta, const StitchingParams& params = {});

/// Noise increments eps_s with their conditional variances sigma_s^2 and a.s. bound R.
struct MartingaleTrace {
    Vector increments;
    Vector variance_proxies;
    double R = 1.0;

    void validate() const;
};

/*
 * ||sum_i c_i phi(x_i)||^2 in the inverse of H = sum_i w_i^2 phi(x_i) phi(x_i)^T + lambda I,
 * evaluated in the dual through the Woodbury identity:
 *
 *   lambda^{-1} (c^T K c - c^T K W (lambda I + W K W)^{-1} W K c),  W = diag(w).
 *
 * Points with w_i = 0 contribute to the vector but not to H.
 */
double weighted_dual_norm_sq(const Matrix& gram, const Vector& coeffs, const Vector& weights, double lambda);

/// ||S_t||_{H^{-1}(lambda)} with S_t = sum_s eps_s phi(x_s) and H weighted by sigma_s^2.
double self_norm_statistic(const MartingaleTrace& trace, std::span<const Point> points, const Kernel& kernel,
                           double lambda);

/*
 * Bernstein-like dimension-free self-normalized bound
 *
 *   (sqrt(73 logdet) + sqrt(3)) sqrt(L) + 3 R K / sqrt(lambda) L,
 *   L = log(pi^2 (rho + 1)^2 / (3 delta)),
 *
 * where logdet = log det(lambda^{-1} H_t(lambda)) and rho is the stitching
 * level of the confidence radius at round t.
 */
double bernstein_bound(int t, double logdet_weighted, double R, double K, double lambda, double delta);

struct SanityCheck {
    bool norm_ok = true;
    bool logdet_ok = true;
    double norm_sq = 0.0;
    double norm_sq_limit = 0.0;
    double logdet = 0.0;
    double logdet_limit = 0.0;
};

/// ||S_t||^2 <= (t-1)^2 K^2 R^2 / lambda and log det(lambda^{-1} H_t) <= (t-1) log(1 + K^2 R^2 / lambda),
/// each with 1e-9 slack; t - 1 is the trace length.
SanityCheck sanity_bounds(const MartingaleTrace& trace, std::span<const Point> points, const Kernel& kernel,
                          double lambda, double K, double R);

} // namespace gkb

#endif
