#include "gkb/concentration.hpp"

#include <algorithm>
#include <cmath>

#include "gkb/confidence.hpp"

namespace gkb {

void StitchingParams::validate() const
{
    if (!(eta > 1.0) || !(v0 > 0.0)) {
        throw InputError("stitching: need eta > 1 and v0 > 0");
    }
}

int stitching_level(double v_t, const StitchingParams& params)
{
    params.validate();
    if (!(v_t > 0.0)) {
        return 0;
    }
    const double level = std::ceil(std::log(v_t / params.v0) / std::log(params.eta));
    return level > 0.0 ? static_cast<int>(level) : 0;
}

double stitched_freedman_bound(double v_t, double R, double delta, const StitchingParams& params)
{
    if (!(v_t >= 0.0)) {
        throw InputError("freedman: v_t must be non-negative");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InputError("freedman: delta must lie in (0, 1)");
    }
    const double level = static_cast<double>(stitching_level(v_t, params)) + 1.0;
    const double log_term = std::log(std::numbers::pi * std::numbers::pi * level * level / (6.0 * delta));
    const double variance = std::max(params.v0, params.eta * v_t);
    return std::sqrt(2.0 * variance * log_term) + R / 3.0 * log_term;
}

void MartingaleTrace::validate() const
{
    if (increments.size() != variance_proxies.size()) {
        throw InputError("martingale trace: increments and variances differ in length");
    }
    if ((variance_proxies.array() < 0.0).any()) {
        throw InputError("martingale trace: negative variance proxy");
    }
    if ((increments.array().abs() > R * (1.0 + 1e-12)).any()) {
        throw InputError("martingale trace: increment exceeds the a.s. bound R");
    }
}

double weighted_dual_norm_sq(const Matrix& gram, const Vector& coeffs, const Vector& weights, double lambda)
{
    const Index n = gram.rows();
    if (gram.cols() != n || coeffs.size() != n || weights.size() != n) {
        throw InputError("dual norm: inconsistent sizes");
    }
    if (!(lambda > 0.0)) {
        throw InputError("dual norm: lambda must be positive");
    }
    if (n == 0) {
        return 0.0;
    }
    const Vector kc = gram * coeffs;
    const double plain = coeffs.dot(kc);
    const Vector u = weights.asDiagonal() * kc;
    const auto llt = regularized_cholesky(scale_symmetric(gram, weights), lambda);
    const Vector z = llt.solve(u);
    if (!z.allFinite()) {
        throw NumericalError("dual norm: solve failed");
    }
    return std::max(0.0, (plain - u.dot(z)) / lambda);
}

double self_norm_statistic(const MartingaleTrace& trace, std::span<const Point> points, const Kernel& kernel,
                           double lambda)
{
    trace.validate();
    if (static_cast<Index>(points.size()) != trace.increments.size()) {
        throw InputError("self-normalized statistic: points and increments differ in length");
    }
    const Matrix k = gram(kernel, points, lambda).entries();
    const Vector w = trace.variance_proxies.array().sqrt();
    return std::sqrt(weighted_dual_norm_sq(k, trace.increments, w, lambda));
}

double bernstein_bound(int t, double logdet_weighted, double R, double K, double lambda, double delta)
{
    if (!(delta > 0.0 && delta < 1.0) || !(lambda > 0.0)) {
        throw InputError("bernstein bound: need delta in (0,1) and lambda > 0");
    }
    const double log_term = confidence_log_term(t, R, K, lambda, delta);
    const double logdet = std::max(0.0, logdet_weighted);
    return (std::sqrt(73.0 * logdet) + std::sqrt(3.0)) * std::sqrt(log_term)
           + 3.0 * R * K / std::sqrt(lambda) * log_term;
}

SanityCheck sanity_bounds(const MartingaleTrace& trace, std::span<const Point> points, const Kernel& kernel,
                          double lambda, double K, double R)
{
    trace.validate();
    SanityCheck out;
    const double steps = static_cast<double>(trace.increments.size());
    const double rk2 = R * R * K * K;
    out.norm_sq_limit = steps * steps * rk2 / lambda;
    out.logdet_limit = steps * std::log1p(rk2 / lambda);
    if (trace.increments.size() == 0) {
        return out;
    }
    const Matrix k = gram(kernel, points, lambda).entries();
    const Vector w = trace.variance_proxies.array().sqrt();
    out.norm_sq = weighted_dual_norm_sq(k, trace.increments, w, lambda);
    out.logdet = log_det_ratio(scale_symmetric(k, w), lambda);
    out.norm_ok = out.norm_sq <= out.norm_sq_limit + 1e-9;
    out.logdet_ok = out.logdet <= out.logdet_limit + 1e-9;
    return out;
}

} // namespace gkb
