#ifndef GKB_KERNELS_HPP
#define GKB_KERNELS_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gkb/types.hpp"

namespace gkb {

enum class KernelKind { linear, rbf, matern, explicit_features };

/// Half-integer Matern smoothness; only the closed forms are supported.
enum class MaternSmoothness { half, three_halves, five_halves };

using FeatureMap = std::function<Vector(const Point&)>;

/*
 * Positive semi-definite kernel k(x, x') together with the bound K of
 * sup_x k(x, x) <= K^2 on the declared decision domain.
 *
 * Stationary kernels (rbf, matern) have k(x, x) = 1 and default to K = 1.
 * Linear and explicit-feature kernels need K from the caller; use
 * with_bound_from_points() for a finite decision set.
 */
class Kernel {
public:
    static Kernel linear(double bound_K = 1.0);
    static Kernel rbf(double lengthscale);
    static Kernel matern(MaternSmoothness smoothness, double lengthscale);
    static Kernel explicit_features(int dimension, FeatureMap features, double bound_K = 1.0);

    double operator()(const Point& x, const Point& x_prime) const;

    /// Feature vector phi(x); explicit_features kernels only.
    Vector features(const Point& x) const;

    KernelKind kind() const { return kind_; }
    double bound() const { return bound_K_; }
    double lengthscale() const { return lengthscale_; }
    MaternSmoothness smoothness() const { return smoothness_; }
    int feature_dimension() const { return feature_dimension_; }

    Kernel with_bound(double bound_K) const;
    /// Copy with K = sqrt(max_x k(x, x)) over the given points (never below the current bound
    /// for stationary kernels).
    Kernel with_bound_from_points(std::span<const Point> points) const;

    std::string name() const;

private:
    Kernel() = default;

    KernelKind kind_ = KernelKind::rbf;
    double lengthscale_ = 1.0;
    MaternSmoothness smoothness_ = MaternSmoothness::half;
    int feature_dimension_ = 0;
    FeatureMap features_;
    double bound_K_ = 1.0;
};

std::string to_string(MaternSmoothness smoothness);

inline double eval(const Kernel& kernel, const Point& x, const Point& x_prime) { return kernel(x, x_prime); }

/// Cross-kernel matrix (k(a_i, b_j)).
Matrix cross_gram(const Kernel& kernel, std::span<const Point> a, std::span<const Point> b);

/// Vector (k(x, p_i)) over the points.
Vector kernel_column(const Kernel& kernel, std::span<const Point> points, const Point& x);

/*
 * Cholesky factor of lambda*I + M with the fixed jitter policy: on failure the
 * factorization is retried once with 1e-10 * trace(lambda*I + M) added to the
 * diagonal, and a second failure throws NumericalError.
 */
Eigen::LLT<Matrix> regularized_cholesky(const Matrix& m, double lambda);

/// Gram matrix over a fixed point order, with a lazily cached factor of lambda*I + entries.
class GramMatrix {
public:
    GramMatrix() = default;
    GramMatrix(Matrix entries, double lambda);

    const Matrix& entries() const { return entries_; }
    double lambda() const { return lambda_; }
    Index size() const { return entries_.rows(); }

    /// Appends one point given its kernel values against the existing points and itself.
    void extend(const Vector& cross, double self);

    const Eigen::LLT<Matrix>& cholesky() const;

private:
    Matrix entries_;
    double lambda_ = 1.0;
    mutable std::optional<Eigen::LLT<Matrix>> factor_;
};

/// diag(w) K diag(w) for the weighted kernel.
class WeightedGramMatrix {
public:
    WeightedGramMatrix(const GramMatrix& base, Vector weights);

    const Matrix& entries() const { return entries_; }
    const Vector& weights() const { return weights_; }
    double lambda() const { return lambda_; }
    Index size() const { return entries_.rows(); }

private:
    Matrix entries_;
    Vector weights_;
    double lambda_;
};

GramMatrix gram(const Kernel& kernel, std::span<const Point> points, double lambda = 1.0);

WeightedGramMatrix weighted_gram(const GramMatrix& base, const Vector& weights);

/// diag(w) M diag(w) on a raw matrix; weights must be non-negative.
Matrix scale_symmetric(const Matrix& m, const Vector& weights);

/// log det(lambda^{-1} (lambda*I + M)), natural log, via Cholesky.
double log_det_ratio(const Matrix& m, double lambda);
double log_det_ratio(const GramMatrix& m, double lambda);
double log_det_ratio(const WeightedGramMatrix& m, double lambda);

/// Half of log_det_ratio.
double information_gain(const Matrix& m, double lambda);
double information_gain(const GramMatrix& m, double lambda);
double information_gain(const WeightedGramMatrix& m, double lambda);

/// Upper bound max{1, R_mu_dot / g(tau)} * Gamma on any weighted information gain whose
/// squared weights never exceed R_mu_dot / g(tau).
double weighted_information_gain_bound(double unweighted_gain, double mu_dot_sup, double dispersion);

/*
 * |log det(lambda^{-1}(lambda*I_d + Phi^T Phi)) - log det(lambda^{-1}(lambda*I_t + Phi Phi^T))|
 * with the primal side built from the feature map and the dual side from kernel evaluations.
 */
double verify_determinant_identity(const Kernel& kernel, std::span<const Point> points, double lambda);

} // namespace gkb

#endif
