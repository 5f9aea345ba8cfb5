#include "gkb/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gkb {

namespace {

void check_dims(const Point& x, const Point& x_prime)
{
    if (x.size() != x_prime.size()) {
        throw InputError("kernel: dimension mismatch (" + std::to_string(x.size()) + " vs "
                         + std::to_string(x_prime.size()) + ")");
    }
}

void check_positive(double value, const char* what)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InputError(std::string("kernel: ") + what + " must be positive and finite");
    }
}

} // namespace

Kernel Kernel::linear(double bound_K)
{
    check_positive(bound_K, "bound_K");
    Kernel k;
    k.kind_ = KernelKind::linear;
    k.bound_K_ = bound_K;
    return k;
}

Kernel Kernel::rbf(double lengthscale)
{
    check_positive(lengthscale, "lengthscale");
    Kernel k;
    k.kind_ = KernelKind::rbf;
    k.lengthscale_ = lengthscale;
    return k;
}

Kernel Kernel::matern(MaternSmoothness smoothness, double lengthscale)
{
    check_positive(lengthscale, "lengthscale");
    Kernel k;
    k.kind_ = KernelKind::matern;
    k.smoothness_ = smoothness;
    k.lengthscale_ = lengthscale;
    return k;
}

Kernel Kernel::explicit_features(int dimension, FeatureMap features, double bound_K)
{
    if (dimension <= 0) {
        throw InputError("kernel: feature dimension must be positive");
    }
    if (!features) {
        throw InputError("kernel: missing feature map");
    }
    check_positive(bound_K, "bound_K");
    Kernel k;
    k.kind_ = KernelKind::explicit_features;
    k.feature_dimension_ = dimension;
    k.features_ = std::move(features);
    k.bound_K_ = bound_K;
    return k;
}

double Kernel::operator()(const Point& x, const Point& x_prime) const
{
    switch (kind_) {
    case KernelKind::linear:
        check_dims(x, x_prime);
        return x.dot(x_prime);
    case KernelKind::rbf: {
        check_dims(x, x_prime);
        const double r2 = (x - x_prime).squaredNorm();
        return std::exp(-0.5 * r2 / (lengthscale_ * lengthscale_));
    }
    case KernelKind::matern: {
        check_dims(x, x_prime);
        const double r = (x - x_prime).norm() / lengthscale_;
        switch (smoothness_) {
        case MaternSmoothness::half:
            return std::exp(-r);
        case MaternSmoothness::three_halves: {
            const double s = std::sqrt(3.0) * r;
            return (1.0 + s) * std::exp(-s);
        }
        case MaternSmoothness::five_halves: {
            const double s = std::sqrt(5.0) * r;
            return (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
        }
        break;
    }
    case KernelKind::explicit_features:
        check_dims(x, x_prime);
        return features(x).dot(features(x_prime));
    }
    throw UnsupportedError("kernel: unknown kind");
}

Vector Kernel::features(const Point& x) const
{
    if (kind_ != KernelKind::explicit_features) {
        throw UnsupportedError("kernel: features() requires an explicit_features kernel");
    }
    Vector phi = features_(x);
    if (phi.size() != feature_dimension_) {
        throw InputError("kernel: feature map returned wrong dimension");
    }
    return phi;
}

Kernel Kernel::with_bound(double bound_K) const
{
    check_positive(bound_K, "bound_K");
    Kernel k = *this;
    k.bound_K_ = bound_K;
    return k;
}

Kernel Kernel::with_bound_from_points(std::span<const Point> points) const
{
    double max_diag = 0.0;
    for (const auto& p : points) {
        max_diag = std::max(max_diag, (*this)(p, p));
    }
    double bound = std::sqrt(max_diag);
    if (kind_ == KernelKind::rbf || kind_ == KernelKind::matern) {
        bound = std::max(bound, bound_K_);
    }
    if (!(bound > 0.0)) {
        bound = bound_K_;
    }
    return with_bound(bound);
}

std::string to_string(MaternSmoothness smoothness)
{
    switch (smoothness) {
    case MaternSmoothness::half:
        return "0.5";
    case MaternSmoothness::three_halves:
        return "1.5";
    case MaternSmoothness::five_halves:
        return "2.5";
    }
    return "?";
}

std::string Kernel::name() const
{
    switch (kind_) {
    case KernelKind::linear:
        return "linear";
    case KernelKind::rbf:
        return "rbf";
    case KernelKind::matern:
        return "matern";
    case KernelKind::explicit_features:
        return "explicit_features";
    }
    return "unknown";
}

Matrix cross_gram(const Kernel& kernel, std::span<const Point> a, std::span<const Point> b)
{
    Matrix out(static_cast<Index>(a.size()), static_cast<Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out(static_cast<Index>(i), static_cast<Index>(j)) = kernel(a[i], b[j]);
        }
    }
    return out;
}

Vector kernel_column(const Kernel& kernel, std::span<const Point> points, const Point& x)
{
    Vector out(static_cast<Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        out(static_cast<Index>(i)) = kernel(points[i], x);
    }
    return out;
}

Eigen::LLT<Matrix> regularized_cholesky(const Matrix& m, double lambda)
{
    if (m.rows() != m.cols()) {
        throw InputError("cholesky: matrix must be square");
    }
    Matrix a = m;
    a.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) {
        return llt;
    }
    const double jitter = 1e-10 * std::abs(a.trace());
    a.diagonal().array() += jitter;
    llt.compute(a);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("cholesky: factorization failed after jitter");
    }
    return llt;
}

GramMatrix::GramMatrix(Matrix entries, double lambda) : entries_(std::move(entries)), lambda_(lambda)
{
    if (entries_.rows() != entries_.cols()) {
        throw InputError("gram: entries must be square");
    }
    if (!(lambda > 0.0)) {
        throw InputError("gram: lambda must be positive");
    }
}

void GramMatrix::extend(const Vector& cross, double self)
{
    const Index n = size();
    if (cross.size() != n) {
        throw InputError("gram: cross vector has wrong length");
    }
    Matrix grown(n + 1, n + 1);
    grown.topLeftCorner(n, n) = entries_;
    grown.block(0, n, n, 1) = cross;
    grown.block(n, 0, 1, n) = cross.transpose();
    grown(n, n) = self;
    entries_ = std::move(grown);
    factor_.reset();
}

const Eigen::LLT<Matrix>& GramMatrix::cholesky() const
{
    if (!factor_) {
        factor_ = regularized_cholesky(entries_, lambda_);
    }
    return *factor_;
}

Matrix scale_symmetric(const Matrix& m, const Vector& weights)
{
    if (weights.size() != m.rows() || m.rows() != m.cols()) {
        throw InputError("weighted gram: weights length must equal matrix order");
    }
    if ((weights.array() < 0.0).any()) {
        throw InputError("weighted gram: weights must be non-negative");
    }
    return weights.asDiagonal() * m * weights.asDiagonal();
}

WeightedGramMatrix::WeightedGramMatrix(const GramMatrix& base, Vector weights)
    : entries_(scale_symmetric(base.entries(), weights)), weights_(std::move(weights)), lambda_(base.lambda())
{
}

GramMatrix gram(const Kernel& kernel, std::span<const Point> points, double lambda)
{
    Matrix k = cross_gram(kernel, points, points);
    // exact symmetry regardless of floating-point evaluation order
    k = 0.5 * (k + k.transpose()).eval();
    return GramMatrix(std::move(k), lambda);
}

WeightedGramMatrix weighted_gram(const GramMatrix& base, const Vector& weights)
{
    return WeightedGramMatrix(base, weights);
}

double log_det_ratio(const Matrix& m, double lambda)
{
    if (!(lambda > 0.0)) {
        throw InputError("log_det_ratio: lambda must be positive");
    }
    if (m.rows() == 0) {
        return 0.0;
    }
    const auto llt = regularized_cholesky(m, lambda);
    const Matrix& l = llt.matrixLLT();
    double sum = 0.0;
    for (Index i = 0; i < l.rows(); ++i) {
        sum += 2.0 * std::log(l(i, i));
    }
    sum -= static_cast<double>(m.rows()) * std::log(lambda);
    return std::max(sum, 0.0);
}

double log_det_ratio(const GramMatrix& m, double lambda) { return log_det_ratio(m.entries(), lambda); }

double log_det_ratio(const WeightedGramMatrix& m, double lambda) { return log_det_ratio(m.entries(), lambda); }

double information_gain(const Matrix& m, double lambda) { return 0.5 * log_det_ratio(m, lambda); }

double information_gain(const GramMatrix& m, double lambda) { return 0.5 * log_det_ratio(m, lambda); }

double information_gain(const WeightedGramMatrix& m, double lambda) { return 0.5 * log_det_ratio(m, lambda); }

double weighted_information_gain_bound(double unweighted_gain, double mu_dot_sup, double dispersion)
{
    return std::max(1.0, mu_dot_sup / dispersion) * unweighted_gain;
}

double verify_determinant_identity(const Kernel& kernel, std::span<const Point> points, double lambda)
{
    if (kernel.kind() != KernelKind::explicit_features) {
        throw UnsupportedError("determinant identity check requires an explicit_features kernel");
    }
    if (!(lambda > 0.0)) {
        throw InputError("determinant identity: lambda must be positive");
    }
    const Index d = kernel.feature_dimension();
    Matrix phi(static_cast<Index>(points.size()), d);
    for (std::size_t s = 0; s < points.size(); ++s) {
        phi.row(static_cast<Index>(s)) = kernel.features(points[s]).transpose();
    }
    const Matrix covariance = phi.transpose() * phi;
    const double primal = log_det_ratio(covariance, lambda);
    const double dual = log_det_ratio(gram(kernel, points, lambda), lambda);
    return std::abs(primal - dual);
}

} // namespace gkb
