#include "gkb/estimation.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>

namespace gkb {

History::History(Kernel kernel, double lambda)
    : kernel_(std::move(kernel)), lambda_(lambda), rewards_(0)
{
    if (!(lambda > 0.0)) {
        throw InputError("history: lambda must be positive");
    }
}

void History::append(const Point& x, double y)
{
    if (!points_.empty() && points_.front().size() != x.size()) {
        throw InputError("history: point dimension mismatch");
    }
    points_.push_back(x);
    gram_.reset();
    rewards_.conservativeResize(rewards_.size() + 1);
    rewards_(rewards_.size() - 1) = y;
}

const GramMatrix& History::gram() const
{
    if (!gram_) {
        gram_ = gkb::gram(kernel_, points_, lambda_);
    }
    return *gram_;
}

Design Design::from_history(const History& history)
{
    Design d;
    d.support = history.points();
    d.gram = history.gram().entries();
    d.counts = Vector::Ones(history.size());
    d.reward_sums = history.rewards();
    return d;
}

Index Design::add_support(const Kernel& kernel, const Point& x)
{
    const Index n = size();
    Vector cross = kernel_column(kernel, support, x);
    Matrix grown(n + 1, n + 1);
    grown.topLeftCorner(n, n) = gram;
    grown.block(0, n, n, 1) = cross;
    grown.block(n, 0, 1, n) = cross.transpose();
    grown(n, n) = kernel(x, x);
    gram = std::move(grown);
    support.push_back(x);
    counts.conservativeResize(n + 1);
    counts(n) = 0.0;
    reward_sums.conservativeResize(n + 1);
    reward_sums(n) = 0.0;
    return n;
}

DualFunction::DualFunction(Kernel kernel, std::vector<Point> support, Vector coeffs)
    : kernel_(std::move(kernel)), support_(std::move(support)), coeffs_(std::move(coeffs))
{
    if (static_cast<Index>(support_.size()) != coeffs_.size()) {
        throw InputError("dual function: support and coefficient lengths differ");
    }
}

DualFunction DualFunction::zero(Kernel kernel) { return DualFunction(std::move(kernel), {}, Vector(0)); }

double DualFunction::operator()(const Point& x) const
{
    double value = 0.0;
    for (std::size_t s = 0; s < support_.size(); ++s) {
        value += coeffs_(static_cast<Index>(s)) * kernel_(x, support_[s]);
    }
    return value;
}

double DualFunction::rkhs_norm_sq() const
{
    if (support_.empty()) {
        return 0.0;
    }
    const Matrix k = cross_gram(kernel_, support_, support_);
    return coeffs_.dot(k * coeffs_);
}

namespace {

void check_design(const Design& design, double lambda, const Vector& alpha)
{
    const Index n = design.size();
    if (design.gram.rows() != n || design.counts.size() != n || design.reward_sums.size() != n) {
        throw InputError("design: inconsistent sizes");
    }
    if (alpha.size() != n) {
        throw InputError("loss: alpha length must equal design size");
    }
    if (!(lambda >= 0.0)) {
        throw InputError("loss: lambda must be non-negative");
    }
}

double likelihood_term(const Design& design, const EFModel& model, const Vector& v)
{
    double sum = 0.0;
    for (Index a = 0; a < v.size(); ++a) {
        if (design.counts(a) == 0.0) {
            continue;
        }
        sum += -design.reward_sums(a) * v(a) + design.counts(a) * model.log_partition(v(a));
    }
    return sum / model.dispersion();
}

Vector slopes(const Design& design, const EFModel& model, const Vector& v)
{
    Vector w(v.size());
    for (Index a = 0; a < v.size(); ++a) {
        w(a) = design.counts(a) == 0.0 ? 0.0 : design.counts(a) * model.mu_dot(v(a)) / model.dispersion();
    }
    return w;
}

Vector residual_from_values(const Design& design, const EFModel& model, double lambda, const Vector& alpha,
                            const Vector& v)
{
    Vector r(v.size());
    for (Index a = 0; a < v.size(); ++a) {
        const double mean = design.counts(a) == 0.0 ? 0.0 : design.counts(a) * model.mu(v(a));
        r(a) = (mean - design.reward_sums(a)) / model.dispersion() + lambda * alpha(a);
    }
    return r;
}

// (diag(w) K + lambda I) delta = rhs through the SPD form lambda I + S K S, S = diag(sqrt(w)):
// z = (lambda I + S K S)^{-1} S K rhs, delta = (rhs - S z) / lambda.
Vector solve_reduced(const Matrix& k, const Vector& w, double lambda, const Vector& rhs)
{
    const Vector s = w.cwiseMax(0.0).cwiseSqrt();
    Matrix system = s.asDiagonal() * k * s.asDiagonal();
    system.diagonal().array() += lambda;
    const Vector b = s.cwiseProduct(k * rhs);
    Eigen::LLT<Matrix> llt(system);
    Vector z;
    if (llt.info() == Eigen::Success) {
        z = llt.solve(b);
    } else {
        z = Eigen::LDLT<Matrix>(system).solve(b);
    }
    Vector delta = (rhs - s.cwiseProduct(z)) / lambda;
    if (!delta.allFinite()) {
        throw NumericalError("newton: reduced system solve failed");
    }
    return delta;
}

} // namespace

double loss(const Design& design, const EFModel& model, double lambda, const Vector& alpha)
{
    check_design(design, lambda, alpha);
    if (alpha.size() == 0) {
        return 0.0;
    }
    const Vector v = design.gram * alpha;
    return likelihood_term(design, model, v) + 0.5 * lambda * alpha.dot(v);
}

Vector loss_residual(const Design& design, const EFModel& model, double lambda, const Vector& alpha)
{
    check_design(design, lambda, alpha);
    const Vector v = design.gram * alpha;
    return residual_from_values(design, model, lambda, alpha, v);
}

Vector loss_gradient(const Design& design, const EFModel& model, double lambda, const Vector& alpha)
{
    return design.gram * loss_residual(design, model, lambda, alpha);
}

Matrix loss_hessian(const Design& design, const EFModel& model, double lambda, const Vector& alpha)
{
    check_design(design, lambda, alpha);
    const Vector v = design.gram * alpha;
    const Vector w = slopes(design, model, v);
    return design.gram * w.asDiagonal() * design.gram + lambda * design.gram;
}

double loss(const History& history, const EFModel& model, double lambda, const Vector& alpha)
{
    return loss(Design::from_history(history), model, lambda, alpha);
}

Vector loss_gradient(const History& history, const EFModel& model, double lambda, const Vector& alpha)
{
    return loss_gradient(Design::from_history(history), model, lambda, alpha);
}

Matrix loss_hessian(const History& history, const EFModel& model, double lambda, const Vector& alpha)
{
    return loss_hessian(Design::from_history(history), model, lambda, alpha);
}

NewtonResult minimize_tilted_loss(const Design& design, const EFModel& model, double lambda, const Vector& tilt,
                                  double eta, const Vector* warm_start, const NewtonOptions& options)
{
    const Index n = design.size();
    if (!(lambda > 0.0)) {
        throw InputError("newton: lambda must be positive");
    }
    if (tilt.size() != n) {
        throw InputError("newton: tilt length must equal design size");
    }
    NewtonResult result;
    result.alpha = (warm_start != nullptr && warm_start->size() == n) ? *warm_start : Vector(Vector::Zero(n));
    check_design(design, lambda, result.alpha);
    if (n == 0) {
        return result;
    }

    const Matrix& k = design.gram;
    const double scale = std::max(1.0, eta * tilt.norm());
    const double tolerance = options.tolerance * scale;

    auto objective = [&](const Vector& alpha, const Vector& v) {
        return likelihood_term(design, model, v) + 0.5 * lambda * alpha.dot(v) - eta * tilt.dot(v);
    };
    // sum of the absolute parts of the objective; its rounding level
    auto magnitude = [&](const Vector& alpha, const Vector& v) {
        return std::abs(likelihood_term(design, model, v)) + 0.5 * lambda * std::abs(alpha.dot(v))
               + std::abs(eta * tilt.dot(v));
    };

    Vector v = k * result.alpha;
    double value = objective(result.alpha, v);
    for (;;) {
        Vector r = residual_from_values(design, model, lambda, result.alpha, v) - eta * tilt;
        result.residual_norm = r.norm();
        if (result.residual_norm <= tolerance) {
            return result;
        }
        if (result.iterations >= options.max_iterations) {
            throw NewtonNonConvergence("newton: no convergence within iteration limit", result);
        }
        ++result.iterations;

        const Vector w = slopes(design, model, v);
        const Vector delta = solve_reduced(k, w, lambda, r);
        const Vector k_delta = k * delta;
        const double decrease = k_delta.dot(w.asDiagonal() * k_delta) + lambda * delta.dot(k_delta);
        const double size = 1.0 + magnitude(result.alpha, v);
        const double slack = 1e-13 * size;

        double step = 1.0;
        bool accepted = false;
        bool progressed = false;
        for (int h = 0; h <= options.max_halvings; ++h) {
            Vector candidate = result.alpha - step * delta;
            Vector candidate_v = v - step * k_delta;
            const double candidate_value = objective(candidate, candidate_v);
            if (std::isfinite(candidate_value)
                && candidate_value <= value - options.armijo * step * decrease + slack) {
                accepted = true;
                progressed = candidate_value < value - slack;
                result.alpha = std::move(candidate);
                v = std::move(candidate_v);
                value = candidate_value;
                break;
            }
            step *= 0.5;
        }
        if (!progressed && decrease <= options.stationary_decrease * size) {
            // no measurable progress and the Newton decrement is at the objective's rounding level
            return result;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "newton: line search stalled (eta " << eta << ", residual " << result.residual_norm
                << ", decrease " << decrease << ", objective " << value << ")";
            throw NewtonNonConvergence(msg.str(), result);
        }
        // refresh to avoid drift from the incremental update
        v = k * result.alpha;
    }
}

NewtonResult fit_mle(const Design& design, const EFModel& model, double lambda, const Vector* warm_start,
                     const NewtonOptions& options)
{
    return minimize_tilted_loss(design, model, lambda, Vector::Zero(design.size()), 0.0, warm_start, options);
}

DualFunction mle(const History& history, const EFModel& model, double lambda)
{
    if (history.empty()) {
        return DualFunction::zero(history.kernel());
    }
    const Design design = Design::from_history(history);
    NewtonResult fit = fit_mle(design, model, lambda);
    return DualFunction(history.kernel(), history.points(), std::move(fit.alpha));
}

} // namespace gkb
