#ifndef GKB_ESTIMATION_HPP
#define GKB_ESTIMATION_HPP

#include <optional>
#include <vector>

#include "gkb/ef_models.hpp"
#include "gkb/kernels.hpp"
#include "gkb/types.hpp"

namespace gkb {

/// Ordered observations (x_s, y_s). The Gram matrix is built on first request after an append.
class History {
public:
    History(Kernel kernel, double lambda);

    void append(const Point& x, double y);

    Index size() const { return static_cast<Index>(points_.size()); }
    bool empty() const { return points_.empty(); }
    const std::vector<Point>& points() const { return points_; }
    const Vector& rewards() const { return rewards_; }
    const GramMatrix& gram() const;
    const Kernel& kernel() const { return kernel_; }
    double lambda() const { return lambda_; }

private:
    Kernel kernel_;
    double lambda_;
    std::vector<Point> points_;
    Vector rewards_;
    mutable std::optional<GramMatrix> gram_;
};

/*
 * Grouped sufficient statistics for the regularized likelihood: support
 * points x_a, multiplicities n_a and reward sums Y_a. The loss over a
 * history depends on the function only through its values at the support,
 * so repeated decisions can be merged without changing the optimization
 * problem. A support point may have n_a = 0; it then only enlarges the span
 * in which the function is represented.
 */
struct Design {
    std::vector<Point> support;
    Matrix gram;
    Vector counts;
    Vector reward_sums;

    Index size() const { return static_cast<Index>(support.size()); }

    /// One support entry per observation (n_s = 1, Y_s = y_s).
    static Design from_history(const History& history);

    /// Appends a support point with zero multiplicity and returns its index.
    Index add_support(const Kernel& kernel, const Point& x);
};

/// f = sum_s coeffs[s] k(., support[s]).
class DualFunction {
public:
    DualFunction(Kernel kernel, std::vector<Point> support, Vector coeffs);

    /// The zero function.
    static DualFunction zero(Kernel kernel);

    double operator()(const Point& x) const;

    /// alpha^T K alpha over the support.
    double rkhs_norm_sq() const;

    const std::vector<Point>& support() const { return support_; }
    const Vector& coeffs() const { return coeffs_; }
    const Kernel& kernel() const { return kernel_; }

private:
    Kernel kernel_;
    std::vector<Point> support_;
    Vector coeffs_;
};

// Loss L(alpha) = sum_a (-Y_a v_a + n_a m(v_a)) / g(tau) + (lambda/2) alpha^T K alpha,  v = K alpha.
double loss(const Design& design, const EFModel& model, double lambda, const Vector& alpha);

/// r = (n . mu(K alpha) - Y) / g(tau) + lambda alpha; the gradient is K r.
Vector loss_residual(const Design& design, const EFModel& model, double lambda, const Vector& alpha);
Vector loss_gradient(const Design& design, const EFModel& model, double lambda, const Vector& alpha);
/// K diag(n . mu'(K alpha)) K / g(tau) + lambda K.
Matrix loss_hessian(const Design& design, const EFModel& model, double lambda, const Vector& alpha);

double loss(const History& history, const EFModel& model, double lambda, const Vector& alpha);
Vector loss_gradient(const History& history, const EFModel& model, double lambda, const Vector& alpha);
Matrix loss_hessian(const History& history, const EFModel& model, double lambda, const Vector& alpha);

struct NewtonOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;
    double armijo = 1e-4;
    int max_halvings = 60;
    /// Stop without reaching the residual tolerance when a step makes no measurable progress and the
    /// Newton decrement is below this fraction of the objective's magnitude.
    double stationary_decrease = 1e-9;
};

struct NewtonResult {
    Vector alpha;
    int iterations = 0;
    double residual_norm = 0.0;
};

class NewtonNonConvergence : public NumericalError {
public:
    NewtonNonConvergence(const std::string& what, NewtonResult last)
        : NumericalError(what), last_(std::move(last))
    {
    }
    const NewtonResult& last_iterate() const { return last_; }

private:
    NewtonResult last_;
};

/*
 * Damped Newton on the tilted objective L(alpha) - eta * c^T K alpha
 * (eta = 0 gives the maximum-likelihood problem).
 *
 * Each step solves the reduced system (diag(n mu'(v)) K / g + lambda I) delta = r - eta c,
 * which is a valid Newton direction because the Hessian factors as
 * K (diag(n mu') K / g + lambda I); K itself is never inverted, so singular
 * Gram matrices (repeated points, low-rank kernels) need no special care.
 * Steps are backtracked by halving under the Armijo condition. Convergence
 * is declared when ||r - eta c|| <= tolerance * max(1, eta ||c||), or when
 * a step makes no measurable progress and the Newton decrement is below
 * options.stationary_decrease times the objective's magnitude (large eta
 * or lambda on ill-conditioned K puts the residual target below rounding).
 * The Newton system is solved in the SPD form lambda I + S K S.
 */
NewtonResult minimize_tilted_loss(const Design& design, const EFModel& model, double lambda, const Vector& tilt,
                                  double eta, const Vector* warm_start = nullptr, const NewtonOptions& options = {});

NewtonResult fit_mle(const Design& design, const EFModel& model, double lambda, const Vector* warm_start = nullptr,
                     const NewtonOptions& options = {});

/// Ridge-regularized maximum-likelihood estimate in representer form over the history.
DualFunction mle(const History& history, const EFModel& model, double lambda);

} // namespace gkb

#endif
