#include "gkb/harness/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "gkb/estimation.hpp"
#include "gkb/harness/experiment.hpp"
#include "gkb/harness/io.hpp"
#include "gkb/seeding.hpp"

namespace gkb::harness {

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names = {"identity",  "weighted_gain", "self_norm",  "mle_oracle",
                                                   "freedman",  "bernstein",     "good_event", "optimism"};
    return names;
}

bool is_coverage_suite(const std::string& name)
{
    return name == "freedman" || name == "bernstein" || name == "good_event" || name == "optimism";
}

namespace {

std::vector<Point> uniform_points(int count, int dimension, double low, double high, Rng& rng)
{
    std::uniform_real_distribution<double> u(low, high);
    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Point p(dimension);
        for (int j = 0; j < dimension; ++j) {
            p(j) = u(rng);
        }
        points.push_back(std::move(p));
    }
    return points;
}

// Random Fourier-type features sqrt(2/d) cos(W x + b); ||phi(x)||^2 <= 2.
Kernel random_feature_kernel(int input_dimension, int feature_dimension, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    Matrix w(feature_dimension, input_dimension);
    Vector b(feature_dimension);
    for (int i = 0; i < feature_dimension; ++i) {
        for (int j = 0; j < input_dimension; ++j) {
            w(i, j) = normal(rng);
        }
        b(i) = phase(rng);
    }
    const double scale = std::sqrt(2.0 / feature_dimension);
    auto map = [w, b, scale](const Point& x) -> Vector { return scale * (w * x + b).array().cos().matrix(); };
    return Kernel::explicit_features(feature_dimension, map, std::sqrt(2.0));
}

Kernel random_kernel(int input_dimension, Rng& rng)
{
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_real_distribution<double> ell(0.2, 2.0);
    switch (pick(rng)) {
    case 0:
        return Kernel::rbf(ell(rng));
    case 1:
        return Kernel::matern(MaternSmoothness::half, ell(rng));
    case 2:
        return Kernel::matern(MaternSmoothness::three_halves, ell(rng));
    case 3:
        return Kernel::matern(MaternSmoothness::five_halves, ell(rng));
    default:
        return Kernel::linear(std::sqrt(static_cast<double>(input_dimension)));
    }
}

double pick_lambda(Rng& rng)
{
    static constexpr double grid[] = {0.1, 1.0, 10.0};
    std::uniform_int_distribution<int> pick(0, 2);
    return grid[pick(rng)];
}

struct Instances {
    int count;
    Rng rng;
};

Instances instance_stream(const Section& params, const ExperimentConfig& config, const std::string& name)
{
    const auto count = params.integer("instances", 100);
    if (count < 1) {
        params.fail("instances", "must be positive");
    }
    return {static_cast<int>(count), Rng(params.unsigned_integer("seed", derive_seed(config.seed, 0, name)))};
}

void check_positive(const Section& params, const std::string& key, double value)
{
    if (!(value > 0.0)) {
        params.fail(key, "must be positive");
    }
}

SuiteResult identity_suite(const Section& params, const ExperimentConfig& config)
{
    params.allow({"instances", "seed", "tolerance", "max_points", "max_features"});
    auto [count, rng] = instance_stream(params, config, "identity");
    const double tolerance = params.number("tolerance", 1e-8);
    check_positive(params, "tolerance", tolerance);
    const int max_points = static_cast<int>(params.integer("max_points", 50));
    const int max_features = static_cast<int>(params.integer("max_features", 5));
    if (max_points < 1 || max_features < 1) {
        params.fail("max_points", "max_points and max_features must be positive");
    }

    std::uniform_int_distribution<int> points_dist(1, max_points);
    std::uniform_int_distribution<int> features_dist(1, max_features);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        const Kernel kernel = random_feature_kernel(2, features_dist(rng), rng);
        const auto points = uniform_points(points_dist(rng), 2, -1.0, 1.0, rng);
        worst = std::max(worst, verify_determinant_identity(kernel, points, pick_lambda(rng)));
    }
    SuiteResult r;
    r.metric = "max_discrepancy";
    r.measured = worst;
    r.limit = tolerance;
    r.relation = "<=";
    r.passed = worst <= tolerance;
    r.details = {{"instances", count}};
    return r;
}

SuiteResult weighted_gain_suite(const Section& params, const ExperimentConfig& config)
{
    params.allow({"instances", "seed", "slack", "max_points"});
    auto [count, rng] = instance_stream(params, config, "weighted_gain");
    const double slack = params.number("slack", 1e-9);
    const int max_points = static_cast<int>(params.integer("max_points", 50));
    if (max_points < 1) {
        params.fail("max_points", "must be positive");
    }

    std::uniform_int_distribution<int> points_dist(1, max_points);
    std::uniform_int_distribution<int> dim_dist(1, 3);
    std::uniform_real_distribution<double> variance_dist(0.25, 4.0);
    std::uniform_real_distribution<double> magnitude(0.0, 3.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst_excess = -HUGE_VAL;
    double worst_ratio = 0.0;
    for (int i = 0; i < count; ++i) {
        const int dim = dim_dist(rng);
        const Kernel kernel = random_kernel(dim, rng);
        const EFModel model = i % 2 == 0 ? EFModel::bernoulli() : EFModel::gaussian(variance_dist(rng), 1.0);
        const auto points = uniform_points(points_dist(rng), dim, -1.0, 1.0, rng);
        const auto anchors = uniform_points(3, dim, -1.0, 1.0, rng);
        Vector c(3);
        const double scale = magnitude(rng);
        for (Index j = 0; j < 3; ++j) {
            c(j) = scale * normal(rng);
        }
        const DualFunction f(kernel, anchors, c);
        const double lambda = pick_lambda(rng);

        const GramMatrix k = gram(kernel, points, lambda);
        Vector w(k.size());
        for (Index s = 0; s < w.size(); ++s) {
            w(s) = std::sqrt(model.mu_dot(f(points[static_cast<std::size_t>(s)])) / model.dispersion());
        }
        const double weighted = information_gain(weighted_gram(k, w), lambda);
        const double bound = config.bound_multiplier
                             * weighted_information_gain_bound(information_gain(k, lambda), model.mu_dot_sup(),
                                                               model.dispersion());
        worst_excess = std::max(worst_excess, weighted - bound);
        if (bound > 0.0) {
            worst_ratio = std::max(worst_ratio, weighted / bound);
        }
    }
    SuiteResult r;
    r.metric = "max(weighted_gain - bound)";
    r.measured = worst_excess;
    r.limit = slack;
    r.relation = "<=";
    r.passed = worst_excess <= slack;
    r.details = {{"instances", count}, {"max_ratio", worst_ratio}, {"bound_multiplier", config.bound_multiplier}};
    return r;
}

SuiteResult self_norm_suite(const Section& params, const ExperimentConfig& config)
{
    params.allow({"instances", "seed", "tolerance", "max_points", "max_features"});
    auto [count, rng] = instance_stream(params, config, "self_norm");
    const double tolerance = params.number("tolerance", 1e-8);
    check_positive(params, "tolerance", tolerance);
    const int max_points = static_cast<int>(params.integer("max_points", 40));
    const int max_features = static_cast<int>(params.integer("max_features", 5));
    if (max_points < 1 || max_features < 1) {
        params.fail("max_points", "max_points and max_features must be positive");
    }

    std::uniform_int_distribution<int> points_dist(1, max_points);
    std::uniform_int_distribution<int> features_dist(1, max_features);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        const int d = features_dist(rng);
        const Kernel kernel = random_feature_kernel(2, d, rng);
        const int t = points_dist(rng);
        const auto points = uniform_points(t, 2, -1.0, 1.0, rng);
        const double lambda = pick_lambda(rng);
        MartingaleTrace trace;
        trace.increments.resize(t);
        trace.variance_proxies.resize(t);
        for (int s = 0; s < t; ++s) {
            const double p = prob(rng);
            const double y = std::bernoulli_distribution(p)(rng) ? 1.0 : 0.0;
            trace.increments(s) = y - p;
            trace.variance_proxies(s) = p * (1.0 - p);
        }
        const double dual = self_norm_statistic(trace, points, kernel, lambda);

        // primal: S = Phi^T eps against Phi~^T Phi~ + lambda I
        Matrix phi(t, d);
        for (int s = 0; s < t; ++s) {
            phi.row(s) = kernel.features(points[static_cast<std::size_t>(s)]).transpose();
        }
        const Vector sum = phi.transpose() * trace.increments;
        const Matrix weighted = trace.variance_proxies.cwiseSqrt().asDiagonal() * phi;
        Matrix h = weighted.transpose() * weighted;
        h.diagonal().array() += lambda;
        const double primal = std::sqrt(std::max(0.0, sum.dot(h.ldlt().solve(sum))));
        worst = std::max(worst, std::abs(dual - primal) / std::max(1.0, primal));
    }
    SuiteResult r;
    r.metric = "max_discrepancy";
    r.measured = worst;
    r.limit = tolerance;
    r.relation = "<=";
    r.passed = worst <= tolerance;
    r.details = {{"instances", count}, {"scale", "absolute below 1, relative above"}};
    return r;
}

// Independent scalar oracle for (mu(k a) - y) / g + lambda a = 0 by bisection.
double scalar_root(const EFModel& model, double k, double y, double lambda)
{
    auto h = [&](double a) { return (model.mu(k * a) - y) / model.dispersion() + lambda * a; };
    double lo = -1.0;
    double hi = 1.0;
    while (h(lo) > 0.0) {
        lo *= 2.0;
    }
    while (h(hi) < 0.0) {
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SuiteResult mle_oracle_suite(const Section& params, const ExperimentConfig& config)
{
    params.allow({"instances", "seed", "tolerance", "fd_tolerance"});
    auto [count, rng] = instance_stream(params, config, "mle_oracle");
    const double tolerance = params.number("tolerance", 1e-8);
    const double fd_tolerance = params.number("fd_tolerance", 1e-6);
    check_positive(params, "tolerance", tolerance);
    check_positive(params, "fd_tolerance", fd_tolerance);

    std::uniform_int_distribution<int> n_dist(1, 20);
    std::uniform_int_distribution<int> dim_dist(1, 4);
    std::uniform_real_distribution<double> variance_dist(0.5, 2.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double ridge_error = 0.0;
    double root_error = 0.0;
    double gradient_error = 0.0;
    double hessian_error = 0.0;

    // closed-form ridge: (K + lambda g I)^{-1} y
    for (int i = 0; i < count; ++i) {
        const int dim = dim_dist(rng);
        const Kernel kernel = Kernel::linear(2.0 * std::sqrt(static_cast<double>(dim)));
        const EFModel model = EFModel::gaussian(variance_dist(rng), 10.0);
        const double lambda = pick_lambda(rng);
        History history(kernel, lambda);
        const int n = n_dist(rng);
        for (const auto& x : uniform_points(n, dim, -2.0, 2.0, rng)) {
            history.append(x, normal(rng));
        }
        Matrix a = history.gram().entries();
        a.diagonal().array() += lambda * model.dispersion();
        const Vector expected = a.ldlt().solve(history.rewards());
        const DualFunction fit = mle(history, model, lambda);
        ridge_error = std::max(ridge_error, (fit.coeffs() - expected).cwiseAbs().maxCoeff());
    }

    // Bernoulli single observation, including the unit case mu(a) - 1 + a = 0
    const EFModel bernoulli = EFModel::bernoulli();
    std::uniform_real_distribution<double> scale_dist(0.2, 2.0);
    for (int i = 0; i <= count; ++i) {
        const double k = i == 0 ? 1.0 : scale_dist(rng);
        const double y = i == 0 ? 1.0 : (unit(rng) > 0.0 ? 1.0 : 0.0);
        const double lambda = i == 0 ? 1.0 : pick_lambda(rng);
        Point x(1);
        x << std::sqrt(k);
        History history(Kernel::linear(2.0), lambda);
        history.append(x, y);
        const DualFunction fit = mle(history, bernoulli, lambda);
        root_error = std::max(root_error, std::abs(fit.coeffs()(0) - scalar_root(bernoulli, k, y, lambda)));
    }

    // derivatives against central differences
    for (int i = 0; i < count; ++i) {
        const int dim = dim_dist(rng);
        const Kernel kernel = random_kernel(dim, rng);
        const EFModel model = i % 2 == 0 ? EFModel::bernoulli() : EFModel::gaussian(variance_dist(rng), 10.0);
        const double lambda = pick_lambda(rng);
        History history(kernel, lambda);
        const int n = n_dist(rng);
        for (const auto& x : uniform_points(n, dim, -1.0, 1.0, rng)) {
            history.append(x, model.kind() == ModelKind::bernoulli ? (unit(rng) > 0.0 ? 1.0 : 0.0) : normal(rng));
        }
        Vector alpha(n);
        for (int s = 0; s < n; ++s) {
            alpha(s) = unit(rng);
        }
        const Vector grad = loss_gradient(history, model, lambda, alpha);
        const Matrix hess = loss_hessian(history, model, lambda, alpha);
        Vector fd_grad(n);
        Matrix fd_hess(n, n);
        const double h = 1e-5;
        for (int s = 0; s < n; ++s) {
            Vector up = alpha;
            Vector down = alpha;
            up(s) += h;
            down(s) -= h;
            fd_grad(s) = (loss(history, model, lambda, up) - loss(history, model, lambda, down)) / (2.0 * h);
            fd_hess.col(s) = (loss_gradient(history, model, lambda, up) - loss_gradient(history, model, lambda, down))
                             / (2.0 * h);
        }
        gradient_error =
            std::max(gradient_error, (grad - fd_grad).cwiseAbs().maxCoeff() / std::max(1.0, grad.cwiseAbs().maxCoeff()));
        hessian_error =
            std::max(hessian_error, (hess - fd_hess).cwiseAbs().maxCoeff() / std::max(1.0, hess.cwiseAbs().maxCoeff()));
    }

    SuiteResult r;
    r.metric = "max(ridge_error, root_error)";
    r.measured = std::max(ridge_error, root_error);
    r.limit = tolerance;
    r.relation = "<=";
    r.passed = ridge_error <= tolerance && root_error <= tolerance && gradient_error <= fd_tolerance
               && hessian_error <= fd_tolerance;
    r.details = {{"instances", count},
                 {"ridge_error", ridge_error},
                 {"root_error", root_error},
                 {"gradient_relative_error", gradient_error},
                 {"hessian_relative_error", hessian_error},
                 {"fd_tolerance", fd_tolerance}};
    return r;
}

int default_horizon(CoverageInequality inequality)
{
    switch (inequality) {
    case CoverageInequality::good_event:
        return 200;
    case CoverageInequality::optimism:
        return 500;
    default:
        return 300;
    }
}

SuiteResult coverage_suite(const std::string& name, const Section& params, const ExperimentConfig& config,
                           int workers)
{
    params.allow({"replications", "horizon", "delta", "lambda", "selection", "R", "zero_noise", "seed",
                  "stitching", "instance"});
    CoverageSpec spec;
    spec.inequality = parse_coverage_inequality(name);
    const auto replications = params.integer("replications", 500);
    if (replications < 1) {
        params.fail("replications", "must be positive");
    }
    spec.replications = static_cast<int>(replications);
    const auto horizon = params.integer("horizon", default_horizon(spec.inequality));
    if (horizon < 1) {
        params.fail("horizon", "must be positive");
    }
    spec.horizon = static_cast<int>(horizon);
    spec.delta = params.number("delta", 0.1);
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
        params.fail("delta", "must lie in (0, 1)");
    }
    spec.lambda = params.number("lambda", 1.0);
    check_positive(params, "lambda", spec.lambda);
    try {
        spec.selection = parse_policy_kind(params.string("selection", "uniform_random"));
    } catch (const InputError& e) {
        params.fail("selection", e.what());
    }
    spec.R = params.number("R", 1.0);
    check_positive(params, "R", spec.R);
    spec.zero_noise = params.boolean("zero_noise", false);
    spec.seed = params.unsigned_integer("seed", derive_seed(config.seed, 0, name));
    const Section stitching = params.child("stitching");
    stitching.allow({"eta", "v0"});
    spec.stitching.eta = stitching.number("eta", spec.stitching.eta);
    spec.stitching.v0 = stitching.number("v0", spec.stitching.v0);
    if (!(spec.stitching.eta > 1.0) || !(spec.stitching.v0 > 0.0)) {
        stitching.fail("eta", "need eta > 1 and v0 > 0");
    }
    if (params.has("instance")) {
        const Section instance = params.child("instance");
        Json kernel_descriptor;
        Json model_descriptor;
        spec.instance = parse_instance(instance, spec.horizon, spec.delta, kernel_descriptor, model_descriptor);
        if (!instance.has("seed")) {
            spec.instance.seed = instance_seed(config);
        }
    } else {
        spec.instance = resolved_instance(config);
    }
    spec.bound_multiplier = config.bound_multiplier;
    spec.workers = workers;

    const CoverageReport report = coverage_experiment(spec);
    SuiteResult r;
    r.metric = "coverage";
    r.measured = report.coverage;
    r.limit = report.required;
    r.relation = ">=";
    r.passed = report.passed();
    r.details = {{"replications", report.replications},
                 {"horizon", report.horizon},
                 {"delta", report.delta},
                 {"mean_tightness", report.mean_tightness},
                 {"max_ratio_median", report.max_ratio_median},
                 {"max_ratio_q90", report.max_ratio_q90},
                 {"max_ratio_max", report.max_ratio_max},
                 {"bound_multiplier", spec.bound_multiplier}};
    r.replications_csv = coverage_csv(report);
    return r;
}

} // namespace

std::string coverage_csv(const CoverageReport& report)
{
    std::ostringstream out;
    out << "replication,covered,first_violation,max_ratio,mean_ratio,final_statistic,final_bound\n";
    for (const auto& o : report.outcomes) {
        out << o.replication << ',' << (o.covered ? 1 : 0) << ',' << o.first_violation << ','
            << format_number(o.max_ratio) << ',' << format_number(o.mean_ratio) << ','
            << format_number(o.final_statistic) << ',' << format_number(o.final_bound) << '\n';
    }
    return out.str();
}

SuiteResult run_suite(const std::string& name, const Section& params, const ExperimentConfig& config, int workers)
{
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r;
    if (name == "identity") {
        r = identity_suite(params, config);
    } else if (name == "weighted_gain") {
        r = weighted_gain_suite(params, config);
    } else if (name == "self_norm") {
        r = self_norm_suite(params, config);
    } else if (name == "mle_oracle") {
        r = mle_oracle_suite(params, config);
    } else if (is_coverage_suite(name)) {
        r = coverage_suite(name, params, config, workers);
    } else {
        throw ConfigError("verify.suites: unknown suite '" + name + "'");
    }
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

int run_verify(const ExperimentConfig& config, int workers, bool coverage_only, std::ostream& log)
{
    std::vector<std::pair<std::string, Section>> plan;
    if (config.suites.empty()) {
        for (const auto& name : suite_names()) {
            plan.emplace_back(name, Section(Json::object(), "verify.suites." + name, nullptr, "<defaults>"));
        }
    } else {
        plan = config.suites;
    }
    for (const auto& [name, params] : plan) {
        if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end()) {
            throw ConfigError("verify.suites: unknown suite '" + name + "'");
        }
    }
    if (coverage_only) {
        std::erase_if(plan, [](const auto& entry) { return !is_coverage_suite(entry.first); });
    }

    const std::filesystem::path root(config.output_dir);
    Json report;
    report["tool"] = "gkb";
    report["version"] = tool_version();
    report["seed"] = config.seed;
    report["bound_multiplier"] = config.bound_multiplier;
    Json suites = Json::array();
    bool all_passed = true;
    for (const auto& [name, params] : plan) {
        const SuiteResult r = run_suite(name, params, config, workers);
        all_passed = all_passed && r.passed;
        log << (r.passed ? "PASS " : "FAIL ") << name << ": " << r.metric << ' ' << format_number(r.measured) << ' '
            << r.relation << ' ' << format_number(r.limit) << " (" << format_number(std::round(r.seconds * 100.0) / 100.0)
            << " s)\n";
        Json entry;
        entry["name"] = name;
        entry["passed"] = r.passed;
        entry["metric"] = r.metric;
        entry["measured"] = r.measured;
        entry["limit"] = r.limit;
        entry["relation"] = r.relation;
        entry["margin"] = r.relation == "<=" ? r.limit - r.measured : r.measured - r.limit;
        entry["details"] = r.details;
        if (!r.replications_csv.empty()) {
            const auto file = std::filesystem::path("verify_" + name + ".csv");
            write_atomic(root / file, r.replications_csv);
            entry["replications_file"] = file.generic_string();
        }
        suites.push_back(entry);
    }
    report["suites"] = suites;
    report["passed"] = all_passed;
    write_atomic(root / "verify_report.json", report.dump(2) + "\n");
    return all_passed ? 0 : 1;
}

} // namespace gkb::harness
