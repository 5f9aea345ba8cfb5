#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gkb/concentration.hpp"
#include "gkb/confidence.hpp"
#include "gkb/coverage.hpp"
#include "test_util.hpp"

using namespace gkb;
using gkb::testing::random_points;

namespace {

MartingaleTrace bernoulli_trace(int t, Rng& rng)
{
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    MartingaleTrace trace;
    trace.increments.resize(t);
    trace.variance_proxies.resize(t);
    for (int s = 0; s < t; ++s) {
        const double p = prob(rng);
        trace.increments(s) = (std::bernoulli_distribution(p)(rng) ? 1.0 : 0.0) - p;
        trace.variance_proxies(s) = p * (1.0 - p);
    }
    return trace;
}

} // namespace

TEST(Freedman, HandValueAtZeroVariance)
{
    const double log_term = std::log(std::numbers::pi * std::numbers::pi / 0.3);
    const double expected = std::sqrt(2.0 * log_term) + log_term / 3.0;
    EXPECT_NEAR(stitched_freedman_bound(0.0, 1.0, 0.05), expected, 1e-12);
    EXPECT_NEAR(expected, 3.808, 1e-3);
}

TEST(Freedman, LevelZeroAtBaseVariance)
{
    EXPECT_EQ(stitching_level(1.0, StitchingParams{}), 0);
    EXPECT_EQ(stitching_level(0.0, StitchingParams{}), 0);
    EXPECT_EQ(stitching_level(std::numbers::e * 1.01, StitchingParams{}), 2);
}

TEST(Freedman, MonotoneInVariance)
{
    double previous = 0.0;
    for (double v = 0.0; v < 1e5; v = v * 1.3 + 0.01) {
        const double current = stitched_freedman_bound(v, 1.0, 0.1);
        EXPECT_GE(current, previous - 1e-12);
        previous = current;
    }
}

TEST(Freedman, FinerGridNeverLooserBelowBaseVariance)
{
    const StitchingParams fine{std::numbers::e, 1.0};
    const StitchingParams coarse{10.0, 1.0};
    for (double v = 0.0; v <= 1.0; v += 0.01) {
        EXPECT_LE(stitched_freedman_bound(v, 1.0, 0.1, fine), stitched_freedman_bound(v, 1.0, 0.1, coarse));
    }
}

TEST(Freedman, InvalidStitchingThrows)
{
    EXPECT_THROW(stitched_freedman_bound(1.0, 1.0, 0.1, StitchingParams{1.0, 1.0}), InputError);
    EXPECT_THROW(stitched_freedman_bound(1.0, 1.0, 0.1, StitchingParams{2.0, 0.0}), InputError);
}

TEST(Bernstein, FirstRoundHandValue)
{
    const double log_term = std::log(std::numbers::pi * std::numbers::pi / 0.3);
    const double expected = std::sqrt(3.0) * std::sqrt(log_term) + 3.0 * log_term;
    EXPECT_NEAR(bernstein_bound(1, 0.0, 1.0, 1.0, 1.0, 0.1), expected, 1e-12);
    EXPECT_NEAR(expected, 13.72, 0.01);
}

TEST(Bernstein, EqualsRadiusBMinusBiasForUnitDispersion)
{
    const auto cfg = ConfidenceConfig::from_model(EFModel::bernoulli(), 0.05, 2.0, 1.5, 1.0);
    for (int t : {1, 2, 50, 400}) {
        EXPECT_NEAR(bernstein_bound(t, 3.0, cfg.R, cfg.K, cfg.lambda, cfg.delta),
                    radius_B(t, cfg, 3.0) - std::sqrt(2.0) * 1.5, 1e-12);
    }
}

TEST(SelfNorm, SingleSampleHandValue)
{
    MartingaleTrace trace;
    trace.increments = Vector::Ones(1);
    trace.variance_proxies = Vector::Ones(1);
    const std::vector<Point> pts = {gkb::testing::scalar(0.0)};
    EXPECT_NEAR(self_norm_statistic(trace, pts, Kernel::rbf(1.0), 1.0), std::sqrt(0.5), 1e-15);
}

TEST(SelfNorm, MatchesPrimalOnExplicitFeatures)
{
    Rng rng(3);
    std::uniform_int_distribution<int> d_dist(1, 5);
    std::uniform_int_distribution<int> t_dist(1, 40);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = d_dist(rng);
        const int t = t_dist(rng);
        const Kernel k = gkb::testing::random_features(2, d, rng);
        const auto pts = random_points(t, 2, rng);
        const MartingaleTrace trace = bernoulli_trace(t, rng);
        const double lambda = rep % 3 == 0 ? 0.1 : (rep % 3 == 1 ? 1.0 : 10.0);
        const Matrix phi = gkb::testing::feature_matrix(k, pts);
        const Vector s = phi.transpose() * trace.increments;
        const Matrix weighted = trace.variance_proxies.cwiseSqrt().asDiagonal() * phi;
        Matrix h = weighted.transpose() * weighted;
        h.diagonal().array() += lambda;
        const double primal = std::sqrt(s.dot(h.ldlt().solve(s)));
        EXPECT_NEAR(self_norm_statistic(trace, pts, k, lambda), primal, 1e-8 * std::max(1.0, primal));
    }
}

TEST(SelfNorm, ZeroWeightsReduceToScaledKernelNorm)
{
    Rng rng(4);
    const auto pts = random_points(6, 2, rng);
    const Matrix k = gram(Kernel::rbf(0.5), pts).entries();
    const Vector c = Vector::Random(6);
    EXPECT_NEAR(weighted_dual_norm_sq(k, c, Vector::Zero(6), 2.0), c.dot(k * c) / 2.0, 1e-13);
}

TEST(SelfNorm, RejectsInconsistentTrace)
{
    MartingaleTrace trace;
    trace.increments = Vector::Ones(2);
    trace.variance_proxies = Vector::Ones(1);
    const std::vector<Point> pts = {gkb::testing::scalar(0.0), gkb::testing::scalar(1.0)};
    EXPECT_THROW(self_norm_statistic(trace, pts, Kernel::rbf(1.0), 1.0), InputError);
}

TEST(Sanity, EmptyTraceHolds)
{
    MartingaleTrace trace;
    trace.increments.resize(0);
    trace.variance_proxies.resize(0);
    const auto check = sanity_bounds(trace, std::vector<Point>{}, Kernel::rbf(1.0), 1.0, 1.0, 1.0);
    EXPECT_TRUE(check.norm_ok);
    EXPECT_TRUE(check.logdet_ok);
}

TEST(Sanity, SingleUnitSample)
{
    MartingaleTrace trace;
    trace.increments = Vector::Ones(1);
    trace.variance_proxies = Vector::Ones(1);
    const auto check =
        sanity_bounds(trace, std::vector<Point>{gkb::testing::scalar(0.0)}, Kernel::rbf(1.0), 1.0, 1.0, 1.0);
    EXPECT_NEAR(check.norm_sq, 0.5, 1e-15);
    EXPECT_TRUE(check.norm_ok);
}

TEST(Sanity, HoldsOnRandomTraces)
{
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const int t = 1 + rep % 30;
        const auto pts = random_points(t, 2, rng);
        const auto check =
            sanity_bounds(bernoulli_trace(t, rng), pts, Kernel::matern(MaternSmoothness::half, 0.4), 0.5, 1.0, 1.0);
        EXPECT_TRUE(check.norm_ok);
        EXPECT_TRUE(check.logdet_ok);
    }
}

TEST(Coverage, ThresholdFormula)
{
    EXPECT_NEAR(coverage_threshold(0.1, 500), 0.9 - 3.0 * std::sqrt(0.09 / 500.0), 1e-15);
}

TEST(Coverage, ZeroNoiseIsAlwaysCovered)
{
    for (auto inequality : {CoverageInequality::freedman, CoverageInequality::bernstein}) {
        CoverageSpec spec;
        spec.inequality = inequality;
        spec.replications = 20;
        spec.horizon = 50;
        spec.zero_noise = true;
        spec.seed = 9;
        EXPECT_DOUBLE_EQ(coverage_experiment(spec).coverage, 1.0);
    }
}

TEST(Coverage, FreedmanRademacherSmallRun)
{
    CoverageSpec spec;
    spec.inequality = CoverageInequality::freedman;
    spec.replications = 200;
    spec.horizon = 200;
    spec.delta = 0.05;
    spec.seed = 4;
    const CoverageReport report = coverage_experiment(spec);
    EXPECT_GE(report.coverage, coverage_threshold(0.05, 200));
    EXPECT_EQ(report.outcomes.size(), 200U);
}

TEST(Coverage, IndependentOfWorkerCount)
{
    CoverageSpec spec;
    spec.inequality = CoverageInequality::good_event;
    spec.replications = 12;
    spec.horizon = 30;
    spec.instance.num_arms = 4;
    spec.seed = 2;
    spec.workers = 1;
    const auto serial = coverage_experiment(spec);
    spec.workers = 3;
    const auto parallel = coverage_experiment(spec);
    for (std::size_t i = 0; i < serial.outcomes.size(); ++i) {
        EXPECT_EQ(serial.outcomes[i].max_ratio, parallel.outcomes[i].max_ratio);
    }
}

TEST(Coverage, ShrunkBoundIsDetected)
{
    CoverageSpec spec;
    spec.inequality = CoverageInequality::freedman;
    spec.replications = 200;
    spec.horizon = 300;
    spec.seed = 6;
    spec.bound_multiplier = 0.1;
    EXPECT_FALSE(coverage_experiment(spec).passed());
}
