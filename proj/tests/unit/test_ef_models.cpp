#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gkb/ef_models.hpp"

using namespace gkb;

TEST(EFModel, BernoulliHandValues)
{
    const EFModel m = EFModel::bernoulli();
    EXPECT_DOUBLE_EQ(m.mu(0.0), 0.5);
    EXPECT_DOUBLE_EQ(m.mu_dot(0.0), 0.25);
    EXPECT_DOUBLE_EQ(m.mu_ddot(0.0), 0.0);
    EXPECT_NEAR(m.log_partition(0.0), std::log(2.0), 1e-15);
    EXPECT_EQ(m.dispersion(), 1.0);
    EXPECT_EQ(m.noise_bound(), 1.0);
    EXPECT_EQ(m.self_concordance(), 1.0);
    EXPECT_EQ(m.mu_dot_sup(), 0.25);
}

TEST(EFModel, GaussianHandValues)
{
    const EFModel m = EFModel::gaussian(1.0, 3.0);
    EXPECT_DOUBLE_EQ(m.log_partition(2.0), 2.0);
    EXPECT_DOUBLE_EQ(m.mu(-1.5), -1.5);
    EXPECT_DOUBLE_EQ(m.mu_dot(7.0), 1.0);
    EXPECT_DOUBLE_EQ(m.mu_ddot(7.0), 0.0);
    EXPECT_EQ(m.self_concordance(), 0.0);
    EXPECT_EQ(EFModel::gaussian(2.5, 1.0).dispersion(), 2.5);
}

TEST(EFModel, InvalidGaussianParametersThrow)
{
    EXPECT_THROW(EFModel::gaussian(0.0, 1.0), InputError);
    EXPECT_THROW(EFModel::gaussian(1.0, -1.0), InputError);
}

TEST(EFModel, BernoulliStableAtLargeArguments)
{
    const EFModel m = EFModel::bernoulli();
    for (double z : {-800.0, -50.0, -30.0, 30.0, 50.0, 800.0}) {
        EXPECT_TRUE(std::isfinite(m.mu(z)));
        EXPECT_TRUE(std::isfinite(m.mu_dot(z)));
        EXPECT_TRUE(std::isfinite(m.log_partition(z)));
        EXPECT_GE(m.mu_dot(z), 0.0);
    }
    EXPECT_NEAR(m.log_partition(800.0), 800.0, 1e-12);
    EXPECT_NEAR(m.log_partition(-800.0), 0.0, 1e-300);
    EXPECT_DOUBLE_EQ(m.mu(800.0), 1.0);
}

TEST(EFModel, DerivativesMatchFiniteDifferences)
{
    const double h = 1e-5;
    for (const EFModel& m : {EFModel::bernoulli(), EFModel::gaussian(0.7, 2.0)}) {
        for (double z = -10.0; z <= 10.0; z += 0.25) {
            const double fd_mu = (m.log_partition(z + h) - m.log_partition(z - h)) / (2 * h);
            const double fd_dot = (m.mu(z + h) - m.mu(z - h)) / (2 * h);
            const double fd_ddot = (m.mu_dot(z + h) - m.mu_dot(z - h)) / (2 * h);
            auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-4); };
            EXPECT_LE(rel(fd_mu, m.mu(z)), 1e-6) << m.name() << " z=" << z;
            EXPECT_LE(rel(fd_dot, m.mu_dot(z)), 1e-6) << m.name() << " z=" << z;
            EXPECT_LE(std::abs(fd_ddot - m.mu_ddot(z)), 1e-6 * std::max(std::abs(m.mu_ddot(z)), 1e-4))
                << m.name() << " z=" << z;
        }
    }
}

TEST(EFModel, SelfConcordanceOnGrid)
{
    for (const EFModel& m : {EFModel::bernoulli(), EFModel::gaussian(2.0, 1.0)}) {
        for (double z = -40.0; z <= 40.0; z += 0.05) {
            EXPECT_LE(std::abs(m.mu_ddot(z)), m.self_concordance() * m.mu_dot(z) + 1e-12);
            EXPECT_LE(m.mu_dot(z), m.mu_dot_sup() + 1e-15);
        }
    }
}

TEST(EFModel, MonotoneLinkAndConvexPartition)
{
    const EFModel m = EFModel::bernoulli();
    for (double z = -20.0; z < 20.0; z += 0.1) {
        EXPECT_LE(m.mu(z), m.mu(z + 0.1));
        EXPECT_LE(m.log_partition(z + 0.05), 0.5 * (m.log_partition(z) + m.log_partition(z + 0.1)) + 1e-15);
    }
}

TEST(Sampler, BernoulliSaturatedArm)
{
    const EFModel m = EFModel::bernoulli();
    Rng rng(1);
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ones += m.sample(50.0, rng) == 1.0 ? 1 : 0;
    }
    EXPECT_GE(static_cast<double>(ones) / n, 1.0 - 1e-9);
}

TEST(Sampler, BernoulliMeanWithinClt)
{
    const EFModel m = EFModel::bernoulli();
    Rng rng(2);
    const int n = 100000;
    for (double z : {0.0, 1.3, -2.0}) {
        double sum = 0.0;
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = m.sample(z, rng);
            ASSERT_TRUE(y == 0.0 || y == 1.0);
            sum += y;
            sq += y * y;
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        EXPECT_NEAR(mean, m.mu(z), 3.0 * std::sqrt(m.mu_dot(z) / n));
        EXPECT_NEAR(var, m.dispersion() * m.mu_dot(z), 0.02 * m.mu_dot(z));
    }
}

TEST(Sampler, GaussianMomentsAndTruncation)
{
    const double horizon_bound = gaussian_noise_bound(1.0, 1000, 0.1);
    const EFModel m = EFModel::gaussian(1.0, horizon_bound);
    Rng rng(3);
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = m.sample(0.0, rng);
        ASSERT_LE(std::abs(y), horizon_bound);
        sum += y;
        sq += y * y;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(n));
    EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.05);
}

TEST(Sampler, DeterministicUnderSeed)
{
    const EFModel m = EFModel::gaussian(0.5, 2.0);
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(m.sample(0.3, a), m.sample(0.3, b));
    }
}

TEST(NoiseBound, FollowsSubgaussianFormula)
{
    EXPECT_NEAR(gaussian_noise_bound(2.0, 100, 0.1), 2.0 * std::sqrt(2.0 * std::log(2000.0)), 1e-12);
}

TEST(Kappa, HandValues)
{
    const std::vector<double> zero = {0.0};
    const auto g = kappa_constants(EFModel::gaussian(1.0, 1.0), std::vector<double>{0.3, -4.0, 8.0});
    EXPECT_DOUBLE_EQ(g.kappa_star, 1.0);
    EXPECT_DOUBLE_EQ(g.kappa_x, 1.0);
    const auto b0 = kappa_constants(EFModel::bernoulli(), zero);
    EXPECT_DOUBLE_EQ(b0.kappa_star, 4.0);
    EXPECT_DOUBLE_EQ(b0.kappa_x, 4.0);
    const auto b3 = kappa_constants(EFModel::bernoulli(), std::vector<double>{0.0, 3.0});
    EXPECT_DOUBLE_EQ(b3.kappa_star, 4.0);
    // (1 + e^3)^2 / e^3 = e^3 + 2 + e^-3
    EXPECT_NEAR(b3.kappa_x, std::exp(3.0) + 2.0 + std::exp(-3.0), 1e-9);
    EXPECT_FALSE(b3.degenerate);
}

TEST(Kappa, UnderflowReportsInfinity)
{
    const auto k = kappa_constants(EFModel::bernoulli(), std::vector<double>{0.0, 1000.0});
    EXPECT_TRUE(k.degenerate);
    EXPECT_TRUE(std::isinf(k.kappa_x));
}

TEST(Kappa, EmptyValuesThrow) { EXPECT_THROW(kappa_constants(EFModel::bernoulli(), std::vector<double>{}), InputError); }
