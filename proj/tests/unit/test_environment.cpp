#include <cmath>

#include <gtest/gtest.h>

#include "gkb/environment.hpp"
#include "test_util.hpp"

using namespace gkb;
using gkb::testing::scalar;

namespace {

InstanceSpec base_spec(std::uint64_t seed)
{
    InstanceSpec spec;
    spec.seed = seed;
    spec.kernel = Kernel::rbf(0.3);
    spec.num_arms = 12;
    spec.num_anchors = 4;
    spec.B = 2.0;
    spec.domain = DomainBox{2, -1.0, 1.0};
    return spec;
}

Environment two_arm(double f_best, double f_other, const EFModel& model)
{
    // Orthogonal explicit features make f* exactly (f_best, f_other) on the two arms.
    const Kernel k = Kernel::explicit_features(
        2, [](const Point& x) { return Vector(Vector::Unit(2, x(0) > 0.5 ? 1 : 0)); }, 1.0);
    Vector c(2);
    c << f_best, f_other;
    std::vector<Point> anchors = {scalar(0.0), scalar(1.0)};
    return Environment({scalar(0.0), scalar(1.0)}, DualFunction(k, anchors, c), model);
}

} // namespace

TEST(MakeInstance, NormEqualsB)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto spec = base_spec(seed);
        spec.num_anchors = 1 + static_cast<int>(seed % 6);
        const Environment env = make_instance(spec);
        EXPECT_NEAR(env.f_star_norm(), spec.B, 1e-10 * spec.B);
    }
}

TEST(MakeInstance, Deterministic)
{
    const Environment a = make_instance(base_spec(3));
    const Environment b = make_instance(base_spec(3));
    ASSERT_EQ(a.num_arms(), b.num_arms());
    for (Index i = 0; i < a.num_arms(); ++i) {
        EXPECT_EQ(a.decision_set()[i], b.decision_set()[i]);
        EXPECT_EQ(a.f_values()(i), b.f_values()(i));
    }
    EXPECT_EQ(a.f_star().coeffs(), b.f_star().coeffs());
    const Environment c = make_instance(base_spec(4));
    EXPECT_NE(a.f_values(), c.f_values());
}

TEST(MakeInstance, ValuesBoundedByNormTimesK)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto spec = base_spec(seed);
        spec.kernel = seed % 2 == 0 ? Kernel::rbf(0.2) : Kernel::matern(MaternSmoothness::three_halves, 0.5);
        const Environment env = make_instance(spec);
        EXPECT_LE(env.f_values().cwiseAbs().maxCoeff(), spec.B * env.f_star().kernel().bound() + 1e-12);
    }
}

TEST(MakeInstance, ArmsInsideBox)
{
    auto spec = base_spec(1);
    spec.domain = DomainBox{3, 2.0, 5.0};
    const Environment env = make_instance(spec);
    for (const auto& x : env.decision_set()) {
        ASSERT_EQ(x.size(), 3);
        EXPECT_GE(x.minCoeff(), 2.0);
        EXPECT_LE(x.maxCoeff(), 5.0);
    }
}

TEST(MakeInstance, StoredConstantsConsistent)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Environment env = make_instance(base_spec(seed));
        const Index star = env.x_star_index();
        EXPECT_EQ(star, argmax_lowest(env.f_values()));
        Vector mu(env.num_arms());
        for (Index i = 0; i < env.num_arms(); ++i) {
            mu(i) = env.model().mu(env.f_values()(i));
            EXPECT_NEAR(env.f_star()(env.decision_set()[i]), env.f_values()(i), 1e-12);
        }
        EXPECT_EQ(argmax_lowest(mu), star);
        EXPECT_LE(env.kappa_star(), env.kappa_x());
        std::vector<double> values(env.f_values().begin(), env.f_values().end());
        std::swap(values[0], values[static_cast<std::size_t>(star)]);
        const auto kappa = kappa_constants(env.model(), values);
        EXPECT_DOUBLE_EQ(kappa.kappa_star, env.kappa_star());
        EXPECT_DOUBLE_EQ(kappa.kappa_x, env.kappa_x());
    }
}

TEST(MakeInstance, InvalidSpecThrows)
{
    auto spec = base_spec(0);
    spec.num_arms = 1;
    EXPECT_THROW(make_instance(spec), InputError);
    spec = base_spec(0);
    spec.B = 0.0;
    EXPECT_THROW(make_instance(spec), InputError);
    spec = base_spec(0);
    spec.domain.low = 2.0;
    EXPECT_THROW(make_instance(spec), InputError);
}

TEST(Regret, HandValues)
{
    const Environment bern = two_arm(1.0, 0.0, EFModel::bernoulli());
    EXPECT_EQ(bern.x_star_index(), 0);
    EXPECT_EQ(bern.instant_regret(0), 0.0);
    EXPECT_NEAR(bern.instant_regret(1), 1.0 / (1.0 + std::exp(-1.0)) - 0.5, 1e-15);
    EXPECT_NEAR(bern.instant_regret(1), 0.2311, 1e-4);

    const Environment gauss = two_arm(0.3, 1.1, EFModel::gaussian(1.0, 1.0));
    EXPECT_EQ(gauss.x_star_index(), 1);
    EXPECT_NEAR(gauss.instant_regret(0), 0.8, 1e-15);
}

TEST(Regret, NonNegative)
{
    const Environment env = make_instance(base_spec(11));
    for (Index i = 0; i < env.num_arms(); ++i) {
        EXPECT_GE(env.instant_regret(i), 0.0);
    }
    EXPECT_THROW(env.instant_regret(env.num_arms()), InputError);
    EXPECT_THROW(env.instant_regret(-1), InputError);
}

TEST(Regret, TiesResolveToLowestIndex)
{
    const Environment env = two_arm(0.5, 0.5, EFModel::bernoulli());
    EXPECT_EQ(env.x_star_index(), 0);
    EXPECT_EQ(env.instant_regret(1), 0.0);
    Vector v(4);
    v << 1.0, 3.0, 3.0, 2.0;
    EXPECT_EQ(argmax_lowest(v), 1);
}

TEST(Step, DeterministicAndSaturating)
{
    const Environment env = two_arm(40.0, -40.0, EFModel::bernoulli());
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(env.step(0, a), 1.0);
        EXPECT_EQ(env.step(1, b), 0.0);
    }
}

TEST(Step, GaussianMeanWithinCltBand)
{
    const Environment env = two_arm(0.7, 0.0, EFModel::gaussian(0.25, 10.0));
    Rng rng(8);
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += env.step(0, rng);
    }
    EXPECT_NEAR(sum / n, 0.7, 4.0 * 0.5 / std::sqrt(n));
}
