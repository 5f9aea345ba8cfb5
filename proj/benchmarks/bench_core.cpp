#include <random>

#include <benchmark/benchmark.h>

#include "gkb/concentration.hpp"
#include "gkb/estimation.hpp"
#include "gkb/kernels.hpp"
#include "gkb/policy.hpp"

using namespace gkb;

namespace {

std::vector<Point> points(int n, int dim, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> out;
    for (int i = 0; i < n; ++i) {
        Point p(dim);
        for (int j = 0; j < dim; ++j) {
            p(j) = u(rng);
        }
        out.push_back(p);
    }
    return out;
}

PolicyState warm_state(int arms, int rounds, double lambda)
{
    InstanceSpec spec;
    spec.seed = 3;
    spec.kernel = Kernel::rbf(0.2);
    spec.num_arms = arms;
    spec.num_anchors = 8;
    spec.B = 1.5;
    const Environment env = make_instance(spec);
    PolicyConfig pc;
    pc.confidence = ConfidenceConfig::from_model(env.model(), 0.1, lambda, spec.B, 1.0);
    PolicyState state(pc, env.f_star().kernel(), env.model(), env.decision_set());
    Rng rng(1);
    std::uniform_int_distribution<Index> arm(0, arms - 1);
    for (int t = 0; t < rounds; ++t) {
        const Index a = arm(rng);
        state.observe(a, env.step(a, rng));
    }
    return state;
}

} // namespace

static void BM_gram_logdet(benchmark::State& state)
{
    Rng rng(1);
    const auto pts = points(static_cast<int>(state.range(0)), 3, rng);
    const Kernel k = Kernel::matern(MaternSmoothness::five_halves, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(log_det_ratio(gram(k, pts, 1.0), 1.0));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_gram_logdet)->RangeMultiplier(2)->Range(16, 512)->Complexity();

static void BM_gram_extend(benchmark::State& state)
{
    Rng rng(2);
    const auto pts = points(static_cast<int>(state.range(0)), 2, rng);
    const Kernel k = Kernel::rbf(0.3);
    for (auto _ : state) {
        GramMatrix g(Matrix(0, 0), 1.0);
        std::vector<Point> seen;
        for (const auto& p : pts) {
            g.extend(kernel_column(k, seen, p), k(p, p));
            seen.push_back(p);
        }
        benchmark::DoNotOptimize(g.entries().data());
    }
}
BENCHMARK(BM_gram_extend)->Arg(64)->Arg(256);

static void BM_fit_mle(benchmark::State& state)
{
    Rng rng(3);
    const int n = static_cast<int>(state.range(0));
    History history(Kernel::rbf(0.3), 1.0);
    std::bernoulli_distribution coin(0.4);
    for (const auto& p : points(n, 2, rng)) {
        history.append(p, coin(rng) ? 1.0 : 0.0);
    }
    const Design design = Design::from_history(history);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_mle(design, EFModel::bernoulli(), 1.0).alpha.data());
    }
}
BENCHMARK(BM_fit_mle)->Arg(32)->Arg(128)->Arg(512);

static void BM_ucb_value(benchmark::State& state)
{
    const PolicyState ps = warm_state(static_cast<int>(state.range(0)), 300, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ucb_value(ps, 0));
    }
}
BENCHMARK(BM_ucb_value)->Arg(10)->Arg(30);

static void BM_select_action(benchmark::State& state)
{
    PolicyState ps = warm_state(30, 300, 1.0);
    Rng rng(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(select_action(ps, rng));
    }
}
BENCHMARK(BM_select_action)->Unit(benchmark::kMillisecond);

static void BM_bernstein_bound(benchmark::State& state)
{
    int t = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bernstein_bound(t, 12.5, 1.0, 1.0, 1.0, 0.1));
        t = t % 100000 + 1;
    }
}
BENCHMARK(BM_bernstein_bound);

BENCHMARK_MAIN();
