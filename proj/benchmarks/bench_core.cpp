#include "buyerlearn/dual_learn.hpp"
#include "buyerlearn/learner.hpp"
#include "buyerlearn/rng.hpp"

#include <benchmark/benchmark.h>

using namespace buyerlearn;

namespace {

Vector random_point(SplitMix64 &rng, Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = rng.uniform(lo, hi);
    return v;
}

Ellipsoid random_ellipsoid(SplitMix64 &rng, Eigen::Index n) {
    Matrix b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            b(i, j) = rng.normal();
    return {b * b.transpose() + 0.05 * Matrix::Identity(n, n), random_point(rng, n, -1.0, 1.0)};
}

} // namespace

static void BM_SolveBuyer(benchmark::State &state) {
    const Eigen::Index n = state.range(0);
    SplitMix64 rng(1);
    const BuyerModel m(random_point(rng, n, 0.0, 1.0 / std::sqrt(static_cast<double>(n))), 1e6, FeasibleSet::ball(n));
    for (auto _ : state) {
        const Vector p = random_point(rng, n, 0.05, 0.6);
        benchmark::DoNotOptimize(solve_buyer(m, p).bundle.data());
    }
}
BENCHMARK(BM_SolveBuyer)->Arg(2)->Arg(3)->Arg(5)->Arg(10);

static void BM_Cut(benchmark::State &state) {
    const Eigen::Index n = state.range(0);
    SplitMix64 rng(2);
    const Ellipsoid e = random_ellipsoid(rng, n);
    for (auto _ : state) {
        const Vector u = random_point(rng, n, -1.0, 1.0);
        const double width = std::sqrt(u.dot(e.shape() * u));
        benchmark::DoNotOptimize(cut(e, Halfspace(u, u.dot(e.center()) + 0.2 * width / static_cast<double>(n))));
    }
}
BENCHMARK(BM_Cut)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

static void BM_SelectBundleBall(benchmark::State &state) {
    const Eigen::Index n = state.range(0);
    SplitMix64 rng(3);
    const FeasibleSet ball = FeasibleSet::ball(n);
    const Ellipsoid e = random_ellipsoid(rng, n);
    for (auto _ : state)
        benchmark::DoNotOptimize(select_bundle(e, ball).objective);
}
BENCHMARK(BM_SelectBundleBall)->Arg(2)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

// One value-learning call at the relaxed desk setting (T = 47138).
static void BM_LearnValue(benchmark::State &state) {
    const RealisticPriceSpace prices(Vector::Constant(2, 0.05), Vector::Constant(2, 0.006));
    const BuyerModel truth(Vector::Constant(2, 0.5), 60.0, FeasibleSet::ball(2));
    const SellerKnowledge know(60.0, 60.0, 0.001, 0.5, truth.feasible, prices);
    const double tau = tau_bound(know);
    const SimulatedInitialDualValue provider(truth);
    for (auto _ : state) {
        BuyerOracle oracle(truth, prices);
        DualProblem problem(Vector::Constant(2, 0.5), oracle, provider);
        LearnValueOptions options;
        options.record_trajectory = false;
        benchmark::DoNotOptimize(learn_value(problem, tau, 1.0, know.mu2, prices.radius(), options).g_tilde);
    }
}
BENCHMARK(BM_LearnValue)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
