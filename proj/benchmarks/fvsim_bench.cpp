#include <benchmark/benchmark.h>

#include "fvsim/coupling.hpp"
#include "fvsim/fleming_viot.hpp"

using namespace fvsim;

namespace {

TimePeriodicModel bm_model(int d) {
    return TimePeriodicModel(
        "bm", d, 1.0, [d](double, const Vec&) { return Vec(d); },
        [d](double, const Vec&) { return Mat::identity(d); },
        [](double, const Vec&) { return 0.0; }, 0.0, 1.0, 0.0);
}

}  // namespace

static void BM_KilledPathStep1D(benchmark::State& state) {
    const Domain dom = Domain::interval(0.0, 1.0);
    const auto model = bm_model(1);
    Rng rng(1);
    Vec x{0.5};
    for (auto _ : state) {
        const StepResult r = step(model, dom, 0.0, x, 1e-3, rng, 0.0, 1e30, true);
        if (r.kind == StepResult::Kind::Moved) x = r.position;
        else x = Vec{0.5};
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_KilledPathStep1D);

static void BM_KilledPathStep2D(benchmark::State& state) {
    const Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    const auto model = bm_model(2);
    Rng rng(1);
    Vec x{0.0, 0.0};
    for (auto _ : state) {
        const StepResult r = step(model, dom, 0.0, x, 1e-3, rng, 0.0, 1e30, true);
        if (r.kind == StepResult::Kind::Moved) x = r.position;
        else x = Vec{0.0, 0.0};
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_KilledPathStep2D);

static void BM_FvStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Domain dom = Domain::interval(0.0, 1.0);
    const auto model = bm_model(1);
    SimParams params{5e-4, true, 7, 1};
    ParticleSystem sys = fv_init(model, dom, InitialLaw::uniform(), n, 0.0, params);
    for (auto _ : state) sys.advance(5e-4);
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FvStep)->Arg(500)->Arg(2000)->Arg(8000);

static void BM_HistogramAndTv(benchmark::State& state) {
    const long m = state.range(0);
    Rng rng(3);
    EmpiricalMeasure c1, c2;
    c1.dim = c2.dim = 1;
    for (long i = 0; i < m; ++i) c1.points.push_back(Vec{rng.uniform()});
    for (long i = 0; i < m; ++i) c2.points.push_back(Vec{rng.uniform()});
    const Binning b = Binning::uniform(BoundingBox{Vec{0.0}, Vec{1.0}}, 50);
    for (auto _ : state) {
        const double tv = tv_distance(histogram(c1, b), histogram(c2, b));
        benchmark::DoNotOptimize(tv);
    }
    state.SetItemsProcessed(state.iterations() * 2 * m);
}
BENCHMARK(BM_HistogramAndTv)->Arg(10000)->Arg(100000);

static void BM_CoupledStep2D(benchmark::State& state) {
    const Domain dom = Domain::ball(Vec{0.0, 0.0}, 1.0);
    const auto model = bm_model(2);
    CouplingParams params{0.5, 1e-4, 0.0};
    Rng rng(5);
    CoupledPair pair = make_coupled_pair(Vec{0.3, 0.0}, Vec{-0.3, 0.0}, 0.0, params, rng);
    for (auto _ : state) {
        coupled_step(pair, model, dom, 0.0, 1e-3, params, rng);
        if (!pair.m1.alive() || !pair.m2.alive() || pair.coupled)
            pair = make_coupled_pair(Vec{0.3, 0.0}, Vec{-0.3, 0.0}, 0.0, params, rng);
        benchmark::DoNotOptimize(pair);
    }
}
BENCHMARK(BM_CoupledStep2D);

static void BM_SymSqrt(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(9);
    Mat b(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
    const Mat spd = b.gram() + 0.1 * Mat::identity(n);
    for (auto _ : state) {
        const Mat r = sym_sqrt(spd);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_SymSqrt)->Arg(2)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
