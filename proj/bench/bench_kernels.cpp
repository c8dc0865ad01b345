#include <benchmark/benchmark.h>

#include "henon/census.hpp"
#include "henon/lyapunov.hpp"
#include "henon/measure.hpp"
#include "henon/parallel.hpp"
#include "henon/rng.hpp"
#include "henon/sampler.hpp"
#include "henon/spectral.hpp"

using namespace henon;

namespace {

const HenonMap& horseshoe()
{
    static const HenonMap f = HenonMap::quadratic(1.0, -10.0);
    return f;
}

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void label(benchmark::State& state)
{
    state.SetLabel(state.range(0) ? "parallel x" + std::to_string(thread_count()) : "serial");
}

void BM_census(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(1));
    for (auto _ : state) {
        auto c = census(horseshoe(), n, 16LL << n, 1, kDefaultCensusTol, mode(state));
        benchmark::DoNotOptimize(c.records.data());
    }
    label(state);
}

void BM_classify(benchmark::State& state)
{
    const auto c = census(horseshoe(), 8, 16LL << 8, 1);
    for (auto _ : state) {
        auto recs = c.records;
        classify_records(horseshoe(), recs, 0.1, mode(state));
        benchmark::DoNotOptimize(recs.data());
    }
    label(state);
}

void BM_sample_mu(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(1));
    const auto lines = default_lines(horseshoe(), 1);
    for (auto _ : state) {
        auto r = sample_mu(horseshoe(), n, lines, 1LL << (2 * n), 1, mode(state));
        benchmark::DoNotOptimize(r.roots.data());
    }
    label(state);
}

void BM_lyapunov(benchmark::State& state)
{
    const auto r = sample_mu(horseshoe(), 5, default_lines(horseshoe(), 1), 1 << 10, 1);
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < 64; ++i) pts.push_back(r.roots[i * r.roots.size() / 64].point);
    for (auto _ : state) {
        auto recs = batch_exponents(horseshoe(), pts, 200, true, 1, mode(state));
        benchmark::DoNotOptimize(recs.data());
    }
    label(state);
}

// sliced_w1 always runs on the pool; the serial reference is the pool at one thread
void BM_sliced_w1(benchmark::State& state)
{
    RngStream rng(3);
    std::vector<Point2> a, b;
    for (int i = 0; i < 20000; ++i) a.push_back(rng.bidisk(5.0));
    for (int i = 0; i < 2000; ++i) b.push_back(rng.bidisk(5.0));
    const auto ma = EmpiricalMeasure::uniform(a), mb = EmpiricalMeasure::uniform(b);
    const int saved = thread_count();
    if (!state.range(0)) set_thread_count(1);
    for (auto _ : state) benchmark::DoNotOptimize(sliced_w1(mb, ma, 256, 1));
    label(state);
    set_thread_count(saved);
}

}  // namespace

BENCHMARK(BM_census)->ArgsProduct({{0, 1}, {6, 8}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_classify)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_mu)->ArgsProduct({{0, 1}, {5, 6}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lyapunov)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sliced_w1)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
