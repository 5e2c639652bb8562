// Serial reference kernels against their fast/parallel counterparts.
//
//   seqfeat_microbench --benchmark_filter=Positions
//   seqfeat_microbench --benchmark_filter=Extract

#include "seqfeat/bench.hpp"
#include "seqfeat/segmentation.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace seqfeat;

namespace {

constexpr std::int64_t kSecond = 1'000'000'000;

const SeriesSet& dataset() {
    static const SeriesSet set = [] {
        SyntheticParams p;
        p.duration_s = 600.0;
        return gen_synthetic(p);
    }();
    return set;
}

SegmentGrid grid_for(const Series& s, std::int64_t window_s, std::int64_t stride_s) {
    return build_grid(s.index_at(0), s.index_at(s.size() - 1), IndexDelta::time_ns(window_s * kSecond),
                      IndexDelta::time_ns(stride_s * kSecond));
}

// Two-pointer sweep: O(n + segments).
void BM_PositionsSweep(benchmark::State& state) {
    const Series& s = dataset().at("ch0");
    const SegmentGrid g = grid_for(s, state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(segment_positions(s.view(), g));
    }
    state.counters["segments"] = static_cast<double>(g.n_segments);
}

// Bisection: O(segments * log n).
void BM_PositionsBisect(benchmark::State& state) {
    const Series& s = dataset().at("ch0");
    const SegmentGrid g = grid_for(s, state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(segment_positions_bisect(s.view(), g));
    }
    state.counters["segments"] = static_cast<double>(g.n_segments);
}

// Whole extraction of the default bench features; the argument is the
// worker count (1 = serial reference).
void BM_Extract(benchmark::State& state) {
    std::vector<std::vector<std::string>> channels;
    for (const auto& [name, s] : dataset()) {
        channels.push_back({name});
    }
    const FeatureCollection c(expand_multiple(default_bench_functions(), channels,
                                              {IndexDelta::time_ns(30 * kSecond)},
                                              {IndexDelta::time_ns(10 * kSecond)}));
    ExtractOptions opt;
    opt.n_workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract(dataset(), c, opt));
    }
    state.counters["threads_available"] = omp_get_num_procs();
}

} // namespace

BENCHMARK(BM_PositionsSweep)->Args({30, 10})->Args({1, 1})->Args({300, 300})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PositionsBisect)->Args({30, 10})->Args({1, 1})->Args({300, 300})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Extract)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
