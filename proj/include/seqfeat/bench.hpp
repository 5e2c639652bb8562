#pragma once

#include "seqfeat/features.hpp"
#include "seqfeat/series.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seqfeat {

struct SyntheticParams {
    int n_channels = 5;
    double fs = 1000.0;
    double duration_s = 3600.0;
    std::uint64_t seed = 0;
    /// F32 or F64.
    ValueTag value_tag = ValueTag::F32;
};

/// Channel c ("ch<c>") samples t_i = i / fs (rounded to ns) for
/// i < round(fs * duration) with value sin(2 pi 0.1 (c+1) t_i) + N(0, 0.1).
/// All channels share one index storage. Throws BadParam.
SeriesSet gen_synthetic(const SyntheticParams& params);

/// Value bytes of every series plus each distinct index storage once.
std::size_t data_bytes(const SeriesSet& set);

/// The default per-channel feature set of the benchmark.
std::vector<FuncWrapper> default_bench_functions();

struct BenchParams {
    SyntheticParams data;
    IndexDelta window = IndexDelta::time_ns(30'000'000'000);
    IndexDelta stride = IndexDelta::time_ns(10'000'000'000);
    /// Empty means default_bench_functions().
    std::vector<FuncWrapper> functions;
    int n_workers = 1;
    bool measure_rss = false;
};

struct BenchReport {
    double runtime_s = 0.0;
    std::size_t peak_extra_bytes = 0;
    std::size_t data_bytes = 0;
    std::size_t n_windows = 0;
    std::size_t n_feature_columns = 0;
    int n_workers = 1;
    std::uint64_t seed = 0;
    std::optional<std::size_t> peak_rss_bytes;

    std::string to_json() const;
};

/// Generates the data, then times extract alone. `matrix_out` receives the
/// extracted matrix when non-null.
BenchReport run_bench(const BenchParams& params, FeatureMatrix* matrix_out = nullptr);

} // namespace seqfeat
