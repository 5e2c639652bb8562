#include "seqfeat/bench.hpp"

#include "seqfeat/alloc_tracker.hpp"
#include "seqfeat/builtins.hpp"

#include "json.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace seqfeat {

SeriesSet gen_synthetic(const SyntheticParams& params) {
    if (params.n_channels < 1) {
        throw Error(ErrorCode::BadParam, "n_channels must be >= 1");
    }
    if (!(params.fs > 0.0) || !std::isfinite(params.fs)) {
        throw Error(ErrorCode::BadParam, "fs must be positive");
    }
    if (!(params.duration_s > 0.0) || !std::isfinite(params.duration_s)) {
        throw Error(ErrorCode::BadParam, "duration must be positive");
    }
    if (params.value_tag != ValueTag::F32 && params.value_tag != ValueTag::F64) {
        throw Error(ErrorCode::BadParam, "synthetic values must be f32 or f64");
    }
    const auto n = static_cast<std::size_t>(std::llround(params.fs * params.duration_s));
    std::vector<std::int64_t> ns(n);
    for (std::size_t i = 0; i < n; ++i) {
        ns[i] = std::llround(static_cast<long double>(i) * 1e9L / static_cast<long double>(params.fs));
    }
    const IndexColumn index = IndexColumn::time_ns(std::move(ns));
    const auto& t = std::get<std::vector<std::int64_t>>(index.storage());

    SeriesSet set;
    for (int c = 0; c < params.n_channels; ++c) {
        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          static_cast<std::uint32_t>(c)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> noise(0.0, 0.1);
        const double omega = 2.0 * std::numbers::pi * 0.1 * (c + 1);
        const auto value = [&](std::size_t i) { return std::sin(omega * (static_cast<double>(t[i]) * 1e-9)) + noise(rng); };
        ValueColumn values = [&] {
            if (params.value_tag == ValueTag::F32) {
                std::vector<float> v(n);
                for (std::size_t i = 0; i < n; ++i) {
                    v[i] = static_cast<float>(value(i));
                }
                return ValueColumn::f32(std::move(v));
            }
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = value(i);
            }
            return ValueColumn::f64(std::move(v));
        }();
        set.insert(Series("ch" + std::to_string(c), index, std::move(values)));
    }
    return set;
}

std::size_t data_bytes(const SeriesSet& set) {
    std::size_t total = 0;
    std::set<const void*> seen;
    for (const auto& [name, s] : set) {
        total += s.values().byte_size();
        if (seen.insert(s.index().shared().get()).second) {
            total += s.index().byte_size();
        }
    }
    return total;
}

std::vector<FuncWrapper> default_bench_functions() {
    std::vector<FuncWrapper> fns;
    for (const char* name : {"mean", "std", "min", "max", "median", "sum", "var", "rms", "abs_energy", "skewness",
                             "kurtosis", "slope", "count", "zero_cross"}) {
        fns.push_back(builtin(name));
    }
    fns.push_back(builtin("quantile", {{"q", 0.25}}));
    fns.push_back(builtin("quantile", {{"q", 0.75}}));
    return fns;
}

std::string BenchReport::to_json() const {
    nlohmann::ordered_json j;
    j["runtime_s"] = runtime_s;
    j["peak_extra_bytes"] = peak_extra_bytes;
    j["data_bytes"] = data_bytes;
    j["n_windows"] = n_windows;
    j["n_feature_columns"] = n_feature_columns;
    j["n_workers"] = n_workers;
    j["seed"] = seed;
    if (peak_rss_bytes) {
        j["peak_rss_bytes"] = *peak_rss_bytes;
    }
    return j.dump(2) + "\n";
}

BenchReport run_bench(const BenchParams& params, FeatureMatrix* matrix_out) {
    const SeriesSet data = gen_synthetic(params.data);
    const std::vector<FuncWrapper> functions =
        params.functions.empty() ? default_bench_functions() : params.functions;
    std::vector<std::vector<std::string>> entries;
    for (const auto& name : data.names()) {
        entries.push_back({name});
    }
    const FeatureCollection collection(expand_multiple(functions, entries, {params.window}, {params.stride}));
    ExtractOptions options;
    options.n_workers = params.n_workers;

    BenchReport report;
    report.data_bytes = data_bytes(data);
    report.n_workers = params.n_workers;
    report.seed = params.data.seed;

    std::optional<ExtractResult> result;
    {
        const alloc::HighWatermark watermark;
        const auto t0 = std::chrono::steady_clock::now();
        result.emplace(extract(data, collection, options));
        const auto t1 = std::chrono::steady_clock::now();
        report.peak_extra_bytes = watermark.peak_extra_bytes();
        report.runtime_s = std::chrono::duration<double>(t1 - t0).count();
    }
    report.n_windows = result->matrix.rows();
    report.n_feature_columns = result->matrix.n_columns();
    if (params.measure_rss) {
        rusage usage{};
        getrusage(RUSAGE_SELF, &usage);
        report.peak_rss_bytes = static_cast<std::size_t>(usage.ru_maxrss) * 1024;
    }
    if (matrix_out != nullptr) {
        *matrix_out = std::move(result->matrix);
    }
    return report;
}

} // namespace seqfeat
