// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance                 run all criteria, exit 1 if any FAIL
//   acceptance --criterion N   run one; exit 0 PASS, 1 FAIL, 77 SKIP

#include "oracles.hpp"

#include "seqfeat/bench.hpp"
#include "seqfeat/builtins.hpp"
#include "seqfeat/chunking.hpp"
#include "seqfeat/io.hpp"
#include "seqfeat/processing.hpp"
#include "seqfeat/segmentation.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <thread>

using namespace seqfeat;
using oracle::kSecond;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_s; // 0: no runtime budget
    std::function<Outcome()> run;
};

// Thrown by `expect` to end a criterion with FAIL.
struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what) {
    if (!ok) {
        throw Failure{what};
    }
}

IndexDelta sec(std::int64_t s) { return IndexDelta::time_ns(s * kSecond); }

// ---- 1 ----------------------------------------------------------------------

Outcome segmentation_oracle() {
    std::mt19937_64 rng(20240601);
    std::size_t windows = 0;
    constexpr int kCases = 1000;
    for (int trial = 0; trial < kCases; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
        const auto index = oracle::random_index(rng, n, std::uniform_int_distribution<std::int64_t>(-500, 500)(rng));
        const std::int64_t w = std::uniform_int_distribution<std::int64_t>(1, 300)(rng);
        const std::int64_t s = std::uniform_int_distribution<std::int64_t>(1, 150)(rng);
        const Series series = oracle::time_series("s", index, std::vector<double>(n));
        const SegmentGrid g = build_grid(series.index_at(0), series.index_at(n - 1), IndexDelta::time_ns(w),
                                         IndexDelta::time_ns(s));
        const auto starts = oracle::grid_starts<std::int64_t>(index.front(), index.back(), w, s);
        expect(g.n_segments == starts.size(), "grid count differs from enumeration in case " + std::to_string(trial));
        const auto want = oracle::window_positions(index, starts, w);
        for (const auto& positions : {segment_positions(series.view(), g), segment_positions_bisect(series.view(), g)}) {
            expect(positions.size() == want.size(), "segment count differs in case " + std::to_string(trial));
            for (std::size_t k = 0; k < want.size(); ++k) {
                expect(positions[k].lo == want[k].first && positions[k].hi == want[k].second,
                       "positions differ in case " + std::to_string(trial) + " segment " + std::to_string(k));
            }
        }
        windows += want.size();
    }
    return {Status::Pass, std::to_string(kCases) + " cases, " + std::to_string(windows) + " windows"};
}

// ---- 2 ----------------------------------------------------------------------

// Every builtin, wrapped so that empty windows give NaN where the builtin
// itself would fail.
std::vector<FuncWrapper> oracle_functions(double q) {
    std::vector<FuncWrapper> fns;
    for (const auto& name : builtin_names()) {
        if (name == "count" || name == "sum" || name == "abs_energy" || name == "zero_cross") {
            fns.push_back(builtin(name));
        } else if (name == "first" || name == "last") {
            fns.push_back(make_robust(builtin(name, {{"dtype", std::string("f64")}})));
        } else if (name == "quantile") {
            fns.push_back(make_robust(builtin(name, {{"q", q}})));
        } else {
            fns.push_back(make_robust(builtin(name)));
        }
    }
    return fns;
}

Outcome feature_oracle() {
    std::mt19937_64 rng(777);
    std::normal_distribution<double> value(0.0, 3.0);
    constexpr int kExtractions = 200;
    std::size_t cells = 0;
    for (int trial = 0; trial < kExtractions; ++trial) {
        const bool time = trial % 2 == 0;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 300)(rng);
        const auto ticks = oracle::random_index(rng, n, 0);
        std::vector<double> x(n);
        for (auto& v : x) {
            v = value(rng);
        }
        // Time: ticks are milliseconds. Numeric: eighths, exact in binary.
        std::vector<double> t(n);
        std::vector<double> numeric(n);
        std::vector<std::int64_t> ns(n);
        for (std::size_t i = 0; i < n; ++i) {
            ns[i] = ticks[i] * 1'000'000;
            numeric[i] = static_cast<double>(ticks[i]) / 8.0;
            t[i] = time ? static_cast<double>(ticks[i]) * 1e-3 : numeric[i];
        }
        const Series series = time ? oracle::time_series("x", ns, x) : oracle::numeric_series("x", numeric, x);
        const std::int64_t w_ticks = std::uniform_int_distribution<std::int64_t>(1, 200)(rng);
        const std::int64_t s_ticks = std::uniform_int_distribution<std::int64_t>(1, 100)(rng);
        const IndexDelta w = time ? IndexDelta::time_ns(w_ticks * 1'000'000)
                                  : IndexDelta::numeric(static_cast<double>(w_ticks) / 8.0);
        const IndexDelta s = time ? IndexDelta::time_ns(s_ticks * 1'000'000)
                                  : IndexDelta::numeric(static_cast<double>(s_ticks) / 8.0);
        const double q = static_cast<double>(std::uniform_int_distribution<int>(0, 20)(rng)) / 20.0;
        const auto fns = oracle_functions(q);

        FeatureCollection c;
        for (const auto& fn : fns) {
            c.add(FeatureDescriptor{{"x"}, fn, w, s});
        }
        SeriesSet set;
        set.insert(series);
        ExtractOptions opt;
        opt.approve_sparsity = true;
        const FeatureMatrix m = extract(set, c, opt).matrix;

        const auto starts = oracle::grid_starts<std::int64_t>(ticks.front(), ticks.back(), w_ticks, s_ticks);
        const auto windows = oracle::window_positions(ticks, starts, w_ticks);
        const std::string where = "extraction " + std::to_string(trial);
        expect(m.rows() == starts.size(), where + ": row count");
        const std::vector<std::string> key{"x"};
        for (std::size_t k = 0; k < windows.size(); ++k) {
            const std::int64_t end_ticks = starts[k] + w_ticks;
            const IndexValue want_index = time ? IndexValue::time_ns(end_ticks * 1'000'000)
                                               : IndexValue::numeric(static_cast<double>(end_ticks) / 8.0);
            expect(m.index_at(k) == want_index, where + ": output index of window " + std::to_string(k));
            const auto [lo, hi] = windows[k];
            const std::vector<double> wx(x.begin() + static_cast<std::ptrdiff_t>(lo),
                                         x.begin() + static_cast<std::ptrdiff_t>(hi));
            const std::vector<double> wt(t.begin() + static_cast<std::ptrdiff_t>(lo),
                                         t.begin() + static_cast<std::ptrdiff_t>(hi));
            for (std::size_t f = 0; f < fns.size(); ++f) {
                const std::string& name = builtin_names()[f];
                const auto& column = m.column(format_output_name(key, fns[f].output_names().front(), w, s));
                const double got = m.as_double(column, k);
                const auto want = oracle::feature(name, wx, wt, q);
                const double expected = want ? *want : std::numeric_limits<double>::quiet_NaN();
                if (!oracle::feature_matches(name, got, expected)) {
                    std::ostringstream msg;
                    msg << where << ": " << name << " window " << k << " got " << got << " want " << expected;
                    throw Failure{msg.str()};
                }
                ++cells;
            }
        }
    }
    return {Status::Pass, std::to_string(kExtractions) + " extractions, " + std::to_string(cells) + " cells"};
}

// ---- 3 ----------------------------------------------------------------------

struct Fixture {
    SeriesSet set;
    std::vector<std::string> raw_names;
};

// 10 minutes of a 32 Hz accelerometer, a 4 Hz temperature sensor and
// irregular inter-beat intervals with a 90 s dropout from 200 s to 290 s.
Fixture table_fixture() {
    Fixture f;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 0.2);
    const auto regular = [&](double hz) {
        std::vector<std::int64_t> ns;
        for (std::int64_t i = 0; static_cast<double>(i) / hz < 600.0; ++i) {
            ns.push_back(std::llround(static_cast<double>(i) * 1e9 / hz));
        }
        return ns;
    };
    const auto acc_ns = regular(32.0);
    const IndexColumn acc_index = IndexColumn::time_ns(acc_ns);
    for (const char* axis : {"ACC_x", "ACC_y", "ACC_z"}) {
        std::vector<double> v(acc_ns.size());
        for (auto& x : v) {
            x = noise(rng);
        }
        f.set.insert(Series(axis, acc_index, ValueColumn::f64(std::move(v))));
    }
    const auto tmp_ns = regular(4.0);
    std::vector<double> tmp(tmp_ns.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) {
        tmp[i] = 33.0 + 0.002 * static_cast<double>(i) + noise(rng);
    }
    f.set.insert(oracle::time_series("TMP", tmp_ns, tmp));
    std::vector<std::int64_t> ibi_ns;
    std::vector<double> ibi;
    std::uniform_real_distribution<double> beat(0.6, 1.0);
    for (double t = 0.0; t < 600.0;) {
        if (t < 200.0 || t > 290.0) {
            ibi_ns.push_back(std::llround(t * 1e9));
            ibi.push_back(beat(rng));
            t += ibi.back();
        } else {
            t = 290.5;
        }
    }
    f.set.insert(oracle::time_series("IBI", ibi_ns, ibi));
    f.raw_names = {"ACC_x", "ACC_y", "ACC_z", "TMP", "IBI"};
    return f;
}

Outcome irregular_fixture() {
    const Fixture f = table_fixture();
    const std::vector<std::pair<std::int64_t, std::int64_t>> combos{{30, 10}, {60, 20}};
    std::vector<IndexDelta> windows;
    std::vector<IndexDelta> strides;
    FeatureCollection c;
    for (const auto& [w, s] : combos) {
        c.add(expand_multiple({make_robust(builtin("mean")), make_robust(builtin("std"))},
                              {{"ACC_x"}, {"TMP"}, {"IBI"}}, {sec(w)}, {sec(s)}));
    }
    ExtractOptions opt;
    opt.approve_sparsity = true;
    const ExtractResult r = extract(f.set, c, opt);
    const FeatureMatrix& m = r.matrix;

    std::set<std::int64_t> all_ends;
    std::size_t nan_windows = 0;
    for (const auto& [w, s] : combos) {
        for (const std::string name : {"ACC_x", "TMP", "IBI"}) {
            const Series& series = f.set.at(name);
            const auto idx = series.view().index_ns();
            const std::vector<std::int64_t> index(idx.begin(), idx.end());
            const auto starts = oracle::grid_starts<std::int64_t>(index.front(), index.back(), w * kSecond, s * kSecond);
            const auto positions = oracle::window_positions(index, starts, w * kSecond);
            const std::vector<std::string> key{name};
            const auto& mean = m.column(format_output_name(key, "mean", sec(w), sec(s)));
            std::size_t row = 0;
            for (std::size_t k = 0; k < starts.size(); ++k) {
                // Output index = window end from the grid formula.
                const std::int64_t end = index.front() + static_cast<std::int64_t>(k) * s * kSecond + w * kSecond;
                all_ends.insert(end);
                while (row < m.rows() && m.index_at(row).ns() < end) {
                    expect(mean.present[row] == 0, name + ": cell outside its grid at row " + std::to_string(row));
                    ++row;
                }
                expect(row < m.rows() && m.index_at(row).ns() == end,
                       name + " w=" + std::to_string(w) + "s: missing window end " + std::to_string(end));
                const auto [lo, hi] = positions[k];
                const double got = m.as_double(mean, row);
                if (lo == hi) {
                    expect(std::isnan(got), name + ": empty window " + std::to_string(k) + " is not NaN");
                    ++nan_windows;
                } else {
                    const auto x = series.view().subview(lo, hi).values<double>();
                    const double want = *oracle::feature("mean", {x.begin(), x.end()}, {});
                    expect(oracle::feature_matches("mean", got, want),
                           name + ": mean of window " + std::to_string(k));
                }
                ++row;
            }
        }
    }
    expect(m.rows() == all_ends.size(), "row index is not the union of window ends");
    // The dropout spans 90 s: 30 s windows fully inside it start at 200..260 s.
    expect(nan_windows >= 5, "expected empty IBI windows in the dropout, got " + std::to_string(nan_windows));
    return {Status::Pass, std::to_string(m.rows()) + " rows x " + std::to_string(m.n_columns()) + " columns, " +
                              std::to_string(nan_windows) + " empty IBI windows as NaN"};
}

// ---- 4 ----------------------------------------------------------------------

Outcome parallel_determinism() {
    SyntheticParams p;
    p.duration_s = 60.0;
    const SeriesSet data = gen_synthetic(p);
    std::vector<std::vector<std::string>> channels;
    for (const auto& [name, s] : data) {
        channels.push_back({name});
    }
    const FeatureCollection c(expand_multiple(default_bench_functions(), channels, {sec(30)}, {sec(10)}));
    ExtractOptions opt;
    opt.n_workers = 1;
    const FeatureMatrix base = extract(data, c, opt).matrix;
    for (int workers : {2, 8}) {
        opt.n_workers = workers;
        expect(bitwise_equal(extract(data, c, opt).matrix, base),
               std::to_string(workers) + " workers differ from 1 worker");
    }
    return {Status::Pass, "1/2/8 workers bitwise identical, " + std::to_string(base.rows()) + " rows x " +
                              std::to_string(base.n_columns()) + " columns"};
}

// ---- 5, 6 -------------------------------------------------------------------

Outcome memory_ratio() {
    const BenchReport r = run_bench(BenchParams{});
    const double ratio = static_cast<double>(r.peak_extra_bytes) / static_cast<double>(r.data_bytes);
    std::ostringstream detail;
    detail << "peak_extra_bytes " << r.peak_extra_bytes << " / data_bytes " << r.data_bytes << " = " << ratio * 100
           << "%, " << r.n_windows << " windows, extract " << r.runtime_s << " s";
    expect(r.n_windows == 357, "expected 357 windows, got " + std::to_string(r.n_windows));
    expect(ratio < 0.10, detail.str());
    return {Status::Pass, detail.str()};
}

Outcome speedup() {
    const unsigned cores = std::thread::hardware_concurrency();
    if (cores < 4) {
        return {Status::Skip, "host has " + std::to_string(cores) + " core(s); criterion needs >= 4"};
    }
    BenchParams p;
    p.n_workers = 1;
    const double serial = run_bench(p).runtime_s;
    p.n_workers = 4;
    const double parallel = run_bench(p).runtime_s;
    std::ostringstream detail;
    detail << "1 worker " << serial << " s, 4 workers " << parallel << " s, ratio " << parallel / serial;
    expect(parallel <= 0.7 * serial, detail.str());
    return {Status::Pass, detail.str()};
}

// ---- 7 ----------------------------------------------------------------------

Outcome reduce_equivalence() {
    const Fixture f = table_fixture();
    const FeatureCollection c(expand_multiple(
        {builtin("mean"), builtin("std"), builtin("max"), builtin("median"), builtin("slope")}, {{"ACC_x"}, {"TMP"}},
        {sec(30), sec(60)}, {sec(10)}));
    expect(c.n_functions() == 20, "expected 20 descriptors");
    const FeatureMatrix full = extract(f.set, c).matrix;
    const auto names = c.output_names();
    std::mt19937_64 rng(5);
    constexpr int kSubsets = 50;
    for (int trial = 0; trial < kSubsets; ++trial) {
        std::vector<std::string> cols;
        for (const auto& n : names) {
            if (rng() % 3 == 0) {
                cols.push_back(n);
            }
        }
        if (cols.empty()) {
            cols.push_back(names[rng() % names.size()]);
        }
        std::shuffle(cols.begin(), cols.end(), rng);
        const FeatureMatrix reduced = extract(f.set, c.reduce(cols)).matrix;
        // Reducing can shrink the row union; compare on the projected rows.
        const FeatureMatrix projected = full.project(cols);
        const FeatureMatrix got = reduced.project(cols);
        expect(got.rows() <= projected.rows(), "reduced extraction has extra rows");
        std::size_t r = 0;
        for (std::size_t k = 0; k < projected.rows(); ++k) {
            bool any = false;
            for (const auto& col : cols) {
                any = any || projected.column(col).present[k] != 0;
            }
            if (!any) {
                continue;
            }
            expect(r < got.rows() && got.index_at(r) == projected.index_at(k),
                   "subset " + std::to_string(trial) + ": row index differs");
            for (const auto& col : cols) {
                const double a = got.as_double(got.column(col), r);
                const double b = projected.as_double(projected.column(col), k);
                expect((std::isnan(a) && std::isnan(b)) || std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b),
                       "subset " + std::to_string(trial) + ": column " + col + " differs");
            }
            ++r;
        }
        expect(r == got.rows(), "subset " + std::to_string(trial) + ": row count differs");
    }
    return {Status::Pass, std::to_string(kSubsets) + " random subsets of " + std::to_string(names.size()) + " columns"};
}

// ---- 8 ----------------------------------------------------------------------

Outcome chunking() {
    std::mt19937_64 rng(8);
    constexpr int kSeries = 100;
    std::size_t chunks = 0;
    for (int trial = 0; trial < kSeries; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 400)(rng);
        const auto index = oracle::random_index(rng, n, 0);
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = static_cast<double>(i) * 0.5;
        }
        SeriesSet set;
        set.insert(oracle::time_series("s", index, values));
        ChunkSpec spec;
        const auto groups = chunk_set(set, spec);
        const double threshold = spec.gap_factor * infer_period(set.at("s")).as_double();
        std::vector<double> rebuilt;
        for (const auto& g : groups) {
            expect(g.slices.size() == 1, "series " + std::to_string(trial) + ": group without its slice");
            const auto x = g.slices[0].values<double>();
            rebuilt.insert(rebuilt.end(), x.begin(), x.end());
            const auto t = g.slices[0].index_ns();
            for (std::size_t i = 1; i < t.size(); ++i) {
                expect(static_cast<double>(t[i] - t[i - 1]) <= threshold,
                       "series " + std::to_string(trial) + ": internal gap");
            }
        }
        expect(rebuilt == values, "series " + std::to_string(trial) + ": concatenation differs");
        expect(groups.size() == oracle::gap_starts(index, spec.gap_factor).size(),
               "series " + std::to_string(trial) + ": chunk count differs from the gap oracle");
        chunks += groups.size();
    }

    // Gapless fixtures: chunked extraction with overlap = window - stride.
    std::size_t fixtures = 0;
    for (const auto& [w, s, max_dur] : std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>>{
             {30, 10, 120}, {60, 20, 200}, {20, 5, 45}, {10, 10, 100}}) {
        SeriesSet set;
        std::vector<std::int64_t> ns;
        std::vector<double> a;
        std::vector<double> b;
        for (std::int64_t t = 0; t <= 1000; ++t) {
            ns.push_back(t * kSecond);
            a.push_back(std::sin(0.1 * static_cast<double>(t)));
            b.push_back(std::cos(0.07 * static_cast<double>(t)) * 3.0);
        }
        set.insert(oracle::time_series("A", ns, a));
        set.insert(oracle::time_series("B", ns, b));
        ChunkSpec spec;
        spec.max_chunk_dur = sec(max_dur);
        spec.sub_chunk_overlap = sec(w - s);
        const auto groups = chunk_set(set, spec);
        expect(groups.size() > 1, "fixture was not cut");
        const FeatureCollection per_series(expand_multiple(
            {builtin("mean"), builtin("std"), builtin("count"), builtin("slope")}, {{"A"}, {"B"}}, {sec(w)}, {sec(s)}));
        const FeatureMatrix whole = extract(set, per_series).matrix;
        const FeatureMatrix chunked = extract_chunked(groups, per_series).matrix;
        expect(bitwise_equal(whole, chunked), "chunked extraction differs for w=" + std::to_string(w) +
                                                  "s s=" + std::to_string(s) + "s max=" + std::to_string(max_dur) + "s");
        ++fixtures;
    }
    return {Status::Pass, std::to_string(kSeries) + " gapped series (" + std::to_string(chunks) + " chunks), " +
                              std::to_string(fixtures) + " chunked-extraction fixtures"};
}

// ---- 9 ----------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SEQFEAT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome pipeline_semantics() {
    const Fixture f = table_fixture();
    const fs::path dir = fs::temp_directory_path() / "seqfeat_acceptance_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto cleanup = [&] { fs::remove_all(dir); };

    std::vector<Series> acc{f.set.at("ACC_x"), f.set.at("ACC_y"), f.set.at("ACC_z")};
    write_series_csv(acc, dir / "acc.csv", "time");
    write_series_csv(std::vector<Series>{f.set.at("TMP")}, dir / "tmp.csv", "time");
    write_series_csv(std::vector<Series>{f.set.at("IBI")}, dir / "ibi.csv", "time");
    const std::string pipeline_json = R"({"steps": [
      {"function": "smv", "series": [["ACC_x", "ACC_y", "ACC_z"]]},
      {"function": "median_filter", "series": "ACC_SMV", "params": {"size": 5}},
      {"function": "clip", "series": "TMP", "params": {"lower": 30.0, "upper": 40.0}}
    ]})";
    const std::string feature_json = R"({"features": [
      {"series": "ACC_SMV", "functions": ["mean", "std", "max"], "windows": ["30s", "1m"], "strides": "10s"},
      {"series": "TMP", "functions": ["mean", "slope"], "windows": "1m", "strides": "20s"},
      {"series": "IBI", "functions": [{"name": "mean", "robust": {"min_samples": 1}},
                                      {"name": "count", "params": {"dtype": "f64"}, "robust": {"min_samples": 2}}],
       "windows": "30s", "strides": "10s"}
    ], "options": {"approve_sparsity": true}})";
    write_text_file(dir / "pipeline.json", pipeline_json);
    write_text_file(dir / "features.json", feature_json);

    // Library side: required inputs and immutability.
    const Pipeline pipeline = parse_pipeline_config(pipeline_json);
    const auto required = required_inputs(pipeline);
    const std::set<std::string> raw{"ACC_x", "ACC_y", "ACC_z", "TMP"};
    expect(required == raw, "required_inputs is not the raw-series names");

    SeriesSet input;
    for (const char* file : {"acc.csv", "tmp.csv", "ibi.csv"}) {
        for (auto& s : load_csv(dir / file)) {
            input.insert(std::move(s));
        }
    }
    const SeriesSet snapshot = input;
    const SeriesSet processed = run_pipeline(pipeline, input);
    for (const auto& [name, s] : snapshot) {
        expect(bitwise_equal(input.at(name), s), "input series " + name + " changed");
    }
    expect(input.size() == snapshot.size(), "input set changed size");
    const FeatureConfig cfg = parse_feature_config(feature_json);
    std::ostringstream library_csv;
    write_matrix(extract(processed, cfg.collection, cfg.options).matrix, library_csv);

    // CLI side.
    const fs::path log = dir / "cli.log";
    int code = run_cli("process --data " + (dir / "acc.csv").string() + " --data " + (dir / "tmp.csv").string() +
                           " --data " + (dir / "ibi.csv").string() + " --pipeline " + (dir / "pipeline.json").string() +
                           " --out-dir " + (dir / "processed").string(),
                       log);
    if (code != 0) {
        const std::string out = read_text_file(log);
        cleanup();
        throw Failure{"process exited " + std::to_string(code) + ": " + out};
    }
    code = run_cli("extract --data " + (dir / "processed" / "ACC_SMV.csv").string() + " --data " +
                       (dir / "processed" / "TMP.csv").string() + " --data " + (dir / "processed" / "IBI.csv").string() +
                       " --config " + (dir / "features.json").string() + " --out " + (dir / "features.csv").string() +
                       " --log " + (dir / "log.jsonl").string(),
                   log);
    if (code != 0) {
        const std::string out = read_text_file(log);
        cleanup();
        throw Failure{"extract exited " + std::to_string(code) + ": " + out};
    }
    const std::string cli_csv = read_text_file(dir / "features.csv");
    cleanup();
    expect(cli_csv == library_csv.str(), "CLI output differs from library-level extraction");
    const auto lines = std::count(cli_csv.begin(), cli_csv.end(), '\n');
    return {Status::Pass, "process + extract via CLI exit 0, " + std::to_string(lines - 1) +
                              " rows equal to library output; required_inputs = {ACC_x, ACC_y, ACC_z, TMP}"};
}

// ---- 10 ---------------------------------------------------------------------

Outcome naming_grammar() {
    std::mt19937_64 rng(10);
    const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-=";
    const auto token = [&](std::size_t max_len) {
        for (;;) {
            const std::size_t len = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
            std::string s;
            for (std::size_t i = 0; i < len; ++i) {
                s += alphabet[rng() % alphabet.size()];
            }
            if (s.find("__") == std::string::npos) {
                return s;
            }
        }
    };
    const auto delta = [&](bool time) {
        if (time) {
            static const std::vector<std::int64_t> units{1, 1'000, 1'000'000, kSecond, 60 * kSecond, 3600 * kSecond};
            const auto unit = units[rng() % units.size()];
            return IndexDelta::time_ns(std::uniform_int_distribution<std::int64_t>(1, 5000)(rng) * unit);
        }
        return IndexDelta::numeric(std::exp(std::uniform_real_distribution<double>(-20.0, 20.0)(rng)));
    };
    constexpr int kNames = 10000;
    for (int trial = 0; trial < kNames; ++trial) {
        std::vector<std::string> series(std::uniform_int_distribution<std::size_t>(1, 3)(rng));
        for (auto& s : series) {
            s = token(12);
        }
        std::string output = token(16);
        if (output.front() == '_') {
            output.front() = 'o';
        }
        const bool time = rng() % 2 == 0;
        const IndexDelta w = delta(time);
        const IndexDelta s = delta(time);
        const std::string name = format_output_name(series, output, w, s);
        const ParsedName p = parse_output_name(name);
        expect(p.series_names == series && p.output_name == output && p.window == w && p.stride == s,
               "round-trip failed for " + name);
        expect(format_output_name(p.series_names, p.output_name, p.window, p.stride) == name,
               "format(parse) differs for " + name);
    }
    const std::vector<std::string> malformed{"",
                                             "no_separators",
                                             "A__mean",
                                             "A__mean__w=30s",
                                             "A__mean__s=10s",
                                             "A__mean__w=30s_s=",
                                             "A__mean__w=_s=10s",
                                             "__mean__w=30s_s=10s",
                                             "A____w=30s_s=10s",
                                             "A__mean__w=0s_s=10s",
                                             "A__mean__w=30s_s=-1s",
                                             "A__mean__w=30s_s=10",
                                             "A__mean__w=30_s=10s",
                                             "A__mean__w=30x_s=10s",
                                             "A__mean__w=1m30s_s=10s",
                                             "A__mean__w=60s_s=10s",
                                             "A__mean__w=30s_s=10s ",
                                             "A||B__mean__w=30s_s=10s",
                                             "|A__mean__w=30s_s=10s",
                                             "A__mean__w=nan_s=1",
                                             "A__mean__w=inf_s=1",
                                             "A__mean__w=1e400_s=1",
                                             "A__mean__w=30s_s=10s__w=1_s=1x"};
    for (const auto& bad : malformed) {
        bool rejected = false;
        try {
            parse_output_name(bad);
        } catch (const Error& e) {
            rejected = e.code() == ErrorCode::MalformedName;
        }
        expect(rejected, "malformed name accepted: '" + bad + "'");
    }
    return {Status::Pass, std::to_string(kNames) + " round-trips, " + std::to_string(malformed.size()) +
                              " malformed names rejected"};
}

std::vector<Criterion> criteria() {
    return {
        {1, "segmentation oracle suite", 10, segmentation_oracle},
        {2, "feature oracle suite", 30, feature_oracle},
        {3, "irregular/gap fixture", 0, irregular_fixture},
        {4, "parallel determinism", 20, parallel_determinism},
        {5, "memory ratio", 60, memory_ratio},
        {6, "4-worker speedup", 0, speedup},
        {7, "reduce equivalence", 10, reduce_equivalence},
        {8, "chunking reconstruction", 10, chunking},
        {9, "pipeline semantics via CLI", 0, pipeline_semantics},
        {10, "naming grammar", 0, naming_grammar},
    };
}

Status run_one(const Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = c.run();
    } catch (const Failure& f) {
        outcome = {Status::Fail, f.what};
    } catch (const std::exception& e) {
        outcome = {Status::Fail, std::string("unexpected exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (outcome.status == Status::Pass && c.budget_s > 0 && elapsed >= c.budget_s) {
        outcome = {Status::Fail, outcome.detail + "; over the " + std::to_string(c.budget_s) + " s budget"};
    }
    static const char* labels[] = {"PASS", "FAIL", "SKIP"};
    std::ostringstream time;
    time.precision(2);
    time << std::fixed << elapsed;
    std::cout << "[" << labels[static_cast<int>(outcome.status)] << "] " << c.id << " " << c.title << " ("
              << outcome.detail << "; " << time.str() << " s)" << std::endl;
    return outcome.status;
}

} // namespace

int main(int argc, char** argv) {
    const auto all = criteria();
    if (argc == 3 && std::string(argv[1]) == "--criterion") {
        const int id = std::atoi(argv[2]);
        for (const auto& c : all) {
            if (c.id == id) {
                const Status s = run_one(c);
                return s == Status::Pass ? 0 : (s == Status::Skip ? 77 : 1);
            }
        }
        std::cerr << "unknown criterion " << argv[2] << "\n";
        return 2;
    }
    if (argc != 1) {
        std::cerr << "usage: acceptance [--criterion N]\n";
        return 2;
    }
    int failed = 0;
    for (const auto& c : all) {
        failed += run_one(c) == Status::Fail ? 1 : 0;
    }
    return failed == 0 ? 0 : 1;
}
