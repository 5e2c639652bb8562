#include "oracles.hpp"

#include "seqfeat/builtins.hpp"
#include "seqfeat/chunking.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace seqfeat;
using oracle::kSecond;

namespace {

IndexValue num(double v) { return IndexValue::numeric(v); }
IndexValue at_s(std::int64_t s) { return IndexValue::time_ns(s * kSecond); }
IndexDelta sec(std::int64_t s) { return IndexDelta::time_ns(s * kSecond); }

Series seconds_series(std::string name, std::int64_t from, std::int64_t to, std::int64_t step_s = 1) {
    std::vector<std::int64_t> ns;
    std::vector<double> v;
    for (std::int64_t t = from; t <= to; t += step_s) {
        ns.push_back(t * kSecond);
        v.push_back(std::sin(static_cast<double>(t) * 0.37) + 0.01 * static_cast<double>(t));
    }
    return oracle::time_series(std::move(name), std::move(ns), std::move(v));
}

template <class Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ParseError;
}

} // namespace

TEST_CASE("chunk_series examples", "[chunking]") {
    const Series gapped = oracle::numeric_series("g", {0, 1, 2, 10, 11, 12}, std::vector<double>(6));
    CHECK(chunk_series(gapped, {}) == std::vector<ChunkRange>{{num(0), num(2), true}, {num(10), num(12), true}});

    ChunkSpec cut;
    cut.max_chunk_dur = sec(40);
    CHECK(chunk_series(seconds_series("r", 0, 100), cut) ==
          std::vector<ChunkRange>{{at_s(0), at_s(40), false}, {at_s(40), at_s(80), false}, {at_s(80), at_s(100), true}});

    cut.sub_chunk_overlap = sec(5);
    CHECK(chunk_series(seconds_series("r", 0, 100), cut) ==
          std::vector<ChunkRange>{{at_s(0), at_s(40), false}, {at_s(35), at_s(80), false}, {at_s(75), at_s(100), true}});

    const Series single = oracle::numeric_series("s", {7}, {1});
    CHECK(chunk_series(single, {}) == std::vector<ChunkRange>{{num(7), num(7), true}});

    ChunkSpec min;
    min.min_chunk_dur = IndexDelta::numeric(3);
    const Series short_run = oracle::numeric_series("g", {0, 1, 2, 10, 11, 12, 13}, std::vector<double>(7));
    CHECK(chunk_series(short_run, min) == std::vector<ChunkRange>{{num(10), num(13), true}});
}

TEST_CASE("chunk spec validation", "[chunking]") {
    const Series s = seconds_series("s", 0, 10);
    ChunkSpec bad;
    bad.gap_factor = 1.0;
    CHECK(code_of([&] { chunk_series(s, bad); }) == ErrorCode::BadSpec);
    ChunkSpec overlap;
    overlap.max_chunk_dur = sec(5);
    overlap.sub_chunk_overlap = sec(5);
    CHECK(code_of([&] { chunk_series(s, overlap); }) == ErrorCode::BadSpec);
    ChunkSpec kind;
    kind.max_chunk_dur = IndexDelta::numeric(5);
    CHECK(code_of([&] { chunk_series(s, kind); }) == ErrorCode::KindMismatch);
}

TEST_CASE("chunk_set groups overlapping ranges", "[chunking]") {
    SECTION("fully overlapping") {
        SeriesSet set;
        set.insert(seconds_series("A", 0, 50));
        set.insert(seconds_series("B", 0, 50));
        const auto groups = chunk_set(set, {});
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].slices.size() == 2);
    }
    SECTION("disjoint") {
        SeriesSet set;
        set.insert(oracle::numeric_series("A", {0, 5, 10}, {0, 0, 0}));
        set.insert(oracle::numeric_series("B", {20, 25, 30}, {0, 0, 0}));
        const auto groups = chunk_set(set, {});
        REQUIRE(groups.size() == 2);
        CHECK(groups[0].range == ChunkRange{num(0), num(10), true});
        CHECK(groups[1].range == ChunkRange{num(20), num(30), true});
        REQUIRE(groups[0].slices.size() == 1);
        CHECK(groups[0].slices[0].name() == "A");
        CHECK(groups[1].slices[0].name() == "B");
    }
    SECTION("bridged") {
        SeriesSet set;
        set.insert(oracle::numeric_series("A", {0, 5, 10}, {0, 0, 0}));
        set.insert(oracle::numeric_series("B", {5, 10, 15, 20, 25, 30}, std::vector<double>(6)));
        const auto groups = chunk_set(set, {});
        REQUIRE(groups.size() == 1);
        CHECK(groups[0].range == ChunkRange{num(0), num(30), true});
        CHECK(groups[0].slices.size() == 2);
    }
    SECTION("kinds must match") {
        SeriesSet set;
        set.insert(oracle::numeric_series("A", {0, 1}, {0, 0}));
        set.insert(seconds_series("B", 0, 10));
        CHECK(code_of([&] { chunk_set(set, {}); }) == ErrorCode::KindMismatch);
    }
}

TEST_CASE("chunks reconstruct the series and contain no gap", "[chunking][property]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 120)(rng);
        const auto index = oracle::random_index(rng, n, 0);
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = static_cast<double>(i);
        }
        const Series s = oracle::time_series("s", index, values);
        const double factor = std::uniform_real_distribution<double>(1.5, 8.0)(rng);
        ChunkSpec spec;
        spec.gap_factor = factor;
        const auto ranges = chunk_series(s, spec);

        // Chunk starts equal the linear-scan gap oracle.
        const auto starts = oracle::gap_starts(index, factor);
        REQUIRE(ranges.size() == starts.size());
        const double period = infer_period(s).as_double();

        std::vector<double> rebuilt;
        for (std::size_t c = 0; c < ranges.size(); ++c) {
            REQUIRE(ranges[c].begin.ns() == index[starts[c]]);
            const auto slice = slice_closed(s.view(), ranges[c].begin, ranges[c].end);
            const auto x = slice.values<double>();
            rebuilt.insert(rebuilt.end(), x.begin(), x.end());
            const auto t = slice.index_ns();
            for (std::size_t i = 1; i < t.size(); ++i) {
                REQUIRE(static_cast<double>(t[i] - t[i - 1]) <= factor * period);
            }
        }
        REQUIRE(rebuilt == values);
    }
}

TEST_CASE("chunked extraction equals whole-series extraction", "[chunking][extract]") {
    // Two gapless 1 Hz series over [0, 600] s; windows and the chunk size are
    // multiples of the stride.
    SeriesSet set;
    set.insert(seconds_series("A", 0, 600));
    set.insert(seconds_series("B", 0, 600));
    FeatureCollection c(expand_multiple({builtin("mean"), builtin("max"), builtin("count"), builtin("slope")},
                                        {{"A"}, {"B"}}, {sec(30), sec(60)}, {sec(10)}));
    c.add(FeatureDescriptor{{"A"}, builtin("sum"), sec(50), sec(10)});
    const FeatureMatrix whole = extract(set, c).matrix;

    for (std::int64_t max_dur : {100, 120, 200, 590}) {
        ChunkSpec spec;
        spec.max_chunk_dur = sec(max_dur);
        spec.sub_chunk_overlap = sec(50); // largest window - stride
        const auto groups = chunk_set(set, spec);
        REQUIRE(groups.size() > 1);
        const FeatureMatrix chunked = extract_chunked(groups, c).matrix;
        INFO("max_chunk_dur " << max_dur);
        CHECK(bitwise_equal(chunked, whole));
    }
}

TEST_CASE("chunked extraction with gaps keeps only windows inside chunks", "[chunking][extract]") {
    // A gap of 100 s in the middle: windows spanning it are lost, all others match.
    std::vector<std::int64_t> ns;
    std::vector<double> v;
    for (std::int64_t t = 0; t <= 400; ++t) {
        if (t > 150 && t < 250) {
            continue;
        }
        ns.push_back(t * kSecond);
        v.push_back(static_cast<double>(t % 17));
    }
    SeriesSet set;
    set.insert(oracle::time_series("A", ns, v));
    FeatureCollection c;
    c.add(FeatureDescriptor{{"A"}, make_robust(builtin("mean")), sec(20), sec(10)});
    const FeatureMatrix whole = extract(set, c).matrix;
    const auto groups = chunk_set(set, {});
    REQUIRE(groups.size() == 2);
    const FeatureMatrix chunked = extract_chunked(groups, c).matrix;

    const auto& wc = whole.column("A__mean__w=20s_s=10s");
    const auto& cc = chunked.column("A__mean__w=20s_s=10s");
    std::size_t r = 0;
    for (std::size_t k = 0; k < chunked.rows(); ++k) {
        const auto t = chunked.index_at(k);
        // Chunk 2 starts at 250 s, off the whole-series grid origin, so its
        // windows are compared against a direct recomputation instead.
        if (t.ns() <= 150 * kSecond) {
            while (whole.index_at(r) < t) {
                ++r;
            }
            REQUIRE(whole.index_at(r) == t);
            CHECK(chunked.as_double(cc, k) == whole.as_double(wc, r));
        } else {
            const auto slice = slice_range(set.at("A"), offset(t, sec(-20)), t);
            const auto x = slice.values<double>();
            const double want = *oracle::feature("mean", {x.begin(), x.end()}, {});
            CHECK(oracle::feature_matches("mean", chunked.as_double(cc, k), want));
        }
    }
    CHECK(chunked.rows() == 14 + 14);
}
