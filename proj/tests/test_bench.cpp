#include "oracles.hpp"

#include "seqfeat/bench.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "json.hpp"

using namespace seqfeat;

TEST_CASE("gen_synthetic", "[bench]") {
    SyntheticParams p;
    p.n_channels = 2;
    p.fs = 10.0;
    p.duration_s = 1.0;
    const SeriesSet set = gen_synthetic(p);
    REQUIRE(set.size() == 2);
    const Series& ch0 = set.at("ch0");
    REQUIRE(ch0.size() == 10);
    CHECK(ch0.tag() == ValueTag::F32);
    CHECK(ch0.view().index_ns().back() == 900'000'000);
    CHECK(set.at("ch1").view().index_ns().data() == ch0.view().index_ns().data());
    // 10 samples x 4 bytes x 2 channels + one shared index of 10 x 8 bytes.
    CHECK(data_bytes(set) == 160);

    const SeriesSet again = gen_synthetic(p);
    CHECK(bitwise_equal(again.at("ch0"), ch0));
    p.seed = 1;
    CHECK_FALSE(bitwise_equal(gen_synthetic(p).at("ch0"), ch0));

    // Values stay near the sinusoid: noise sd is 0.1.
    SyntheticParams big;
    big.n_channels = 1;
    big.duration_s = 20.0;
    big.value_tag = ValueTag::F64;
    const Series s = gen_synthetic(big).at("ch0");
    const auto x = s.view().values<double>();
    const auto t = s.view().index_ns();
    double sq = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - std::sin(2 * M_PI * 0.1 * static_cast<double>(t[i]) * 1e-9);
        sq += r * r;
    }
    CHECK(std::sqrt(sq / static_cast<double>(x.size())) == Catch::Approx(0.1).epsilon(0.05));

    SyntheticParams bad;
    bad.n_channels = 0;
    CHECK_THROWS_AS(gen_synthetic(bad), Error);
    bad = {};
    bad.fs = -1;
    CHECK_THROWS_AS(gen_synthetic(bad), Error);
    bad = {};
    bad.value_tag = ValueTag::Bool;
    CHECK_THROWS_AS(gen_synthetic(bad), Error);
}

TEST_CASE("run_bench on a small protocol", "[bench]") {
    BenchParams p;
    p.data.duration_s = 60.0;
    p.data.fs = 100.0;
    FeatureMatrix serial;
    const BenchReport r = run_bench(p, &serial);
    CHECK(r.n_windows == 3);
    CHECK(r.n_feature_columns == 5 * default_bench_functions().size());
    CHECK(serial.n_columns() == r.n_feature_columns);
    CHECK(r.data_bytes == 5 * 6000 * 4 + 6000 * 8);
    CHECK(r.runtime_s >= 0.0);

    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["n_windows"] == 3);
    CHECK(j["data_bytes"] == r.data_bytes);
    CHECK(j["seed"] == 0);
    CHECK_FALSE(j.contains("peak_rss_bytes"));

    p.n_workers = 4;
    FeatureMatrix parallel;
    run_bench(p, &parallel);
    CHECK(bitwise_equal(parallel, serial));
}
