#include "oracles.hpp"

#include "seqfeat/builtins.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace seqfeat;

namespace {

Scalar run(const FuncWrapper& fw, const Series& s) {
    std::vector<SeriesView> in{s.view()};
    std::vector<Scalar> out(fw.n_outputs());
    fw(in, out);
    return out.front();
}

Scalar run(std::string_view name, const std::vector<double>& values, const Params& params = {}) {
    std::vector<double> index(values.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        index[i] = static_cast<double>(i);
    }
    return run(builtin(name, params), oracle::numeric_series("x", index, values));
}

double as_d(const Scalar& s) { return std::get<double>(s); }

} // namespace

TEST_CASE("builtin examples", "[builtins]") {
    CHECK(as_d(run("mean", {1, 2, 3, 4})) == 2.5);
    CHECK(as_d(run("std", {2, 4, 4, 4, 5, 5, 7, 9})) == 2.0);
    CHECK(as_d(run("var", {2, 4, 4, 4, 5, 5, 7, 9})) == 4.0);
    CHECK(std::get<std::int64_t>(run("zero_cross", {1, -1, 1, -1})) == 3);
    CHECK(std::get<std::int64_t>(run("zero_cross", {1, 0, -1})) == 0);
    CHECK(std::get<std::int64_t>(run("count", {1, 2, 3})) == 3);
    CHECK(as_d(run("count", {1, 2, 3}, {{"dtype", std::string("f64")}})) == 3.0);
    CHECK(as_d(run("median", {5, 1, 3})) == 3.0);
    CHECK(as_d(run("median", {4, 1, 3, 2})) == 2.5);
    CHECK(as_d(run("quantile", {1, 2, 3, 4, 5}, {{"q", 0.25}})) == 2.0);
    CHECK(as_d(run("quantile", {1, 2, 3, 4}, {{"q", 0.5}})) == 2.5);
    CHECK(as_d(run("quantile", {3, 1}, {{"q", 1.0}})) == 3.0);
    CHECK(as_d(run("rms", {3, 4})) == std::sqrt(12.5));
    CHECK(as_d(run("abs_energy", {3, 4})) == 25.0);
    CHECK(as_d(run("min", {3, -4, 1})) == -4.0);
    CHECK(as_d(run("max", {3, -4, 1})) == 3.0);
    CHECK(as_d(run("skewness", {1, 2, 3})) == 0.0);
    CHECK(as_d(run("kurtosis", {1, 1, 3, 3})) == Catch::Approx(-2.0));
    CHECK(std::isnan(as_d(run("skewness", {2, 2, 2}))));
    CHECK(as_d(run("slope", {1, 3, 5})) == 2.0);
    CHECK(std::isnan(as_d(run("slope", {7}))));
    CHECK(as_d(run("first", {7, 8})) == 7.0);
    CHECK(as_d(run("last", {7, 8})) == 8.0);
}

TEST_CASE("slope measures time indices in seconds from the window start", "[builtins]") {
    const Series s = oracle::time_series("s", {1'000'000'000'000, 1'000'500'000'000, 1'001'000'000'000}, {0, 1, 2});
    CHECK(std::get<double>(run(builtin("slope"), s)) == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("empty windows", "[builtins]") {
    for (const char* name : {"count", "sum", "abs_energy", "zero_cross"}) {
        INFO(name);
        CHECK_NOTHROW(run(name, {}));
    }
    CHECK(std::get<std::int64_t>(run("count", {})) == 0);
    for (const char* name : {"mean", "std", "var", "min", "max", "median", "rms", "skewness", "kurtosis", "slope",
                             "first", "last"}) {
        INFO(name);
        CHECK_THROWS_AS(run(name, {}), Error);
    }
}

TEST_CASE("builtin parameters and registry", "[builtins]") {
    CHECK_THROWS_MATCHES(builtin("nope"), Error, Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("nope")));
    CHECK_THROWS_AS(builtin("quantile"), Error);
    CHECK_THROWS_AS(builtin("quantile", {{"q", 1.5}}), Error);
    CHECK_THROWS_AS(builtin("count", {{"dtype", std::string("bool")}}), Error);
    CHECK(builtin("quantile", {{"q", 0.25}}).output_names() == std::vector<std::string>{"quantile_0.25"});
    CHECK(builtin("slope").input_mode() == InputMode::ValuesAndIndex);
    CHECK(builtin_names().size() == 17);
    for (const auto& name : builtin_names()) {
        const Params p = name == "quantile" ? Params{{"q", 0.5}} : Params{};
        const FuncWrapper fw = builtin(name, p);
        REQUIRE(fw.spec().has_value());
        CHECK(fw.spec()->builtin == name);
    }
}

TEST_CASE("output tags", "[builtins]") {
    CHECK(builtin("count").output_tags().front() == ValueTag::I64);
    CHECK(builtin("zero_cross").output_tags().front() == ValueTag::I64);
    CHECK(builtin("mean").output_tags().front() == ValueTag::F64);
    CHECK_FALSE(builtin("last").output_tags().front().has_value());
    CHECK(builtin("last", {{"dtype", std::string("f64")}}).output_tags().front() == ValueTag::F64);
}

TEST_CASE("first and last keep categorical labels", "[builtins]") {
    const Series s("act", IndexColumn::numeric({0, 1, 2}), ValueColumn::categorical_from_strings({"sit", "walk", "run"}));
    CHECK(std::get<std::string_view>(run(builtin("first"), s)) == "sit");
    CHECK(std::get<std::string_view>(run(builtin("last"), s)) == "run");
    CHECK_THROWS_AS(run(builtin("mean"), s), Error);
}

TEST_CASE("builtins accept every numeric value tag", "[builtins]") {
    const IndexColumn idx = IndexColumn::numeric({0, 1, 2, 3});
    const Series f32("f", idx, ValueColumn::f32({1.5f, 2.5f, -1.0f, 0.0f}));
    const Series i64("i", idx, ValueColumn::i64({1, 2, -3, 4}));
    const Series b("b", idx, ValueColumn::boolean({1, 0, 1, 1}));
    CHECK(std::get<double>(run(builtin("sum"), f32)) == 3.0);
    CHECK(std::get<double>(run(builtin("mean"), i64)) == 1.0);
    CHECK(std::get<double>(run(builtin("sum"), b)) == 3.0);
    CHECK(std::get<std::int64_t>(run(builtin("last"), i64)) == 4);
    CHECK(std::get<bool>(run(builtin("first"), b)));
    CHECK(std::get<std::int64_t>(run(builtin("zero_cross"), i64)) == 2);
}

TEST_CASE("builtins match the naive oracle on random windows", "[builtins][property]") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> value(0.0, 3.0);
    std::uniform_int_distribution<std::size_t> size(1, 40);
    const std::vector<double> qs{0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = size(rng);
        std::vector<double> x(n);
        std::vector<double> t(n);
        double clock = 0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = value(rng);
            t[i] = clock;
            clock += std::uniform_real_distribution<double>(0.01, 2.0)(rng);
        }
        const Series s = oracle::numeric_series("x", t, x);
        for (const auto& name : builtin_names()) {
            const double q = qs[static_cast<std::size_t>(trial) % qs.size()];
            const Params p = name == "quantile" ? Params{{"q", q}} : Params{};
            const Scalar got = run(builtin(name, p), s);
            const double g = std::holds_alternative<std::int64_t>(got) ? static_cast<double>(std::get<std::int64_t>(got))
                                                                       : std::get<double>(got);
            const auto want = oracle::feature(name, x, t, q);
            REQUIRE(want.has_value());
            INFO(name << " n=" << n << " got=" << g << " want=" << *want);
            REQUIRE(oracle::feature_matches(name, g, *want));
        }
    }
}
