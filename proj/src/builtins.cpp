#include "seqfeat/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqfeat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const SeriesView& single_input(std::span<const SeriesView> inputs, std::string_view name) {
    if (inputs.size() != 1) {
        throw Error(ErrorCode::BadParam,
                    std::string(name) + " expects one input series, got " + std::to_string(inputs.size()));
    }
    return inputs.front();
}

void require_samples(const SeriesView& v, std::string_view name) {
    if (v.empty()) {
        throw Error(ErrorCode::TooShort, std::string(name) + " of an empty window of '" + v.name() + "'");
    }
}

template <class T>
double sum_of(std::span<const T> x) {
    double s = 0.0;
    for (const T v : x) {
        s += static_cast<double>(v);
    }
    return s;
}

template <class T>
double mean_of(std::span<const T> x) {
    return sum_of(x) / static_cast<double>(x.size());
}

// Central moment of order `order` about `mean`.
template <class T>
double central_moment(std::span<const T> x, double mean, int order) {
    double acc = 0.0;
    for (const T v : x) {
        const double d = static_cast<double>(v) - mean;
        double p = d * d;
        if (order == 3) {
            p *= d;
        } else if (order == 4) {
            p *= p;
        }
        acc += p;
    }
    return acc / static_cast<double>(x.size());
}

template <class T>
std::vector<double> to_doubles(std::span<const T> x) {
    return std::vector<double>(x.begin(), x.end());
}

// Linear interpolation between order statistics at h = (n - 1) * q.
double quantile_in_place(std::vector<double>& xs, double q) {
    const double h = static_cast<double>(xs.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(lo), xs.end());
    const double lo_value = xs[lo];
    if (lo + 1 >= xs.size() || h == static_cast<double>(lo)) {
        return lo_value;
    }
    const double hi_value = *std::min_element(xs.begin() + static_cast<std::ptrdiff_t>(lo) + 1, xs.end());
    return lo_value + (h - static_cast<double>(lo)) * (hi_value - lo_value);
}

double median_in_place(std::vector<double>& xs) {
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

Scalar element_as_scalar(const SeriesView& v, std::size_t i, bool force_f64) {
    switch (v.tag()) {
    case ValueTag::F64: return v.values<double>()[i];
    case ValueTag::F32: return static_cast<double>(v.values<float>()[i]);
    case ValueTag::I64: {
        const auto value = v.values<std::int64_t>()[i];
        return force_f64 ? Scalar{static_cast<double>(value)} : Scalar{value};
    }
    case ValueTag::Bool: {
        const bool value = v.values<std::uint8_t>()[i] != 0;
        return force_f64 ? Scalar{value ? 1.0 : 0.0} : Scalar{value};
    }
    case ValueTag::Categorical:
        if (force_f64) {
            throw Error(ErrorCode::TypeMismatch, "categorical series '" + v.name() + "' cannot produce a float");
        }
        return std::string_view(v.categorical_labels()[static_cast<std::size_t>(v.categorical_codes()[i])]);
    }
    return std::monostate{};
}

bool dtype_is_f64(const Params& params, std::string_view name, std::initializer_list<std::string_view> allowed) {
    const auto dtype = param_as_string(params, "dtype");
    if (!dtype) {
        return false;
    }
    if (std::find(allowed.begin(), allowed.end(), *dtype) == allowed.end()) {
        throw Error(ErrorCode::BadParam, std::string(name) + ": unsupported dtype '" + *dtype + "'");
    }
    return *dtype == "f64";
}

// A numeric reducer: fn(span<const T>) -> double, over non-empty windows.
template <class Reducer>
FeatureFunction numeric_feature(std::string name, Reducer reducer, bool allow_empty) {
    return [name = std::move(name), reducer, allow_empty](std::span<const SeriesView> inputs, const Params& params,
                                                          std::span<Scalar> out) {
        const SeriesView& v = single_input(inputs, name);
        if (!allow_empty) {
            require_samples(v, name);
        }
        out[0] = v.visit_numeric([&](auto x) { return reducer(x, params); });
    };
}

FuncWrapper make_wrapper(std::string_view name, const Params& params) {
    const std::string n(name);
    if (name == "count") {
        const bool f64 = dtype_is_f64(params, name, {"i64", "f64"});
        FeatureFunction fn = [f64](std::span<const SeriesView> in, const Params&, std::span<Scalar> out) {
            const auto c = static_cast<std::int64_t>(single_input(in, "count").size());
            out[0] = f64 ? Scalar{static_cast<double>(c)} : Scalar{c};
        };
        return FuncWrapper(std::move(fn), n, {}, InputMode::ValuesOnly, params,
                           {f64 ? ValueTag::F64 : ValueTag::I64});
    }
    if (name == "sum") {
        return FuncWrapper(numeric_feature(n, [](auto x, const Params&) { return sum_of(x); }, true), n, {},
                           InputMode::ValuesOnly, params);
    }
    if (name == "mean") {
        return FuncWrapper(numeric_feature(n, [](auto x, const Params&) { return mean_of(x); }, false), n, {},
                           InputMode::ValuesOnly, params);
    }
    if (name == "var" || name == "std") {
        const bool take_sqrt = name == "std";
        auto reducer = [take_sqrt](auto x, const Params&) {
            const double var = central_moment(x, mean_of(x), 2);
            return take_sqrt ? std::sqrt(var) : var;
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "min" || name == "max") {
        const bool is_min = name == "min";
        auto reducer = [is_min](auto x, const Params&) {
            const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
            return static_cast<double>(is_min ? *lo : *hi);
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "median") {
        auto reducer = [](auto x, const Params&) {
            auto xs = to_doubles(x);
            return median_in_place(xs);
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "quantile") {
        const auto q = param_as_double(params, "q");
        if (!q || !(*q >= 0.0 && *q <= 1.0)) {
            throw Error(ErrorCode::BadParam, "quantile needs a parameter q in [0, 1]");
        }
        auto reducer = [q = *q](auto x, const Params&) {
            auto xs = to_doubles(x);
            return quantile_in_place(xs, q);
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {"quantile_" + format_double(*q)},
                           InputMode::ValuesOnly, params);
    }
    if (name == "rms") {
        auto reducer = [](auto x, const Params&) {
            double acc = 0.0;
            for (const auto v : x) {
                acc += static_cast<double>(v) * static_cast<double>(v);
            }
            return std::sqrt(acc / static_cast<double>(x.size()));
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "abs_energy") {
        auto reducer = [](auto x, const Params&) {
            double acc = 0.0;
            for (const auto v : x) {
                acc += static_cast<double>(v) * static_cast<double>(v);
            }
            return acc;
        };
        return FuncWrapper(numeric_feature(n, reducer, true), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "skewness") {
        auto reducer = [](auto x, const Params&) {
            const double m = mean_of(x);
            const double m2 = central_moment(x, m, 2);
            if (m2 == 0.0) {
                return kNaN;
            }
            return central_moment(x, m, 3) / std::pow(m2, 1.5);
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "kurtosis") {
        auto reducer = [](auto x, const Params&) {
            const double m = mean_of(x);
            const double m2 = central_moment(x, m, 2);
            if (m2 == 0.0) {
                return kNaN;
            }
            return central_moment(x, m, 4) / (m2 * m2) - 3.0;
        };
        return FuncWrapper(numeric_feature(n, reducer, false), n, {}, InputMode::ValuesOnly, params);
    }
    if (name == "slope") {
        FeatureFunction fn = [](std::span<const SeriesView> in, const Params&, std::span<Scalar> out) {
            const SeriesView& v = single_input(in, "slope");
            require_samples(v, "slope");
            const std::size_t n_samples = v.size();
            // x in seconds (time) or raw units (numeric), relative to the first sample.
            const auto slope_of = [n_samples](auto x_at, auto y) {
                double mx = 0.0;
                double my = 0.0;
                for (std::size_t i = 0; i < n_samples; ++i) {
                    mx += x_at(i);
                    my += static_cast<double>(y[i]);
                }
                mx /= static_cast<double>(n_samples);
                my /= static_cast<double>(n_samples);
                double sxy = 0.0;
                double sxx = 0.0;
                for (std::size_t i = 0; i < n_samples; ++i) {
                    const double dx = x_at(i) - mx;
                    sxy += dx * (static_cast<double>(y[i]) - my);
                    sxx += dx * dx;
                }
                return sxx == 0.0 ? kNaN : sxy / sxx;
            };
            if (v.kind() == IndexKind::TimeNs) {
                const auto idx = v.index_ns();
                const auto x_at = [idx](std::size_t i) { return static_cast<double>(idx[i] - idx[0]) * 1e-9; };
                out[0] = v.visit_numeric([&](auto y) { return slope_of(x_at, y); });
            } else {
                const auto idx = v.index_numeric();
                const auto x_at = [idx](std::size_t i) { return idx[i] - idx[0]; };
                out[0] = v.visit_numeric([&](auto y) { return slope_of(x_at, y); });
            }
        };
        return FuncWrapper(std::move(fn), n, {}, InputMode::ValuesAndIndex, params);
    }
    if (name == "first" || name == "last") {
        const bool first = name == "first";
        const bool f64 = dtype_is_f64(params, name, {"inherit", "f64"});
        FeatureFunction fn = [first, f64, n](std::span<const SeriesView> in, const Params&, std::span<Scalar> out) {
            const SeriesView& v = single_input(in, n);
            require_samples(v, n);
            out[0] = element_as_scalar(v, first ? 0 : v.size() - 1, f64);
        };
        std::optional<ValueTag> tag;
        if (f64) {
            tag = ValueTag::F64;
        }
        return FuncWrapper(std::move(fn), n, {}, InputMode::ValuesOnly, params, {tag});
    }
    if (name == "zero_cross") {
        FeatureFunction fn = [](std::span<const SeriesView> in, const Params&, std::span<Scalar> out) {
            const SeriesView& v = single_input(in, "zero_cross");
            out[0] = v.visit_numeric([](auto x) {
                std::int64_t crossings = 0;
                for (std::size_t i = 1; i < x.size(); ++i) {
                    if (static_cast<double>(x[i - 1]) * static_cast<double>(x[i]) < 0.0) {
                        ++crossings;
                    }
                }
                return crossings;
            });
        };
        return FuncWrapper(std::move(fn), n, {}, InputMode::ValuesOnly, params, {ValueTag::I64});
    }
    throw Error(ErrorCode::UnknownBuiltin, "unknown built-in feature '" + n + "'");
}

} // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"count", "sum",      "mean",     "std",   "var",   "min",
                                                "max",   "median",   "quantile", "rms",   "abs_energy",
                                                "skewness", "kurtosis", "slope", "first", "last", "zero_cross"};
    return names;
}

FuncWrapper builtin(std::string_view name, const Params& params) {
    FuncWrapper wrapper = make_wrapper(name, params);
    wrapper.set_spec(FunctionSpec{std::string(name), params, std::nullopt});
    return wrapper;
}

FuncWrapper from_spec(const FunctionSpec& spec) {
    FuncWrapper wrapper = builtin(spec.builtin, spec.params);
    if (spec.robust) {
        return make_robust(wrapper, spec.robust->min_samples, spec.robust->fill);
    }
    return wrapper;
}

} // namespace seqfeat
