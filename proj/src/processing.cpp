#include "seqfeat/processing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include <omp.h>

namespace seqfeat {

namespace {

std::string step_id(std::size_t ordinal, const ProcessorStep& step) {
    return "step " + std::to_string(ordinal) + " (" + step.label + ")";
}

std::string entry_text(const SelectorEntry& entry) {
    if (entry.size() == 1) {
        return entry.front();
    }
    std::string out = "(";
    for (std::size_t i = 0; i < entry.size(); ++i) {
        out += (i ? ", " : "") + entry[i];
    }
    return out + ")";
}

std::vector<double> values_as_f64(const SeriesView& v) {
    return v.visit_numeric([](auto x) {
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = static_cast<double>(x[i]);
        }
        return out;
    });
}

IndexColumn copy_index(const SeriesView& v) {
    if (v.kind() == IndexKind::TimeNs) {
        const auto idx = v.index_ns();
        return IndexColumn::time_ns(std::vector<std::int64_t>(idx.begin(), idx.end()));
    }
    const auto idx = v.index_numeric();
    return IndexColumn::numeric(std::vector<double>(idx.begin(), idx.end()));
}

// Reuses the source index storage when the view spans the whole series.
IndexColumn index_of(const SeriesView& v) {
    if (v.lo() == 0 && v.hi() == v.source().size()) {
        return v.source().index();
    }
    return copy_index(v);
}

const SeriesView& only(std::span<const SeriesView> in, std::string_view name) {
    if (in.size() != 1) {
        throw Error(ErrorCode::BadParam, std::string(name) + " processes one series at a time");
    }
    return in.front();
}

std::vector<SeriesData> clip(std::span<const SeriesView> in, const Params& p) {
    const SeriesView& v = only(in, "clip");
    const double lower = param_as_double(p, "lower").value_or(-std::numeric_limits<double>::infinity());
    const double upper = param_as_double(p, "upper").value_or(std::numeric_limits<double>::infinity());
    if (lower > upper) {
        throw Error(ErrorCode::BadParam, "clip lower bound exceeds upper bound");
    }
    auto xs = values_as_f64(v);
    for (auto& x : xs) {
        x = std::clamp(x, lower, upper);
    }
    return {SeriesData{v.name(), index_of(v), ValueColumn::f64(std::move(xs))}};
}

std::vector<SeriesData> scale(std::span<const SeriesView> in, const Params& p) {
    const SeriesView& v = only(in, "scale");
    const double factor = param_as_double(p, "factor").value_or(1.0);
    const double off = param_as_double(p, "offset").value_or(0.0);
    auto xs = values_as_f64(v);
    for (auto& x : xs) {
        x = x * factor + off;
    }
    return {SeriesData{v.name(), index_of(v), ValueColumn::f64(std::move(xs))}};
}

std::vector<SeriesData> median_filter(std::span<const SeriesView> in, const Params& p) {
    const SeriesView& v = only(in, "median_filter");
    const std::int64_t size = param_as_int(p, "size").value_or(3);
    if (size < 1 || size % 2 == 0) {
        throw Error(ErrorCode::BadParam, "median_filter size must be odd and >= 1");
    }
    const auto xs = values_as_f64(v);
    const auto half = static_cast<std::size_t>(size / 2);
    std::vector<double> out(xs.size());
    std::vector<double> window;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(xs.size(), i + half + 1);
        window.assign(xs.begin() + static_cast<std::ptrdiff_t>(lo), xs.begin() + static_cast<std::ptrdiff_t>(hi));
        const std::size_t mid = window.size() / 2;
        std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid), window.end());
        double m = window[mid];
        if (window.size() % 2 == 0) {
            m = (m + *std::max_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
        }
        out[i] = m;
    }
    return {SeriesData{v.name(), index_of(v), ValueColumn::f64(std::move(out))}};
}

std::vector<SeriesData> resample_linear(std::span<const SeriesView> in, const Params& p) {
    const SeriesView& v = only(in, "resample_linear");
    const auto period_text = param_as_string(p, "period");
    if (!period_text) {
        throw Error(ErrorCode::BadParam, "resample_linear needs a 'period' parameter");
    }
    const IndexDelta period = parse_delta(*period_text);
    require_same_kind(v.kind(), period.kind(), "resample_linear period");
    if (!period.is_positive()) {
        throw Error(ErrorCode::BadParam, "resample_linear period must be > 0");
    }
    if (v.empty()) {
        return {SeriesData{v.name(), copy_index(v), ValueColumn::f64({})}};
    }
    const auto ys = values_as_f64(v);
    const IndexValue first = v.index_at(0);
    const IndexValue last = v.index_at(v.size() - 1);
    std::vector<double> out;
    std::vector<std::int64_t> t_index;
    std::vector<double> n_index;
    std::size_t j = 0;
    for (std::int64_t k = 0;; ++k) {
        const IndexValue t = offset(first, period, k);
        if (last < t) {
            break;
        }
        while (j + 1 < v.size() && !(t < v.index_at(j + 1))) {
            ++j;
        }
        double y = ys[j];
        if (j + 1 < v.size()) {
            const double x0 = v.index_at(j).as_double();
            const double x1 = v.index_at(j + 1).as_double();
            if (x1 > x0) {
                y = ys[j] + (t.as_double() - x0) / (x1 - x0) * (ys[j + 1] - ys[j]);
            }
        }
        out.push_back(y);
        if (t.is_time()) {
            t_index.push_back(t.ns());
        } else {
            n_index.push_back(t.numeric_value());
        }
    }
    IndexColumn index = v.kind() == IndexKind::TimeNs ? IndexColumn::time_ns(std::move(t_index))
                                                      : IndexColumn::numeric(std::move(n_index));
    return {SeriesData{v.name(), std::move(index), ValueColumn::f64(std::move(out))}};
}

bool same_index(const SeriesView& a, const SeriesView& b) {
    if (a.kind() != b.kind() || a.size() != b.size()) {
        return false;
    }
    if (a.kind() == IndexKind::TimeNs) {
        return std::equal(a.index_ns().begin(), a.index_ns().end(), b.index_ns().begin());
    }
    return std::equal(a.index_numeric().begin(), a.index_numeric().end(), b.index_numeric().begin());
}

} // namespace

std::string smv_output_name(std::span<const std::string> names) {
    if (names.empty()) {
        return "SMV";
    }
    std::string prefix = names.front();
    for (const auto& n : names) {
        std::size_t i = 0;
        while (i < prefix.size() && i < n.size() && prefix[i] == n[i]) {
            ++i;
        }
        prefix.resize(i);
    }
    if (names.size() == 1) {
        prefix += "_";
    }
    if (!prefix.empty() && prefix.back() != '_') {
        prefix += '_';
    }
    return prefix + "SMV";
}

void ProcessorStep::validate() const {
    if (!function) {
        throw Error(ErrorCode::InvalidDescriptor, "processing step '" + label + "' has no callable");
    }
    if (selector.empty()) {
        throw Error(ErrorCode::InvalidDescriptor, "processing step '" + label + "' selects no series");
    }
    for (const auto& entry : selector) {
        if (entry.empty()) {
            throw Error(ErrorCode::InvalidDescriptor, "processing step '" + label + "' has an empty selector entry");
        }
    }
}

Pipeline& Pipeline::add_step(ProcessorStep step) {
    step.validate();
    steps_.push_back(std::move(step));
    return *this;
}

SeriesSet run_pipeline(const Pipeline& pipeline, const SeriesSet& input, int n_workers) {
    SeriesSet current = input;
    for (std::size_t ordinal = 0; ordinal < pipeline.steps().size(); ++ordinal) {
        const ProcessorStep& step = pipeline.steps()[ordinal];
        const std::string id = step_id(ordinal, step);
        for (const auto& entry : step.selector) {
            for (const auto& name : entry) {
                if (!current.contains(name)) {
                    throw Error(ErrorCode::UnknownSeries, id + ": series '" + name + "' not found");
                }
            }
        }

        const auto n_entries = static_cast<std::ptrdiff_t>(step.selector.size());
        std::vector<std::vector<Series>> produced(step.selector.size());
        std::vector<std::optional<Error>> failures(step.selector.size());
        const int workers = n_workers > 0 ? n_workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
        for (std::ptrdiff_t e = 0; e < n_entries; ++e) {
            const auto idx = static_cast<std::size_t>(e);
            const SelectorEntry& entry = step.selector[idx];
            try {
                std::vector<SeriesView> views;
                for (const auto& name : entry) {
                    views.push_back(current.at(name).view());
                }
                std::vector<SeriesData> outputs;
                try {
                    outputs = step.function(views, step.params);
                } catch (const std::exception& ex) {
                    throw Error(ErrorCode::StepFailure, id + " on " + entry_text(entry) + ": " + ex.what());
                }
                for (auto& out : outputs) {
                    if (out.name.empty()) {
                        if (entry.size() != 1 || outputs.size() != 1) {
                            throw Error(ErrorCode::EmptyName, id + " on " + entry_text(entry) +
                                                                  ": unnamed output needs a single-name entry");
                        }
                        out.name = entry.front();
                    }
                    try {
                        produced[idx].emplace_back(out.name, std::move(out.index), std::move(out.values));
                    } catch (const Error& ex) {
                        throw Error(ex.code(), id + " on " + entry_text(entry) + ": " + ex.what());
                    }
                }
            } catch (const Error& ex) {
                failures[idx] = ex;
            } catch (const std::exception& ex) {
                failures[idx] = Error(ErrorCode::StepFailure, id + ": " + ex.what());
            }
        }
        for (const auto& f : failures) {
            if (f) {
                throw *f;
            }
        }

        std::map<std::string, std::size_t> owner;
        for (std::size_t e = 0; e < produced.size(); ++e) {
            for (const auto& s : produced[e]) {
                auto [it, inserted] = owner.emplace(s.name(), e);
                if (!inserted) {
                    throw Error(ErrorCode::OverlappingOutputs,
                                id + ": output '" + s.name() + "' produced by more than one selector entry or twice");
                }
            }
        }
        for (auto& outs : produced) {
            for (auto& s : outs) {
                current.insert_or_replace(std::move(s));
            }
        }
    }
    return current;
}

std::set<std::string> required_inputs(const Pipeline& pipeline) {
    std::set<std::string> required;
    std::set<std::string> available;
    for (std::size_t ordinal = 0; ordinal < pipeline.steps().size(); ++ordinal) {
        const ProcessorStep& step = pipeline.steps()[ordinal];
        if (!step.declared_outputs) {
            throw Error(ErrorCode::DynamicStepUnresolvable,
                        step_id(ordinal, step) + " does not declare its outputs");
        }
        for (const auto& entry : step.selector) {
            for (const auto& name : entry) {
                if (!available.contains(name)) {
                    required.insert(name);
                }
            }
        }
        for (const auto& entry : step.selector) {
            for (auto& out : step.declared_outputs(entry)) {
                available.insert(std::move(out));
            }
        }
    }
    return required;
}

const std::vector<std::string>& builtin_processor_names() {
    static const std::vector<std::string> names{"clip", "scale", "resample_linear", "median_filter", "smv"};
    return names;
}

ProcessorStep builtin_processor(std::string_view name, std::vector<SelectorEntry> selector, Params params) {
    const auto same_names = [](std::span<const std::string> entry) {
        return std::vector<std::string>(entry.begin(), entry.end());
    };
    ProcessorStep step;
    step.label = std::string(name);
    step.selector = std::move(selector);
    step.params = std::move(params);
    if (name == "clip") {
        step.function = clip;
        step.declared_outputs = same_names;
    } else if (name == "scale") {
        step.function = scale;
        step.declared_outputs = same_names;
    } else if (name == "median_filter") {
        step.function = median_filter;
        step.declared_outputs = same_names;
    } else if (name == "resample_linear") {
        step.function = resample_linear;
        step.declared_outputs = same_names;
    } else if (name == "smv") {
        const auto fixed = param_as_string(step.params, "name");
        step.function = [fixed](std::span<const SeriesView> in, const Params&) {
            if (in.empty()) {
                throw Error(ErrorCode::BadParam, "smv needs at least one series");
            }
            for (const auto& v : in) {
                if (!same_index(v, in.front())) {
                    throw Error(ErrorCode::StepFailure,
                                "smv inputs '" + in.front().name() + "' and '" + v.name() + "' are not aligned");
                }
            }
            std::vector<double> acc(in.front().size(), 0.0);
            std::vector<std::string> names;
            for (const auto& v : in) {
                names.push_back(v.name());
                const auto xs = values_as_f64(v);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    acc[i] += xs[i] * xs[i];
                }
            }
            for (auto& a : acc) {
                a = std::sqrt(a);
            }
            return std::vector<SeriesData>{
                SeriesData{fixed.value_or(smv_output_name(names)), index_of(in.front()), ValueColumn::f64(std::move(acc))}};
        };
        step.declared_outputs = [fixed](std::span<const std::string> entry) {
            return std::vector<std::string>{fixed.value_or(smv_output_name(entry))};
        };
    } else {
        throw Error(ErrorCode::UnknownBuiltin, "unknown built-in processor '" + std::string(name) + "'");
    }
    step.validate();
    return step;
}

} // namespace seqfeat
