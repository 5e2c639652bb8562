#include "seqfeat/features.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include <omp.h>

namespace seqfeat {

// ---- params ----------------------------------------------------------------

std::optional<double> param_as_double(const Params& params, std::string_view key) {
    auto it = params.find(key);
    if (it == params.end()) {
        return std::nullopt;
    }
    if (const auto* d = std::get_if<double>(&it->second)) {
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) {
        return static_cast<double>(*i);
    }
    throw Error(ErrorCode::BadParam, "parameter '" + std::string(key) + "' must be a number");
}

std::optional<std::int64_t> param_as_int(const Params& params, std::string_view key) {
    auto it = params.find(key);
    if (it == params.end()) {
        return std::nullopt;
    }
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) {
        return *i;
    }
    if (const auto* d = std::get_if<double>(&it->second); d != nullptr && std::trunc(*d) == *d) {
        return static_cast<std::int64_t>(*d);
    }
    throw Error(ErrorCode::BadParam, "parameter '" + std::string(key) + "' must be an integer");
}

std::optional<std::string> param_as_string(const Params& params, std::string_view key) {
    auto it = params.find(key);
    if (it == params.end()) {
        return std::nullopt;
    }
    if (const auto* s = std::get_if<std::string>(&it->second)) {
        return *s;
    }
    throw Error(ErrorCode::BadParam, "parameter '" + std::string(key) + "' must be a string");
}

// ---- FuncWrapper -----------------------------------------------------------

namespace {

void validate_output_name(std::string_view name) {
    validate_name(name, ErrorCode::ReservedCharacter);
    // A leading '_' would make "<series>__<output>" ambiguous when the last
    // series name ends with '_'.
    if (name.front() == '_') {
        throw Error(ErrorCode::ReservedCharacter, "output name '" + std::string(name) + "' may not start with '_'");
    }
}

} // namespace

FuncWrapper::FuncWrapper(FeatureFunction function, std::string base_name, std::vector<std::string> output_names,
                         InputMode input_mode, Params params, std::vector<std::optional<ValueTag>> output_tags)
    : function_(std::move(function)),
      base_name_(std::move(base_name)),
      output_names_(std::move(output_names)),
      input_mode_(input_mode),
      params_(std::move(params)),
      output_tags_(std::move(output_tags)) {
    if (!function_) {
        throw Error(ErrorCode::InvalidDescriptor, "feature function '" + base_name_ + "' has no callable");
    }
    validate_output_name(base_name_);
    if (output_names_.empty()) {
        output_names_.push_back(base_name_);
    }
    for (std::size_t i = 0; i < output_names_.size(); ++i) {
        validate_output_name(output_names_[i]);
        for (std::size_t j = 0; j < i; ++j) {
            if (output_names_[j] == output_names_[i]) {
                throw Error(ErrorCode::InvalidDescriptor,
                            "function '" + base_name_ + "' repeats output name '" + output_names_[i] + "'");
            }
        }
    }
    if (output_tags_.empty()) {
        output_tags_.assign(output_names_.size(), ValueTag::F64);
    }
    if (output_tags_.size() != output_names_.size()) {
        throw Error(ErrorCode::InvalidDescriptor,
                    "function '" + base_name_ + "' has " + std::to_string(output_names_.size()) + " outputs but " +
                        std::to_string(output_tags_.size()) + " output tags");
    }
}

void FuncWrapper::operator()(std::span<const SeriesView> inputs, std::span<Scalar> outputs) const {
    function_(inputs, params_, outputs);
}

FuncWrapper& FuncWrapper::set_spec(FunctionSpec spec) {
    spec_ = std::move(spec);
    return *this;
}

bool FuncWrapper::same_identity(const FuncWrapper& other) const {
    return base_name_ == other.base_name_ && output_names_ == other.output_names_;
}

FuncWrapper make_robust(const FuncWrapper& function, std::size_t min_samples, Scalar fill) {
    for (std::size_t i = 0; i < function.n_outputs(); ++i) {
        const auto& tag = function.output_tags()[i];
        const std::string& out = function.output_names()[i];
        const bool ok = std::visit(
            [&](const auto& f) {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, double> || std::is_same_v<F, std::monostate>) {
                    return tag.has_value() && is_float(*tag);
                } else if constexpr (std::is_same_v<F, std::int64_t>) {
                    return tag.has_value() && (is_float(*tag) || *tag == ValueTag::I64);
                } else if constexpr (std::is_same_v<F, bool>) {
                    return tag.has_value() && *tag == ValueTag::Bool;
                } else {
                    return false;
                }
            },
            fill);
        if (!ok) {
            throw Error(ErrorCode::NonFloatOutput, "cannot make '" + function.base_name() + "' robust: output '" + out +
                                                       "' is " +
                                                       (tag ? std::string(to_string(*tag)) : std::string("input-typed")) +
                                                       " and cannot hold the fill value");
        }
    }
    FeatureFunction robust = [inner = function, min_samples, fill](std::span<const SeriesView> inputs, const Params&,
                                                                    std::span<Scalar> outputs) {
        for (const auto& v : inputs) {
            if (v.size() < min_samples) {
                std::fill(outputs.begin(), outputs.end(), fill);
                return;
            }
        }
        inner(inputs, outputs);
    };
    FuncWrapper wrapped(std::move(robust), function.base_name(), function.output_names(), function.input_mode(),
                        function.params(), function.output_tags());
    if (function.spec() && !function.spec()->robust) {
        FunctionSpec spec = *function.spec();
        spec.robust = RobustSpec{min_samples, fill};
        wrapped.set_spec(std::move(spec));
    }
    return wrapped;
}

// ---- descriptors & collection ---------------------------------------------

void FeatureDescriptor::validate() const {
    try {
        if (series_names.empty()) {
            throw Error(ErrorCode::InvalidDescriptor, "no series names");
        }
        for (const auto& name : series_names) {
            validate_name(name);
        }
        require_same_kind(window.kind(), stride.kind(), "window/stride");
        if (!window.is_positive()) {
            throw Error(ErrorCode::NonPositiveWindow, "window " + format_delta(window));
        }
        if (!stride.is_positive()) {
            throw Error(ErrorCode::NonPositiveStride, "stride " + format_delta(stride));
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidDescriptor, "feature '" + function.base_name() + "': " + e.what());
    }
}

std::vector<FeatureDescriptor> expand_multiple(const std::vector<FuncWrapper>& functions,
                                               const std::vector<std::vector<std::string>>& series_entries,
                                               const std::vector<IndexDelta>& windows,
                                               const std::vector<IndexDelta>& strides) {
    if (functions.empty() || series_entries.empty() || windows.empty() || strides.empty()) {
        throw Error(ErrorCode::EmptyAxis, "functions, series, windows and strides must all be non-empty");
    }
    std::vector<FeatureDescriptor> out;
    out.reserve(functions.size() * series_entries.size() * windows.size() * strides.size());
    for (const auto& entry : series_entries) {
        for (const auto& w : windows) {
            for (const auto& s : strides) {
                for (const auto& f : functions) {
                    out.push_back(FeatureDescriptor{entry, f, w, s});
                }
            }
        }
    }
    return out;
}

bool GroupKey::operator<(const GroupKey& other) const {
    if (series_names != other.series_names) {
        return series_names < other.series_names;
    }
    if (window != other.window) {
        return window < other.window;
    }
    return stride < other.stride;
}

FeatureCollection::FeatureCollection(const std::vector<FeatureDescriptor>& descriptors) { add(descriptors); }

void FeatureCollection::add(const FeatureDescriptor& descriptor) {
    descriptor.validate();
    GroupKey key{descriptor.series_names, descriptor.window, descriptor.stride};
    auto it = std::lower_bound(groups_.begin(), groups_.end(), key,
                               [](const FeatureGroup& g, const GroupKey& k) { return g.key < k; });
    if (it == groups_.end() || !(it->key == key)) {
        it = groups_.insert(it, FeatureGroup{std::move(key), {}});
    }
    const FuncWrapper& fn = descriptor.function;
    for (const auto& existing : it->functions) {
        if (existing.same_identity(fn)) {
            throw Error(ErrorCode::DuplicateFeature,
                        "feature '" + fn.base_name() + "' already registered for " +
                            format_output_name(it->key.series_names, fn.output_names().front(), it->key.window,
                                               it->key.stride));
        }
        for (const auto& out : fn.output_names()) {
            const auto& names = existing.output_names();
            if (std::find(names.begin(), names.end(), out) != names.end()) {
                throw Error(ErrorCode::DuplicateFeature,
                            "output '" + format_output_name(it->key.series_names, out, it->key.window, it->key.stride) +
                                "' already produced by '" + existing.base_name() + "'");
            }
        }
    }
    it->functions.push_back(fn);
}

void FeatureCollection::add(const std::vector<FeatureDescriptor>& descriptors) {
    for (const auto& d : descriptors) {
        add(d);
    }
}

std::size_t FeatureCollection::n_functions() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups_) {
        n += g.functions.size();
    }
    return n;
}

std::vector<FeatureDescriptor> FeatureCollection::descriptors() const {
    std::vector<FeatureDescriptor> out;
    for (const auto& g : groups_) {
        for (const auto& f : g.functions) {
            out.push_back(FeatureDescriptor{g.key.series_names, f, g.key.window, g.key.stride});
        }
    }
    return out;
}

std::vector<std::string> FeatureCollection::output_names() const {
    std::vector<std::string> out;
    for (const auto& g : groups_) {
        for (const auto& f : g.functions) {
            for (const auto& o : f.output_names()) {
                out.push_back(format_output_name(g.key.series_names, o, g.key.window, g.key.stride));
            }
        }
    }
    return out;
}

FeatureCollection FeatureCollection::reduce(std::span<const std::string> columns) const {
    // keep[g][f] marks functions to retain, preserving registration order.
    std::vector<std::vector<bool>> keep(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        keep[g].assign(groups_[g].functions.size(), false);
    }
    for (const auto& column : columns) {
        const ParsedName parsed = parse_output_name(column);
        const GroupKey key{parsed.series_names, parsed.window, parsed.stride};
        bool found = false;
        for (std::size_t g = 0; g < groups_.size() && !found; ++g) {
            if (!(groups_[g].key == key)) {
                continue;
            }
            for (std::size_t f = 0; f < groups_[g].functions.size(); ++f) {
                const auto& outs = groups_[g].functions[f].output_names();
                if (std::find(outs.begin(), outs.end(), parsed.output_name) != outs.end()) {
                    keep[g][f] = true;
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            throw Error(ErrorCode::UnknownColumn, "column '" + column + "' is not produced by this collection");
        }
    }
    FeatureCollection reduced;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        FeatureGroup group{groups_[g].key, {}};
        for (std::size_t f = 0; f < groups_[g].functions.size(); ++f) {
            if (keep[g][f]) {
                group.functions.push_back(groups_[g].functions[f]);
            }
        }
        if (!group.functions.empty()) {
            reduced.groups_.push_back(std::move(group));
        }
    }
    return reduced;
}

// ---- naming grammar --------------------------------------------------------

std::string format_output_name(std::span<const std::string> series_names, std::string_view output_name,
                               IndexDelta window, IndexDelta stride) {
    if (series_names.empty()) {
        throw Error(ErrorCode::ReservedCharacter, "feature name needs at least one series name");
    }
    std::string out;
    for (std::size_t i = 0; i < series_names.size(); ++i) {
        validate_name(series_names[i], ErrorCode::ReservedCharacter);
        if (i > 0) {
            out += '|';
        }
        out += series_names[i];
    }
    validate_output_name(output_name);
    out += "__";
    out += output_name;
    out += "__w=";
    out += format_delta(window);
    out += "_s=";
    out += format_delta(stride);
    return out;
}

ParsedName parse_output_name(std::string_view column) {
    const auto malformed = [&](std::string_view why) {
        return Error(ErrorCode::MalformedName, "'" + std::string(column) + "': " + std::string(why));
    };
    const auto wpos = column.rfind("__w=");
    if (wpos == std::string_view::npos) {
        throw malformed("missing \"__w=\"");
    }
    const std::string_view deltas = column.substr(wpos + 4);
    const auto spos = deltas.find("_s=");
    if (spos == std::string_view::npos) {
        throw malformed("missing \"_s=\"");
    }
    ParsedName parsed;
    try {
        parsed.window = parse_delta(deltas.substr(0, spos));
        parsed.stride = parse_delta(deltas.substr(spos + 3));
    } catch (const Error& e) {
        throw malformed(e.what());
    }
    if (parsed.window.kind() != parsed.stride.kind()) {
        throw malformed("window and stride differ in kind");
    }
    if (!parsed.window.is_positive() || !parsed.stride.is_positive()) {
        throw malformed("window and stride must be > 0");
    }
    const std::string_view head = column.substr(0, wpos);
    const auto sep = head.rfind("__");
    if (sep == std::string_view::npos) {
        throw malformed("missing \"__\" between series and output name");
    }
    parsed.output_name = std::string(head.substr(sep + 2));
    const std::string_view series = head.substr(0, sep);
    std::size_t begin = 0;
    while (true) {
        const auto bar = series.find('|', begin);
        parsed.series_names.emplace_back(series.substr(begin, bar == std::string_view::npos ? bar : bar - begin));
        if (bar == std::string_view::npos) {
            break;
        }
        begin = bar + 1;
    }
    try {
        for (const auto& s : parsed.series_names) {
            validate_name(s, ErrorCode::MalformedName);
        }
        validate_output_name(parsed.output_name);
    } catch (const Error& e) {
        throw malformed(e.what());
    }
    // Canonical form only: the parse must format back to the same text.
    if (format_output_name(parsed.series_names, parsed.output_name, parsed.window, parsed.stride) != column) {
        throw malformed("not in canonical form");
    }
    return parsed;
}

// ---- FeatureMatrix ---------------------------------------------------------

namespace {

std::size_t index_size(const IndexStorage& index) {
    return std::visit([](const auto& v) { return v.size(); }, index);
}

template <class T>
bool same_bytes(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

// Appends row `row` of `src` to `dst` (same tag).
void append_cell(FeatureMatrix::Column& dst, const FeatureMatrix::Column& src, std::size_t row,
                 std::unordered_map<std::string, std::int32_t>* labels) {
    dst.present.push_back(src.present[row]);
    std::visit(
        [&](auto& d) {
            using V = std::decay_t<decltype(d)>;
            const auto& s = std::get<V>(src.data);
            if constexpr (std::is_same_v<V, CategoricalData>) {
                const std::int32_t code = s.codes[row];
                if (code < 0) {
                    d.codes.push_back(-1);
                    return;
                }
                const std::string& label = s.labels[static_cast<std::size_t>(code)];
                auto [it, inserted] = labels->try_emplace(label, static_cast<std::int32_t>(d.labels.size()));
                if (inserted) {
                    d.labels.push_back(label);
                }
                d.codes.push_back(it->second);
            } else {
                d.push_back(s[row]);
            }
        },
        dst.data);
}

} // namespace

FeatureMatrix::FeatureMatrix(IndexStorage index, std::vector<Column> columns)
    : index_(std::move(index)), columns_(std::move(columns)) {
    const std::size_t n = index_size(index_);
    for (const auto& c : columns_) {
        if (size_of(c.data) != n || c.present.size() != n) {
            throw Error(ErrorCode::LengthMismatch, "feature column '" + c.name + "' does not match index length");
        }
    }
}

IndexKind FeatureMatrix::kind() const noexcept {
    return index_.index() == 0 ? IndexKind::TimeNs : IndexKind::Numeric;
}

std::size_t FeatureMatrix::rows() const noexcept { return index_size(index_); }

IndexValue FeatureMatrix::index_at(std::size_t row) const {
    if (const auto* t = std::get_if<std::vector<std::int64_t>>(&index_)) {
        return IndexValue::time_ns(t->at(row));
    }
    return IndexValue::numeric(std::get<std::vector<double>>(index_).at(row));
}

const FeatureMatrix::Column* FeatureMatrix::find(std::string_view name) const {
    for (const auto& c : columns_) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

const FeatureMatrix::Column& FeatureMatrix::column(std::string_view name) const {
    const Column* c = find(name);
    if (c == nullptr) {
        throw Error(ErrorCode::UnknownColumn, "no column '" + std::string(name) + "'");
    }
    return *c;
}

std::vector<std::string> FeatureMatrix::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
        out.push_back(c.name);
    }
    return out;
}

Scalar FeatureMatrix::cell(const Column& column, std::size_t row) const {
    if (column.present.at(row) == 0) {
        return std::monostate{};
    }
    return std::visit(
        [&](const auto& d) -> Scalar {
            using V = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<V, std::vector<double>>) {
                return d[row];
            } else if constexpr (std::is_same_v<V, std::vector<float>>) {
                return static_cast<double>(d[row]);
            } else if constexpr (std::is_same_v<V, std::vector<std::int64_t>>) {
                return d[row];
            } else if constexpr (std::is_same_v<V, std::vector<std::uint8_t>>) {
                return d[row] != 0;
            } else {
                return std::string_view(d.labels[static_cast<std::size_t>(d.codes[row])]);
            }
        },
        column.data);
}

double FeatureMatrix::as_double(const Column& column, std::size_t row) const {
    const Scalar c = cell(column, row);
    if (const auto* d = std::get_if<double>(&c)) {
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
        return static_cast<double>(*i);
    }
    if (const auto* b = std::get_if<bool>(&c)) {
        return *b ? 1.0 : 0.0;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

FeatureMatrix FeatureMatrix::project(std::span<const std::string> names) const {
    std::vector<const Column*> src;
    for (const auto& n : names) {
        src.push_back(&column(n));
    }
    std::vector<std::size_t> keep_rows;
    for (std::size_t r = 0; r < rows(); ++r) {
        for (const Column* c : src) {
            if (c->present[r] != 0) {
                keep_rows.push_back(r);
                break;
            }
        }
    }
    IndexStorage index = std::visit(
        [&](const auto& v) -> IndexStorage {
            std::decay_t<decltype(v)> out;
            out.reserve(keep_rows.size());
            for (auto r : keep_rows) {
                out.push_back(v[r]);
            }
            return out;
        },
        index_);
    std::vector<Column> cols;
    for (const Column* c : src) {
        Column out{c->name, make_storage(c->tag()), {}};
        std::unordered_map<std::string, std::int32_t> labels;
        for (auto r : keep_rows) {
            append_cell(out, *c, r, &labels);
        }
        cols.push_back(std::move(out));
    }
    return FeatureMatrix(std::move(index), std::move(cols));
}

FeatureMatrix FeatureMatrix::concat_rows(std::span<const FeatureMatrix> parts) {
    if (parts.empty()) {
        return {};
    }
    const FeatureMatrix& first = parts.front();
    // (index value, part, row) sorted by index then part order.
    std::vector<std::tuple<IndexValue, std::size_t, std::size_t>> order;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (parts[p].kind() != first.kind() || parts[p].column_names() != first.column_names()) {
            throw Error(ErrorCode::UnknownColumn, "row concatenation needs identical columns");
        }
        for (std::size_t r = 0; r < parts[p].rows(); ++r) {
            order.emplace_back(parts[p].index_at(r), p, r);
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    order.erase(std::unique(order.begin(), order.end(),
                            [](const auto& a, const auto& b) { return std::get<0>(a) == std::get<0>(b); }),
                order.end());
    IndexStorage index = first.kind() == IndexKind::TimeNs ? IndexStorage{std::vector<std::int64_t>{}}
                                                           : IndexStorage{std::vector<double>{}};
    std::visit(
        [&](auto& v) {
            for (const auto& [value, p, r] : order) {
                if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::vector<std::int64_t>>) {
                    v.push_back(value.ns());
                } else {
                    v.push_back(value.numeric_value());
                }
            }
        },
        index);
    std::vector<Column> cols;
    for (std::size_t c = 0; c < first.columns().size(); ++c) {
        Column out{first.columns()[c].name, make_storage(first.columns()[c].tag()), {}};
        std::unordered_map<std::string, std::int32_t> labels;
        for (const auto& [value, p, r] : order) {
            append_cell(out, parts[p].columns()[c], r, &labels);
        }
        cols.push_back(std::move(out));
    }
    return FeatureMatrix(std::move(index), std::move(cols));
}

bool bitwise_equal(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.index().index() != b.index().index() || a.n_columns() != b.n_columns()) {
        return false;
    }
    const bool index_equal = std::visit(
        [&](const auto& va) { return same_bytes(va, std::get<std::decay_t<decltype(va)>>(b.index())); }, a.index());
    if (!index_equal) {
        return false;
    }
    for (std::size_t c = 0; c < a.n_columns(); ++c) {
        const auto& ca = a.columns()[c];
        const auto& cb = b.columns()[c];
        if (ca.name != cb.name || ca.data.index() != cb.data.index() || ca.present != cb.present) {
            return false;
        }
        const bool data_equal = std::visit(
            [&](const auto& da) {
                using V = std::decay_t<decltype(da)>;
                const auto& db = std::get<V>(cb.data);
                if constexpr (std::is_same_v<V, CategoricalData>) {
                    return da == db;
                } else {
                    return same_bytes(da, db);
                }
            },
            ca.data);
        if (!data_equal) {
            return false;
        }
    }
    return true;
}

// ---- extraction ------------------------------------------------------------

std::string SparsityWarning::message() const {
    return "series '" + series + "' (w=" + format_delta(window) + ", s=" + format_delta(stride) + "): " +
           std::to_string(n_deviating) + " of " + std::to_string(n_segments) +
           " windows deviate from the modal sample count " + std::to_string(modal_count) +
           "; pass approve_sparsity to acknowledge sparse data";
}

namespace {

struct PreparedGroup {
    const FeatureGroup* group = nullptr;
    std::vector<SeriesView> views;
    SegmentGrid grid;
    std::vector<std::vector<PositionRange>> positions; // per series, per segment
    std::string series_key;
};

struct WorkItem {
    std::size_t group = 0;
    std::size_t function = 0;
};

struct ItemResult {
    std::vector<FeatureMatrix::Column> columns;
    double duration_s = 0.0;
    std::string error;
};

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        out += (out.empty() ? "" : "|") + n;
    }
    return out;
}

// Writes `value` into row `row` of `column`; returns an error text on a type
// the column cannot hold.
std::string store(FeatureMatrix::Column& column, std::size_t row, const Scalar& value,
                  std::unordered_map<std::string, std::int32_t>& labels) {
    return std::visit(
        [&](auto& data) -> std::string {
            using V = std::decay_t<decltype(data)>;
            if constexpr (std::is_same_v<V, std::vector<double>> || std::is_same_v<V, std::vector<float>>) {
                using T = typename V::value_type;
                if (const auto* d = std::get_if<double>(&value)) {
                    data[row] = static_cast<T>(*d);
                } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
                    data[row] = static_cast<T>(*i);
                } else if (const auto* b = std::get_if<bool>(&value)) {
                    data[row] = *b ? T(1) : T(0);
                } else if (std::holds_alternative<std::monostate>(value)) {
                    data[row] = std::numeric_limits<T>::quiet_NaN();
                } else {
                    return "label returned for a float output";
                }
                return {};
            } else if constexpr (std::is_same_v<V, std::vector<std::int64_t>>) {
                if (const auto* i = std::get_if<std::int64_t>(&value)) {
                    data[row] = *i;
                    return {};
                }
                return "i64 output requires an integer value";
            } else if constexpr (std::is_same_v<V, std::vector<std::uint8_t>>) {
                if (const auto* b = std::get_if<bool>(&value)) {
                    data[row] = *b ? 1 : 0;
                    return {};
                }
                return "bool output requires a boolean value";
            } else {
                if (const auto* s = std::get_if<std::string_view>(&value)) {
                    auto [it, inserted] =
                        labels.try_emplace(std::string(*s), static_cast<std::int32_t>(data.labels.size()));
                    if (inserted) {
                        data.labels.emplace_back(*s);
                    }
                    data.codes[row] = it->second;
                    return {};
                }
                return "categorical output requires a label";
            }
        },
        column.data);
}

void resize_column(FeatureMatrix::Column& column, std::size_t n, std::uint8_t present) {
    column.present.assign(n, present);
    std::visit(
        [&](auto& data) {
            using V = std::decay_t<decltype(data)>;
            if constexpr (std::is_same_v<V, CategoricalData>) {
                data.codes.assign(n, -1);
            } else if constexpr (std::is_floating_point_v<typename V::value_type>) {
                data.assign(n, std::numeric_limits<typename V::value_type>::quiet_NaN());
            } else {
                data.assign(n, 0);
            }
        },
        column.data);
}

ItemResult run_item(const PreparedGroup& pg, std::size_t function_index) {
    ItemResult result;
    const FuncWrapper& fn = pg.group->functions[function_index];
    const std::size_t n_seg = pg.grid.n_segments;
    const std::size_t n_out = fn.n_outputs();
    const ValueTag input_tag = pg.views.front().tag();
    result.columns.reserve(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
        const ValueTag tag = fn.output_tags()[o].value_or(input_tag);
        FeatureMatrix::Column col{format_output_name(pg.group->key.series_names, fn.output_names()[o],
                                                     pg.group->key.window, pg.group->key.stride),
                                  make_storage(tag),
                                  {}};
        resize_column(col, n_seg, 1);
        result.columns.push_back(std::move(col));
    }
    std::vector<std::unordered_map<std::string, std::int32_t>> labels(n_out);
    std::vector<SeriesView> inputs(pg.views.size());
    std::vector<Scalar> outputs(n_out);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < n_seg; ++k) {
        for (std::size_t s = 0; s < pg.views.size(); ++s) {
            const PositionRange r = pg.positions[s][k];
            inputs[s] = pg.views[s].subview(r.lo, r.hi);
        }
        std::fill(outputs.begin(), outputs.end(), Scalar{});
        try {
            fn(inputs, outputs);
        } catch (const std::exception& e) {
            result.error = "function '" + fn.base_name() + "' on group " + pg.series_key +
                           " (w=" + format_delta(pg.group->key.window) + ", s=" + format_delta(pg.group->key.stride) +
                           ") failed at segment " + std::to_string(k) + ": " + e.what();
            return result;
        }
        for (std::size_t o = 0; o < n_out; ++o) {
            std::string err = store(result.columns[o], k, outputs[o], labels[o]);
            if (!err.empty()) {
                result.error = "function '" + fn.base_name() + "' output '" + fn.output_names()[o] + "' on group " +
                               pg.series_key + " at segment " + std::to_string(k) + ": " + err;
                return result;
            }
        }
    }
    result.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

template <class Lookup>
std::vector<PreparedGroup> prepare(const FeatureCollection& collection, const ExtractOptions& options,
                                   Lookup&& lookup, std::vector<SparsityWarning>& warnings) {
    std::vector<PreparedGroup> prepared;
    prepared.reserve(collection.n_groups());
    for (const auto& group : collection.groups()) {
        PreparedGroup pg;
        pg.group = &group;
        pg.series_key = join_names(group.key.series_names);
        for (const auto& name : group.key.series_names) {
            pg.views.push_back(lookup(name));
            require_same_kind(group.key.window.kind(), pg.views.back().kind(),
                              "window of feature group " + pg.series_key + " vs series '" + name + "'");
        }
        IndexSpan span = intersect_spans(pg.views);
        if (const auto& clip = options.grid_clip) {
            require_same_kind(span.begin.kind(), clip->begin.kind(), "grid clip of feature group " + pg.series_key);
            span.begin = std::max(span.begin, clip->begin, std::less<>{});
            span.end = clip->closed_end ? std::min(span.end, clip->end, std::less<>{}) : clip->end;
            if (span.end < span.begin) {
                span.end = span.begin;
            }
        }
        pg.grid = build_grid(span.begin, span.end, group.key.window, group.key.stride, options.output_position);
        for (const auto& view : pg.views) {
            // Sweep walks every sample; bisection wins on sparse grids.
            const double n = static_cast<double>(std::max<std::size_t>(view.size(), 2));
            const bool sparse = 2.0 * static_cast<double>(pg.grid.n_segments) * std::log2(n) < n;
            pg.positions.push_back(sparse ? segment_positions_bisect(view, pg.grid) : segment_positions(view, pg.grid));
            if (options.approve_sparsity || pg.grid.n_segments == 0) {
                continue;
            }
            std::map<std::size_t, std::size_t> histogram;
            for (const auto& r : pg.positions.back()) {
                ++histogram[r.size()];
            }
            // Ties resolve to the smaller count (first in map order).
            auto modal = histogram.begin();
            for (auto it = histogram.begin(); it != histogram.end(); ++it) {
                if (it->second > modal->second) {
                    modal = it;
                }
            }
            if (histogram.size() > 1) {
                warnings.push_back(SparsityWarning{view.name(), group.key.window, group.key.stride, modal->first,
                                                   pg.grid.n_segments - modal->second, pg.grid.n_segments});
            }
        }
        prepared.push_back(std::move(pg));
    }
    return prepared;
}

template <class T>
std::vector<T> output_index(const SegmentGrid& grid) {
    std::vector<T> out(grid.n_segments);
    for (std::size_t k = 0; k < grid.n_segments; ++k) {
        const IndexValue v = grid.output_index(k);
        if constexpr (std::is_same_v<T, std::int64_t>) {
            out[k] = v.ns();
        } else {
            out[k] = v.numeric_value();
        }
    }
    return out;
}

template <class T>
FeatureMatrix merge(const std::vector<PreparedGroup>& prepared, const std::vector<WorkItem>& items,
                    std::vector<ItemResult>& results) {
    std::vector<std::vector<T>> group_index(prepared.size());
    std::vector<T> all;
    for (std::size_t g = 0; g < prepared.size(); ++g) {
        group_index[g] = output_index<T>(prepared[g].grid);
        all.insert(all.end(), group_index[g].begin(), group_index[g].end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::vector<std::vector<std::size_t>> row_of(prepared.size());
    for (std::size_t g = 0; g < prepared.size(); ++g) {
        row_of[g].resize(group_index[g].size());
        std::size_t r = 0;
        for (std::size_t k = 0; k < group_index[g].size(); ++k) {
            while (all[r] < group_index[g][k]) {
                ++r;
            }
            row_of[g][k] = r;
        }
    }

    std::vector<FeatureMatrix::Column> columns;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& rows = row_of[items[i].group];
        for (auto& part : results[i].columns) {
            FeatureMatrix::Column col{std::move(part.name), make_storage(part.tag()), {}};
            resize_column(col, all.size(), 0);
            std::visit(
                [&](auto& dst) {
                    using V = std::decay_t<decltype(dst)>;
                    auto& src = std::get<V>(part.data);
                    if constexpr (std::is_same_v<V, CategoricalData>) {
                        dst.labels = std::move(src.labels);
                        for (std::size_t k = 0; k < rows.size(); ++k) {
                            dst.codes[rows[k]] = src.codes[k];
                        }
                    } else {
                        for (std::size_t k = 0; k < rows.size(); ++k) {
                            dst[rows[k]] = src[k];
                        }
                    }
                },
                col.data);
            for (std::size_t k = 0; k < rows.size(); ++k) {
                col.present[rows[k]] = 1;
            }
            part = {};
            columns.push_back(std::move(col));
        }
    }
    return FeatureMatrix(IndexStorage(std::move(all)), std::move(columns));
}

template <class Lookup>
ExtractResult extract_impl(const FeatureCollection& collection, const ExtractOptions& options, Lookup&& lookup) {
    ExtractResult out;
    std::vector<PreparedGroup> prepared = prepare(collection, options, lookup, out.warnings);
    if (prepared.empty()) {
        return out;
    }
    for (const auto& pg : prepared) {
        require_same_kind(prepared.front().grid.kind(), pg.grid.kind(), "feature groups " + pg.series_key);
    }

    std::vector<WorkItem> items;
    for (std::size_t g = 0; g < prepared.size(); ++g) {
        for (std::size_t f = 0; f < prepared[g].group->functions.size(); ++f) {
            items.push_back({g, f});
        }
    }

    std::vector<ItemResult> results(items.size());
    const auto n_items = static_cast<std::ptrdiff_t>(items.size());
    const int n_workers = options.n_workers > 0 ? options.n_workers : omp_get_max_threads();
    std::atomic<std::ptrdiff_t> first_failure{n_items};

#pragma omp parallel for schedule(dynamic, 1) num_threads(n_workers)
    for (std::ptrdiff_t i = 0; i < n_items; ++i) {
        // Items after a known failure are skipped; earlier ones still run so
        // the reported failure is the first in collection order.
        if (i > first_failure.load(std::memory_order_relaxed)) {
            continue;
        }
        const auto idx = static_cast<std::size_t>(i);
        try {
            results[idx] = run_item(prepared[items[idx].group], items[idx].function);
        } catch (const std::exception& e) {
            results[idx].error = e.what();
        }
        if (!results[idx].error.empty()) {
            std::ptrdiff_t current = first_failure.load();
            while (i < current && !first_failure.compare_exchange_weak(current, i)) {
            }
        }
    }

    if (first_failure.load() < n_items) {
        throw Error(ErrorCode::FunctionFailure, results[static_cast<std::size_t>(first_failure.load())].error);
    }

    out.log.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const PreparedGroup& pg = prepared[items[i].group];
        out.log.push_back(LogRecord{pg.group->functions[items[i].function].base_name(), pg.series_key,
                                    pg.group->key.window, pg.group->key.stride, pg.grid.n_segments,
                                    results[i].duration_s});
    }

    out.matrix = prepared.front().grid.kind() == IndexKind::TimeNs ? merge<std::int64_t>(prepared, items, results)
                                                                    : merge<double>(prepared, items, results);
    if (options.log_path) {
        write_log(out.log, *options.log_path);
    }
    return out;
}

} // namespace

ExtractResult extract(const SeriesSet& series, const FeatureCollection& collection, const ExtractOptions& options) {
    return extract_impl(collection, options, [&](const std::string& name) {
        const Series* s = series.find(name);
        if (s == nullptr) {
            throw Error(ErrorCode::UnknownSeries, "feature input series '" + name + "' not found");
        }
        return s->view();
    });
}

ExtractResult extract(std::span<const SeriesView> series, const FeatureCollection& collection,
                      const ExtractOptions& options) {
    return extract_impl(collection, options, [&](const std::string& name) {
        for (const auto& v : series) {
            if (v.name() == name) {
                return v;
            }
        }
        throw Error(ErrorCode::UnknownSeries, "feature input series '" + name + "' not found");
    });
}

std::vector<LogSummary> aggregate_log(std::span<const LogRecord> records) {
    std::map<std::string, LogSummary> by_name;
    for (const auto& r : records) {
        LogSummary& s = by_name[r.function];
        s.function = r.function;
        s.total_s += r.duration_s;
        ++s.calls;
    }
    std::vector<LogSummary> out;
    out.reserve(by_name.size());
    for (auto& [name, s] : by_name) {
        s.mean_s = s.total_s / static_cast<double>(s.calls);
        out.push_back(std::move(s));
    }
    return out;
}

void write_log(std::span<const LogRecord> records, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw Error(ErrorCode::IoError, "cannot open log file '" + path.string() + "'");
    }
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["func"] = r.function;
        j["series"] = r.series;
        j["window"] = format_delta(r.window);
        j["stride"] = format_delta(r.stride);
        j["n_segments"] = r.n_segments;
        j["duration_s"] = r.duration_s;
        os << j.dump() << '\n';
    }
    if (!os) {
        throw Error(ErrorCode::IoError, "failed writing log file '" + path.string() + "'");
    }
}

} // namespace seqfeat
