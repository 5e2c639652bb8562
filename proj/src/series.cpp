#include "seqfeat/series.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_map>

namespace seqfeat {

namespace {

template <class T>
std::size_t first_decrease(const std::vector<T>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < v[i - 1]) {
            return i;
        }
    }
    return v.size();
}

template <class T>
bool same_bytes(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

// Position range [lo, hi) of a view whose index lies in [start, end) or
// [start, end] depending on `closed`.
template <class T>
std::pair<std::size_t, std::size_t> bounds(std::span<const T> idx, T start, T end, bool closed) {
    const auto lo = std::lower_bound(idx.begin(), idx.end(), start);
    const auto hi = closed ? std::upper_bound(lo, idx.end(), end) : std::lower_bound(lo, idx.end(), end);
    return {static_cast<std::size_t>(lo - idx.begin()), static_cast<std::size_t>(hi - idx.begin())};
}

SeriesView slice_impl(const SeriesView& view, IndexValue start, IndexValue end, bool closed) {
    if (view.kind() != start.kind()) {
        require_same_kind(view.kind(), start.kind(), "slice of '" + view.name() + "'");
    }
    if (view.kind() != end.kind()) {
        require_same_kind(view.kind(), end.kind(), "slice of '" + view.name() + "'");
    }
    if (end < start) {
        throw Error(ErrorCode::InvalidRange, "slice start after end on '" + view.name() + "'");
    }
    const auto [lo, hi] = view.kind() == IndexKind::TimeNs
                              ? bounds(view.index_ns(), start.ns(), end.ns(), closed)
                              : bounds(view.index_numeric(), start.numeric_value(), end.numeric_value(), closed);
    return view.subview(lo, hi);
}

} // namespace

std::string_view to_string(ValueTag tag) noexcept {
    switch (tag) {
    case ValueTag::F64: return "f64";
    case ValueTag::F32: return "f32";
    case ValueTag::I64: return "i64";
    case ValueTag::Bool: return "bool";
    case ValueTag::Categorical: return "categorical";
    }
    return "unknown";
}

bool is_float(ValueTag tag) noexcept { return tag == ValueTag::F64 || tag == ValueTag::F32; }

ValueTag tag_of(const ValueStorage& storage) noexcept { return static_cast<ValueTag>(storage.index()); }

std::size_t size_of(const ValueStorage& storage) noexcept {
    return std::visit(
        [](const auto& v) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, CategoricalData>) {
                return v.codes.size();
            } else {
                return v.size();
            }
        },
        storage);
}

std::size_t byte_size(const ValueStorage& storage) noexcept {
    return std::visit(
        [](const auto& v) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, CategoricalData>) {
                std::size_t bytes = v.codes.size() * sizeof(std::int32_t);
                for (const auto& label : v.labels) {
                    bytes += label.size();
                }
                return bytes;
            } else {
                return v.size() * sizeof(typename std::decay_t<decltype(v)>::value_type);
            }
        },
        storage);
}

ValueStorage make_storage(ValueTag tag) {
    switch (tag) {
    case ValueTag::F64: return std::vector<double>{};
    case ValueTag::F32: return std::vector<float>{};
    case ValueTag::I64: return std::vector<std::int64_t>{};
    case ValueTag::Bool: return std::vector<std::uint8_t>{};
    case ValueTag::Categorical: return CategoricalData{};
    }
    return std::vector<double>{};
}

// ---- IndexColumn -----------------------------------------------------------

IndexColumn IndexColumn::time_ns(std::vector<std::int64_t> values) {
    return IndexColumn(std::make_shared<const IndexStorage>(std::move(values)));
}

IndexColumn IndexColumn::numeric(std::vector<double> values) {
    return IndexColumn(std::make_shared<const IndexStorage>(std::move(values)));
}

IndexColumn IndexColumn::adopt(std::shared_ptr<const IndexStorage> storage) { return IndexColumn(std::move(storage)); }

IndexKind IndexColumn::kind() const noexcept {
    return data_->index() == 0 ? IndexKind::TimeNs : IndexKind::Numeric;
}

std::size_t IndexColumn::size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, *data_);
}

std::size_t IndexColumn::byte_size() const noexcept { return size() * 8; }

IndexValue IndexColumn::at(std::size_t i) const {
    if (const auto* t = std::get_if<std::vector<std::int64_t>>(data_.get())) {
        return IndexValue::time_ns(t->at(i));
    }
    return IndexValue::numeric(std::get<std::vector<double>>(*data_).at(i));
}

// ---- ValueColumn -----------------------------------------------------------

ValueColumn ValueColumn::f64(std::vector<double> values) {
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(values)));
}
ValueColumn ValueColumn::f32(std::vector<float> values) {
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(values)));
}
ValueColumn ValueColumn::i64(std::vector<std::int64_t> values) {
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(values)));
}
ValueColumn ValueColumn::boolean(std::vector<std::uint8_t> values) {
    for (auto& v : values) {
        v = v != 0 ? 1 : 0;
    }
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(values)));
}

ValueColumn ValueColumn::categorical(CategoricalData data) {
    std::unordered_map<std::string_view, int> seen;
    for (const auto& label : data.labels) {
        if (!seen.emplace(label, 0).second) {
            throw Error(ErrorCode::DuplicateName, "categorical dictionary repeats label '" + label + "'");
        }
    }
    const auto n_labels = static_cast<std::int32_t>(data.labels.size());
    for (auto code : data.codes) {
        if (code < 0 || code >= n_labels) {
            throw Error(ErrorCode::TypeMismatch, "categorical code out of range");
        }
    }
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(data)));
}

ValueColumn ValueColumn::categorical_from_strings(const std::vector<std::string>& values) {
    CategoricalData data;
    data.codes.reserve(values.size());
    std::unordered_map<std::string, std::int32_t> lookup;
    for (const auto& v : values) {
        auto [it, inserted] = lookup.try_emplace(v, static_cast<std::int32_t>(data.labels.size()));
        if (inserted) {
            data.labels.push_back(v);
        }
        data.codes.push_back(it->second);
    }
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(data)));
}

ValueColumn ValueColumn::adopt(ValueStorage storage) {
    if (auto* cat = std::get_if<CategoricalData>(&storage)) {
        return categorical(std::move(*cat));
    }
    return ValueColumn(std::make_shared<const ValueStorage>(std::move(storage)));
}

ValueTag ValueColumn::tag() const noexcept { return tag_of(*data_); }
std::size_t ValueColumn::size() const noexcept { return size_of(*data_); }
std::size_t ValueColumn::byte_size() const noexcept { return seqfeat::byte_size(*data_); }

// ---- Series ----------------------------------------------------------------

void validate_name(std::string_view name, ErrorCode reserved_code) {
    if (name.empty()) {
        throw Error(ErrorCode::EmptyName, "identifier must not be empty");
    }
    if (name.find("__") != std::string_view::npos || name.find('|') != std::string_view::npos) {
        throw Error(reserved_code, "identifier '" + std::string(name) + "' contains reserved \"__\" or \"|\"");
    }
}

Series::Series(std::string name, IndexColumn index, ValueColumn values)
    : name_(std::move(name)), index_(std::move(index)), values_(std::move(values)) {
    validate_name(name_);
    if (index_.size() != values_.size()) {
        throw Error(ErrorCode::LengthMismatch, "series '" + name_ + "': index length " +
                                                   std::to_string(index_.size()) + " != value length " +
                                                   std::to_string(values_.size()));
    }
    const std::size_t bad = std::visit([](const auto& v) { return first_decrease(v); }, index_.storage());
    if (bad != index_.size()) {
        throw Error(ErrorCode::NonMonotonicIndex,
                    "series '" + name_ + "': index decreases at position " + std::to_string(bad));
    }
}

SeriesView Series::view() const noexcept { return SeriesView(*this, 0, size()); }

Series Series::renamed(std::string name) const { return Series(std::move(name), index_, values_); }

Series validate_series(std::string name, IndexColumn index, ValueColumn values) {
    return Series(std::move(name), std::move(index), std::move(values));
}

bool bitwise_equal(const Series& a, const Series& b) {
    if (a.name() != b.name() || a.index().storage().index() != b.index().storage().index() ||
        a.values().storage().index() != b.values().storage().index()) {
        return false;
    }
    const bool index_equal = std::visit(
        [&](const auto& va) {
            using V = std::decay_t<decltype(va)>;
            return same_bytes(va, std::get<V>(b.index().storage()));
        },
        a.index().storage());
    if (!index_equal) {
        return false;
    }
    return std::visit(
        [&](const auto& va) {
            using V = std::decay_t<decltype(va)>;
            const auto& vb = std::get<V>(b.values().storage());
            if constexpr (std::is_same_v<V, CategoricalData>) {
                return va == vb;
            } else {
                return same_bytes(va, vb);
            }
        },
        a.values().storage());
}

// ---- SeriesView ------------------------------------------------------------

SeriesView::SeriesView(const Series& source, std::size_t lo, std::size_t hi) : source_(&source), lo_(lo), hi_(hi) {
    if (lo > hi || hi > source.size()) {
        throw Error(ErrorCode::InvalidRange, "view bounds outside series '" + source.name() + "'");
    }
}

SeriesView SeriesView::subview(std::size_t lo, std::size_t hi) const {
    if (lo > hi || hi > size()) {
        throw Error(ErrorCode::InvalidRange, "sub-view bounds outside view of '" + name() + "'");
    }
    SeriesView v;
    v.source_ = source_;
    v.lo_ = lo_ + lo;
    v.hi_ = lo_ + hi;
    return v;
}

std::span<const std::int64_t> SeriesView::index_ns() const {
    const auto* vec = std::get_if<std::vector<std::int64_t>>(&source_->index().storage());
    if (vec == nullptr) {
        throw Error(ErrorCode::KindMismatch, "series '" + name() + "' has a numeric index");
    }
    return {vec->data() + lo_, size()};
}

std::span<const double> SeriesView::index_numeric() const {
    const auto* vec = std::get_if<std::vector<double>>(&source_->index().storage());
    if (vec == nullptr) {
        throw Error(ErrorCode::KindMismatch, "series '" + name() + "' has a time index");
    }
    return {vec->data() + lo_, size()};
}

IndexValue SeriesView::index_at(std::size_t i) const {
    if (i >= size()) {
        throw Error(ErrorCode::InvalidRange, "index position outside view of '" + name() + "'");
    }
    return source_->index_at(lo_ + i);
}

std::span<const std::int32_t> SeriesView::categorical_codes() const {
    const auto* cat = std::get_if<CategoricalData>(&source_->values().storage());
    if (cat == nullptr) {
        throw Error(ErrorCode::TypeMismatch, "series '" + name() + "' is not categorical");
    }
    return {cat->codes.data() + lo_, size()};
}

const std::vector<std::string>& SeriesView::categorical_labels() const {
    const auto* cat = std::get_if<CategoricalData>(&source_->values().storage());
    if (cat == nullptr) {
        throw Error(ErrorCode::TypeMismatch, "series '" + name() + "' is not categorical");
    }
    return cat->labels;
}

SeriesView slice_range(const SeriesView& view, IndexValue start, IndexValue end) {
    return slice_impl(view, start, end, false);
}

SeriesView slice_range(const Series& series, IndexValue start, IndexValue end) {
    return slice_impl(series.view(), start, end, false);
}

SeriesView slice_closed(const SeriesView& view, IndexValue start, IndexValue end) {
    return slice_impl(view, start, end, true);
}

IndexDelta infer_period(const SeriesView& view) {
    if (view.size() < 2) {
        throw Error(ErrorCode::TooShort, "series '" + view.name() + "' needs at least 2 samples to infer a period");
    }
    if (view.kind() == IndexKind::TimeNs) {
        const auto idx = view.index_ns();
        std::vector<std::int64_t> diffs(idx.size() - 1);
        for (std::size_t i = 1; i < idx.size(); ++i) {
            diffs[i - 1] = idx[i] - idx[i - 1];
        }
        const std::size_t mid = diffs.size() / 2;
        std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid), diffs.end());
        std::int64_t upper = diffs[mid];
        if (diffs.size() % 2 == 1) {
            return IndexDelta::time_ns(upper);
        }
        const std::int64_t lower = *std::max_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid));
        return IndexDelta::time_ns(lower + (upper - lower) / 2);
    }
    const auto idx = view.index_numeric();
    std::vector<double> diffs(idx.size() - 1);
    for (std::size_t i = 1; i < idx.size(); ++i) {
        diffs[i - 1] = idx[i] - idx[i - 1];
    }
    const std::size_t mid = diffs.size() / 2;
    std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid), diffs.end());
    const double upper = diffs[mid];
    if (diffs.size() % 2 == 1) {
        return IndexDelta::numeric(upper);
    }
    const double lower = *std::max_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(mid));
    return IndexDelta::numeric(lower + (upper - lower) / 2.0);
}

IndexDelta infer_period(const Series& series) { return infer_period(series.view()); }

// ---- SeriesSet -------------------------------------------------------------

SeriesSet::SeriesSet(std::vector<Series> series) {
    for (auto& s : series) {
        insert(std::move(s));
    }
}

void SeriesSet::insert(Series series) {
    std::string key = series.name();
    if (series_.contains(key)) {
        throw Error(ErrorCode::DuplicateName, "series name '" + key + "' already present");
    }
    series_.emplace(std::move(key), std::move(series));
}

bool SeriesSet::insert_or_replace(Series series) {
    std::string key = series.name();
    auto it = series_.find(key);
    if (it != series_.end()) {
        it->second = std::move(series);
        return true;
    }
    series_.emplace(std::move(key), std::move(series));
    return false;
}

const Series* SeriesSet::find(std::string_view name) const {
    auto it = series_.find(name);
    return it == series_.end() ? nullptr : &it->second;
}

const Series& SeriesSet::at(std::string_view name) const {
    const Series* s = find(name);
    if (s == nullptr) {
        throw Error(ErrorCode::UnknownSeries, "series '" + std::string(name) + "' not found");
    }
    return *s;
}

std::vector<std::string> SeriesSet::names() const {
    std::vector<std::string> out;
    out.reserve(series_.size());
    for (const auto& [name, s] : series_) {
        out.push_back(name);
    }
    return out;
}

bool bitwise_equal(const SeriesSet& a, const SeriesSet& b) {
    if (a.size() != b.size()) {
        return false;
    }
    auto ib = b.begin();
    for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
        if (!bitwise_equal(ia->second, ib->second)) {
            return false;
        }
    }
    return true;
}

} // namespace seqfeat
