#pragma once

#include "seqfeat/error.hpp"
#include "seqfeat/index.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace seqfeat {

enum class ValueTag : std::uint8_t { F64, F32, I64, Bool, Categorical };

std::string_view to_string(ValueTag tag) noexcept;
bool is_float(ValueTag tag) noexcept;

/// Dictionary-encoded strings. Labels are unique; codes index into labels.
struct CategoricalData {
    std::vector<std::int32_t> codes;
    std::vector<std::string> labels;

    bool operator==(const CategoricalData&) const = default;
};

/// Alternative order matches ValueTag. Bool is stored one byte per value so
/// views can hand out spans.
using ValueStorage = std::variant<std::vector<double>, std::vector<float>, std::vector<std::int64_t>,
                                  std::vector<std::uint8_t>, CategoricalData>;
using IndexStorage = std::variant<std::vector<std::int64_t>, std::vector<double>>;

ValueTag tag_of(const ValueStorage& storage) noexcept;
std::size_t size_of(const ValueStorage& storage) noexcept;
std::size_t byte_size(const ValueStorage& storage) noexcept;
ValueStorage make_storage(ValueTag tag);

/// Shared, immutable index array. Copies share the underlying storage.
class IndexColumn {
public:
    static IndexColumn time_ns(std::vector<std::int64_t> values);
    static IndexColumn numeric(std::vector<double> values);
    static IndexColumn adopt(std::shared_ptr<const IndexStorage> storage);

    IndexKind kind() const noexcept;
    std::size_t size() const noexcept;
    std::size_t byte_size() const noexcept;
    IndexValue at(std::size_t i) const;
    const IndexStorage& storage() const noexcept { return *data_; }
    const std::shared_ptr<const IndexStorage>& shared() const noexcept { return data_; }

private:
    explicit IndexColumn(std::shared_ptr<const IndexStorage> data) : data_(std::move(data)) {}
    std::shared_ptr<const IndexStorage> data_;
};

/// Shared, immutable value array of one ValueTag.
class ValueColumn {
public:
    static ValueColumn f64(std::vector<double> values);
    static ValueColumn f32(std::vector<float> values);
    static ValueColumn i64(std::vector<std::int64_t> values);
    static ValueColumn boolean(std::vector<std::uint8_t> values);
    /// Rejects duplicate labels and out-of-range codes.
    static ValueColumn categorical(CategoricalData data);
    /// Dictionary-encodes in order of first appearance.
    static ValueColumn categorical_from_strings(const std::vector<std::string>& values);
    static ValueColumn adopt(ValueStorage storage);

    ValueTag tag() const noexcept;
    std::size_t size() const noexcept;
    std::size_t byte_size() const noexcept;
    const ValueStorage& storage() const noexcept { return *data_; }

private:
    explicit ValueColumn(std::shared_ptr<const ValueStorage> data) : data_(std::move(data)) {}
    std::shared_ptr<const ValueStorage> data_;
};

class SeriesView;

/// A named, index-sorted column. Immutable once built; copies share storage.
class Series {
public:
    /// Validates the name grammar, index order and lengths. Throws Error with
    /// EmptyName, ReservedCharacterInName, NonMonotonicIndex or LengthMismatch.
    Series(std::string name, IndexColumn index, ValueColumn values);

    const std::string& name() const noexcept { return name_; }
    IndexKind kind() const noexcept { return index_.kind(); }
    ValueTag tag() const noexcept { return values_.tag(); }
    std::size_t size() const noexcept { return index_.size(); }
    bool empty() const noexcept { return size() == 0; }
    const IndexColumn& index() const noexcept { return index_; }
    const ValueColumn& values() const noexcept { return values_; }
    IndexValue index_at(std::size_t i) const { return index_.at(i); }

    SeriesView view() const noexcept;
    Series renamed(std::string name) const;

private:
    std::string name_;
    IndexColumn index_;
    ValueColumn values_;
};

Series validate_series(std::string name, IndexColumn index, ValueColumn values);

/// Checks the identifier rules shared by series and feature output names.
void validate_name(std::string_view name, ErrorCode reserved_code = ErrorCode::ReservedCharacterInName);

/// Storage-level equality, NaN payloads compared bitwise.
bool bitwise_equal(const Series& a, const Series& b);

/// Read-only window [lo, hi) into a series. Never owns or copies storage; the
/// source series must outlive the view.
class SeriesView {
public:
    SeriesView() = default;
    SeriesView(const Series& source, std::size_t lo, std::size_t hi);

    const Series& source() const noexcept { return *source_; }
    const std::string& name() const noexcept { return source_->name(); }
    IndexKind kind() const noexcept { return source_->kind(); }
    ValueTag tag() const noexcept { return source_->tag(); }
    std::size_t lo() const noexcept { return lo_; }
    std::size_t hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return hi_ - lo_; }
    bool empty() const noexcept { return hi_ == lo_; }

    /// Sub-view, positions relative to this view.
    SeriesView subview(std::size_t lo, std::size_t hi) const;

    std::span<const std::int64_t> index_ns() const;
    std::span<const double> index_numeric() const;
    IndexValue index_at(std::size_t i) const;

    /// Typed value span; T must match the tag (std::uint8_t for Bool).
    template <class T>
    std::span<const T> values() const {
        const auto* vec = std::get_if<std::vector<T>>(&source_->values().storage());
        if (vec == nullptr) {
            throw Error(ErrorCode::TypeMismatch, "series '" + name() + "' does not hold the requested value type");
        }
        return std::span<const T>(vec->data() + lo_, size());
    }

    std::span<const std::int32_t> categorical_codes() const;
    const std::vector<std::string>& categorical_labels() const;

    /// Calls `fn(std::span<const T>)` for F64/F32/I64/Bool views; throws
    /// TypeMismatch for categorical data.
    template <class Fn>
    decltype(auto) visit_numeric(Fn&& fn) const {
        switch (tag()) {
        case ValueTag::F64: return fn(values<double>());
        case ValueTag::F32: return fn(values<float>());
        case ValueTag::I64: return fn(values<std::int64_t>());
        case ValueTag::Bool: return fn(values<std::uint8_t>());
        case ValueTag::Categorical: break;
        }
        throw Error(ErrorCode::TypeMismatch, "series '" + name() + "' is categorical, expected numeric values");
    }

private:
    const Series* source_ = nullptr;
    std::size_t lo_ = 0;
    std::size_t hi_ = 0;
};

/// View of positions with start <= index < end (left-closed, right-open).
SeriesView slice_range(const SeriesView& view, IndexValue start, IndexValue end);
SeriesView slice_range(const Series& series, IndexValue start, IndexValue end);

/// Closed-interval variant used by chunking: start <= index <= end.
SeriesView slice_closed(const SeriesView& view, IndexValue start, IndexValue end);

/// Median of consecutive index differences (mean of the two middle values
/// for an even count; integer-truncated for time kind). Throws TooShort.
IndexDelta infer_period(const SeriesView& view);
IndexDelta infer_period(const Series& series);

/// Unique-name collection of series.
class SeriesSet {
public:
    using Map = std::map<std::string, Series, std::less<>>;

    SeriesSet() = default;
    explicit SeriesSet(std::vector<Series> series);

    /// Throws DuplicateName.
    void insert(Series series);
    /// Returns true when an existing series was replaced.
    bool insert_or_replace(Series series);

    const Series* find(std::string_view name) const;
    /// Throws UnknownSeries.
    const Series& at(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    std::size_t size() const noexcept { return series_.size(); }
    bool empty() const noexcept { return series_.empty(); }
    std::vector<std::string> names() const;

    Map::const_iterator begin() const { return series_.begin(); }
    Map::const_iterator end() const { return series_.end(); }

private:
    Map series_;
};

bool bitwise_equal(const SeriesSet& a, const SeriesSet& b);

} // namespace seqfeat
