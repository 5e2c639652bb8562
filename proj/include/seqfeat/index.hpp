#pragma once

#include "seqfeat/error.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace seqfeat {

/// Unit of a sequence index. Time indices are integer nanoseconds since the
/// epoch; numeric indices are 64-bit float positions.
enum class IndexKind : std::uint8_t { TimeNs, Numeric };

std::string_view to_string(IndexKind kind) noexcept;

void require_same_kind(IndexKind a, IndexKind b, std::string_view context);

namespace detail {

struct PositionTag {};
struct DeltaTag {};

// A tagged scalar on the index axis. Only the member matching `kind()` is
// meaningful; the other stays zero so defaulted equality is exact.
template <class Tag>
class IndexScalar {
public:
    constexpr IndexScalar() = default;

    static constexpr IndexScalar time_ns(std::int64_t ns) {
        IndexScalar s;
        s.kind_ = IndexKind::TimeNs;
        s.ns_ = ns;
        return s;
    }
    static constexpr IndexScalar numeric(double value) {
        IndexScalar s;
        s.kind_ = IndexKind::Numeric;
        s.num_ = value;
        return s;
    }

    constexpr IndexKind kind() const noexcept { return kind_; }
    constexpr bool is_time() const noexcept { return kind_ == IndexKind::TimeNs; }
    constexpr std::int64_t ns() const noexcept { return ns_; }
    constexpr double numeric_value() const noexcept { return num_; }

    /// Nanoseconds as double for time kind, the position itself otherwise.
    constexpr double as_double() const noexcept {
        return is_time() ? static_cast<double>(ns_) : num_;
    }

    constexpr bool is_positive() const noexcept { return is_time() ? ns_ > 0 : num_ > 0.0; }

    friend constexpr bool operator==(const IndexScalar&, const IndexScalar&) = default;

    // Total order within one kind; TimeNs sorts before Numeric across kinds.
    friend constexpr std::partial_ordering operator<=>(const IndexScalar& a, const IndexScalar& b) {
        if (a.kind_ != b.kind_) {
            return a.kind_ <=> b.kind_;
        }
        if (a.is_time()) {
            return a.ns_ <=> b.ns_;
        }
        return a.num_ <=> b.num_;
    }

private:
    IndexKind kind_ = IndexKind::TimeNs;
    std::int64_t ns_ = 0;
    double num_ = 0.0;
};

} // namespace detail

/// A position on the sequence axis.
using IndexValue = detail::IndexScalar<detail::PositionTag>;
/// A distance on the sequence axis (window, stride, period).
using IndexDelta = detail::IndexScalar<detail::DeltaTag>;

/// `base + k * step + extra`, computed as one multiply-add for numeric kind
/// so long grids do not accumulate drift.
IndexValue offset(IndexValue base, IndexDelta step, std::int64_t k, IndexDelta extra);
IndexValue offset(IndexValue base, IndexDelta step, std::int64_t k);
IndexValue offset(IndexValue base, IndexDelta delta);
IndexDelta difference(IndexValue later, IndexValue earlier);

constexpr IndexDelta zero_delta(IndexKind kind) {
    return kind == IndexKind::TimeNs ? IndexDelta::time_ns(0) : IndexDelta::numeric(0.0);
}

/// Delta in seconds for time kind, the raw delta for numeric kind.
double to_seconds(IndexDelta delta);

/// Renders a delta in the naming-grammar format: time deltas use the largest
/// unit of {D,h,m,s,ms,us,ns} dividing them exactly ("30s", "2500ms");
/// numeric deltas use the shortest round-trip decimal ("0.5", "5").
std::string format_delta(IndexDelta delta);

/// Inverse of format_delta. Also accepts non-canonical forms such as
/// "90s" or "1.5" so configuration files can be written by hand.
IndexDelta parse_delta(std::string_view text);

/// Shortest round-trip decimal for a double.
std::string format_double(double value);
std::string format_float(float value);

/// RFC 3339 timestamp with the minimal number of fractional digits.
std::string format_rfc3339(std::int64_t ns_since_epoch);
/// Parses RFC 3339 (`T` or space separator, `Z` or +hh:mm offset, up to 9
/// fractional digits). Returns false when the text is not a timestamp.
bool parse_rfc3339(std::string_view text, std::int64_t& ns_since_epoch);

/// Index value rendered for CSV output: RFC 3339 or shortest decimal.
std::string format_index_value(IndexValue value);

} // namespace seqfeat
