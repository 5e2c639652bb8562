#pragma once

#include "seqfeat/index.hpp"
#include "seqfeat/series.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace seqfeat {

enum class OutputPosition : std::uint8_t { Begin, End };

struct PositionRange {
    std::size_t lo = 0;
    std::size_t hi = 0;

    std::size_t size() const noexcept { return hi - lo; }
    bool operator==(const PositionRange&) const = default;
};

/// Strided windows [begin + k*stride, begin + k*stride + window) over a span.
/// Only complete windows (start + window <= span end) are part of the grid.
struct SegmentGrid {
    IndexValue span_begin;
    IndexDelta window;
    IndexDelta stride;
    std::size_t n_segments = 0;
    OutputPosition output_position = OutputPosition::End;

    IndexKind kind() const noexcept { return span_begin.kind(); }
    IndexValue start(std::size_t k) const;
    IndexValue end(std::size_t k) const;
    /// Window end (End) or window start (Begin) of segment k.
    IndexValue output_index(std::size_t k) const;
};

SegmentGrid build_grid(IndexValue span_begin, IndexValue span_end, IndexDelta window, IndexDelta stride,
                       OutputPosition output_position = OutputPosition::End);

/// Per-segment [lo, hi) sample positions, relative to `view`. Two-pointer
/// sweep, O(n + n_segments).
std::vector<PositionRange> segment_positions(const SeriesView& view, const SegmentGrid& grid);

/// Same contract as segment_positions via one bisection per segment,
/// O(n_segments log n). Serial reference kept for cross-checking the sweep.
std::vector<PositionRange> segment_positions_bisect(const SeriesView& view, const SegmentGrid& grid);

struct IndexSpan {
    IndexValue begin;
    IndexValue end;
};

/// Latest first index and earliest last index over the views. Throws
/// EmptySeries, KindMismatch or DisjointSpans.
IndexSpan intersect_spans(std::span<const SeriesView> views);

} // namespace seqfeat
