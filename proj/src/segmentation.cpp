#include "seqfeat/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace seqfeat {

namespace {

template <class T, class Bound>
std::vector<PositionRange> sweep(std::span<const T> idx, const SegmentGrid& grid, Bound bound) {
    std::vector<PositionRange> out(grid.n_segments);
    std::size_t lo = 0;
    std::size_t hi = 0;
    const std::size_t n = idx.size();
    for (std::size_t k = 0; k < grid.n_segments; ++k) {
        const T start = bound(grid.start(k));
        const T end = bound(grid.end(k));
        while (lo < n && idx[lo] < start) {
            ++lo;
        }
        hi = std::max(hi, lo);
        while (hi < n && idx[hi] < end) {
            ++hi;
        }
        out[k] = {lo, hi};
    }
    return out;
}

template <class T, class Bound>
std::vector<PositionRange> bisect(std::span<const T> idx, const SegmentGrid& grid, Bound bound) {
    std::vector<PositionRange> out(grid.n_segments);
    for (std::size_t k = 0; k < grid.n_segments; ++k) {
        const auto lo = std::lower_bound(idx.begin(), idx.end(), bound(grid.start(k)));
        const auto hi = std::lower_bound(lo, idx.end(), bound(grid.end(k)));
        out[k] = {static_cast<std::size_t>(lo - idx.begin()), static_cast<std::size_t>(hi - idx.begin())};
    }
    return out;
}

constexpr auto kNs = [](IndexValue v) { return v.ns(); };
constexpr auto kNum = [](IndexValue v) { return v.numeric_value(); };

} // namespace

IndexValue SegmentGrid::start(std::size_t k) const {
    return offset(span_begin, stride, static_cast<std::int64_t>(k));
}

IndexValue SegmentGrid::end(std::size_t k) const {
    return offset(span_begin, stride, static_cast<std::int64_t>(k), window);
}

IndexValue SegmentGrid::output_index(std::size_t k) const {
    return output_position == OutputPosition::End ? end(k) : start(k);
}

SegmentGrid build_grid(IndexValue span_begin, IndexValue span_end, IndexDelta window, IndexDelta stride,
                       OutputPosition output_position) {
    require_same_kind(span_begin.kind(), span_end.kind(), "grid span");
    require_same_kind(span_begin.kind(), window.kind(), "grid window");
    require_same_kind(span_begin.kind(), stride.kind(), "grid stride");
    if (!window.is_positive()) {
        throw Error(ErrorCode::NonPositiveWindow, "window must be > 0, got " + format_delta(window));
    }
    if (!stride.is_positive()) {
        throw Error(ErrorCode::NonPositiveStride, "stride must be > 0, got " + format_delta(stride));
    }
    if (span_end < span_begin) {
        throw Error(ErrorCode::InvalidRange, "grid span end precedes begin");
    }
    SegmentGrid grid{span_begin, window, stride, 0, output_position};
    if (span_begin.is_time()) {
        const std::int64_t room = span_end.ns() - span_begin.ns() - window.ns();
        grid.n_segments = room < 0 ? 0 : static_cast<std::size_t>(room / stride.ns()) + 1;
        return grid;
    }
    const double room = span_end.numeric_value() - span_begin.numeric_value() - window.numeric_value();
    if (room < 0.0) {
        // The multiply-add end of segment 0 may still fit through rounding;
        // the adjustment loop below settles it.
        grid.n_segments = 0;
    } else {
        grid.n_segments = static_cast<std::size_t>(std::floor(room / stride.numeric_value())) + 1;
    }
    // Floor of a quotient can be off by one; settle against the exact end formula.
    const auto fits = [&](std::size_t k) { return !(span_end < grid.end(k)); };
    while (grid.n_segments > 0 && !fits(grid.n_segments - 1)) {
        --grid.n_segments;
    }
    while (fits(grid.n_segments)) {
        ++grid.n_segments;
    }
    return grid;
}

std::vector<PositionRange> segment_positions(const SeriesView& view, const SegmentGrid& grid) {
    if (view.kind() != grid.kind()) {
        require_same_kind(view.kind(), grid.kind(), "segment positions of '" + view.name() + "'");
    }
    if (view.kind() == IndexKind::TimeNs) {
        return sweep(view.index_ns(), grid, kNs);
    }
    return sweep(view.index_numeric(), grid, kNum);
}

std::vector<PositionRange> segment_positions_bisect(const SeriesView& view, const SegmentGrid& grid) {
    if (view.kind() != grid.kind()) {
        require_same_kind(view.kind(), grid.kind(), "segment positions of '" + view.name() + "'");
    }
    if (view.kind() == IndexKind::TimeNs) {
        return bisect(view.index_ns(), grid, kNs);
    }
    return bisect(view.index_numeric(), grid, kNum);
}

IndexSpan intersect_spans(std::span<const SeriesView> views) {
    if (views.empty()) {
        throw Error(ErrorCode::EmptySeries, "no series given to intersect");
    }
    IndexSpan span{};
    for (std::size_t i = 0; i < views.size(); ++i) {
        const SeriesView& v = views[i];
        if (v.empty()) {
            throw Error(ErrorCode::EmptySeries, "series '" + v.name() + "' is empty");
        }
        if (views[0].kind() != v.kind()) {
            require_same_kind(views[0].kind(), v.kind(), "span intersection with '" + v.name() + "'");
        }
        const IndexValue first = v.index_at(0);
        const IndexValue last = v.index_at(v.size() - 1);
        if (i == 0 || span.begin < first) {
            span.begin = first;
        }
        if (i == 0 || last < span.end) {
            span.end = last;
        }
    }
    if (span.end < span.begin) {
        std::string names;
        for (const auto& v : views) {
            names += (names.empty() ? "" : ", ") + v.name();
        }
        throw Error(ErrorCode::DisjointSpans, "series spans do not overlap: " + names);
    }
    return span;
}

} // namespace seqfeat
