#pragma once

#include "seqfeat/features.hpp"
#include "seqfeat/series.hpp"

#include <optional>
#include <span>
#include <vector>

namespace seqfeat {

struct ChunkSpec {
    /// A gap is a consecutive index difference above gap_factor * median period.
    double gap_factor = 4.0;
    /// Chunks spanning less than this are dropped.
    std::optional<IndexDelta> min_chunk_dur;
    /// Longer chunks are cut into consecutive pieces of at most this span.
    std::optional<IndexDelta> max_chunk_dur;
    /// Each cut piece after the first also covers this much before its start.
    /// Choosing it >= window - stride keeps windowed extraction seamless.
    std::optional<IndexDelta> sub_chunk_overlap;

    /// Throws BadSpec or KindMismatch.
    void validate(IndexKind kind) const;
};

/// Index range of one chunk. Gap-delimited chunks and final pieces are closed
/// [begin, end]; inner pieces of a cut chunk are half-open [begin, end).
struct ChunkRange {
    IndexValue begin;
    IndexValue end;
    bool closed_end = true;

    bool operator==(const ChunkRange&) const = default;
};

struct ChunkGroup {
    ChunkRange range;
    /// One non-empty view per member series, clipped to `range`.
    std::vector<SeriesView> slices;
};

/// Ranges of one series, sorted by begin. A single-sample series yields one
/// chunk equal to its full range; an empty series yields none.
std::vector<ChunkRange> chunk_series(const SeriesView& series, const ChunkSpec& spec);
std::vector<ChunkRange> chunk_series(const Series& series, const ChunkSpec& spec);

/// Gap-delimited ranges of all series grouped into connected components of
/// the overlap graph; each component's bounding range is then cut by
/// max_chunk_dur. Groups are sorted by begin. The set must outlive the slices.
std::vector<ChunkGroup> chunk_set(const SeriesSet& series, const ChunkSpec& spec);

/// Extracts each chunk group independently, with grids clipped to the group
/// range, and concatenates the rows (a row produced by two overlapping groups
/// is kept once). Every group must hold all series the collection references.
/// With sub_chunk_overlap = window - stride, and window and max_chunk_dur
/// multiples of the stride, the rows equal whole-series extraction on
/// gapless, grid-aligned data.
ExtractResult extract_chunked(std::span<const ChunkGroup> groups, const FeatureCollection& collection,
                              const ExtractOptions& options = {});

} // namespace seqfeat
