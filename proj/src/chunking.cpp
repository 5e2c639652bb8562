#include "seqfeat/chunking.hpp"

#include <algorithm>

namespace seqfeat {

namespace {

struct Natural {
    IndexValue begin;
    IndexValue end;
    std::size_t series = 0;
};

// Gap-delimited closed ranges of one view, min_chunk_dur applied.
std::vector<ChunkRange> natural_ranges(const SeriesView& view, const ChunkSpec& spec) {
    std::vector<ChunkRange> out;
    if (view.empty()) {
        return out;
    }
    if (view.size() < 2) {
        out.push_back({view.index_at(0), view.index_at(0), true});
    } else {
        const double threshold = spec.gap_factor * infer_period(view).as_double();
        std::size_t start = 0;
        IndexValue prev = view.index_at(0);
        for (std::size_t i = 1; i < view.size(); ++i) {
            const IndexValue cur = view.index_at(i);
            if (difference(cur, prev).as_double() > threshold) {
                out.push_back({view.index_at(start), prev, true});
                start = i;
            }
            prev = cur;
        }
        out.push_back({view.index_at(start), prev, true});
    }
    if (spec.min_chunk_dur) {
        std::erase_if(out, [&](const ChunkRange& r) { return difference(r.end, r.begin) < *spec.min_chunk_dur; });
    }
    return out;
}

// Cuts a closed range into pieces of at most max_chunk_dur.
std::vector<ChunkRange> cut(const ChunkRange& range, const ChunkSpec& spec) {
    if (!spec.max_chunk_dur || !(*spec.max_chunk_dur < difference(range.end, range.begin))) {
        return {range};
    }
    const IndexDelta max = *spec.max_chunk_dur;
    const IndexDelta overlap = spec.sub_chunk_overlap.value_or(zero_delta(range.begin.kind()));
    std::vector<ChunkRange> pieces;
    for (std::int64_t j = 0;; ++j) {
        const IndexValue piece_start = offset(range.begin, max, j);
        if (!(piece_start < range.end)) {
            break;
        }
        IndexValue begin = piece_start;
        if (j > 0) {
            const IndexValue extended = offset(piece_start, overlap, -1);
            begin = extended < range.begin ? range.begin : extended;
        }
        const IndexValue next = offset(range.begin, max, j + 1);
        if (next < range.end) {
            pieces.push_back({begin, next, false});
        } else {
            pieces.push_back({begin, range.end, true});
            break;
        }
    }
    return pieces;
}

SeriesView clip(const SeriesView& view, const ChunkRange& range) {
    return range.closed_end ? slice_closed(view, range.begin, range.end) : slice_range(view, range.begin, range.end);
}

} // namespace

void ChunkSpec::validate(IndexKind kind) const {
    if (!(gap_factor > 1.0)) {
        throw Error(ErrorCode::BadSpec, "gap_factor must be > 1");
    }
    for (const auto* d : {&min_chunk_dur, &max_chunk_dur, &sub_chunk_overlap}) {
        if (*d) {
            require_same_kind(kind, (*d)->kind(), "chunk spec");
        }
    }
    if (min_chunk_dur && min_chunk_dur->as_double() < 0) {
        throw Error(ErrorCode::BadSpec, "min_chunk_dur must be >= 0");
    }
    if (max_chunk_dur && !max_chunk_dur->is_positive()) {
        throw Error(ErrorCode::BadSpec, "max_chunk_dur must be > 0");
    }
    if (sub_chunk_overlap && sub_chunk_overlap->as_double() < 0) {
        throw Error(ErrorCode::BadSpec, "sub_chunk_overlap must be >= 0");
    }
    if (sub_chunk_overlap && max_chunk_dur && !(*sub_chunk_overlap < *max_chunk_dur)) {
        throw Error(ErrorCode::BadSpec, "sub_chunk_overlap must be smaller than max_chunk_dur");
    }
}

std::vector<ChunkRange> chunk_series(const SeriesView& series, const ChunkSpec& spec) {
    spec.validate(series.kind());
    std::vector<ChunkRange> out;
    for (const auto& r : natural_ranges(series, spec)) {
        auto pieces = cut(r, spec);
        out.insert(out.end(), pieces.begin(), pieces.end());
    }
    return out;
}

std::vector<ChunkRange> chunk_series(const Series& series, const ChunkSpec& spec) {
    return chunk_series(series.view(), spec);
}

std::vector<ChunkGroup> chunk_set(const SeriesSet& series, const ChunkSpec& spec) {
    std::vector<const Series*> members;
    std::vector<Natural> ranges;
    for (const auto& [name, s] : series) {
        if (!members.empty()) {
            require_same_kind(members.front()->kind(), s.kind(), "chunking '" + name + "'");
        }
        spec.validate(s.kind());
        for (const auto& r : natural_ranges(s.view(), spec)) {
            ranges.push_back({r.begin, r.end, members.size()});
        }
        members.push_back(&s);
    }
    std::stable_sort(ranges.begin(), ranges.end(), [](const Natural& a, const Natural& b) { return a.begin < b.begin; });

    std::vector<ChunkGroup> groups;
    std::size_t i = 0;
    while (i < ranges.size()) {
        ChunkRange bounds{ranges[i].begin, ranges[i].end, true};
        std::vector<bool> in_component(members.size(), false);
        in_component[ranges[i].series] = true;
        std::size_t j = i + 1;
        // Closed intervals sorted by begin: the component grows while the next
        // range starts at or before the running end.
        while (j < ranges.size() && !(bounds.end < ranges[j].begin)) {
            if (bounds.end < ranges[j].end) {
                bounds.end = ranges[j].end;
            }
            in_component[ranges[j].series] = true;
            ++j;
        }
        for (const auto& piece : cut(bounds, spec)) {
            ChunkGroup group{piece, {}};
            for (std::size_t m = 0; m < members.size(); ++m) {
                if (!in_component[m]) {
                    continue;
                }
                SeriesView slice = clip(members[m]->view(), piece);
                if (!slice.empty()) {
                    group.slices.push_back(slice);
                }
            }
            groups.push_back(std::move(group));
        }
        i = j;
    }
    return groups;
}

ExtractResult extract_chunked(std::span<const ChunkGroup> groups, const FeatureCollection& collection,
                              const ExtractOptions& options) {
    ExtractResult out;
    std::vector<FeatureMatrix> parts;
    ExtractOptions per_chunk = options;
    per_chunk.log_path.reset();
    for (const auto& group : groups) {
        per_chunk.grid_clip = GridClip{group.range.begin, group.range.end, group.range.closed_end};
        ExtractResult r = extract(group.slices, collection, per_chunk);
        parts.push_back(std::move(r.matrix));
        out.log.insert(out.log.end(), r.log.begin(), r.log.end());
        out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
    }
    out.matrix = FeatureMatrix::concat_rows(parts);
    if (options.log_path) {
        write_log(out.log, *options.log_path);
    }
    return out;
}

} // namespace seqfeat
