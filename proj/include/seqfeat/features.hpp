#pragma once

#include "seqfeat/index.hpp"
#include "seqfeat/segmentation.hpp"
#include "seqfeat/series.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace seqfeat {

/// One output cell of a feature function. monostate is a null cell;
/// string_view carries a categorical label and must point into storage that
/// outlives the extraction (typically the input series' dictionary).
using Scalar = std::variant<std::monostate, double, std::int64_t, bool, std::string_view>;

using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using Params = std::map<std::string, ParamValue, std::less<>>;

std::optional<double> param_as_double(const Params& params, std::string_view key);
std::optional<std::int64_t> param_as_int(const Params& params, std::string_view key);
std::optional<std::string> param_as_string(const Params& params, std::string_view key);

/// Feature callable. Receives one read-only view per input series (all views
/// of a call cover the same window) and writes exactly `outputs.size()` cells.
/// Must be deterministic and must not retain the views.
using FeatureFunction =
    std::function<void(std::span<const SeriesView> inputs, const Params& params, std::span<Scalar> outputs)>;

enum class InputMode : std::uint8_t { ValuesOnly, ValuesAndIndex };

/// Robust-wrapping parameters; fill is NaN unless given.
struct RobustSpec {
    std::size_t min_samples = 1;
    Scalar fill = std::numeric_limits<double>::quiet_NaN();
};

/// Serializable identity of a wrapper built from the built-in registry.
struct FunctionSpec {
    std::string builtin;
    Params params;
    std::optional<RobustSpec> robust;
};

/// A feature callable plus the metadata the engine needs: output names,
/// output value tags, bound parameters and input mode.
class FuncWrapper {
public:
    /// `output_names` defaults to {base_name}; `output_tags` defaults to F64
    /// for every output. A nullopt tag means "same tag as the first input".
    /// Output names follow the series-name rules and may not start with '_'.
    FuncWrapper(FeatureFunction function, std::string base_name, std::vector<std::string> output_names = {},
                InputMode input_mode = InputMode::ValuesOnly, Params params = {},
                std::vector<std::optional<ValueTag>> output_tags = {});

    const std::string& base_name() const noexcept { return base_name_; }
    const std::vector<std::string>& output_names() const noexcept { return output_names_; }
    const std::vector<std::optional<ValueTag>>& output_tags() const noexcept { return output_tags_; }
    InputMode input_mode() const noexcept { return input_mode_; }
    const Params& params() const noexcept { return params_; }
    std::size_t n_outputs() const noexcept { return output_names_.size(); }

    void operator()(std::span<const SeriesView> inputs, std::span<Scalar> outputs) const;

    const std::optional<FunctionSpec>& spec() const noexcept { return spec_; }
    FuncWrapper& set_spec(FunctionSpec spec);

    /// Same base name and output names.
    bool same_identity(const FuncWrapper& other) const;

private:
    FeatureFunction function_;
    std::string base_name_;
    std::vector<std::string> output_names_;
    InputMode input_mode_;
    Params params_;
    std::vector<std::optional<ValueTag>> output_tags_;
    std::optional<FunctionSpec> spec_;
};

/// Wrapper returning `fill` for every output whenever an input view has fewer
/// than `min_samples` samples; delegates otherwise. Throws NonFloatOutput when
/// the fill is a float and some output is not float-tagged (or inherits its tag).
FuncWrapper make_robust(const FuncWrapper& function, std::size_t min_samples = 1,
                        Scalar fill = std::numeric_limits<double>::quiet_NaN());

struct FeatureDescriptor {
    std::vector<std::string> series_names;
    FuncWrapper function;
    IndexDelta window;
    IndexDelta stride;

    /// Throws InvalidDescriptor.
    void validate() const;
};

/// Cartesian product functions x series entries x windows x strides. Each
/// series entry is a tuple of names passed jointly to the function.
std::vector<FeatureDescriptor> expand_multiple(const std::vector<FuncWrapper>& functions,
                                               const std::vector<std::vector<std::string>>& series_entries,
                                               const std::vector<IndexDelta>& windows,
                                               const std::vector<IndexDelta>& strides);

struct GroupKey {
    std::vector<std::string> series_names;
    IndexDelta window;
    IndexDelta stride;

    bool operator==(const GroupKey&) const = default;
    bool operator<(const GroupKey& other) const;
};

struct FeatureGroup {
    GroupKey key;
    std::vector<FuncWrapper> functions;
};

/// Registry of features grouped by (series names, window, stride). Groups are
/// kept in key order; functions in registration order.
class FeatureCollection {
public:
    FeatureCollection() = default;
    explicit FeatureCollection(const std::vector<FeatureDescriptor>& descriptors);

    /// Throws InvalidDescriptor or DuplicateFeature (same identity or an
    /// output name clash within the group).
    void add(const FeatureDescriptor& descriptor);
    void add(const std::vector<FeatureDescriptor>& descriptors);

    const std::vector<FeatureGroup>& groups() const noexcept { return groups_; }
    std::size_t n_groups() const noexcept { return groups_.size(); }
    std::size_t n_functions() const noexcept;
    std::vector<FeatureDescriptor> descriptors() const;
    /// Column names extraction would produce, in matrix order.
    std::vector<std::string> output_names() const;

    /// New collection with the features that produce `columns`; multi-output
    /// functions are kept whole. Throws MalformedName or UnknownColumn.
    FeatureCollection reduce(std::span<const std::string> columns) const;

private:
    std::vector<FeatureGroup> groups_;
};

// ---- naming grammar --------------------------------------------------------

struct ParsedName {
    std::vector<std::string> series_names;
    std::string output_name;
    IndexDelta window;
    IndexDelta stride;

    bool operator==(const ParsedName&) const = default;
};

/// `<series joined by "|">__<output>__w=<W>_s=<S>`. Throws ReservedCharacter.
std::string format_output_name(std::span<const std::string> series_names, std::string_view output_name,
                               IndexDelta window, IndexDelta stride);
/// Exact inverse of format_output_name. Throws MalformedName.
ParsedName parse_output_name(std::string_view column);

// ---- extraction ------------------------------------------------------------

/// Index-preserving output table, the outer join of every group's grid
/// index. `present[row]` is 1 when the row belongs to the column's grid; rows
/// added by the join hold NaN (float tags) or a zero/-1 sentinel and 0.
class FeatureMatrix {
public:
    struct Column {
        std::string name;
        ValueStorage data;
        std::vector<std::uint8_t> present;

        ValueTag tag() const noexcept { return tag_of(data); }
    };

    FeatureMatrix() = default;
    FeatureMatrix(IndexStorage index, std::vector<Column> columns);

    IndexKind kind() const noexcept;
    std::size_t rows() const noexcept;
    std::size_t n_columns() const noexcept { return columns_.size(); }
    IndexValue index_at(std::size_t row) const;
    const IndexStorage& index() const noexcept { return index_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    const Column* find(std::string_view name) const;
    const Column& column(std::string_view name) const;
    std::vector<std::string> column_names() const;
    /// monostate for join-filled cells; categorical cells view this matrix's labels.
    Scalar cell(const Column& column, std::size_t row) const;
    double as_double(const Column& column, std::size_t row) const;

    /// Columns `names` in the given order, keeping the rows where at least one
    /// of them is present. Throws UnknownColumn.
    FeatureMatrix project(std::span<const std::string> names) const;
    /// Rows ordered by index, duplicates (same index) keep the first row.
    static FeatureMatrix concat_rows(std::span<const FeatureMatrix> parts);

private:
    IndexStorage index_ = std::vector<std::int64_t>{};
    std::vector<Column> columns_;
};

bool bitwise_equal(const FeatureMatrix& a, const FeatureMatrix& b);

struct LogRecord {
    std::string function;
    std::string series;
    IndexDelta window;
    IndexDelta stride;
    std::size_t n_segments = 0;
    double duration_s = 0.0;
};

struct SparsityWarning {
    std::string series;
    IndexDelta window;
    IndexDelta stride;
    std::size_t modal_count = 0;
    std::size_t n_deviating = 0;
    std::size_t n_segments = 0;

    std::string message() const;
    bool operator==(const SparsityWarning&) const = default;
};

/// Bounds every group grid to a range: the grid starts no earlier than
/// `begin`; windows end no later than `end` (closed range) or may end exactly
/// at `end` (half-open range, whose data continues past it).
struct GridClip {
    IndexValue begin;
    IndexValue end;
    bool closed_end = true;
};

struct ExtractOptions {
    bool approve_sparsity = false;
    /// <= 0 uses every available thread.
    int n_workers = 1;
    std::optional<std::filesystem::path> log_path;
    OutputPosition output_position = OutputPosition::End;
    std::optional<GridClip> grid_clip;
};

struct ExtractResult {
    FeatureMatrix matrix;
    std::vector<LogRecord> log;
    std::vector<SparsityWarning> warnings;
};

/// Computes every feature of `collection` over `series`. One grid per group;
/// work items are (group, function) pairs run on `n_workers` OpenMP threads
/// and merged in collection order, so the result does not depend on the
/// worker count. Throws UnknownSeries, KindMismatch, DisjointSpans or
/// FunctionFailure (first failing work item in collection order).
ExtractResult extract(const SeriesSet& series, const FeatureCollection& collection, const ExtractOptions& options = {});

/// Same, over explicit views (chunk slices). Views must stay valid.
ExtractResult extract(std::span<const SeriesView> series, const FeatureCollection& collection,
                      const ExtractOptions& options = {});

struct LogSummary {
    std::string function;
    double total_s = 0.0;
    double mean_s = 0.0;
    std::size_t calls = 0;
};

/// Per-function totals, ordered by function name.
std::vector<LogSummary> aggregate_log(std::span<const LogRecord> records);

void write_log(std::span<const LogRecord> records, const std::filesystem::path& path);

} // namespace seqfeat
