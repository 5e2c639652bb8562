#pragma once

#include "seqfeat/features.hpp"
#include "seqfeat/processing.hpp"
#include "seqfeat/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace seqfeat {

enum class IndexHint : std::uint8_t { Auto, TimeNs, Numeric };

struct CsvLoadOptions {
    /// Index column header; the first column when empty.
    std::string index_column;
    /// Auto: RFC 3339 if the first index cell parses as a timestamp, numeric otherwise.
    IndexHint kind = IndexHint::Auto;
    /// Sort rows by index (stable) instead of rejecting unsorted input.
    bool sort = false;
    /// Value tags per column (names absent from the file are ignored); other
    /// columns are inferred (bool, i64, f64 with empty cells as NaN, otherwise categorical).
    std::map<std::string, ValueTag, std::less<>> dtypes;
};

/// One series per non-index column, all sharing one index storage.
/// Errors name the data row (1-based, header excluded): ParseError,
/// NonMonotonicIndex, DuplicateHeader, IoError.
std::vector<Series> load_csv(const std::filesystem::path& path, const CsvLoadOptions& options = {});
std::vector<Series> read_csv(std::istream& in, const CsvLoadOptions& options = {}, std::string_view source = "<stream>");

/// Index first (RFC 3339 or shortest decimal), one column per feature; NaN
/// and join-filled cells are empty fields.
void write_matrix(const FeatureMatrix& matrix, std::ostream& out);
void write_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path);

/// Series sharing identical index values written as one table.
void write_series_csv(std::span<const Series> series, std::ostream& out, std::string_view index_name = "index");
void write_series_csv(std::span<const Series> series, const std::filesystem::path& path,
                      std::string_view index_name = "index");
void write_view_csv(const SeriesView& view, std::ostream& out, std::string_view index_name = "index");

ValueTag parse_value_tag(std::string_view text);

// ---- configuration documents ----------------------------------------------

struct FeatureConfig {
    FeatureCollection collection;
    ExtractOptions options;
};

/// Throws ConfigError (with a JSON path) or the underlying builtin error
/// (UnknownBuiltin, BadParam, ...).
FeatureConfig parse_feature_config(std::string_view json_text);
FeatureConfig load_feature_config(const std::filesystem::path& path);
/// Only wrappers built from the registry serialize; others throw NotSerializable.
std::string serialize_feature_config(const FeatureCollection& collection, const ExtractOptions& options = {});

Pipeline parse_pipeline_config(std::string_view json_text);
Pipeline load_pipeline_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace seqfeat
