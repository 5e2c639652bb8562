#include "seqfeat/io.hpp"

#include "seqfeat/builtins.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace seqfeat {

using nlohmann::json;

namespace {

// ---- CSV records -------------------------------------------------------------

class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one RFC 4180 record. Returns false at end of input.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == EOF) {
            return false;
        }
        std::string field;
        bool quoted = false;
        bool was_quoted = false;
        for (;; c = in_.get()) {
            if (quoted) {
                if (c == EOF) {
                    throw Error(ErrorCode::ParseError, "unterminated quoted field at line " + std::to_string(line_ + 1));
                }
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') {
                        ++line_;
                    }
                    field.push_back(static_cast<char>(c));
                }
                continue;
            }
            if (c == EOF || c == '\n') {
                fields.push_back(std::move(field));
                ++line_;
                return true;
            }
            if (c == '\r') {
                if (in_.peek() == '\n') {
                    continue;
                }
                field.push_back('\r');
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else if (c == '"' && field.empty() && !was_quoted) {
                quoted = true;
                was_quoted = true;
            } else {
                field.push_back(static_cast<char>(c));
            }
        }
    }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

void write_field(std::ostream& out, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') {
            out << '"';
        }
        out << c;
    }
    out << '"';
}

template <class T>
bool parse_number(std::string_view text, T& out) {
    if (text.empty()) {
        return false;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::string row_context(std::string_view source, std::size_t row) {
    return std::string(source) + ": data row " + std::to_string(row);
}

ValueColumn infer_column(std::vector<std::string>& cells, const std::string& header, std::optional<ValueTag> hint,
                         std::string_view source) {
    const auto fail = [&](std::size_t row, const std::string& what) {
        throw Error(ErrorCode::ParseError,
                    row_context(source, row + 1) + ", column '" + header + "': " + what + " '" + cells[row] + "'");
    };
    ValueTag tag;
    if (hint) {
        tag = *hint;
    } else {
        bool any_empty = false;
        bool all_bool = true;
        bool all_int = true;
        bool all_float = true;
        for (const auto& cell : cells) {
            if (cell.empty()) {
                any_empty = true;
                continue;
            }
            std::int64_t i = 0;
            double d = 0.0;
            all_bool = all_bool && (cell == "true" || cell == "false");
            all_int = all_int && parse_number(cell, i);
            all_float = all_float && parse_number(cell, d);
        }
        const bool has_values = cells.size() > static_cast<std::size_t>(
                                                   std::count(cells.begin(), cells.end(), std::string()));
        if (!has_values) {
            tag = ValueTag::F64;
        } else if (all_bool && !any_empty) {
            tag = ValueTag::Bool;
        } else if (all_int && !any_empty) {
            tag = ValueTag::I64;
        } else if (all_float) {
            tag = ValueTag::F64;
        } else {
            tag = ValueTag::Categorical;
        }
    }
    const std::size_t n = cells.size();
    switch (tag) {
    case ValueTag::F64: {
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (cells[r].empty()) {
                v[r] = std::numeric_limits<double>::quiet_NaN();
            } else if (!parse_number(cells[r], v[r])) {
                fail(r, "not a number");
            }
        }
        return ValueColumn::f64(std::move(v));
    }
    case ValueTag::F32: {
        std::vector<float> v(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (cells[r].empty()) {
                v[r] = std::numeric_limits<float>::quiet_NaN();
            } else if (!parse_number(cells[r], v[r])) {
                fail(r, "not a number");
            }
        }
        return ValueColumn::f32(std::move(v));
    }
    case ValueTag::I64: {
        std::vector<std::int64_t> v(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (!parse_number(cells[r], v[r])) {
                fail(r, "not an integer");
            }
        }
        return ValueColumn::i64(std::move(v));
    }
    case ValueTag::Bool: {
        std::vector<std::uint8_t> v(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (cells[r] == "true" || cells[r] == "1") {
                v[r] = 1;
            } else if (cells[r] == "false" || cells[r] == "0") {
                v[r] = 0;
            } else {
                fail(r, "not a boolean");
            }
        }
        return ValueColumn::boolean(std::move(v));
    }
    case ValueTag::Categorical: return ValueColumn::categorical_from_strings(cells);
    }
    throw Error(ErrorCode::ParseError, "unsupported value tag");
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

std::string format_cell(const ValueStorage& data, std::size_t row) {
    return std::visit(
        [&](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::vector<double>>) {
                return std::isnan(v[row]) ? std::string() : format_double(v[row]);
            } else if constexpr (std::is_same_v<V, std::vector<float>>) {
                return std::isnan(v[row]) ? std::string() : format_float(v[row]);
            } else if constexpr (std::is_same_v<V, std::vector<std::int64_t>>) {
                return std::to_string(v[row]);
            } else if constexpr (std::is_same_v<V, std::vector<std::uint8_t>>) {
                return v[row] != 0 ? "true" : "false";
            } else {
                const auto code = v.codes[row];
                return code < 0 ? std::string() : v.labels[static_cast<std::size_t>(code)];
            }
        },
        data);
}

// ---- JSON helpers --------------------------------------------------------------

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ConfigError, where + ": " + what);
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string(what) + " is not valid JSON: " + e.what());
    }
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        config_error(where, "expected an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            config_error(where, "unknown key '" + key + "'");
        }
    }
}

Params parse_params(const json& j, const std::string& where) {
    Params params;
    if (j.is_null()) {
        return params;
    }
    if (!j.is_object()) {
        config_error(where, "params must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (value.is_boolean()) {
            params.emplace(key, value.get<bool>());
        } else if (value.is_number_integer()) {
            params.emplace(key, value.get<std::int64_t>());
        } else if (value.is_number_float()) {
            params.emplace(key, value.get<double>());
        } else if (value.is_string()) {
            params.emplace(key, value.get<std::string>());
        } else {
            config_error(where + "." + key, "param must be a bool, number or string");
        }
    }
    return params;
}

json params_to_json(const Params& params) {
    json j = json::object();
    for (const auto& [key, value] : params) {
        std::visit([&](const auto& v) { j[key] = v; }, value);
    }
    return j;
}

// "a" -> {{a}}, ["a","b"] -> {{a},{b}}, [["a","b"]] -> {{a,b}}; mixed lists allowed.
std::vector<std::vector<std::string>> parse_selector(const json& j, const std::string& where) {
    std::vector<std::vector<std::string>> entries;
    const auto name = [&](const json& v, const std::string& at) {
        if (!v.is_string()) {
            config_error(at, "series names must be strings");
        }
        return v.get<std::string>();
    };
    if (j.is_string()) {
        entries.push_back({j.get<std::string>()});
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string at = where + "[" + std::to_string(i) + "]";
            if (j[i].is_array()) {
                std::vector<std::string> tuple;
                for (std::size_t k = 0; k < j[i].size(); ++k) {
                    tuple.push_back(name(j[i][k], at + "[" + std::to_string(k) + "]"));
                }
                if (tuple.empty()) {
                    config_error(at, "empty series tuple");
                }
                entries.push_back(std::move(tuple));
            } else {
                entries.push_back({name(j[i], at)});
            }
        }
    } else {
        config_error(where, "expected a series name, a list of names or a list of tuples");
    }
    if (entries.empty()) {
        config_error(where, "no series given");
    }
    return entries;
}

std::vector<IndexDelta> parse_deltas(const json& j, const std::string& where) {
    std::vector<IndexDelta> deltas;
    const auto one = [&](const json& v, const std::string& at) {
        if (!v.is_string()) {
            config_error(at, "expected a delta string such as \"30s\" or \"0.5\"");
        }
        try {
            deltas.push_back(parse_delta(v.get<std::string>()));
        } catch (const Error& e) {
            config_error(at, e.what());
        }
    };
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            one(j[i], where + "[" + std::to_string(i) + "]");
        }
    } else {
        one(j, where);
    }
    return deltas;
}

Scalar parse_fill(const json& j, const std::string& where) {
    if (j.is_null()) {
        return std::monostate{};
    }
    if (j.is_boolean()) {
        return j.get<bool>();
    }
    if (j.is_number_integer()) {
        return j.get<std::int64_t>();
    }
    if (j.is_number_float()) {
        return j.get<double>();
    }
    if (j.is_string() && (j.get<std::string>() == "nan" || j.get<std::string>() == "NaN")) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    config_error(where, "fill must be null, a bool, a number or \"nan\"");
}

FuncWrapper parse_function(const json& j, const std::string& where) {
    FunctionSpec spec;
    if (j.is_string()) {
        spec.builtin = j.get<std::string>();
        return from_spec(spec);
    }
    check_keys(j, where, {"name", "params", "robust"});
    if (!j.contains("name") || !j["name"].is_string()) {
        config_error(where, "missing function name");
    }
    spec.builtin = j["name"].get<std::string>();
    spec.params = parse_params(j.value("params", json()), where + ".params");
    if (j.contains("robust")) {
        const json& r = j["robust"];
        const std::string at = where + ".robust";
        check_keys(r, at, {"min_samples", "fill"});
        RobustSpec robust;
        if (r.contains("min_samples")) {
            if (!r["min_samples"].is_number_unsigned()) {
                config_error(at, "min_samples must be a non-negative integer");
            }
            robust.min_samples = r["min_samples"].get<std::size_t>();
        }
        if (r.contains("fill")) {
            robust.fill = parse_fill(r["fill"], at + ".fill");
        }
        spec.robust = robust;
    }
    return from_spec(spec);
}

json function_to_json(const FuncWrapper& fw) {
    if (!fw.spec()) {
        throw Error(ErrorCode::NotSerializable,
                    "function '" + fw.base_name() + "' is not a registered builtin and cannot be serialized");
    }
    const FunctionSpec& spec = *fw.spec();
    json j;
    j["name"] = spec.builtin;
    if (!spec.params.empty()) {
        j["params"] = params_to_json(spec.params);
    }
    if (spec.robust) {
        json r;
        r["min_samples"] = spec.robust->min_samples;
        std::visit(
            [&](const auto& f) {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, std::monostate>) {
                    r["fill"] = nullptr;
                } else if constexpr (std::is_same_v<F, double>) {
                    if (std::isnan(f)) {
                        return; // default fill
                    }
                    if (!std::isfinite(f)) {
                        throw Error(ErrorCode::NotSerializable,
                                    "robust fill of '" + fw.base_name() + "' is not representable in JSON");
                    }
                    r["fill"] = f;
                } else if constexpr (std::is_same_v<F, std::string_view>) {
                    throw Error(ErrorCode::NotSerializable,
                                "robust fill of '" + fw.base_name() + "' is a label and cannot be serialized");
                } else {
                    r["fill"] = f;
                }
            },
            spec.robust->fill);
        j["robust"] = std::move(r);
    }
    return j;
}

std::string_view position_name(OutputPosition p) { return p == OutputPosition::Begin ? "begin" : "end"; }

} // namespace

ValueTag parse_value_tag(std::string_view text) {
    if (text == "f64" || text == "float64") {
        return ValueTag::F64;
    }
    if (text == "f32" || text == "float32") {
        return ValueTag::F32;
    }
    if (text == "i64" || text == "int64") {
        return ValueTag::I64;
    }
    if (text == "bool") {
        return ValueTag::Bool;
    }
    if (text == "categorical" || text == "str") {
        return ValueTag::Categorical;
    }
    throw Error(ErrorCode::ParseError, "unknown value type '" + std::string(text) + "'");
}

std::vector<Series> read_csv(std::istream& in, const CsvLoadOptions& options, std::string_view source) {
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header) || (header.size() == 1 && header[0].empty())) {
        throw Error(ErrorCode::ParseError, std::string(source) + ": missing header row");
    }
    {
        std::set<std::string_view> seen;
        for (const auto& h : header) {
            if (!seen.insert(h).second) {
                throw Error(ErrorCode::DuplicateHeader, std::string(source) + ": duplicate column '" + h + "'");
            }
        }
    }
    std::size_t index_col = 0;
    if (!options.index_column.empty()) {
        auto it = std::find(header.begin(), header.end(), options.index_column);
        if (it == header.end()) {
            throw Error(ErrorCode::UnknownColumn,
                        std::string(source) + ": no index column '" + options.index_column + "'");
        }
        index_col = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t n_cols = header.size();
    std::vector<std::string> index_cells;
    std::vector<std::vector<std::string>> cells(n_cols);
    std::vector<std::string> record;
    while (reader.next(record)) {
        if (record.size() == 1 && record[0].empty()) {
            continue; // blank line
        }
        if (record.size() != n_cols) {
            throw Error(ErrorCode::ParseError, row_context(source, index_cells.size() + 1) + ": expected " +
                                                   std::to_string(n_cols) + " fields, got " +
                                                   std::to_string(record.size()));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == index_col) {
                index_cells.push_back(std::move(record[c]));
            } else {
                cells[c].push_back(std::move(record[c]));
            }
        }
    }
    const std::size_t n_rows = index_cells.size();

    IndexKind kind = IndexKind::Numeric;
    if (options.kind == IndexHint::TimeNs) {
        kind = IndexKind::TimeNs;
    } else if (options.kind == IndexHint::Auto && n_rows > 0) {
        std::int64_t ns = 0;
        kind = parse_rfc3339(index_cells[0], ns) ? IndexKind::TimeNs : IndexKind::Numeric;
    }

    std::vector<std::int64_t> time(kind == IndexKind::TimeNs ? n_rows : 0);
    std::vector<double> num(kind == IndexKind::Numeric ? n_rows : 0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const bool ok = kind == IndexKind::TimeNs ? parse_rfc3339(index_cells[r], time[r])
                                                  : parse_number(index_cells[r], num[r]) && std::isfinite(num[r]);
        if (!ok) {
            throw Error(ErrorCode::ParseError, row_context(source, r + 1) + ": unparseable " +
                                                   std::string(to_string(kind)) + " index '" + index_cells[r] + "'");
        }
    }
    index_cells = {};

    const auto less = [&](std::size_t a, std::size_t b) {
        return kind == IndexKind::TimeNs ? time[a] < time[b] : num[a] < num[b];
    };
    std::vector<std::size_t> order;
    for (std::size_t r = 1; r < n_rows; ++r) {
        if (less(r, r - 1)) {
            if (!options.sort) {
                throw Error(ErrorCode::NonMonotonicIndex, row_context(source, r + 1) + ": index decreases (" +
                                                              header[index_col] +
                                                              "); pass the sort option to reorder rows");
            }
            order.resize(n_rows);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), less);
            break;
        }
    }
    if (!order.empty()) {
        const auto permute = [&](auto& v) {
            std::remove_reference_t<decltype(v)> out;
            out.reserve(v.size());
            for (std::size_t r : order) {
                out.push_back(std::move(v[r]));
            }
            v = std::move(out);
        };
        kind == IndexKind::TimeNs ? permute(time) : permute(num);
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c != index_col) {
                permute(cells[c]);
            }
        }
    }

    const IndexColumn index = kind == IndexKind::TimeNs ? IndexColumn::time_ns(std::move(time))
                                                        : IndexColumn::numeric(std::move(num));
    std::vector<Series> out;
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c == index_col) {
            continue;
        }
        std::optional<ValueTag> hint;
        if (auto it = options.dtypes.find(header[c]); it != options.dtypes.end()) {
            hint = it->second;
        }
        ValueColumn values = infer_column(cells[c], header[c], hint, source);
        cells[c] = {};
        out.emplace_back(header[c], index, std::move(values));
    }
    return out;
}

std::vector<Series> load_csv(const std::filesystem::path& path, const CsvLoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    return read_csv(in, options, path.string());
}

void write_matrix(const FeatureMatrix& matrix, std::ostream& out) {
    out << "index";
    for (const auto& col : matrix.columns()) {
        out << ',';
        write_field(out, col.name);
    }
    out << '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out << format_index_value(matrix.index_at(r));
        for (const auto& col : matrix.columns()) {
            out << ',';
            if (col.present[r] != 0) {
                write_field(out, format_cell(col.data, r));
            }
        }
        out << '\n';
    }
}

void write_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_matrix(matrix, out);
    finish_output(out, path);
}

void write_series_csv(std::span<const Series> series, std::ostream& out, std::string_view index_name) {
    for (std::size_t i = 1; i < series.size(); ++i) {
        const auto& a = series[0].index();
        const auto& b = series[i].index();
        if (a.shared() != b.shared() && a.storage() != b.storage()) {
            throw Error(ErrorCode::LengthMismatch, "series '" + series[i].name() + "' does not share the index of '" +
                                                       series[0].name() + "'");
        }
    }
    write_field(out, index_name);
    for (const auto& s : series) {
        out << ',';
        write_field(out, s.name());
    }
    out << '\n';
    const std::size_t n = series.empty() ? 0 : series[0].size();
    for (std::size_t r = 0; r < n; ++r) {
        out << format_index_value(series[0].index_at(r));
        for (const auto& s : series) {
            out << ',';
            write_field(out, format_cell(s.values().storage(), r));
        }
        out << '\n';
    }
}

void write_series_csv(std::span<const Series> series, const std::filesystem::path& path, std::string_view index_name) {
    auto out = open_output(path);
    write_series_csv(series, out, index_name);
    finish_output(out, path);
}

void write_view_csv(const SeriesView& view, std::ostream& out, std::string_view index_name) {
    write_field(out, index_name);
    out << ',';
    write_field(out, view.name());
    out << '\n';
    const auto& storage = view.source().values().storage();
    for (std::size_t i = 0; i < view.size(); ++i) {
        out << format_index_value(view.index_at(i)) << ',';
        write_field(out, format_cell(storage, view.lo() + i));
        out << '\n';
    }
}

// ---- configs -------------------------------------------------------------------

FeatureConfig parse_feature_config(std::string_view json_text) {
    const json doc = parse_json(json_text, "feature config");
    check_keys(doc, "$", {"features", "options"});
    FeatureConfig config;
    if (!doc.contains("features") || !doc["features"].is_array() || doc["features"].empty()) {
        config_error("$.features", "expected a non-empty list of feature entries");
    }
    const json& features = doc["features"];
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::string where = "$.features[" + std::to_string(i) + "]";
        const json& entry = features[i];
        check_keys(entry, where, {"series", "functions", "windows", "strides"});
        for (const char* key : {"series", "functions", "windows", "strides"}) {
            if (!entry.contains(key)) {
                config_error(where, std::string("missing '") + key + "'");
            }
        }
        const auto series = parse_selector(entry["series"], where + ".series");
        std::vector<FuncWrapper> functions;
        const json& fns = entry["functions"];
        if (!fns.is_array()) {
            config_error(where + ".functions", "expected a list");
        }
        for (std::size_t k = 0; k < fns.size(); ++k) {
            functions.push_back(parse_function(fns[k], where + ".functions[" + std::to_string(k) + "]"));
        }
        const auto windows = parse_deltas(entry["windows"], where + ".windows");
        const auto strides = parse_deltas(entry["strides"], where + ".strides");
        config.collection.add(expand_multiple(functions, series, windows, strides));
    }
    if (doc.contains("options")) {
        const json& opt = doc["options"];
        check_keys(opt, "$.options", {"approve_sparsity", "n_workers", "output_position"});
        if (opt.contains("approve_sparsity")) {
            if (!opt["approve_sparsity"].is_boolean()) {
                config_error("$.options.approve_sparsity", "expected a bool");
            }
            config.options.approve_sparsity = opt["approve_sparsity"].get<bool>();
        }
        if (opt.contains("n_workers")) {
            if (!opt["n_workers"].is_number_integer()) {
                config_error("$.options.n_workers", "expected an integer");
            }
            config.options.n_workers = opt["n_workers"].get<int>();
        }
        if (opt.contains("output_position")) {
            const json& p = opt["output_position"];
            if (p == "begin") {
                config.options.output_position = OutputPosition::Begin;
            } else if (p == "end") {
                config.options.output_position = OutputPosition::End;
            } else {
                config_error("$.options.output_position", "expected \"begin\" or \"end\"");
            }
        }
    }
    return config;
}

FeatureConfig load_feature_config(const std::filesystem::path& path) {
    return parse_feature_config(read_text_file(path));
}

std::string serialize_feature_config(const FeatureCollection& collection, const ExtractOptions& options) {
    json features = json::array();
    for (const auto& group : collection.groups()) {
        json entry;
        // Shortest equivalent forms: a bare name for one series, a bare
        // string for a builtin without params or robust wrapping.
        const auto& names = group.key.series_names;
        entry["series"] = names.size() == 1 ? json(names.front()) : json::array({names});
        json fns = json::array();
        for (const auto& fw : group.functions) {
            json f = function_to_json(fw);
            if (f.is_object() && f.size() == 1) {
                f = f["name"];
            }
            fns.push_back(std::move(f));
        }
        entry["functions"] = std::move(fns);
        entry["windows"] = format_delta(group.key.window);
        entry["strides"] = format_delta(group.key.stride);
        features.push_back(std::move(entry));
    }
    json doc;
    doc["features"] = std::move(features);
    doc["options"] = {{"approve_sparsity", options.approve_sparsity},
                      {"n_workers", options.n_workers},
                      {"output_position", position_name(options.output_position)}};
    return doc.dump(2) + "\n";
}

Pipeline parse_pipeline_config(std::string_view json_text) {
    const json doc = parse_json(json_text, "pipeline config");
    check_keys(doc, "$", {"steps"});
    if (!doc.contains("steps") || !doc["steps"].is_array()) {
        config_error("$.steps", "expected a list of steps");
    }
    Pipeline pipeline;
    const json& steps = doc["steps"];
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string where = "$.steps[" + std::to_string(i) + "]";
        const json& step = steps[i];
        check_keys(step, where, {"function", "series", "params"});
        if (!step.contains("function") || !step["function"].is_string()) {
            config_error(where, "missing processor name in 'function'");
        }
        if (!step.contains("series")) {
            config_error(where, "missing 'series'");
        }
        pipeline.add_step(builtin_processor(step["function"].get<std::string>(),
                                            parse_selector(step["series"], where + ".series"),
                                            parse_params(step.value("params", json()), where + ".params")));
    }
    return pipeline;
}

Pipeline load_pipeline_config(const std::filesystem::path& path) {
    return parse_pipeline_config(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    auto out = open_output(path);
    out << text;
    finish_output(out, path);
}

} // namespace seqfeat
