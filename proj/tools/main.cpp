#include "seqfeat/bench.hpp"
#include "seqfeat/builtins.hpp"
#include "seqfeat/chunking.hpp"
#include "seqfeat/io.hpp"
#include "seqfeat/processing.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace seqfeat;

namespace {

struct DataArgs {
    std::vector<std::string> files;
    std::string index_column;
    std::string index_kind = "auto";
    bool sort = false;
    std::vector<std::string> dtypes;
};

void add_data_options(CLI::App& cmd, DataArgs& args) {
    cmd.add_option("--data", args.files, "CSV input file(s); one series per non-index column")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--index-column", args.index_column, "Index column header (default: first column)");
    cmd.add_option("--index-kind", args.index_kind, "auto, time or numeric")
        ->check(CLI::IsMember({"auto", "time", "numeric"}));
    cmd.add_flag("--sort", args.sort, "Sort rows by index instead of rejecting unsorted input");
    cmd.add_option("--dtype", args.dtypes, "Column value type as NAME=TYPE (f64, f32, i64, bool, categorical)");
}

SeriesSet load_data(const DataArgs& args) {
    CsvLoadOptions options;
    options.index_column = args.index_column;
    options.sort = args.sort;
    options.kind = args.index_kind == "time"      ? IndexHint::TimeNs
                   : args.index_kind == "numeric" ? IndexHint::Numeric
                                                  : IndexHint::Auto;
    for (const auto& d : args.dtypes) {
        const auto eq = d.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--dtype", "expected NAME=TYPE, got '" + d + "'");
        }
        options.dtypes.emplace(d.substr(0, eq), parse_value_tag(d.substr(eq + 1)));
    }
    SeriesSet set;
    for (const auto& file : args.files) {
        for (auto& s : load_csv(file, options)) {
            set.insert(std::move(s));
        }
    }
    return set;
}

std::optional<IndexDelta> opt_delta(const std::string& text) {
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_delta(text);
}

std::string file_stem_for(std::string_view name) {
    std::string out;
    for (char c : name) {
        out.push_back((std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.') ? c : '_');
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Windowed feature extraction for time series"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "seqfeat 0.1.0");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "Extract windowed features into a CSV matrix");
    DataArgs extract_data;
    std::string config_path;
    std::string out_path;
    std::string log_path;
    std::optional<int> workers;
    bool approve = false;
    add_data_options(*extract_cmd, extract_data);
    extract_cmd->add_option("--config", config_path, "Feature config JSON")->required()->check(CLI::ExistingFile);
    extract_cmd->add_option("--out", out_path, "Output CSV")->required();
    extract_cmd->add_option("--log", log_path, "JSON-lines timing log");
    extract_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
    extract_cmd->add_flag("--approve-sparsity", approve, "Acknowledge windows with deviating sample counts");

    // process
    auto* process_cmd = app.add_subcommand("process", "Run a processing pipeline and write every series");
    DataArgs process_data;
    std::string pipeline_path;
    std::string process_out;
    int process_workers = 1;
    add_data_options(*process_cmd, process_data);
    process_cmd->add_option("--pipeline", pipeline_path, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
    process_cmd->add_option("--out-dir", process_out, "Output directory, one CSV per series")->required();
    process_cmd->add_option("--workers", process_workers, "Worker threads per step");

    // chunk
    auto* chunk_cmd = app.add_subcommand("chunk", "Split series at gaps into chunk groups");
    DataArgs chunk_data;
    double gap_factor = 4.0;
    std::string min_dur;
    std::string max_dur;
    std::string overlap;
    std::string chunk_out;
    add_data_options(*chunk_cmd, chunk_data);
    chunk_cmd->add_option("--gap-factor", gap_factor, "Gap threshold as a multiple of the median period")
        ->capture_default_str();
    chunk_cmd->add_option("--min-dur", min_dur, "Drop chunks shorter than this delta");
    chunk_cmd->add_option("--max-dur", max_dur, "Cut chunks longer than this delta");
    chunk_cmd->add_option("--overlap", overlap, "Backward extension of cut pieces");
    chunk_cmd->add_option("--out-dir", chunk_out, "Output directory")->required();

    // reduce
    auto* reduce_cmd = app.add_subcommand("reduce", "Keep only the features producing the given columns");
    std::string reduce_config;
    std::vector<std::string> keep;
    std::string reduce_out;
    reduce_cmd->add_option("--config", reduce_config, "Feature config JSON")->required()->check(CLI::ExistingFile);
    reduce_cmd->add_option("--keep", keep, "Column names to keep")->required();
    reduce_cmd->add_option("--out", reduce_out, "Output config JSON")->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Profile extraction on synthetic data");
    SyntheticParams synth;
    std::string window = "30s";
    std::string stride = "10s";
    int bench_workers = 1;
    std::string report_path;
    bool rss = false;
    bench_cmd->add_option("--channels", synth.n_channels, "Number of channels")->capture_default_str();
    bench_cmd->add_option("--fs", synth.fs, "Sampling rate in Hz")->capture_default_str();
    bench_cmd->add_option("--duration", synth.duration_s, "Duration in seconds")->capture_default_str();
    bench_cmd->add_option("--window", window, "Window delta")->capture_default_str();
    bench_cmd->add_option("--stride", stride, "Stride delta")->capture_default_str();
    bench_cmd->add_option("--workers", bench_workers, "Worker threads")->capture_default_str();
    bench_cmd->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
    bench_cmd->add_option("--report", report_path, "Report JSON path")->required();
    bench_cmd->add_flag("--rss", rss, "Also report peak resident set size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (extract_cmd->parsed()) {
            const SeriesSet data = load_data(extract_data);
            FeatureConfig config = load_feature_config(config_path);
            if (workers) {
                config.options.n_workers = *workers;
            }
            if (approve) {
                config.options.approve_sparsity = true;
            }
            if (!log_path.empty()) {
                config.options.log_path = log_path;
            }
            const ExtractResult result = extract(data, config.collection, config.options);
            for (const auto& w : result.warnings) {
                std::cerr << "warning: " << w.message() << '\n';
            }
            write_matrix(result.matrix, fs::path(out_path));
        } else if (process_cmd->parsed()) {
            const SeriesSet data = load_data(process_data);
            const Pipeline pipeline = load_pipeline_config(pipeline_path);
            const SeriesSet out = run_pipeline(pipeline, data, process_workers);
            fs::create_directories(process_out);
            for (const auto& [name, series] : out) {
                std::ofstream file(fs::path(process_out) / (file_stem_for(name) + ".csv"), std::ios::binary);
                if (!file) {
                    throw Error(ErrorCode::IoError, "cannot write into '" + process_out + "'");
                }
                write_view_csv(series.view(), file);
            }
        } else if (chunk_cmd->parsed()) {
            const SeriesSet data = load_data(chunk_data);
            ChunkSpec spec;
            spec.gap_factor = gap_factor;
            spec.min_chunk_dur = opt_delta(min_dur);
            spec.max_chunk_dur = opt_delta(max_dur);
            spec.sub_chunk_overlap = opt_delta(overlap);
            const auto groups = chunk_set(data, spec);
            fs::create_directories(chunk_out);
            nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
            for (std::size_t g = 0; g < groups.size(); ++g) {
                const auto& group = groups[g];
                nlohmann::ordered_json entry;
                entry["chunk"] = g;
                entry["begin"] = format_index_value(group.range.begin);
                entry["end"] = format_index_value(group.range.end);
                entry["closed_end"] = group.range.closed_end;
                nlohmann::ordered_json files = nlohmann::ordered_json::array();
                for (const auto& slice : group.slices) {
                    char prefix[32];
                    std::snprintf(prefix, sizeof prefix, "chunk_%04zu_", g);
                    const std::string file_name = prefix + file_stem_for(slice.name()) + ".csv";
                    std::ofstream file(fs::path(chunk_out) / file_name, std::ios::binary);
                    if (!file) {
                        throw Error(ErrorCode::IoError, "cannot write into '" + chunk_out + "'");
                    }
                    write_view_csv(slice, file);
                    files.push_back({{"series", slice.name()}, {"file", file_name}, {"rows", slice.size()}});
                }
                entry["slices"] = std::move(files);
                manifest.push_back(std::move(entry));
            }
            write_text_file(fs::path(chunk_out) / "chunks.json", manifest.dump(2) + "\n");
        } else if (reduce_cmd->parsed()) {
            const FeatureConfig config = load_feature_config(reduce_config);
            const FeatureCollection reduced = config.collection.reduce(keep);
            write_text_file(reduce_out, serialize_feature_config(reduced, config.options));
        } else if (bench_cmd->parsed()) {
            BenchParams params;
            params.data = synth;
            params.window = parse_delta(window);
            params.stride = parse_delta(stride);
            params.n_workers = bench_workers;
            params.measure_rss = rss;
            const BenchReport report = run_bench(params);
            write_text_file(report_path, report.to_json());
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
