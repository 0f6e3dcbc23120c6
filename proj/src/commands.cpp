#include "mmill/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmill/error.hpp"
#include "mmill/parallel.hpp"
#include "mmill/simulator.hpp"

namespace mmill::cli {

namespace fs = std::filesystem;

namespace {

std::string series_name(std::int64_t k, SeriesFormat format) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "series_%06lld.%s", static_cast<long long>(k),
                  format == SeriesFormat::Binary ? "bin" : "csv");
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

std::string summary_text(const MillConfig& config, const SimDiagnostics& diag) {
    std::ostringstream out;
    out << "series: " << config.n_series << " x " << config.series_len << " intervals of " << config.dt0_minutes
        << " min, " << config.n_groups << " groups\n";
    out << "base Laplace scale: " << config.base_laplace().sigma() << " dollars\n";
    out << "scale  nu_i        activations  deposits     dropped\n";
    const auto specs = scale_specs(config);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        char line[128];
        const ScaleDiagnostics d = i < diag.scales.size() ? diag.scales[i] : ScaleDiagnostics{};
        std::snprintf(line, sizeof line, "%5d  %-10.6g  %11lld  %11lld  %10lld\n", specs[i].index, specs[i].nu,
                      static_cast<long long>(d.activations), static_cast<long long>(d.deposits),
                      static_cast<long long>(d.dropped));
        out << line;
    }
    out << "dropped fraction: " << diag.dropped_fraction() << '\n';
    return out.str();
}

struct DirectoryBatch {
    std::vector<IncrementSeries> series;
    std::int64_t groups = 1;
};

DirectoryBatch load_directory(const SeriesInput& input) {
    const fs::path& dir = *input.directory;
    if (!fs::is_directory(dir)) throw IoError("input directory " + dir.string() + " does not exist");
    DirectoryBatch batch;
    double dt0 = 1.0;
    if (fs::exists(dir / "manifest.json")) {
        const auto manifest = io::read_manifest(dir);
        batch.groups = manifest.config.n_groups;
        dt0 = manifest.config.dt0_minutes;
        for (const auto& entry : manifest.outputs) {
            if (entry.path.rfind("series/", 0) == 0 && entry.path.find(".segments") == std::string::npos) {
                batch.series.push_back(io::read_series(dir / entry.path, dt0));
            }
        }
    } else {
        batch.series = load_series_dir(dir, dt0);
    }
    if (batch.series.empty()) throw IoError("no series files in " + dir.string());
    if (input.groups) batch.groups = *input.groups;
    return batch;
}

StreamResult analyze_input(const SeriesInput& input, const StreamRequest& request) {
    if (input.directory) {
        const auto batch = load_directory(input);
        return analyze_series(batch.series, batch.groups, request, input.threads);
    }
    return simulate_and_analyze(input.config, request, input.threads);
}

void emit_pattern(const AsymmetryPattern& pattern, const fs::path& prefix, bool image) {
    if (prefix.empty()) return;
    if (prefix.has_parent_path()) ensure_dir(prefix.parent_path());
    const std::string base = prefix.string() + "_" + std::string(to_string(pattern.axis));
    io::write_grid_csv(pattern.p_asym, base + "_asym.csv");
    io::write_grid_csv(pattern.p_mill_component, base + "_mill.csv");
    if (image) io::write_grid_ppm(pattern.p_asym, base + "_asym.ppm");
}

}  // namespace

std::vector<IncrementSeries> load_series_dir(const fs::path& dir, double dt0_minutes) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".bin" || ext == ".csv")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<IncrementSeries> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(io::read_series(f, dt0_minutes));
    return out;
}

io::RunManifest run_simulate(const SimulateOptions& options) {
    options.config.validate();
    ensure_dir(options.output_dir / "series");

    io::RunManifest manifest;
    manifest.config = options.config;
    manifest.tool_version = kToolVersion;
    manifest.produced_at = io::utc_now_iso8601();

    write_text(options.output_dir / "config.txt", io::format_config(options.config));
    manifest.outputs.push_back(io::manifest_entry(options.output_dir, "config.txt"));

    const auto n = static_cast<std::size_t>(options.config.n_series);
    std::vector<SimDiagnostics> diags(n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(options.threads))
    for (std::int64_t k = 0; k < options.config.n_series; ++k) {
        try {
            const auto series =
                simulate_composite(options.config, static_cast<std::uint64_t>(k), &diags[static_cast<std::size_t>(k)]);
            const fs::path file = options.output_dir / "series" / series_name(k, options.format);
            if (options.format == SeriesFormat::Binary) io::write_series_binary(series, file);
            else io::write_series_csv(series, file);
        } catch (...) {
#pragma omp critical(mmill_simulate_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    SimDiagnostics total;
    for (const auto& d : diags) total.merge(d);
    for (std::int64_t k = 0; k < options.config.n_series; ++k) {
        manifest.outputs.push_back(
            io::manifest_entry(options.output_dir, fs::path("series") / series_name(k, options.format)));
    }
    write_text(options.output_dir / "summary.txt", summary_text(options.config, total));
    manifest.outputs.push_back(io::manifest_entry(options.output_dir, "summary.txt"));

    io::write_manifest(manifest, options.output_dir);
    return manifest;
}

std::vector<io::MillnessRow> run_millness(const MillnessOptions& options) {
    if (options.dt_minutes.empty()) throw ConfigError("at least one --dt value is required");
    StreamRequest request;
    request.delta_p_star = options.delta_p_star;
    request.millness_scales = options.dt_minutes;
    const auto result = analyze_input(options.input, request);
    std::vector<io::MillnessRow> rows;
    for (const auto& report : result.millness) rows.push_back({options.source, report});
    return rows;
}

std::vector<AsymmetryPattern> run_pattern(const PatternOptions& options) {
    StreamRequest request;
    request.histogram_scale = options.dt_minutes;
    request.histogram_bin = options.bin;
    request.histogram_extent = options.extent;
    const auto result = analyze_input(options.input, request);
    std::vector<AsymmetryPattern> patterns;
    for (auto axis : options.axes) {
        patterns.push_back(asymmetric_component(*result.histogram, axis));
        emit_pattern(patterns.back(), options.output_prefix, options.image);
    }
    return patterns;
}

StrategyMix portrait_preset(std::string_view name) {
    if (name == "dis-like") return StrategyMix(0.3, 0.0, 0.7);
    if (name == "hdi-like") return StrategyMix(0.8, 0.1, 0.1);
    if (name == "de-like") return StrategyMix(0.3, 0.7, 0.0);
    throw ConfigError("unknown portrait preset '" + std::string(name) + "' (expected dis-like, hdi-like or de-like)");
}

AsymmetryPattern run_portrait(const PortraitOptions& options) {
    MillConfig config = options.config;
    config.strategy = options.weights;
    StreamRequest request;
    request.histogram_scale = options.dt_minutes;
    request.histogram_bin = options.bin;
    request.histogram_extent = options.extent;
    const auto result = simulate_and_analyze(config, request, options.threads);
    auto pattern = asymmetric_component(*result.histogram, AsymmetryAxis::X0);
    emit_pattern(pattern, options.output_prefix, options.image);
    return pattern;
}

IncrementSeries run_ingest(const IngestCommandOptions& options) {
    auto series = io::ingest_csv(options.csv, options.ingest);
    if (!options.output.empty()) {
        if (options.output.has_parent_path()) ensure_dir(options.output.parent_path());
        if (options.output.extension() == ".csv") io::write_series_csv(series, options.output);
        else io::write_series_binary(series, options.output);
    }
    return series;
}

}  // namespace mmill::cli
