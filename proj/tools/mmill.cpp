// Command-line front end: simulate, millness, pattern, portrait, ingest.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error,
// 4 numerical or statistical failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mmill/commands.hpp"
#include "mmill/error.hpp"

namespace {

using namespace mmill;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string config_file;
};

struct ConfigOverrides {
    std::string preset = "elementary";
    std::optional<std::int64_t> n_series;
    std::optional<std::int64_t> series_len;
    std::optional<std::int64_t> groups;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "Model preset: elementary or composite")
            ->check(CLI::IsMember({"elementary", "composite"}));
        cmd->add_option("--n-series", n_series, "Number of series");
        cmd->add_option("--series-len", series_len, "Base intervals per series");
        cmd->add_option("--groups", groups, "Number of groups for millness statistics");
    }
};

MillConfig build_config(const GlobalOptions& global, const ConfigOverrides& over) {
    MillConfig config = io::preset_config(over.preset);
    if (!global.config_file.empty()) config = io::load_config(global.config_file, config);
    if (global.seed) config.seed = *global.seed;
    if (over.n_series) config.n_series = *over.n_series;
    if (over.series_len) config.series_len = *over.series_len;
    if (over.groups) config.n_groups = *over.groups;
    config.validate();
    return config;
}

std::vector<AsymmetryAxis> parse_axes(const std::string& text) {
    if (text == "all") return {kAllAxes.begin(), kAllAxes.end()};
    return {parse_axis(text)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market mill simulator and asymmetry analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::kToolVersion);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Master seed (overrides the config)");
    app.add_option("--threads", global.threads, "OpenMP threads (0 = runtime default)");
    app.add_option("--config", global.config_file, "Configuration file (key = value)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Simulate a batch of increment series");
    ConfigOverrides sim_over;
    sim_over.add_to(simulate);
    std::string sim_out;
    std::string sim_format = "binary";
    simulate->add_option("--out", sim_out, "Output directory")->required();
    simulate->add_option("--format", sim_format, "Series file format")->check(CLI::IsMember({"binary", "csv"}));

    // millness
    auto* millness = app.add_subcommand("millness", "Millness table over time scales");
    ConfigOverrides mil_over;
    mil_over.add_to(millness);
    std::string mil_input;
    std::vector<int> mil_dt{1, 3, 6};
    double mil_dps = 0.3;
    std::string mil_csv;
    std::string mil_source = "Model";
    millness->add_option("--input", mil_input, "Batch directory (default: simulate from the config)");
    millness->add_option("--dt", mil_dt, "Aggregation scales in base intervals")->delimiter(',');
    millness->add_option("--delta-p-star", mil_dps, "Half-width of the counting square in dollars");
    millness->add_option("--out", mil_csv, "CSV output path");
    millness->add_option("--source", mil_source, "Source label for the table");

    // pattern
    auto* pattern = app.add_subcommand("pattern", "Asymmetric component grids of the push-response histogram");
    ConfigOverrides pat_over;
    pat_over.add_to(pattern);
    std::string pat_input;
    std::string pat_axis = "y0";
    double pat_bin = 0.01;
    double pat_extent = 0.3;
    int pat_dt = 1;
    std::string pat_out;
    bool pat_image = false;
    pattern->add_option("--input", pat_input, "Batch directory (default: simulate from the config)");
    pattern->add_option("--axis", pat_axis, "x0, y0, diag, antidiag or all");
    pattern->add_option("--bin", pat_bin, "Bin width in dollars");
    pattern->add_option("--extent", pat_extent, "Grid half-width in dollars");
    pattern->add_option("--dt", pat_dt, "Aggregation scale in base intervals");
    pattern->add_option("--out", pat_out, "Output prefix")->required();
    pattern->add_flag("--image", pat_image, "Also write a PPM rendering of p_asym");

    // portrait
    auto* portrait = app.add_subcommand("portrait", "Individual-stock asymmetry portrait for a strategy mix");
    ConfigOverrides por_over;
    por_over.add_to(portrait);
    std::vector<double> por_weights;
    std::string por_preset;
    double por_bin = 0.01;
    double por_extent = 0.3;
    std::string por_out;
    bool por_image = false;
    auto* weights_opt = portrait->add_option("--weights", por_weights, "w_mill,w_contrarian,w_trend")
                            ->delimiter(',')
                            ->expected(3);
    portrait->add_option("--portrait", por_preset, "dis-like, hdi-like or de-like")->excludes(weights_opt);
    portrait->add_option("--bin", por_bin, "Bin width in dollars");
    portrait->add_option("--extent", por_extent, "Grid half-width in dollars");
    portrait->add_option("--out", por_out, "Output prefix")->required();
    portrait->add_flag("--image", por_image, "Also write a PPM rendering of p_asym");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Convert timestamp,price ticks to an increment series");
    std::string ing_csv;
    double ing_dt0 = 1.0;
    std::string ing_session = "09:30-16:00";
    std::string ing_out;
    ingest->add_option("--csv", ing_csv, "Tick file with header timestamp,price")->required();
    ingest->add_option("--dt0", ing_dt0, "Base interval in minutes");
    ingest->add_option("--session", ing_session, "Local session hours HH:MM-HH:MM");
    ingest->add_option("--out", ing_out, "Output series file (.bin or .csv)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) {
            cli::SimulateOptions opts;
            opts.config = build_config(global, sim_over);
            opts.output_dir = sim_out;
            opts.format = sim_format == "csv" ? cli::SeriesFormat::Csv : cli::SeriesFormat::Binary;
            opts.threads = global.threads;
            std::cout << io::format_config(opts.config);
            const auto manifest = cli::run_simulate(opts);
            std::cout << "wrote " << manifest.outputs.size() << " files to " << sim_out << '\n';
        } else if (*millness) {
            cli::MillnessOptions opts;
            opts.input.config = build_config(global, mil_over);
            if (!mil_input.empty()) opts.input.directory = fs::path(mil_input);
            opts.input.groups = mil_over.groups;
            opts.input.threads = global.threads;
            opts.dt_minutes = mil_dt;
            opts.delta_p_star = Money(mil_dps);
            opts.source = mil_source;
            const auto rows = cli::run_millness(opts);
            std::cout << io::millness_table(rows);
            if (!mil_csv.empty()) io::write_millness_csv(rows, mil_csv);
        } else if (*pattern) {
            cli::PatternOptions opts;
            opts.input.config = build_config(global, pat_over);
            if (!pat_input.empty()) opts.input.directory = fs::path(pat_input);
            opts.input.groups = pat_over.groups;
            opts.input.threads = global.threads;
            opts.axes = parse_axes(pat_axis);
            opts.bin = Money(pat_bin);
            opts.extent = Money(pat_extent);
            opts.dt_minutes = pat_dt;
            opts.output_prefix = pat_out;
            opts.image = pat_image;
            for (const auto& p : cli::run_pattern(opts)) {
                std::cout << "wrote " << pat_out << '_' << to_string(p.axis) << "_{asym,mill}.csv\n";
            }
        } else if (*portrait) {
            cli::PortraitOptions opts;
            opts.config = build_config(global, por_over);
            if (!por_preset.empty()) opts.weights = cli::portrait_preset(por_preset);
            else if (!por_weights.empty()) opts.weights = StrategyMix(por_weights[0], por_weights[1], por_weights[2]);
            else throw ConfigError("portrait needs --weights or --portrait");
            opts.bin = Money(por_bin);
            opts.extent = Money(por_extent);
            opts.output_prefix = por_out;
            opts.image = por_image;
            opts.threads = global.threads;
            cli::run_portrait(opts);
            std::cout << "wrote " << por_out << "_x0_{asym,mill}.csv\n";
        } else if (*ingest) {
            cli::IngestCommandOptions opts;
            opts.csv = ing_csv;
            opts.ingest.dt0_minutes = ing_dt0;
            opts.ingest.session = io::SessionHours::parse(ing_session);
            opts.output = ing_out;
            const auto series = cli::run_ingest(opts);
            std::cout << "ingested " << series.size() << " increments in "
                      << std::max<std::size_t>(1, series.segment_starts.size()) << " sessions\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
