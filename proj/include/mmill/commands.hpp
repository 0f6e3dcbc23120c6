#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmill/analysis.hpp"
#include "mmill/core.hpp"
#include "mmill/io.hpp"
#include "mmill/report.hpp"

namespace mmill::cli {

inline constexpr const char* kToolVersion = "mmill 1.0.0";

enum class SeriesFormat { Binary, Csv };

/// Where a command gets its series from: a directory written by `simulate`
/// (or any directory of .bin / .csv series files), or a configuration that
/// is simulated on the fly without touching the disk.
struct SeriesInput {
    std::optional<std::filesystem::path> directory;
    MillConfig config = elementary_preset();
    std::optional<std::int64_t> groups;  ///< overrides the group count of a directory input
    int threads = 0;
};

struct SimulateOptions {
    MillConfig config = elementary_preset();
    std::filesystem::path output_dir;
    SeriesFormat format = SeriesFormat::Binary;
    int threads = 0;
};

/// Writes config.txt, series/series_NNNNNN.{bin,csv}, summary.txt and, last,
/// manifest.json into output_dir.
io::RunManifest run_simulate(const SimulateOptions& options);

struct MillnessOptions {
    SeriesInput input;
    std::vector<int> dt_minutes{1, 3, 6};
    Money delta_p_star{0.3};
    std::string source = "Model";
};

std::vector<io::MillnessRow> run_millness(const MillnessOptions& options);

struct PatternOptions {
    SeriesInput input;
    std::vector<AsymmetryAxis> axes{AsymmetryAxis::Y0};
    Money bin{0.01};
    Money extent{0.3};
    int dt_minutes = 1;
    std::filesystem::path output_prefix;  ///< files are <prefix>_<axis>_{asym,mill}.csv
    bool image = false;                   ///< also <prefix>_<axis>_asym.ppm
};

std::vector<AsymmetryPattern> run_pattern(const PatternOptions& options);

/// Strategy weights of the three portrait presets: dis-like (trend
/// dominant), hdi-like (mill dominant), de-like (contrarian dominant).
StrategyMix portrait_preset(std::string_view name);

struct PortraitOptions {
    MillConfig config = elementary_preset();  ///< strategy is replaced by `weights`
    StrategyMix weights;
    Money bin{0.01};
    Money extent{0.3};
    int dt_minutes = 1;
    std::filesystem::path output_prefix;
    bool image = false;
    int threads = 0;
};

/// Simulates with the given mix and emits the x0-axis asymmetry pattern.
AsymmetryPattern run_portrait(const PortraitOptions& options);

struct IngestCommandOptions {
    std::filesystem::path csv;
    io::IngestOptions ingest;
    std::filesystem::path output;  ///< .bin or .csv
};

IncrementSeries run_ingest(const IngestCommandOptions& options);

/// Loads every series of a directory input, in file-name order.
std::vector<IncrementSeries> load_series_dir(const std::filesystem::path& dir, double dt0_minutes);

}  // namespace mmill::cli
