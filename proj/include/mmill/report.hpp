#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmill/analysis.hpp"
#include "mmill/core.hpp"

namespace mmill::io {

// --- grids -----------------------------------------------------------------------

/// `x_center,y_center,value` rows after a header line, y outer, x inner,
/// every number printed with 9 significant digits.
void write_grid_csv(const DensityGrid& grid, const std::filesystem::path& path);

/// Reads a grid written by write_grid_csv. Throws IoError on malformed
/// input or rows that do not form a regular grid.
DensityGrid read_grid_csv(const std::filesystem::path& path);

/// Renders a signed grid as a binary PPM: red for positive, blue for
/// negative, white for zero, scaled by the largest magnitude. y grows upward.
void write_grid_ppm(const DensityGrid& grid, const std::filesystem::path& path, int pixels_per_bin = 8);

// --- millness tables -------------------------------------------------------------

struct MillnessRow {
    std::string source;
    MillnessReport report;
};

/// `source,quantity,dt_minutes,value_percent`; quantities are mean_rho and
/// std_rho (omitted when a single group leaves it undefined).
void write_millness_csv(const std::vector<MillnessRow>& rows, const std::filesystem::path& path);
std::string millness_csv(const std::vector<MillnessRow>& rows);

/// Human-readable table: one row per (source, quantity), one column per dt.
std::string millness_table(const std::vector<MillnessRow>& rows);

// --- manifests -------------------------------------------------------------------

struct ManifestEntry {
    std::string path;    ///< relative to the manifest directory
    std::string sha256;  ///< lowercase hex
};

struct RunManifest {
    MillConfig config;
    std::string produced_at;  ///< ISO-8601 UTC
    std::string tool_version;
    std::vector<ManifestEntry> outputs;
};

std::string sha256_file(const std::filesystem::path& path);

/// Hashes each file (given relative to `dir`) into a manifest entry.
ManifestEntry manifest_entry(const std::filesystem::path& dir, const std::filesystem::path& relative);

/// Writes `manifest.json` into `dir`.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);
RunManifest read_manifest(const std::filesystem::path& dir);

/// True when every listed file exists and still matches its hash.
bool verify_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

std::string utc_now_iso8601();

}  // namespace mmill::io
