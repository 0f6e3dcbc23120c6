#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mmill/core.hpp"

namespace mmill::io {

// --- configuration files -----------------------------------------------------
//
// Flat `key = value` text, one entry per line, '#' starts a comment.
// Keys carry their units where they have one:
//
//   sigma0_dollars, sigma_is_std, nu0, l_scale_intervals, n_scales,
//   scale_decay, nu_floor, series_len_intervals, dt0_minutes, n_series,
//   n_groups, seed, w_mill, w_contrarian, w_trend, preset
//
// `preset = elementary|composite` resets every field to the preset before
// the following lines are applied.

/// Parses configuration text on top of `base`. Errors name the origin and
/// line: "run.cfg:7: nu0: expected a number". Throws ConfigError.
MillConfig parse_config(std::string_view text, std::string_view origin = "<config>",
                        const MillConfig& base = elementary_preset());

/// Reads and parses a configuration file. Throws IoError if unreadable.
MillConfig load_config(const std::filesystem::path& path, const MillConfig& base = elementary_preset());

/// Canonical text form; parse_config(format_config(c)) == c.
std::string format_config(const MillConfig& config);

/// "elementary" or "composite". Throws ConfigError otherwise.
MillConfig preset_config(std::string_view name);

// --- series files --------------------------------------------------------------
//
// Binary layout: the 6 ASCII bytes "MMILL1", a little-endian uint64 count n,
// then n little-endian IEEE-754 doubles.

void write_series_binary(const IncrementSeries& series, const std::filesystem::path& path);
IncrementSeries read_series_binary(const std::filesystem::path& path, double dt0_minutes = 1.0);

/// One `increment` column, 17 significant digits.
void write_series_csv(const IncrementSeries& series, const std::filesystem::path& path);
IncrementSeries read_series_csv(const std::filesystem::path& path, double dt0_minutes = 1.0);

/// Dispatches on the extension (.bin or .csv). Session boundaries of
/// multi-segment series are kept in a `<file>.segments` sidecar.
IncrementSeries read_series(const std::filesystem::path& path, double dt0_minutes = 1.0);

// --- tick data -----------------------------------------------------------------

struct TickRecord {
    std::chrono::sys_time<std::chrono::microseconds> utc;
    int utc_offset_minutes = 0;  ///< local wall clock = utc + offset
    double price = 0.0;
};

/// ISO-8601 date-time: "YYYY-MM-DD[T ]HH:MM[:SS[.ffffff]][Z|(+|-)HH[:MM]]".
/// No suffix means UTC. Throws ConfigError when malformed.
TickRecord parse_timestamp(std::string_view text);

/// Formats with an explicit offset, e.g. "2005-01-03T09:30:00-05:00".
std::string format_timestamp(const TickRecord& tick);

struct SessionHours {
    int open_minute = 9 * 60 + 30;   ///< minutes after local midnight
    int close_minute = 16 * 60;      ///< inclusive

    /// "HH:MM-HH:MM". Throws ConfigError.
    static SessionHours parse(std::string_view text);
};

struct IngestOptions {
    double dt0_minutes = 1.0;
    SessionHours session{};
};

/// Reads `timestamp,price` rows. Within each local trading day the last
/// price at or before every grid point open + j dt0 is taken, empty grid
/// intervals are forward-filled, and first differences are emitted. Each
/// day becomes one segment of the result.
///
/// Throws IoError for an unreadable or empty file and for a malformed row
/// (the message carries the line number).
IncrementSeries ingest_csv(const std::filesystem::path& path, const IngestOptions& options = {});
IncrementSeries ingest_csv(std::istream& in, const IngestOptions& options = {}, std::string_view origin = "<csv>");

/// Writes `series` as a tick file whose ingestion reproduces its increments:
/// a price path starting at `start_price`, one tick per grid point, with
/// each full session of increments on its own local day from `first_day`.
void write_price_path_csv(const IncrementSeries& series, const std::filesystem::path& path,
                          double start_price = 50.0, const IngestOptions& options = {},
                          std::chrono::sys_days first_day = std::chrono::sys_days{
                              std::chrono::year{2005} / std::chrono::January / 3});

}  // namespace mmill::io
