#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "mmill/error.hpp"
#include "mmill/io.hpp"

namespace mmill::io {

namespace {

constexpr char kMagic[6] = {'M', 'M', 'I', 'L', 'L', '1'};

std::uint64_t to_little(std::uint64_t v) noexcept {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xFFU) << (8 * (7 - i));
        return out;
    }
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return to_little(v);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::filesystem::path segments_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".segments";
    return p;
}

// Session boundaries live in a sidecar text file, one start index per line,
// so the series file itself stays a plain MMILL1 vector.
void write_segments(const IncrementSeries& series, const std::filesystem::path& path) {
    const auto sidecar = segments_path(path);
    if (series.segment_starts.empty()) {
        std::error_code ec;
        std::filesystem::remove(sidecar, ec);
        return;
    }
    auto out = open_out(sidecar);
    for (auto s : series.segment_starts) out << s << '\n';
    if (!out) throw IoError("write failed for " + sidecar.string());
}

void read_segments(IncrementSeries& series, const std::filesystem::path& path) {
    const auto sidecar = segments_path(path);
    if (!std::filesystem::exists(sidecar)) return;
    auto in = open_in(sidecar);
    std::size_t start = 0;
    while (in >> start) series.segment_starts.push_back(start);
    if (!in.eof()) throw IoError(sidecar.string() + ": malformed segment index");
    try {
        series.validate();
    } catch (const std::exception& e) {
        throw IoError(sidecar.string() + ": " + e.what());
    }
}

}  // namespace

void write_series_binary(const IncrementSeries& series, const std::filesystem::path& path) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kMagic, sizeof kMagic);
    put_u64(out, series.increments.size());
    for (double v : series.increments) put_u64(out, std::bit_cast<std::uint64_t>(v));
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    write_segments(series, path);
}

IncrementSeries read_series_binary(const std::filesystem::path& path, double dt0_minutes) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    char magic[sizeof kMagic] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw IoError(path.string() + ": not an MMILL1 series file");
    }
    const std::uint64_t n = get_u64(in);
    if (!in) throw IoError(path.string() + ": truncated header");
    const auto file_size = std::filesystem::file_size(path);
    if (file_size != sizeof kMagic + 8 + n * 8) {
        throw IoError(path.string() + ": length prefix " + std::to_string(n) + " does not match file size");
    }
    IncrementSeries series;
    series.dt0_minutes = dt0_minutes;
    series.increments.resize(n);
    for (auto& v : series.increments) v = std::bit_cast<double>(get_u64(in));
    if (!in) throw IoError(path.string() + ": truncated data");
    for (std::size_t i = 0; i < series.increments.size(); ++i) {
        if (!std::isfinite(series.increments[i])) {
            throw IoError(path.string() + ": non-finite increment at index " + std::to_string(i));
        }
    }
    read_segments(series, path);
    return series;
}

void write_series_csv(const IncrementSeries& series, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "increment\n";
    char buf[40];
    for (double v : series.increments) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    write_segments(series, path);
}

IncrementSeries read_series_csv(const std::filesystem::path& path, double dt0_minutes) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "increment") throw IoError(path.string() + ":1: expected header 'increment'");
    IncrementSeries series;
    series.dt0_minutes = dt0_minutes;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end != line.c_str() + line.size() || !std::isfinite(v)) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed increment '" + line + "'");
        }
        series.increments.push_back(v);
    }
    if (series.increments.empty()) throw IoError(path.string() + ": no increments");
    read_segments(series, path);
    return series;
}

IncrementSeries read_series(const std::filesystem::path& path, double dt0_minutes) {
    if (path.extension() == ".csv") return read_series_csv(path, dt0_minutes);
    return read_series_binary(path, dt0_minutes);
}

}  // namespace mmill::io
