#include "mmill/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmill/error.hpp"
#include "mmill/io.hpp"

namespace mmill::io {

namespace {

std::string g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_grid_csv(const DensityGrid& grid, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "x_center,y_center,value\n";
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            out << g9(grid.x_center(ix)) << ',' << g9(grid.y_center(iy)) << ',' << g9(grid.at(ix, iy)) << '\n';
        }
    }
    finish(out, path);
}

DensityGrid read_grid_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::string line;
    if (!std::getline(in, line) || line != "x_center,y_center,value") {
        throw IoError(path.string() + ":1: expected header 'x_center,y_center,value'");
    }
    struct Row {
        double x, y, v;
    };
    std::vector<Row> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Row r{};
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &r.x, &r.y, &r.v, &tail) != 3) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed grid row");
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw IoError(path.string() + ": no grid rows");

    std::set<double> xs, ys;
    for (const auto& r : rows) {
        xs.insert(r.x);
        ys.insert(r.y);
    }
    DensityGrid grid;
    grid.nx = static_cast<int>(xs.size());
    grid.ny = static_cast<int>(ys.size());
    if (static_cast<std::size_t>(grid.nx) * grid.ny != rows.size()) {
        throw IoError(path.string() + ": rows do not form a complete grid");
    }
    grid.bin_width = grid.nx > 1 ? (*xs.rbegin() - *xs.begin()) / (grid.nx - 1)
                                 : (grid.ny > 1 ? (*ys.rbegin() - *ys.begin()) / (grid.ny - 1) : 0.0);
    grid.x_min = *xs.begin() - 0.5 * grid.bin_width;
    grid.y_min = *ys.begin() - 0.5 * grid.bin_width;
    grid.values.assign(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int ix = static_cast<int>(i % grid.nx);
        const int iy = static_cast<int>(i / grid.nx);
        if (rows[i].x != *std::next(xs.begin(), ix) || rows[i].y != *std::next(ys.begin(), iy)) {
            throw IoError(path.string() + ": grid rows out of order");
        }
        grid.values[i] = rows[i].v;
    }
    return grid;
}

void write_grid_ppm(const DensityGrid& grid, const std::filesystem::path& path, int pixels_per_bin) {
    if (pixels_per_bin < 1) throw ConfigError("pixels per bin must be >= 1");
    double peak = 0.0;
    for (double v : grid.values) peak = std::max(peak, std::abs(v));
    const int width = grid.nx * pixels_per_bin;
    const int height = grid.ny * pixels_per_bin;
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << "P6\n" << width << ' ' << height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
    for (int py = 0; py < height; ++py) {
        const int iy = grid.ny - 1 - py / pixels_per_bin;
        for (int px = 0; px < width; ++px) {
            const double v = peak > 0.0 ? grid.at(px / pixels_per_bin, iy) / peak : 0.0;
            const auto fade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(v)))));
            unsigned char* p = &row[static_cast<std::size_t>(px) * 3];
            p[0] = v < 0.0 ? fade : 255;
            p[1] = fade;
            p[2] = v > 0.0 ? fade : 255;
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    finish(out, path);
}

std::string millness_csv(const std::vector<MillnessRow>& rows) {
    std::ostringstream out;
    out << "source,quantity,dt_minutes,value_percent\n";
    for (const char* quantity : {"mean_rho", "std_rho"}) {
        for (const auto& row : rows) {
            const bool is_mean = quantity[0] == 'm';
            if (!is_mean && !row.report.std_rho) continue;
            out << row.source << ',' << quantity << ',' << g9(row.report.dt_minutes) << ','
                << g9(is_mean ? row.report.mean_rho : *row.report.std_rho) << '\n';
        }
    }
    return out.str();
}

void write_millness_csv(const std::vector<MillnessRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << millness_csv(rows);
    finish(out, path);
}

std::string millness_table(const std::vector<MillnessRow>& rows) {
    std::vector<double> dts;
    std::vector<std::string> sources;
    for (const auto& r : rows) {
        if (std::find(dts.begin(), dts.end(), r.report.dt_minutes) == dts.end()) dts.push_back(r.report.dt_minutes);
        if (std::find(sources.begin(), sources.end(), r.source) == sources.end()) sources.push_back(r.source);
    }
    std::ostringstream out;
    out << std::left << std::setw(14) << "Source" << std::setw(14) << "Quantity";
    for (double dt : dts) out << std::right << std::setw(12) << ("dT=" + g9(dt) + "min");
    out << '\n';
    for (const auto& source : sources) {
        for (const bool mean : {true, false}) {
            out << std::left << std::setw(14) << source << std::setw(14) << (mean ? "<rho_mill>" : "sigma(rho)");
            for (double dt : dts) {
                std::string cell = "-";
                for (const auto& r : rows) {
                    if (r.source != source || r.report.dt_minutes != dt) continue;
                    std::ostringstream c;
                    c << std::fixed << std::setprecision(2);
                    if (mean) c << r.report.mean_rho;
                    else if (r.report.std_rho) c << *r.report.std_rho;
                    else c << "n/a";
                    cell = c.str();
                }
                out << std::right << std::setw(12) << cell;
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("SHA-256 unavailable");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
    return hex.str();
}

ManifestEntry manifest_entry(const std::filesystem::path& dir, const std::filesystem::path& relative) {
    return ManifestEntry{relative.generic_string(), sha256_file(dir / relative)};
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    nlohmann::ordered_json j;
    j["tool_version"] = manifest.tool_version;
    j["produced_at"] = manifest.produced_at;
    j["config"] = format_config(manifest.config);
    auto& outputs = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& e : manifest.outputs) outputs.push_back({{"path", e.path}, {"sha256", e.sha256}});
    const auto path = dir / "manifest.json";
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

RunManifest read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(in);
        m.tool_version = j.at("tool_version").get<std::string>();
        m.produced_at = j.at("produced_at").get<std::string>();
        m.config = parse_config(j.at("config").get<std::string>(), path.string());
        for (const auto& e : j.at("outputs")) {
            m.outputs.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return m;
}

bool verify_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    for (const auto& e : manifest.outputs) {
        if (!std::filesystem::exists(dir / e.path) || sha256_file(dir / e.path) != e.sha256) return false;
    }
    return true;
}

std::string utc_now_iso8601() {
    TickRecord now;
    now.utc = std::chrono::floor<std::chrono::microseconds>(std::chrono::system_clock::now());
    return format_timestamp(now);
}

}  // namespace mmill::io
