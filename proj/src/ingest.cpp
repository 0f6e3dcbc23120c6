#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "mmill/error.hpp"
#include "mmill/io.hpp"

namespace mmill::io {

namespace {

using namespace std::chrono;

bool read_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc{} && ptr == s.data() + pos + len;
}

[[noreturn]] void bad_timestamp(std::string_view text, const char* why) {
    throw ConfigError("malformed timestamp '" + std::string(text) + "': " + why);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

TickRecord parse_timestamp(std::string_view text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!read_fixed(text, 0, 4, y) || text.size() < 16 || text[4] != '-' || !read_fixed(text, 5, 2, mo) ||
        text[7] != '-' || !read_fixed(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
        !read_fixed(text, 11, 2, h) || text[13] != ':' || !read_fixed(text, 14, 2, mi)) {
        bad_timestamp(text, "expected YYYY-MM-DDTHH:MM");
    }
    std::size_t pos = 16;
    std::int64_t micros = 0;
    if (pos < text.size() && text[pos] == ':') {
        if (!read_fixed(text, pos + 1, 2, sec)) bad_timestamp(text, "bad seconds");
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            int digits = 0;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                if (digits < 6) micros = micros * 10 + (text[pos] - '0');
                ++digits;
                ++pos;
            }
            if (digits == 0) bad_timestamp(text, "empty fraction");
            for (; digits < 6; ++digits) micros *= 10;
        }
    }
    int offset = 0;
    if (pos < text.size()) {
        const char c = text[pos];
        if (c == 'Z' && pos + 1 == text.size()) {
            // UTC
        } else if (c == '+' || c == '-') {
            int oh = 0, om = 0;
            if (!read_fixed(text, pos + 1, 2, oh)) bad_timestamp(text, "bad UTC offset");
            std::size_t end = pos + 3;
            if (end < text.size()) {
                if (text[end] == ':') ++end;
                if (!read_fixed(text, end, 2, om)) bad_timestamp(text, "bad UTC offset");
                end += 2;
            }
            if (end != text.size() || oh > 23 || om > 59) bad_timestamp(text, "bad UTC offset");
            offset = (c == '-' ? -1 : 1) * (oh * 60 + om);
        } else {
            bad_timestamp(text, "unexpected trailing characters");
        }
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) bad_timestamp(text, "field out of range");

    const auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + microseconds{micros};
    TickRecord tick;
    tick.utc = local - minutes{offset};
    tick.utc_offset_minutes = offset;
    return tick;
}

std::string format_timestamp(const TickRecord& tick) {
    const auto local = tick.utc + minutes{tick.utc_offset_minutes};
    const auto day_start = floor<days>(local);
    const year_month_day ymd{day_start};
    const hh_mm_ss tod{floor<seconds>(local - day_start)};
    const int off = std::abs(tick.utc_offset_minutes);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()));
    std::string out(buf);
    if (tick.utc_offset_minutes != 0) {
        out.pop_back();
        std::snprintf(buf, sizeof buf, "%c%02d:%02d", tick.utc_offset_minutes < 0 ? '-' : '+', off / 60, off % 60);
        out += buf;
    }
    return out;
}

SessionHours SessionHours::parse(std::string_view text) {
    int oh = 0, om = 0, ch = 0, cm = 0;
    if (text.size() != 11 || !read_fixed(text, 0, 2, oh) || text[2] != ':' || !read_fixed(text, 3, 2, om) ||
        text[5] != '-' || !read_fixed(text, 6, 2, ch) || text[8] != ':' || !read_fixed(text, 9, 2, cm) ||
        oh > 24 || ch > 24 || om > 59 || cm > 59) {
        throw ConfigError("session must look like HH:MM-HH:MM, got '" + std::string(text) + "'");
    }
    SessionHours s{oh * 60 + om, ch * 60 + cm};
    if (s.close_minute <= s.open_minute || s.close_minute > 24 * 60) {
        throw ConfigError("session close must come after open on the same day");
    }
    return s;
}

IncrementSeries ingest_csv(std::istream& in, const IngestOptions& options, std::string_view origin) {
    if (!(options.dt0_minutes > 0.0)) throw ConfigError("dt0 must be > 0");
    const auto step = duration_cast<microseconds>(duration<double, std::ratio<60>>(options.dt0_minutes));
    if (step.count() <= 0) throw ConfigError("dt0 too small");
    const auto open = minutes{options.session.open_minute};
    const auto close = minutes{options.session.close_minute};

    auto fail = [&](int line, const std::string& what) -> void {
        std::ostringstream msg;
        msg << origin << ':' << line << ": " << what;
        throw IoError(msg.str());
    };

    std::string line;
    if (!std::getline(in, line)) throw IoError(std::string(origin) + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line) != "timestamp,price") fail(1, "expected header 'timestamp,price'");

    // Per local day: grid index -> last price at or before that grid point.
    std::map<sys_days, std::map<std::int64_t, double>> days_grid;
    sys_time<microseconds> previous{};
    bool have_previous = false;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) fail(line_no, "expected 'timestamp,price'");
        TickRecord tick;
        try {
            tick = parse_timestamp(trim(row.substr(0, comma)));
        } catch (const ConfigError& e) {
            fail(line_no, e.what());
        }
        const std::string price_text(trim(row.substr(comma + 1)));
        char* end = nullptr;
        tick.price = std::strtod(price_text.c_str(), &end);
        if (price_text.empty() || end != price_text.c_str() + price_text.size() || !std::isfinite(tick.price) ||
            tick.price <= 0.0) {
            fail(line_no, "price must be a positive number, got '" + price_text + "'");
        }
        if (have_previous && tick.utc < previous) fail(line_no, "timestamps must be non-decreasing");
        previous = tick.utc;
        have_previous = true;

        const auto local = tick.utc + minutes{tick.utc_offset_minutes};
        const auto day = floor<days>(local);
        const auto tod = local - day;
        if (tod < open || tod > close) continue;
        // Grid point g_j = open + j dt0; the tick updates the first grid point at or after it.
        const auto since_open = tod - open;
        const std::int64_t j = (since_open.count() + step.count() - 1) / step.count();
        if (open + j * step > close) continue;
        days_grid[day][j] = tick.price;
    }

    IncrementSeries series;
    series.dt0_minutes = options.dt0_minutes;
    for (const auto& [day, grid] : days_grid) {
        if (grid.size() < 2) continue;
        const std::size_t start = series.increments.size();
        auto it = grid.begin();
        std::int64_t j = it->first;
        double price = it->second;
        for (++it; it != grid.end(); ++it) {
            // Forward fill: empty grid intervals carry a zero increment.
            for (; j + 1 < it->first; ++j) series.increments.push_back(0.0);
            series.increments.push_back(it->second - price);
            price = it->second;
            j = it->first;
        }
        series.segment_starts.push_back(start);
    }
    if (series.increments.empty()) throw IoError(std::string(origin) + ": no increments inside trading sessions");
    if (series.segment_starts.size() == 1) series.segment_starts.clear();
    return series;
}

IncrementSeries ingest_csv(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return ingest_csv(in, options, path.string());
}

void write_price_path_csv(const IncrementSeries& series, const std::filesystem::path& path, double start_price,
                          const IngestOptions& options, sys_days first_day) {
    const auto step = duration_cast<microseconds>(duration<double, std::ratio<60>>(options.dt0_minutes));
    const auto session = minutes{options.session.close_minute - options.session.open_minute};
    const auto per_day = static_cast<std::size_t>(duration_cast<microseconds>(session).count() / step.count());
    if (per_day == 0) throw ConfigError("session shorter than one base interval");

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "timestamp,price\n";
    constexpr int kOffset = -5 * 60;
    char buf[48];
    auto emit = [&](sys_days day, std::size_t j, double price) {
        TickRecord tick;
        tick.utc_offset_minutes = kOffset;
        tick.utc = sys_time<microseconds>{day} + minutes{options.session.open_minute} +
                   step * static_cast<std::int64_t>(j) - minutes{kOffset};
        std::snprintf(buf, sizeof buf, ",%.17g\n", price);
        out << format_timestamp(tick) << buf;
    };

    double price = start_price;
    std::size_t i = 0;
    sys_days day = first_day;
    while (i < series.size()) {
        emit(day, 0, price);
        for (std::size_t j = 1; j <= per_day && i < series.size(); ++j, ++i) {
            price += series.increments[i];
            emit(day, j, price);
        }
        day += days{1};
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mmill::io
