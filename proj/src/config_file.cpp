#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "mmill/error.hpp"
#include "mmill/io.hpp"

namespace mmill::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class LineError {
public:
    LineError(std::string_view origin, int line, std::string_view key) : origin_(origin), line_(line), key_(key) {}

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << origin_ << ':' << line_ << ": ";
        if (!key_.empty()) msg << key_ << ": ";
        msg << what;
        throw ConfigError(msg.str());
    }

private:
    std::string_view origin_;
    int line_;
    std::string_view key_;
};

double to_double(std::string_view v, const LineError& err) {
    const std::string s(v);
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) err.fail("expected a number, got '" + s + "'");
    return d;
}

template <class Int>
Int to_int(std::string_view v, const LineError& err) {
    Int out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) err.fail("expected an integer, got '" + std::string(v) + "'");
    return out;
}

bool to_bool(std::string_view v, const LineError& err) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    err.fail("expected true or false, got '" + std::string(v) + "'");
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

MillConfig preset_config(std::string_view name) {
    if (name == "elementary") return elementary_preset();
    if (name == "composite") return composite_preset();
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected elementary or composite)");
}

MillConfig parse_config(std::string_view text, std::string_view origin, const MillConfig& base) {
    MillConfig cfg = base;
    double w_mill = cfg.strategy.mill();
    double w_con = cfg.strategy.contrarian();
    double w_trend = cfg.strategy.trend();
    int line_no = 0;
    int weights_line = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) LineError(origin, line_no, {}).fail("expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const LineError err(origin, line_no, key);
        if (value.empty()) err.fail("missing value");

        if (key == "preset") {
            try {
                cfg = preset_config(value);
            } catch (const ConfigError& e) {
                err.fail(e.what());
            }
            w_mill = cfg.strategy.mill();
            w_con = cfg.strategy.contrarian();
            w_trend = cfg.strategy.trend();
        } else if (key == "sigma0_dollars") cfg.sigma0 = Money(to_double(value, err));
        else if (key == "sigma_is_std") cfg.sigma_is_std = to_bool(value, err);
        else if (key == "nu0") cfg.nu0 = to_double(value, err);
        else if (key == "l_scale_intervals") cfg.l_scale = to_double(value, err);
        else if (key == "n_scales") cfg.n_scales = to_int<int>(value, err);
        else if (key == "scale_decay") cfg.scale_decay = to_double(value, err);
        else if (key == "nu_floor") cfg.nu_floor = to_double(value, err);
        else if (key == "series_len_intervals") cfg.series_len = to_int<std::int64_t>(value, err);
        else if (key == "dt0_minutes") cfg.dt0_minutes = to_double(value, err);
        else if (key == "n_series") cfg.n_series = to_int<std::int64_t>(value, err);
        else if (key == "n_groups") cfg.n_groups = to_int<std::int64_t>(value, err);
        else if (key == "seed") cfg.seed = to_int<std::uint64_t>(value, err);
        else if (key == "w_mill") { w_mill = to_double(value, err); weights_line = line_no; }
        else if (key == "w_contrarian") { w_con = to_double(value, err); weights_line = line_no; }
        else if (key == "w_trend") { w_trend = to_double(value, err); weights_line = line_no; }
        else err.fail("unknown key");
    }

    try {
        cfg.strategy = StrategyMix(w_mill, w_con, w_trend);
    } catch (const ConfigError& e) {
        LineError(origin, weights_line, "w_mill/w_contrarian/w_trend").fail(e.what());
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
    return cfg;
}

MillConfig load_config(const std::filesystem::path& path, const MillConfig& base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string(), base);
}

std::string format_config(const MillConfig& c) {
    std::ostringstream out;
    out << "sigma0_dollars = " << num(c.sigma0.value) << '\n'
        << "sigma_is_std = " << (c.sigma_is_std ? "true" : "false") << '\n'
        << "nu0 = " << num(c.nu0) << '\n'
        << "l_scale_intervals = " << num(c.l_scale) << '\n'
        << "n_scales = " << c.n_scales << '\n'
        << "scale_decay = " << num(c.scale_decay) << '\n'
        << "nu_floor = " << num(c.nu_floor) << '\n'
        << "series_len_intervals = " << c.series_len << '\n'
        << "dt0_minutes = " << num(c.dt0_minutes) << '\n'
        << "n_series = " << c.n_series << '\n'
        << "n_groups = " << c.n_groups << '\n'
        << "seed = " << c.seed << '\n'
        << "w_mill = " << num(c.strategy.mill()) << '\n'
        << "w_contrarian = " << num(c.strategy.contrarian()) << '\n'
        << "w_trend = " << num(c.strategy.trend()) << '\n';
    return out.str();
}

}  // namespace mmill::io
