#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmill/commands.hpp"
#include "mmill/error.hpp"
#include "mmill/io.hpp"
#include "mmill/report.hpp"
#include "mmill/simulator.hpp"

using namespace mmill;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("mmill_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

IncrementSeries ingest_text(const std::string& text, io::IngestOptions opts = {}) {
    std::istringstream in(text);
    return io::ingest_csv(in, opts);
}

MillConfig tiny_config() {
    MillConfig c = elementary_preset();
    c.n_series = 4;
    c.n_groups = 2;
    c.series_len = 3000;
    c.seed = 7;
    return c;
}

}  // namespace

TEST(ConfigFile, ParsesAllKeys) {
    const auto c = io::parse_config(R"(# comment
sigma0_dollars = 0.03
sigma_is_std = true
nu0 = 0.1   # trailing comment
l_scale_intervals = 2.5
n_scales = 4
scale_decay = 0.7
nu_floor = 0.002
series_len_intervals = 1000
dt0_minutes = 2
n_series = 30
n_groups = 3
seed = 12345678901
w_mill = 0.5
w_contrarian = 0.25
w_trend = 0.25
)");
    EXPECT_DOUBLE_EQ(c.sigma0.value, 0.03);
    EXPECT_TRUE(c.sigma_is_std);
    EXPECT_DOUBLE_EQ(c.nu0, 0.1);
    EXPECT_DOUBLE_EQ(c.l_scale, 2.5);
    EXPECT_EQ(c.n_scales, 4);
    EXPECT_DOUBLE_EQ(c.scale_decay, 0.7);
    EXPECT_DOUBLE_EQ(c.nu_floor, 0.002);
    EXPECT_EQ(c.series_len, 1000);
    EXPECT_DOUBLE_EQ(c.dt0_minutes, 2.0);
    EXPECT_EQ(c.n_series, 30);
    EXPECT_EQ(c.n_groups, 3);
    EXPECT_EQ(c.seed, 12345678901ULL);
    EXPECT_EQ(c.strategy, StrategyMix(0.5, 0.25, 0.25));
}

TEST(ConfigFile, RoundTrip) {
    MillConfig c = composite_preset();
    c.sigma0 = Money(0.1 + 0.2);
    c.seed = 99;
    c.strategy = StrategyMix(0.3, 0.0, 0.7);
    EXPECT_EQ(io::parse_config(io::format_config(c)), c);
}

TEST(ConfigFile, PresetKeyAndBase) {
    EXPECT_EQ(io::parse_config("preset = composite\n").n_scales, 64);
    EXPECT_EQ(io::parse_config("seed = 5\n", "<x>", composite_preset()).n_scales, 64);
}

TEST(ConfigFile, LineDiagnostics) {
    try {
        io::parse_config("seed = 1\n\nnu0 = abc\n", "run.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(std::string(e.what()), "run.cfg:3: nu0: expected a number, got 'abc'");
    }
    EXPECT_THROW(io::parse_config("bogus = 1\n"), ConfigError);
    EXPECT_THROW(io::parse_config("no equals sign\n"), ConfigError);
    EXPECT_THROW(io::parse_config("nu0 =\n"), ConfigError);
    EXPECT_THROW(io::parse_config("w_mill = -1\nw_trend = 2\n"), ConfigError);
    EXPECT_THROW(io::parse_config("n_series = 7\n"), ConfigError);
    EXPECT_THROW(io::parse_config("preset = other\n"), ConfigError);
    EXPECT_THROW(io::parse_config("nu0 = 0.5\nn_scales = 10\nscale_decay = 1\n"), ConfigError);
}

TEST(ConfigFile, MissingFile) { EXPECT_THROW(io::load_config("/nonexistent/run.cfg"), IoError); }

TEST(SeriesFile, BinaryRoundTrip) {
    TempDir dir;
    IncrementSeries s;
    s.increments = {0.1, -0.2, 1e-300, -0.0, 3.25};
    io::write_series_binary(s, dir / "a.bin");
    const auto bytes = slurp(dir / "a.bin");
    ASSERT_EQ(bytes.size(), 6u + 8u + 5 * 8u);
    EXPECT_EQ(bytes.substr(0, 6), "MMILL1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 5u);
    const auto back = io::read_series(dir / "a.bin");
    EXPECT_EQ(back.increments, s.increments);
}

TEST(SeriesFile, CsvRoundTripWithSegments) {
    TempDir dir;
    IncrementSeries s;
    s.increments = {0.1, -0.2, 0.3, 0.1 + 0.2};
    s.segment_starts = {0, 2};
    io::write_series_csv(s, dir / "a.csv");
    EXPECT_TRUE(fs::exists(dir / "a.csv.segments"));
    const auto back = io::read_series(dir / "a.csv");
    EXPECT_EQ(back.increments, s.increments);
    EXPECT_EQ(back.segment_starts, s.segment_starts);
}

TEST(SeriesFile, Errors) {
    TempDir dir;
    std::ofstream(dir / "bad.bin", std::ios::binary) << "MMILL2xxxxxxxx";
    EXPECT_THROW(io::read_series(dir / "bad.bin"), IoError);
    std::ofstream(dir / "short.bin", std::ios::binary) << "MMILL1" << std::string("\x05\0\0\0\0\0\0\0", 8);
    EXPECT_THROW(io::read_series(dir / "short.bin"), IoError);
    std::ofstream(dir / "bad.csv") << "increment\n0.1\nabc\n";
    EXPECT_THROW(io::read_series(dir / "bad.csv"), IoError);
    EXPECT_THROW(io::read_series(dir / "missing.bin"), IoError);
    std::ofstream(dir / "x.txt") << "1\n";
    EXPECT_THROW(io::read_series(dir / "x.txt"), IoError);
}

TEST(Timestamp, ParseAndFormat) {
    const auto t = io::parse_timestamp("2005-01-03T09:30:00-05:00");
    EXPECT_EQ(t.utc_offset_minutes, -300);
    EXPECT_EQ(io::format_timestamp(t), "2005-01-03T09:30:00-05:00");
    const auto z = io::parse_timestamp("2005-01-03T14:30:00Z");
    EXPECT_EQ(z.utc, t.utc);
    EXPECT_EQ(io::parse_timestamp("2005-01-03 14:30").utc, t.utc);
    EXPECT_EQ(io::parse_timestamp("2005-01-03T14:30:00.5Z").utc - t.utc, std::chrono::milliseconds(500));
    EXPECT_EQ(io::parse_timestamp("2005-01-03T15:30:00+0100").utc, t.utc);
    EXPECT_THROW(io::parse_timestamp("2005-13-03T09:30"), ConfigError);
    EXPECT_THROW(io::parse_timestamp("yesterday"), ConfigError);
    EXPECT_THROW(io::parse_timestamp("2005-01-03T09:30Q"), ConfigError);
}

TEST(Session, Parse) {
    const auto s = io::SessionHours::parse("09:30-16:00");
    EXPECT_EQ(s.open_minute, 570);
    EXPECT_EQ(s.close_minute, 960);
    EXPECT_THROW(io::SessionHours::parse("16:00-09:30"), ConfigError);
    EXPECT_THROW(io::SessionHours::parse("9:30-16:00"), ConfigError);
}

TEST(Ingest, SingleIncrement) {
    const auto s = ingest_text("timestamp,price\n2005-01-03T09:30:00-05:00,10.00\n2005-01-03T09:31:00-05:00,10.02\n");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s.increments[0], 0.02, 1e-12);
}

TEST(Ingest, ForwardFillsGaps) {
    const auto s = ingest_text(
        "timestamp,price\n2005-01-03T09:30:00-05:00,10.00\n2005-01-03T09:34:00-05:00,10.05\n");
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.increments[0], 0.0);
    EXPECT_EQ(s.increments[1], 0.0);
    EXPECT_EQ(s.increments[2], 0.0);
    EXPECT_NEAR(s.increments[3], 0.05, 1e-12);
}

TEST(Ingest, LastPricePerIntervalAndSessions) {
    const auto s = ingest_text(
        "timestamp,price\n"
        "2005-01-03T09:00:00-05:00,9.00\n"   // before the open: ignored
        "2005-01-03T09:30:00-05:00,10.00\n"
        "2005-01-03T09:30:20-05:00,10.10\n"
        "2005-01-03T09:30:50-05:00,10.20\n"  // last tick before 09:31 wins
        "2005-01-03T09:32:00-05:00,10.50\n"
        "2005-01-04T09:30:00-05:00,11.00\n"
        "2005-01-04T09:31:00-05:00,10.90\n");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_NEAR(s.increments[0], 0.20, 1e-12);
    EXPECT_NEAR(s.increments[1], 0.30, 1e-12);
    EXPECT_NEAR(s.increments[2], -0.10, 1e-12);
    EXPECT_EQ(s.segment_starts, (std::vector<std::size_t>{0, 2}));
}

TEST(Ingest, ErrorsCarryLineNumbers) {
    try {
        ingest_text("timestamp,price\n2005-01-03T09:30:00Z,10\n2005-01-03T09:31:00Z,oops\n");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(ingest_text(""), IoError);
    EXPECT_THROW(ingest_text("time,price\n"), IoError);
    EXPECT_THROW(ingest_text("timestamp,price\n2005-01-03T09:31:00Z,10\n2005-01-03T09:30:00Z,10\n"), IoError);
    EXPECT_THROW(ingest_text("timestamp,price\n2005-01-03T09:31:00Z,-1\n"), IoError);
}

TEST(Ingest, RoundTripThroughPricePath) {
    TempDir dir;
    MillConfig c = tiny_config();
    const auto series = simulate_composite(c, 0);
    io::write_price_path_csv(series, dir / "ticks.csv", 50.0);
    const auto back = io::ingest_csv(dir / "ticks.csv");
    ASSERT_EQ(back.size(), series.size());
    for (std::size_t i = 0; i < series.size(); ++i) ASSERT_NEAR(back.increments[i], series.increments[i], 1e-12);
    // 3000 increments over 390-interval sessions.
    EXPECT_EQ(back.segment_starts.size(), 8u);
}

TEST(Grid, CsvRoundTripIsExactAtNineDigits) {
    TempDir dir;
    DensityGrid g;
    g.bin_width = 0.01;
    g.x_min = -0.02;
    g.y_min = -0.01;
    g.nx = 4;
    g.ny = 2;
    g.values = {1.0 / 3, -2.0 / 7, 0.0, 1e-9, 12345.6789012, -5.5, 3e10, 2.0};
    io::write_grid_csv(g, dir / "g.csv");
    const auto back = io::read_grid_csv(dir / "g.csv");
    ASSERT_EQ(back.nx, 4);
    ASSERT_EQ(back.ny, 2);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", g.values[i]);
        EXPECT_EQ(back.values[i], std::strtod(buf, nullptr));
    }
    io::write_grid_csv(back, dir / "g2.csv");
    EXPECT_EQ(slurp(dir / "g.csv"), slurp(dir / "g2.csv"));
    const auto text = slurp(dir / "g.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "x_center,y_center,value");
}

TEST(Grid, PpmHeader) {
    TempDir dir;
    DensityGrid g;
    g.nx = 3;
    g.ny = 2;
    g.values = {1, -1, 0, 0.5, 0, 0};
    io::write_grid_ppm(g, dir / "g.ppm", 2);
    const auto bytes = slurp(dir / "g.ppm");
    EXPECT_EQ(bytes.substr(0, 11), "P6\n6 4\n255\n");
    EXPECT_EQ(bytes.size(), 11u + 6 * 4 * 3);
}

TEST(MillnessTable, CsvAndText) {
    MillnessReport r1{1.0, {1.8, 1.9}, 1.85, 0.0707, Money(0.3)};
    MillnessReport r3{3.0, {0.9}, 0.9, std::nullopt, Money(0.3)};
    const std::vector<io::MillnessRow> rows{{"Model", r1}, {"Model", r3}};
    const auto csv = io::millness_csv(rows);
    EXPECT_EQ(csv,
              "source,quantity,dt_minutes,value_percent\n"
              "Model,mean_rho,1,1.85\n"
              "Model,mean_rho,3,0.9\n"
              "Model,std_rho,1,0.0707\n");
    const auto table = io::millness_table(rows);
    EXPECT_NE(table.find("dT=1min"), std::string::npos);
    EXPECT_NE(table.find("1.85"), std::string::npos);
    EXPECT_NE(table.find("n/a"), std::string::npos);
}

TEST(Manifest, Sha256KnownValue) {
    TempDir dir;
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    EXPECT_EQ(io::sha256_file(dir / "abc.txt"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, WriteReadVerify) {
    TempDir dir;
    std::ofstream(dir / "a.txt") << "hello";
    io::RunManifest m;
    m.config = tiny_config();
    m.tool_version = "t";
    m.produced_at = io::utc_now_iso8601();
    m.outputs.push_back(io::manifest_entry(dir.path(), "a.txt"));
    io::write_manifest(m, dir.path());
    const auto back = io::read_manifest(dir.path());
    EXPECT_EQ(back.config, m.config);
    EXPECT_EQ(back.outputs.size(), 1u);
    EXPECT_EQ(back.outputs[0].sha256, m.outputs[0].sha256);
    EXPECT_TRUE(io::verify_manifest(back, dir.path()));
    std::ofstream(dir / "a.txt") << "changed";
    EXPECT_FALSE(io::verify_manifest(back, dir.path()));
}

TEST(Commands, SimulateWritesHashedOutputsReproducibly) {
    TempDir dir;
    cli::SimulateOptions opts;
    opts.config = tiny_config();
    opts.output_dir = dir / "run1";
    const auto m1 = cli::run_simulate(opts);
    opts.output_dir = dir / "run2";
    opts.threads = 2;
    const auto m2 = cli::run_simulate(opts);
    ASSERT_EQ(m1.outputs.size(), 4u + 2u);
    ASSERT_EQ(m1.outputs.size(), m2.outputs.size());
    for (std::size_t i = 0; i < m1.outputs.size(); ++i) {
        EXPECT_EQ(m1.outputs[i].path, m2.outputs[i].path);
        EXPECT_EQ(m1.outputs[i].sha256, m2.outputs[i].sha256);
    }
    EXPECT_TRUE(io::verify_manifest(io::read_manifest(dir / "run1"), dir / "run1"));
    // Every file in the directory except the manifest itself is listed.
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "run1")) files += e.is_regular_file();
    EXPECT_EQ(files, m1.outputs.size() + 1);
    const auto summary = slurp(dir / "run1" / "summary.txt");
    EXPECT_NE(summary.find("dropped fraction"), std::string::npos);
}

TEST(Commands, MillnessFromDirectoryMatchesStreaming) {
    TempDir dir;
    cli::SimulateOptions sim;
    sim.config = tiny_config();
    sim.output_dir = dir / "run";
    cli::run_simulate(sim);

    cli::MillnessOptions from_dir;
    from_dir.input.directory = dir / "run";
    cli::MillnessOptions streamed;
    streamed.input.config = tiny_config();
    const auto a = cli::run_millness(from_dir);
    const auto b = cli::run_millness(streamed);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].report.rho_per_group, b[i].report.rho_per_group);
        EXPECT_EQ(a[i].report.rho_per_group.size(), 2u);
    }
    from_dir.dt_minutes = {1};
    EXPECT_EQ(cli::run_millness(from_dir).size(), 1u);
}

TEST(Commands, PatternWritesGrids) {
    TempDir dir;
    cli::PatternOptions opts;
    opts.input.config = tiny_config();
    opts.axes = {kAllAxes.begin(), kAllAxes.end()};
    opts.output_prefix = dir / "out" / "p";
    opts.image = true;
    const auto patterns = cli::run_pattern(opts);
    ASSERT_EQ(patterns.size(), 4u);
    for (const char* axis : {"x0", "y0", "diag", "antidiag"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / (std::string("p_") + axis + "_asym.csv")));
        EXPECT_TRUE(fs::exists(dir / "out" / (std::string("p_") + axis + "_mill.csv")));
        EXPECT_TRUE(fs::exists(dir / "out" / (std::string("p_") + axis + "_asym.ppm")));
    }
    const auto g = io::read_grid_csv(dir / "out" / "p_y0_asym.csv");
    EXPECT_EQ(g.nx, 60);
}

TEST(Commands, PortraitPresets) {
    EXPECT_EQ(cli::portrait_preset("dis-like"), StrategyMix(0.3, 0.0, 0.7));
    EXPECT_EQ(cli::portrait_preset("hdi-like"), StrategyMix(0.8, 0.1, 0.1));
    EXPECT_EQ(cli::portrait_preset("de-like"), StrategyMix(0.3, 0.7, 0.0));
    EXPECT_THROW(cli::portrait_preset("xyz"), ConfigError);
}

TEST(Commands, IngestWritesSeries) {
    TempDir dir;
    std::ofstream(dir / "t.csv") << "timestamp,price\n2005-01-03T09:30:00-05:00,10.00\n"
                                    "2005-01-03T09:31:00-05:00,10.02\n";
    cli::IngestCommandOptions opts;
    opts.csv = dir / "t.csv";
    opts.output = dir / "s.bin";
    cli::run_ingest(opts);
    EXPECT_EQ(io::read_series(dir / "s.bin").size(), 1u);
}
