#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "mmill_cli_test";

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const fs::path log = kWork / "stdout.txt";
    const std::string cmd = std::string(MMILL_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::ostringstream s;
    s << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kSmall = "--n-series 4 --groups 2 --series-len 3000";

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
    static void TearDownTestSuite() { fs::remove_all(kWork); }
};

}  // namespace

TEST_F(Cli, SimulateEchoesElementaryConfig) {
    const auto r = run("simulate " + kSmall + " --out " + (kWork / "elem").string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("nu0 = 0.12"), std::string::npos);
    EXPECT_NE(r.out.find("l_scale_intervals = 3"), std::string::npos);
    EXPECT_NE(r.out.find("sigma0_dollars = 0.02"), std::string::npos);
    EXPECT_TRUE(fs::exists(kWork / "elem" / "manifest.json"));
}

TEST_F(Cli, CompositeSummaryListsDecayingWeights) {
    const auto r = run("simulate --preset composite " + kSmall + " --out " + (kWork / "comp").string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto summary = slurp(kWork / "comp" / "summary.txt");
    EXPECT_NE(summary.find("    1  0.12 "), std::string::npos) << summary;
    EXPECT_NE(summary.find("    2  0.096 "), std::string::npos);
    EXPECT_NE(summary.find("    3  0.0768 "), std::string::npos);
}

TEST_F(Cli, SameSeedSameHashes) {
    ASSERT_EQ(run("--seed 7 simulate " + kSmall + " --out " + (kWork / "s1").string()).code, 0);
    ASSERT_EQ(run("--seed 7 --threads 2 simulate " + kSmall + " --out " + (kWork / "s2").string()).code, 0);
    ASSERT_EQ(run("--seed 8 simulate " + kSmall + " --out " + (kWork / "s3").string()).code, 0);
    const auto j1 = nlohmann::json::parse(slurp(kWork / "s1" / "manifest.json"));
    const auto j2 = nlohmann::json::parse(slurp(kWork / "s2" / "manifest.json"));
    const auto j3 = nlohmann::json::parse(slurp(kWork / "s3" / "manifest.json"));
    EXPECT_EQ(j1["outputs"], j2["outputs"]);
    EXPECT_NE(j1["outputs"], j3["outputs"]);
}

TEST_F(Cli, MillnessTableAndCsv) {
    ASSERT_EQ(run("simulate " + kSmall + " --out " + (kWork / "m").string()).code, 0);
    const auto csv = (kWork / "m.csv").string();
    const auto r = run("millness --input " + (kWork / "m").string() + " --out " + csv);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("dT=6min"), std::string::npos);
    EXPECT_EQ(slurp(csv).substr(0, 40), "source,quantity,dt_minutes,value_percent");
    const auto one = run("millness --input " + (kWork / "m").string() + " --dt 1");
    EXPECT_EQ(one.code, 0);
    EXPECT_EQ(one.out.find("dT=3min"), std::string::npos);
}

TEST_F(Cli, PatternAndPortrait) {
    const auto prefix = (kWork / "pat").string();
    auto r = run("pattern " + kSmall + " --axis all --out " + prefix);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(prefix + "_antidiag_mill.csv"));
    r = run("portrait --portrait de-like " + kSmall + " --out " + (kWork / "por").string() + " --image");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(kWork / "por_x0_asym.ppm"));
    r = run("portrait --weights 0,0,1 " + kSmall + " --out " + (kWork / "por2").string());
    EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, ConfigFileWithLineDiagnostics) {
    std::ofstream(kWork / "good.cfg") << "preset = composite\nn_series = 2\nn_groups = 2\nseries_len_intervals = 500\n";
    auto r = run("--config " + (kWork / "good.cfg").string() + " millness --dt 1");
    EXPECT_EQ(r.code, 0) << r.out;
    std::ofstream(kWork / "bad.cfg") << "seed = 1\nnu0 = lots\n";
    r = run("--config " + (kWork / "bad.cfg").string() + " millness");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("bad.cfg:2: nu0"), std::string::npos) << r.out;
}

TEST_F(Cli, IngestRoundTrip) {
    std::ofstream(kWork / "ticks.csv") << "timestamp,price\n2005-01-03T09:30:00-05:00,10.00\n"
                                         "2005-01-03T09:31:00-05:00,10.02\n";
    const auto r = run("ingest --csv " + (kWork / "ticks.csv").string() + " --out " + (kWork / "t.csv").string());
    ASSERT_EQ(r.code, 0) << r.out;
    std::istringstream lines(slurp(kWork / "t.csv"));
    std::string header, value;
    std::getline(lines, header);
    std::getline(lines, value);
    EXPECT_EQ(header, "increment");
    EXPECT_NEAR(std::stod(value), 0.02, 1e-12);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("millness --n-series 7 --groups 2").code, 2);
    EXPECT_EQ(run("pattern " + kSmall + " --axis z --out " + (kWork / "z").string()).code, 2);
    EXPECT_EQ(run("portrait --weights -1,1,1 " + kSmall + " --out " + (kWork / "w").string()).code, 2);
    EXPECT_EQ(run("millness --input " + (kWork / "does_not_exist").string()).code, 3);
    EXPECT_EQ(run("ingest --csv " + (kWork / "nope.csv").string() + " --out x.bin").code, 3);
    EXPECT_EQ(run("simulate " + kSmall + " --out /proc/forbidden").code, 3);
    // Nothing falls inside a counting square this small: empty sector counts.
    EXPECT_EQ(run("millness " + kSmall + " --delta-p-star 1e-12").code, 4);
}
