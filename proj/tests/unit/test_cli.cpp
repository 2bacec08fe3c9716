#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace cppe;
using namespace cppe::cli;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cppe_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int code;
    std::string log;
};

Outcome run(const std::string& cmd, const fs::path& dir, const std::vector<std::string>& overrides,
            unsigned threads = 1, std::optional<std::uint64_t> seed = std::nullopt) {
    RunContext ctx;
    for (const auto& o : overrides) ctx.config.set_override(o);
    ctx.out_dir = dir;
    ctx.threads = threads;
    ctx.seed = seed;
    std::ostringstream log;
    ctx.log = &log;
    const int code = run_command(cmd, ctx);
    return {code, log.str()};
}

bool has_partial(const fs::path& dir) {
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".partial") return true;
    }
    return false;
}

int shell(const std::string& args) {
    const int status = std::system((std::string(CPPE_TOOL_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

const std::vector<std::string> kSmallMc = {"mc.n_cycles=20000", "mc.length_km=100", "mc.n_links=2"};

}  // namespace

TEST(Cli, AnalyticWritesCurvesAndManifest) {
    const auto dir = fresh_dir("analytic");
    const auto r = run("analytic", dir, {"sweep.length_stop_km=100", "sweep.length_step_km=50"});
    ASSERT_EQ(r.code, kExitOk) << r.log;
    for (const char* f : {"distance_M60.csv", "distance_M200.csv", "distance_M2000.csv",
                          "analytic_summary.json", "manifest.json", "run_info.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_FALSE(has_partial(dir));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["subcommand"], "analytic");
    EXPECT_EQ(manifest["config"]["sweep"]["length_step_km"], "50");
}

TEST(Cli, McDeterministicAcrossThreadCounts) {
    const auto a = fresh_dir("mc1");
    const auto b = fresh_dir("mc4");
    ASSERT_EQ(run("mc", a, kSmallMc, 1, 42).code, kExitOk);
    ASSERT_EQ(run("mc", b, kSmallMc, 4, 42).code, kExitOk);
    EXPECT_EQ(slurp(a / "mc_summary.csv"), slurp(b / "mc_summary.csv"));
    EXPECT_EQ(slurp(a / "mc_summary.json"), slurp(b / "mc_summary.json"));
    EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
}

TEST(Cli, McRecordsGeneratedSeed) {
    const auto dir = fresh_dir("mcseed");
    ASSERT_EQ(run("mc", dir, kSmallMc).code, kExitOk);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_TRUE(manifest["seed_generated"].get<bool>());
    const auto seed = manifest["seed"].get<std::uint64_t>();
    const auto again = fresh_dir("mcseed2");
    ASSERT_EQ(run("mc", again, kSmallMc, 1, seed).code, kExitOk);
    EXPECT_EQ(slurp(dir / "mc_summary.csv"), slurp(again / "mc_summary.csv"));
}

TEST(Cli, HeatmapAppendsMarkerRows) {
    const auto dir = fresh_dir("heatmap");
    ASSERT_EQ(run("heatmap", dir, {"sweep.t2_count=3", "sweep.eta_o_count=4"}).code, kExitOk);
    std::ifstream in(dir / "heatmap.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 1u + 12u + 2u);
    EXPECT_EQ(lines.front(), "T2_ms,eta_o,ratio");
    const auto markers = nlohmann::json::parse(slurp(dir / "heatmap_markers.json"))["markers"];
    ASSERT_EQ(markers.size(), 2u);
    EXPECT_EQ(markers[0]["row"], 13);
    EXPECT_EQ(markers[1]["row"], 14);
}

TEST(Cli, FailedRunLeavesNoOutputs) {
    const auto dir = fresh_dir("strict");
    const auto r = run("pulse", dir, {"pulse.tau1_s=70e-6", "pulse.storage_time_s=300e-6",
                                      "pulse.strict_timing=true"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.log.find("tau1"), std::string::npos);
    EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Cli, UnknownKeyIsUsageError) {
    const auto dir = fresh_dir("unknown");
    const auto r = run("analytic", dir, {"memory.t3_s=1"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.log.find("t3_s"), std::string::npos);
}

TEST(Cli, FitModelAndInputErrors) {
    const auto dir = fresh_dir("fit");
    std::ofstream(dir / "data.csv") << "T_s,eta\n1e-4,0.2\n3e-4,0.1\n6e-4,0.04\n9e-4,0.02\n";
    const std::string input = "fit.input=" + (dir / "data.csv").string();
    EXPECT_EQ(run("fit", dir, {"fit.model=gauss", input}).code, kExitUsage);
    EXPECT_EQ(run("fit", dir, {"fit.model=exp4", "fit.input=/nonexistent.csv"}).code, kExitRuntime);
    const auto ok = run("fit", dir, {"fit.model=exp4", input});
    ASSERT_EQ(ok.code, kExitOk) << ok.log;
    const auto report = nlohmann::json::parse(slurp(dir / "fit_report.json"));
    EXPECT_GT(report["parameters"]["T2"]["value"].get<double>(), 0.0);

    std::ofstream(dir / "bad.csv") << "T_s,eta\n1e-4,0.2\n3e-4;0.1\n";
    const auto bad = run("fit", dir, {"fit.model=exp4", "fit.input=" + (dir / "bad.csv").string()});
    EXPECT_EQ(bad.code, kExitUsage);
    EXPECT_NE(bad.log.find("line 3"), std::string::npos);
}

TEST(Cli, BinaryExitCodes) {
    const auto dir = fresh_dir("binary");
    EXPECT_EQ(shell(""), kExitUsage);
    EXPECT_EQ(shell("frobnicate"), kExitUsage);
    EXPECT_EQ(shell("analytic --no-such-flag"), kExitUsage);
    std::ofstream(dir / "bad.ini") << "[memory]\neta_o 0.5\n";
    EXPECT_EQ(shell("--config " + (dir / "bad.ini").string() + " analytic"), kExitUsage);
    EXPECT_EQ(shell("fit --model mims --input /nonexistent.csv --out-dir " + dir.string()), kExitRuntime);
    EXPECT_EQ(shell("analytic --set sweep.length_stop_km=20 --out-dir " + dir.string()), kExitOk);
    EXPECT_EQ(shell("--help"), kExitOk);
}

TEST(Cli, DefaultConfigMatchesBuiltInDefaults) {
    auto config = Config::parse_file(std::string(CPPE_CONFIG_DIR) + "/default.ini");
    EXPECT_NO_THROW(config.check_known(config_schema()));
    const auto with = fresh_dir("default_with");
    const auto without = fresh_dir("default_without");
    RunContext ctx;
    ctx.config = config;
    ctx.out_dir = with;
    std::ostringstream log;
    ctx.log = &log;
    ASSERT_EQ(run_command("analytic", ctx), kExitOk) << log.str();
    ASSERT_EQ(run("analytic", without, {}).code, kExitOk);
    for (const char* f : {"distance_M60.csv", "distance_M200.csv", "distance_M2000.csv", "analytic_summary.json"}) {
        EXPECT_EQ(slurp(with / f), slurp(without / f)) << f;
    }
}
