#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(LSW_TOS_EXE) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("lsw_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateIsByteIdentical) {
    ASSERT_EQ(run("simulate S1 --t 512 --seed 7 --out " + path("a.txt")).code, 0);
    ASSERT_EQ(run("simulate S1 --t 512 --seed 7 --out " + path("b.txt")).code, 0);
    const auto a = slurp(path("a.txt"));
    EXPECT_EQ(a, slurp(path("b.txt")));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 512);
    ASSERT_EQ(run("simulate S1 --t 512 --seed 8 --out " + path("c.txt")).code, 0);
    EXPECT_NE(a, slurp(path("c.txt")));
}

TEST_F(Cli, TestsOnSeriesFile) {
    ASSERT_EQ(run("simulate P1 --t 512 --seed 3 --out " + path("p1.txt")).code, 0);
    const auto h = run("--json hwtos " + path("p1.txt") + " --control fdr");
    ASSERT_EQ(h.code, 0);
    const auto j = nlohmann::json::parse(h.out);
    EXPECT_EQ(j.at("method"), "hwtos-fdr");
    EXPECT_EQ(j.at("n_tests"), 186);
    EXPECT_EQ(j.at("reject").get<bool>(), !j.at("significant").empty());
    const auto p = run("--json psr " + path("p1.txt"));
    ASSERT_EQ(p.code, 0);
    EXPECT_EQ(nlohmann::json::parse(p.out).at("method"), "psr");
    EXPECT_NE(run("hwtos " + path("p1.txt")).out.find("reject stationarity:"), std::string::npos);
}

TEST_F(Cli, LacvWritesCsvAndPlot) {
    ASSERT_EQ(run("simulate AC2 --t 1024 --seed 1 --out " + path("x.txt")).code, 0);
    const auto r = run("lacv " + path("x.txt") + " --nz 900 --lag-max 30 --plot " + path("acf.svg"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "lag,c_hat,ci_low,ci_high");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 32);
    const auto svg = slurp(path("acf.svg"));
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST_F(Cli, McSizeTableLayout) {
    const auto r = run("mc size --config table1 --n 10 --workers 1");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "model,PSR,HWTOS(Bon),HWTOS(FDR)");
    for (int i = 1; i <= 7; ++i) {
        ASSERT_TRUE(std::getline(in, line));
        EXPECT_EQ(line.rfind("S" + std::to_string(i) + ",", 0), 0u) << line;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    }
}

TEST_F(Cli, McRunsAreReproducible) {
    const auto a = run("--json mc power --config table4 --n 15 --workers 2");
    const auto b = run("--json mc power --config table4 --n 15 --workers 1");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, McNormalityWritesPlots) {
    const auto r = run("mc normality --config fig-normality --n 20 --workers 1 --plot-dir " + path("plots"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "T,lag,mean,sd,skewness,excess_kurtosis,reference");
    EXPECT_TRUE(fs::exists(path("plots") + "/density_lag0.svg"));
    EXPECT_TRUE(fs::exists(path("plots") + "/density_lag1.svg"));
}

TEST_F(Cli, LoadQuakeExtractsSeries) {
    {
        std::ofstream f(path("quake.txt"));
        for (int i = 1; i <= 4096; ++i) f << i << '\n';
    }
    const auto r = run("load-quake " + path("quake.txt") + " --series exQ");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "3073");
    {
        std::ofstream f(path("short.txt"));
        for (int i = 1; i <= 4095; ++i) f << i << '\n';
    }
    EXPECT_EQ(run("load-quake " + path("short.txt")).code, 2);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("simulate S9").code, 2);
    EXPECT_EQ(run("simulate S1 --t 500").code, 2);
    EXPECT_EQ(run("hwtos " + path("missing.txt")).code, 2);
    {
        std::ofstream f(path("odd.txt"));
        for (int i = 0; i < 100; ++i) f << i << '\n';
    }
    EXPECT_EQ(run("psr " + path("odd.txt")).code, 2);
    EXPECT_EQ(run("hwtos " + path("odd.txt") + " --control holm").code, 1);
    EXPECT_EQ(run("mc power --config table1 --n 5").code, 1);
    EXPECT_EQ(run("mc size --config nonexistent").code, 2);
}
