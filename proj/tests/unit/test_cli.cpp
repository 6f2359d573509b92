#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "cdnn/errors.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = "CDNN_THREADS=1 '" + std::string(CDNN_CLI) + "' " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("cdnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& text = {}) {
        const fs::path p = dir_ / name;
        if (!text.empty()) std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir_;
};

constexpr const char* kTiny = R"({"problem": "test2", "network": {"layers": 1, "width": 4},
    "training": {"iters": 20, "log_every": 5}, "eval": {"grid": 11, "interface_points": 11}})";

}  // namespace

TEST_F(Cli, ListProblems) {
    const auto r = run("list-problems");
    EXPECT_EQ(r.code, cdnn::kExitOk);
    for (const char* name : {"test1", "test2", "test3", "test4", "test5", "custom"})
        EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST_F(Cli, UsageErrorsAreConfigErrors) {
    EXPECT_EQ(run("").code, cdnn::kExitConfig);
    EXPECT_EQ(run("fly").code, cdnn::kExitConfig);
    EXPECT_EQ(run("evaluate only-one-arg").code, cdnn::kExitConfig);
}

TEST_F(Cli, TrainWithoutOutputs) { EXPECT_EQ(run("train -q " + file("c.json", kTiny)).code, cdnn::kExitOk); }

TEST_F(Cli, TrainEvaluateExport) {
    const auto cfg = file("c.json", kTiny), hist = file("h.csv"), ckpt = file("k.json"), csv = file("f.csv");
    ASSERT_EQ(run("train -q " + cfg + " --history " + hist + " --checkpoint " + ckpt).code, cdnn::kExitOk);
    std::ifstream h(hist);
    std::string line;
    std::getline(h, line);
    EXPECT_EQ(line.rfind("iteration,stokes_momentum,", 0), 0u);
    int rows = 0;
    while (std::getline(h, line)) ++rows;
    EXPECT_EQ(rows, 5);  // iterations 1, 5, 10, 15, 20

    const auto ev = run("evaluate " + ckpt + " " + cfg);
    EXPECT_EQ(ev.code, cdnn::kExitOk);
    EXPECT_NE(ev.out.find("\"problem\": \"test2\""), std::string::npos);
    EXPECT_NE(ev.out.find("\"errL2\""), std::string::npos);

    ASSERT_EQ(run("export " + ckpt + " " + cfg + " " + csv).code, cdnn::kExitOk);
    std::ifstream f(csv);
    std::getline(f, line);
    EXPECT_EQ(line, "region,x,y,u1,u2,p,eu1,eu2,ep");
}

TEST_F(Cli, ConfigAndIoFailures) {
    EXPECT_EQ(run("train " + file("bad.json", R"({"problem": "test2", "colour": 1})")).code, cdnn::kExitConfig);
    EXPECT_EQ(run("train " + file("broken.json", "{")).code, cdnn::kExitConfig);
    EXPECT_EQ(run("train " + (dir_ / "missing.json").string()).code, cdnn::kExitIo);
    EXPECT_EQ(run("train -q " + file("c.json", kTiny) + " --history /nonexistent-dir/h.csv").code, cdnn::kExitIo);
    EXPECT_EQ(run("evaluate " + (dir_ / "none.json").string() + " " + file("c.json", kTiny)).code, cdnn::kExitIo);
}

TEST_F(Cli, NumericalFailure) {
    // A vanishing permeability drives the Darcy residual past the double range.
    const auto cfg = file("inf.json", R"({"problem": {"stokes": [0, 1, 1, 2], "darcy": [0, 1, 0, 1],
        "constants": {"K": 1e-300}, "exact": "test2"}, "network": {"layers": 1, "width": 4},
        "training": {"iters": 5}})");
    EXPECT_EQ(run("train -q " + cfg).code, cdnn::kExitNumerical);
}

TEST_F(Cli, Verify) {
    const auto r = run("verify test5");
    EXPECT_EQ(r.code, cdnn::kExitOk);
    EXPECT_NE(r.out.find("SKIP forcing consistency"), std::string::npos);
    EXPECT_NE(r.out.find("PASS gradient check"), std::string::npos);
    EXPECT_EQ(run("verify test9").code, cdnn::kExitConfig);
}
