#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("pcstage_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        write("m.tsv", "sample_id\tg0\tg1\tg2\ns1\t1.0\t2.0\t0.0\ns2\t4.5\t0.0\t7.0\n");
        write("l.tsv", "sample_id\tstage\ns1\tT2a\ns2\tT4\n");
    }
    void TearDown() override { fs::remove_all(dir_); }

    void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }
    std::string read(const std::string& name) {
        std::ifstream in(dir_ / name);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    // Exit status of the CLI; stdout lands in out.txt.
    int run(const std::string& args) {
        const std::string cmd = std::string(PCSTAGE_CLI) + " " + args + " > " + (dir_ / "out.txt").string() + " 2> " +
                                (dir_ / "err.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, ValidatePrintsShape) {
    EXPECT_EQ(run("validate --matrix " + path("m.tsv") + " --labels " + path("l.tsv")), 0);
    EXPECT_NE(read("out.txt").find("(2,3)"), std::string::npos) << read("out.txt");
}

TEST_F(Cli, DataErrorsExitTwo) {
    write("bad.tsv", "sample_id\tg0\tg1\tg2\ns1\t1\t2\n");
    EXPECT_EQ(run("validate --matrix " + path("bad.tsv")), 2);
    write("badl.tsv", "s1\tT2a\ns2\tT9\n");
    EXPECT_EQ(run("validate --matrix " + path("m.tsv") + " --labels " + path("badl.tsv")), 2);
}

TEST_F(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run("validate"), 1);
    EXPECT_EQ(run("no-such-command"), 1);
    EXPECT_EQ(run("validate --matrix " + path("missing.tsv")), 1);
    write("cfg.json", R"({"input": {"matrix": "m.tsv", "labels": "l.tsv"}, "classifiers": [{"kind": "nb"}], "colour": 1})");
    EXPECT_EQ(run("pipeline --config " + path("cfg.json") + " --output-dir " + path("out")), 1);
    write("leak.json",
          R"({"input": {"matrix": "m.tsv", "labels": "l.tsv"}, "classifiers": [{"kind": "nb"}], "selection": {"scope": "all"}})");
    EXPECT_EQ(run("pipeline --config " + path("leak.json") + " --output-dir " + path("out")), 1);
    EXPECT_NE(read("err.txt").find("StageLegality"), std::string::npos) << read("err.txt");
}

TEST_F(Cli, DegWritesVolcanoAndSummary) {
    std::ostringstream m, l;
    m << "sample_id\tup\tflat\n";
    for (int i = 0; i < 8; ++i) {
        const bool late = i >= 4;
        m << "s" << i << '\t' << (late ? 40 + i : 10 + i) << '\t' << 5 + i % 2 << '\n';
        l << "s" << i << '\t' << (late ? "T3a" : "T2a") << '\n';
    }
    write("dm.tsv", m.str());
    write("dl.tsv", l.str());
    EXPECT_EQ(run("deg --matrix " + path("dm.tsv") + " --labels " + path("dl.tsv") +
                  " --alpha 0.05 --lfc 1.0 --output-dir " + path("deg")),
              0)
        << read("err.txt");
    EXPECT_TRUE(fs::exists(dir_ / "deg" / "volcano.csv"));
    std::ifstream in(dir_ / "deg" / "deg_summary.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["up"], 1);
    EXPECT_EQ(j["down"], 0);
    EXPECT_TRUE(fs::exists(dir_ / "deg" / "manifest.json"));
}

TEST_F(Cli, TrainThenEvaluate) {
    std::ostringstream m, l;
    m << "sample_id\ta\tb\n";
    for (int i = 0; i < 20; ++i) {
        const bool late = i % 2;
        m << "s" << i << '\t' << (late ? 10 + i : 1 + i % 3) << '\t' << (i * 7) % 5 << '\n';
        l << "s" << i << '\t' << (late ? "T4" : "T1c") << '\n';
    }
    write("tm.tsv", m.str());
    write("tl.tsv", l.str());
    const std::string data = " --matrix " + path("tm.tsv") + " --labels " + path("tl.tsv");
    ASSERT_EQ(run("train" + data + " --classifier dt --output-dir " + path("model")), 0) << read("err.txt");
    ASSERT_EQ(run("evaluate" + data + " --model " + path("model/model.json") + " --output-dir " + path("eval")), 0)
        << read("err.txt");
    std::ifstream in(dir_ / "eval" / "metrics.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["f1"], 100.0) << j.dump();
}
