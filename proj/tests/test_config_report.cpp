#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "pcstage/config.hpp"
#include "pcstage/error.hpp"
#include "pcstage/report.hpp"

using namespace pcstage;
using nlohmann::json;

namespace {

json minimal_config() {
    return {{"input", {{"matrix", "m.tsv"}, {"labels", "l.tsv"}}}, {"classifiers", json::array({{{"kind", "nb"}}})}};
}

Errc parse_error(const json& j) {
    try {
        parse_pipeline_config(j);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "config accepted: " << j.dump();
    return Errc::InvalidArgument;
}

RunResults two_by_three() {
    RunResults r;
    for (const char* name : {"RF", "SVM"}) {
        AlgorithmResults a;
        a.name = name;
        TrialSummary t;
        for (std::size_t run = 0; run < 3; ++run) {
            TrialRun tr;
            tr.run = run;
            tr.report.precision = 80.0 + static_cast<double>(run);
            tr.report.recall = 70.0;
            tr.report.f1 = 75.0;
            t.runs.push_back(tr);
        }
        t.precision = summarize({80, 81, 82});
        t.recall = summarize({70, 70, 70});
        t.f1 = summarize({75, 75, 75});
        a.trials = t;
        r.algorithms.push_back(a);
    }
    return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Config, MinimalDefaults) {
    const auto c = parse_pipeline_config(minimal_config(), "/base");
    EXPECT_EQ(c.input.matrix, std::filesystem::path("/base/m.tsv"));
    EXPECT_EQ(c.evaluation.n_runs, 100u);
    EXPECT_DOUBLE_EQ(c.evaluation.test_fraction, 0.2);
    EXPECT_TRUE(c.stages.standardize);
    ASSERT_EQ(c.algorithms.size(), 1u);
    EXPECT_EQ(c.algorithms[0].spec->kind, ClassifierKind::NB);
}

TEST(Config, UnknownKeysRejected) {
    auto j = minimal_config();
    j["sede"] = 3;
    EXPECT_EQ(parse_error(j), Errc::Schema);
    j = minimal_config();
    j["input"]["matrx"] = "x";
    EXPECT_EQ(parse_error(j), Errc::Schema);
    j = minimal_config();
    j["classifiers"][0]["params"] = {{"bogus", 1}};
    EXPECT_EQ(parse_error(j), Errc::Schema);
}

TEST(Config, FitStagesOnAllDataRejected) {
    for (const char* stage : {"selection", "transform", "augmentation"}) {
        auto j = minimal_config();
        j[stage] = {{"scope", "all"}};
        EXPECT_EQ(parse_error(j), Errc::StageLegality) << stage;
    }
}

TEST(Config, OtherSchemaErrors) {
    auto j = minimal_config();
    j.erase("classifiers");
    EXPECT_EQ(parse_error(j), Errc::Schema);
    j = minimal_config();
    j["classifiers"][0]["grid"] = "reference";
    j["classifiers"][0]["params"] = json::object();
    EXPECT_EQ(parse_error(j), Errc::Schema);
    j = minimal_config();
    j["seed"] = -1;
    EXPECT_EQ(parse_error(j), Errc::Schema);
}

TEST(Config, HashFollowsResolvedConfig) {
    auto j = minimal_config();
    const auto a = parse_pipeline_config(j);
    j["output_dir"] = "elsewhere";
    j["threads"] = 4;
    const auto b = parse_pipeline_config(j);
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a), sha256_hex(resolved_config_json(a).dump()));
    j["seed"] = 1;
    EXPECT_NE(config_hash(parse_pipeline_config(j)), config_hash(a));
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, ResolvedConfigParsesBack) {
    auto j = minimal_config();
    j["classifiers"].push_back({{"kind", "rf"}, {"grid", "reference"}});
    const auto c = parse_pipeline_config(j);
    const auto resolved = resolved_config_json(c);
    EXPECT_EQ(resolved_config_json(parse_pipeline_config(resolved)), resolved);
}

TEST(Report, LongFormatRowCount) {
    std::ostringstream out;
    write_boxplot_csv(out, two_by_three());
    EXPECT_EQ(count_lines(out.str()), 1u + 18u);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "algorithm,run,metric,value");
}

TEST(Report, SummaryKeys) {
    const auto s = summary_json(two_by_three());
    for (const char* algo : {"RF", "SVM"}) {
        for (const char* agg : {"mean", "best"}) {
            for (const char* m : {"precision", "recall", "f1"}) {
                EXPECT_TRUE(s["algorithms"][algo][agg].contains(m)) << algo << agg << m;
            }
        }
    }
    EXPECT_EQ(s["algorithms"]["RF"]["best"]["precision"], 82.0);
}

TEST(Report, EmptyResultsWriteNothing) {
    const auto dir = std::filesystem::temp_directory_path() / "pcstage_empty_report";
    std::filesystem::remove_all(dir);
    EXPECT_THROW(emit_reports(RunResults{}, dir), Error);
    EXPECT_FALSE(std::filesystem::exists(dir));
}

TEST(Report, EmitsFilesAndManifest) {
    const auto dir = std::filesystem::temp_directory_path() / "pcstage_report_files";
    std::filesystem::remove_all(dir);
    const auto files = emit_reports(two_by_three(), dir);
    for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    EXPECT_NE(std::find(files.begin(), files.end(), "summary.json"), files.end());

    RunManifest m("abc", 7);
    m.begin_stage("load");
    m.end_stage();
    m.add_outputs(files);
    m.write(dir, "complete");
    std::ifstream in(dir / "manifest.json");
    const auto j = json::parse(in);
    EXPECT_EQ(j["config_sha256"], "abc");
    EXPECT_EQ(j["status"], "complete");
    EXPECT_EQ(j["seed"], 7);
    EXPECT_EQ(j["stage_durations"].size(), 1u);
    EXPECT_TRUE(j.contains("finished_at"));
    std::filesystem::remove_all(dir);
}
