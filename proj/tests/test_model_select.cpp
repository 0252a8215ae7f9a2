#include <set>

#include <gtest/gtest.h>

#include "pcstage/error.hpp"
#include "pcstage/metrics.hpp"
#include "pcstage/model_select.hpp"
#include "support/synthetic.hpp"

using namespace pcstage;

namespace {
constexpr Stage E = Stage::Early;
constexpr Stage L = Stage::Late;
} // namespace

TEST(Confusion, HandTally) {
    const std::vector<Stage> truth{E, L}, pred{E, L};
    const auto id = confusion(truth, pred);
    EXPECT_EQ(id(E, E), 1u);
    EXPECT_EQ(id(L, L), 1u);
    EXPECT_EQ(id(E, L) + id(L, E), 0u);

    const auto cm = confusion(std::vector<Stage>{L, L, E, E}, std::vector<Stage>{L, E, E, E});
    EXPECT_EQ(cm(L, L), 1u);
    EXPECT_EQ(cm(L, E), 1u);
    EXPECT_EQ(cm(E, E), 2u);
    EXPECT_EQ(cm(E, L), 0u);
    EXPECT_EQ(cm.total(), 4u);

    EXPECT_THROW(confusion(std::vector<Stage>{}, std::vector<Stage>{}), Error);
    EXPECT_THROW(confusion(std::vector<Stage>{E}, std::vector<Stage>{E, L}), Error);
}

TEST(Metrics, HandExample) {
    const auto m = metrics(confusion(std::vector<Stage>{L, L, E, E}, std::vector<Stage>{L, E, E, E}));
    const auto& late = m.per_class[index_of(L)];
    const auto& early = m.per_class[index_of(E)];
    EXPECT_EQ(late.precision, 100.0);
    EXPECT_EQ(late.recall, 50.0);
    EXPECT_EQ(format_fixed(late.f1), "66.67");
    EXPECT_EQ(format_fixed(early.precision), "66.67");
    EXPECT_EQ(early.recall, 100.0);
    EXPECT_NEAR(early.f1, 80.0, 1e-12);
    EXPECT_EQ(format_fixed(m.f1), "73.33");
    EXPECT_EQ(m.recall, m.accuracy);
}

TEST(Metrics, PerfectAndDegenerate) {
    const auto perfect = metrics(confusion(std::vector<Stage>{E, L, L}, std::vector<Stage>{E, L, L}));
    EXPECT_EQ(perfect.precision, 100.0);
    EXPECT_EQ(perfect.recall, 100.0);
    EXPECT_EQ(perfect.f1, 100.0);
    EXPECT_FALSE(perfect.degenerate);

    const auto never_late = metrics(confusion(std::vector<Stage>{E, L}, std::vector<Stage>{E, E}));
    EXPECT_EQ(never_late.per_class[index_of(L)].precision, 0.0);
    EXPECT_TRUE(never_late.per_class[index_of(L)].precision_degenerate);
    EXPECT_TRUE(never_late.degenerate);
}

TEST(Metrics, FormatFixed) {
    EXPECT_EQ(format_fixed(83.0), "83.00");
    EXPECT_EQ(format_fixed(80.285, 1), "80.3");
}

TEST(Folds, PlainKfoldPairs) {
    const auto folds = kfold(10, 5, false, 0);
    ASSERT_EQ(folds.size(), 5u);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        EXPECT_EQ(f.test.size(), 2u);
        EXPECT_EQ(f.train.size(), 8u);
        seen.insert(f.test.begin(), f.test.end());
    }
    EXPECT_EQ(seen.size(), 10u);
    EXPECT_THROW(kfold(3, 5, false, 0), Error);
}

TEST(Folds, StratifiedCohortCounts) {
    std::vector<Stage> y(184, E);
    y.insert(y.end(), 302, L);
    const auto folds = stratified_kfold(y, 10, true, 3);
    ASSERT_EQ(folds.size(), 10u);
    for (const auto& f : folds) {
        std::size_t early = 0;
        for (auto i : f.test) early += y[i] == E;
        EXPECT_TRUE(early == 18 || early == 19) << early;
    }
}

TEST(Grid, ReferenceGridSizes) {
    EXPECT_EQ(grid_size(reference_grid(ClassifierKind::RF)), 36u);
    EXPECT_EQ(grid_points(reference_grid(ClassifierKind::RF)).size(), 36u);
    EXPECT_EQ(grid_size(reference_grid(ClassifierKind::MLP)), 1u);
}

TEST(Grid, LastAxisFastest) {
    GridSpec g;
    g.kind = ClassifierKind::KNN;
    g.axes = {{"n_neighbors", {1, 3}}, {"weights", {"uniform", "distance"}}};
    const auto pts = grid_points(g);
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_EQ(pts[0]["weights"], "uniform");
    EXPECT_EQ(pts[1]["weights"], "distance");
    EXPECT_EQ(pts[2]["n_neighbors"], 3);
    EXPECT_EQ(grid_from_json(grid_to_json(g)).axes.size(), 2u);
}

TEST(Grid, SinglePointIsBest) {
    auto data = pcstage::testing::planted_signal(40, 5, 2, 0.5, 1.0, 1);
    data.role = Role::Train;
    GridSpec g;
    g.kind = ClassifierKind::NB;
    g.axes = {{"var_smoothing", {1e-9}}};
    const auto r = grid_search(g, ModelStages{}, data, 7);
    EXPECT_EQ(r.best_index, 0u);
    EXPECT_EQ(r.cv_table.size(), 5u);
}

TEST(Grid, ClearlyBetterPointWinsUnderReordering) {
    auto data = pcstage::testing::planted_signal(60, 6, 3, 0.5, 1.5, 2);
    data.role = Role::Train;
    GridSpec g;
    g.kind = ClassifierKind::DT;
    g.axes = {{"max_depth", {0, 3}}};
    const auto a = grid_search(g, ModelStages{}, data, 1);
    const auto b = grid_search(g, ModelStages{}, data, 2); // different fold assignment
    EXPECT_EQ(a.points[a.best_index]["max_depth"], 3);
    EXPECT_EQ(b.points[b.best_index]["max_depth"], 3);
}

TEST(Grid, RefusesTestRole) {
    auto data = pcstage::testing::planted_signal(20, 3, 1, 0.5, 1.0, 3);
    data.role = Role::Test;
    GridSpec g;
    g.kind = ClassifierKind::NB;
    EXPECT_THROW(grid_search(g, ModelStages{}, data, 0), Error);
}

TEST(Trials, SingleRunSummary) {
    const auto data = pcstage::testing::planted_signal(50, 6, 3, 0.4, 1.0, 4);
    Experiment ex;
    ex.classifier = default_spec(ClassifierKind::NB);
    const auto t = repeated_trials(ex, data, 1, 9);
    ASSERT_EQ(t.runs.size(), 1u);
    EXPECT_EQ(t.f1.mean, t.f1.best);
    EXPECT_EQ(t.f1.mean, t.runs[0].report.f1);
    EXPECT_EQ(t.precision.mean, t.runs[0].report.precision);
}

TEST(Trials, Deterministic) {
    const auto data = pcstage::testing::planted_signal(50, 6, 3, 0.4, 1.0, 5);
    Experiment ex;
    ex.classifier = default_spec(ClassifierKind::DT);
    ex.stages.selection.enabled = true;
    const auto a = repeated_trials(ex, data, 3, 11);
    const auto b = repeated_trials(ex, data, 3, 11);
    EXPECT_EQ(a.f1.values, b.f1.values);
    EXPECT_EQ(a.runs[2].seed, b.runs[2].seed);
}

TEST(Summarize, MeanAndBest) {
    const auto s = summarize({70.0, 90.0, 80.0});
    EXPECT_DOUBLE_EQ(s.mean, 80.0);
    EXPECT_EQ(s.best, 90.0);
}

TEST(CrossValidate, MajorityPredictorIsStable) {
    // A depth-0 tree always predicts the training majority.
    const auto data = pcstage::testing::planted_signal(50, 4, 1, 0.4, 0.0, 6);
    const auto spec = make_spec(ClassifierKind::DT, {{"max_depth", 0}});
    ModelStages stages;
    stages.standardize = false;
    const auto cv = cross_validate(stages, spec, data, 5, 3);
    ASSERT_EQ(cv.fold_f1.size(), 5u);
    for (double f : cv.fold_f1) EXPECT_NEAR(f, cv.fold_f1[0], 1e-9);
}

TEST(CrossValidate, SelectionInsideFoldsAvoidsLeak) {
    // Pure noise: choosing features on all rows first inflates the score,
    // fitting selection per fold does not.
    auto data = pcstage::testing::planted_signal(60, 400, 0, 0.5, 0.0, 7);
    ModelStages inside;
    inside.selection.enabled = true;
    const auto spec = default_spec(ClassifierKind::NB);
    const auto honest = cross_validate(inside, spec, data, 5, 1);

    Samples all = data;
    all.role = Role::Train;
    const auto fitted = FeaturePipeline::fit(inside, all, 0);
    Samples leaked;
    leaked.x = fitted.pipeline.transform(data.x);
    leaked.y = data.y;
    ModelStages none;
    none.standardize = false;
    const auto cheat = cross_validate(none, spec, leaked, 5, 1);
    EXPECT_GT(cheat.mean_f1, honest.mean_f1 + 10.0);
}
