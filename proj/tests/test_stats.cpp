#include <cfloat>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "pcstage/de.hpp"
#include "pcstage/error.hpp"
#include "pcstage/select.hpp"
#include "pcstage/special.hpp"
#include "support/oracles.hpp"

using namespace pcstage;

TEST(TTest, IdenticalGroups) {
    const std::vector<double> a{1, 2, 3};
    const auto r = two_sample_t(a, a, TTestVariant::Pooled);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p, 1.0);
}

TEST(TTest, TextbookExample) {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const auto r = two_sample_t(a, b, TTestVariant::Pooled);
    // s_p = 1, so t = -3 / sqrt(2/3) on 4 df.
    EXPECT_NEAR(r.t, -3.0 / std::sqrt(2.0 / 3.0), 1e-14);
    EXPECT_EQ(r.df, 4.0);
    const auto want = oracle::t_test(a, b, false);
    EXPECT_NEAR(r.p / want.p, 1.0, 1e-12);
    // df = 4 has a closed form: p = 1 - t(6 + t^2) / (t^2 + 4)^1.5
    const double t = std::abs(r.t);
    EXPECT_NEAR(r.p, 1.0 - t * (6.0 + t * t) / std::pow(t * t + 4.0, 1.5), 1e-14);
}

TEST(TTest, WelchMatchesOracle) {
    const std::vector<double> a{0.3, 1.9, 2.2, 0.7, 5.1}, b{4.4, 4.9, 5.0};
    const auto r = two_sample_t(a, b, TTestVariant::Welch);
    const auto want = oracle::t_test(a, b, true);
    EXPECT_NEAR(r.t, want.t, 1e-12);
    EXPECT_NEAR(r.df, want.df, 1e-12);
    EXPECT_NEAR(r.p / want.p, 1.0, 1e-10);
}

TEST(TTest, ConstantGroupsWithDifferentMeans) {
    const std::vector<double> a{2, 2, 2}, b{5, 5};
    const auto r = two_sample_t(a, b, TTestVariant::Pooled);
    EXPECT_EQ(r.t, -DBL_MAX);
    EXPECT_EQ(r.p, kPFloor);
    EXPECT_EQ(two_sample_t(b, a, TTestVariant::Welch).t, DBL_MAX);
}

TEST(FoldChange, Examples) {
    EXPECT_EQ(log2_fold_change(4, 1, 0), 2.0);
    EXPECT_EQ(log2_fold_change(0, 0, 1e-9), 0.0);
    EXPECT_NEAR(log2_fold_change(3, 1.5, 1e-9), std::log2((3 + 1e-9) / (1.5 + 1e-9)), 1e-15);
    EXPECT_NEAR(log2_fold_change(3, 1.5, 1e-9), 1.0, 1e-6);
}

namespace {

LabeledDataset planted_deg(double late_factor) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.05);
    const std::size_t n = 20, p = 20;
    Matrix v(n, p);
    std::vector<Stage> y(n);
    std::vector<std::string> samples, genes;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i < n / 2 ? Stage::Early : Stage::Late;
        samples.push_back("s" + std::to_string(i));
        for (std::size_t j = 0; j < p; ++j) {
            const double base = 10.0 + static_cast<double>(j);
            const double scale = (j < 5 && y[i] == Stage::Late) ? late_factor : 1.0;
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = base * scale * (1.0 + noise(rng));
        }
    }
    for (std::size_t j = 0; j < p; ++j) genes.push_back("g" + std::to_string(j));
    return {ExpressionMatrix(samples, genes, v), y};
}

} // namespace

TEST(Deg, PlantedUpRegulation) {
    const auto table = deg_analysis(planted_deg(4.0));
    ASSERT_EQ(table.records.size(), 20u);
    for (std::size_t j = 0; j < 20; ++j) {
        const auto& r = table.records[j];
        EXPECT_EQ(r.status, j < 5 ? Regulation::Up : Regulation::NotSignificant) << r.gene_id;
        if (j < 5) {
            EXPECT_NEAR(r.log2fc, 2.0, 0.1);
            EXPECT_GT(r.t_stat, 0.0);
        }
    }
    EXPECT_EQ(table.up, 5u);
    EXPECT_EQ(table.down, 0u);
    EXPECT_EQ(table.not_significant, 15u);
}

TEST(Deg, NoDifferenceNoCalls) {
    Matrix v = Matrix::Constant(6, 4, 3.0);
    const LabeledDataset ds(ExpressionMatrix({"a", "b", "c", "d", "e", "f"}, {"w", "x", "y", "z"}, v),
                            {Stage::Early, Stage::Early, Stage::Early, Stage::Late, Stage::Late, Stage::Late});
    const auto table = deg_analysis(ds);
    EXPECT_EQ(table.up, 0u);
    EXPECT_EQ(table.down, 0u);
}

TEST(Deg, RegulationThresholds) {
    DegOptions o;
    EXPECT_EQ(classify_regulation(1.5, 0.01, o), Regulation::Up);
    EXPECT_EQ(classify_regulation(-1.5, 0.01, o), Regulation::Down);
    EXPECT_EQ(classify_regulation(0.5, 0.01, o), Regulation::NotSignificant);
    EXPECT_EQ(classify_regulation(3.0, 0.2, o), Regulation::NotSignificant);
}

TEST(Volcano, Coordinates) {
    DegTable t;
    t.records = {{"a", 1.0, 3.0, 0.01, Regulation::Up}, {"b", -2.0, -9.0, 0.0, Regulation::Down}};
    const auto rows = volcano_export(t);
    EXPECT_NEAR(rows[0].neg_log10_p, 2.0, 1e-15);
    EXPECT_EQ(rows[1].neg_log10_p, 300.0);
    std::ostringstream out;
    write_volcano_csv(out, rows);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "gene_id,log2fc,neg_log10_p,status");
}

TEST(Volcano, EchoesTable) {
    const auto table = deg_analysis(planted_deg(4.0));
    const auto rows = volcano_export(table);
    ASSERT_EQ(rows.size(), 20u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].status, table.records[i].status);
        EXPECT_EQ(rows[i].gene_id, table.records[i].gene_id);
    }
    const auto summary = deg_summary_json(table);
    EXPECT_EQ(summary["up"], 5);
    EXPECT_EQ(summary["ns"], 15);
}

TEST(Anova, DegenerateFeature) {
    Matrix x = Matrix::Constant(6, 1, 2.0);
    const std::vector<Stage> y{Stage::Early, Stage::Early, Stage::Early, Stage::Late, Stage::Late, Stage::Late};
    const auto s = anova_f_classif(x, y);
    EXPECT_EQ(s[0].f_stat, 0.0);
    EXPECT_EQ(s[0].p_value, 1.0);
    EXPECT_TRUE(s[0].degenerate);
}

TEST(Anova, ZeroWithinVarianceSeparates) {
    Matrix x(4, 1);
    x << 1, 1, 2, 2;
    const auto s = anova_f_classif(x, std::vector<Stage>{Stage::Early, Stage::Early, Stage::Late, Stage::Late});
    EXPECT_TRUE(std::isinf(s[0].f_stat));
    EXPECT_EQ(s[0].p_value, 0.0);
}

TEST(Anova, EqualsTSquaredForTwoClasses) {
    Matrix x(6, 1);
    x << 1, 2, 3, 4, 5, 6;
    const std::vector<Stage> y{Stage::Early, Stage::Early, Stage::Early, Stage::Late, Stage::Late, Stage::Late};
    const auto s = anova_f_classif(x, y);
    const auto t = oracle::t_test(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}, false);
    EXPECT_NEAR(s[0].f_stat, t.t * t.t, 1e-12);
    EXPECT_NEAR(s[0].p_value / t.p, 1.0, 1e-10);
}

TEST(SelectFpr, Examples) {
    std::vector<FeatureScore> scores{{0, 9, 0.01, false}, {1, 1, 0.5, false}, {2, 5, 0.04, false}};
    EXPECT_EQ(select_fpr(scores, 0.05).kept, (Indices{0, 2}));
    EXPECT_EQ(select_fpr(scores, 1.0).kept, (Indices{0, 1, 2}));
    std::vector<FeatureScore> flat{{0, 1, 0.5, false}, {1, 1, 0.5, false}};
    const auto none = select_fpr(flat, 0.05);
    EXPECT_TRUE(none.empty());
    try {
        project(Matrix::Ones(2, 2), none);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptySelection);
    }
    std::vector<FeatureScore> one{{0, 1, 1.0, true}};
    EXPECT_TRUE(select_fpr(one, 1.0).empty());
}

TEST(Project, ColumnsAndErrors) {
    Matrix v(1, 3);
    v << 1, 2, 3;
    const ExpressionMatrix m({"s"}, {"g0", "g1", "g2"}, v);
    SelectionMask mask;
    mask.kept = {0, 2};
    mask.n_features = 3;
    const auto p = project(m, mask);
    EXPECT_EQ(p.gene_ids(), (std::vector<std::string>{"g0", "g2"}));
    EXPECT_EQ(p.values()(0, 1), 3.0);
    mask.kept = {0, 1, 2};
    EXPECT_EQ(project(m, mask).values(), v);
    mask.kept = {5};
    try {
        project(m, mask);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
    }
}

TEST(Special, IncompleteBetaKnownValues) {
    // I_x(1, 1) = x and I_x(a, 1) = x^a.
    EXPECT_NEAR(incomplete_beta(1, 1, 0.3), 0.3, 1e-15);
    EXPECT_NEAR(incomplete_beta(3, 1, 0.5), 0.125, 1e-15);
    EXPECT_NEAR(incomplete_beta(2.5, 4, 0.3) + incomplete_beta(4, 2.5, 0.7), 1.0, 1e-14);
    EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(Special, TailsAgainstClosedForms) {
    // t with 1 df is Cauchy: p = 1 - 2 atan(t) / pi.
    EXPECT_NEAR(student_t_two_sided(2.0, 1.0), 1.0 - 2.0 * std::atan(2.0) / M_PI, 1e-14);
    // t with 2 df: p = 1 - t / sqrt(2 + t^2).
    EXPECT_NEAR(student_t_two_sided(7.0, 2.0), 1.0 - 7.0 / std::sqrt(51.0), 1e-15);
    // F(2, d2) upper tail = (1 + 2f/d2)^(-d2/2).
    EXPECT_NEAR(f_upper_tail(3.0, 2.0, 10.0), std::pow(1.0 + 0.6, -5.0), 1e-15);
    EXPECT_EQ(f_upper_tail(0.0, 1.0, 5.0), 1.0);
}
