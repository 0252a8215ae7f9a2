#include <sstream>

#include <gtest/gtest.h>

#include "pcstage/data.hpp"
#include "pcstage/error.hpp"

using namespace pcstage;

namespace {

template <class F>
Errc code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::InvalidArgument;
}

} // namespace

TEST(ExpressionMatrixParse, SmallTableIsExact) {
    std::istringstream in("sample_id\tg0\tg1\tg2\ns1\t1.0\t2.0\t0.0\ns2\t4.5\t0.0\t7.0\n");
    const auto m = parse_expression_matrix(in);
    ASSERT_EQ(m.rows(), 2u);
    ASSERT_EQ(m.cols(), 3u);
    EXPECT_EQ(m.sample_ids(), (std::vector<std::string>{"s1", "s2"}));
    EXPECT_EQ(m.gene_ids(), (std::vector<std::string>{"g0", "g1", "g2"}));
    EXPECT_EQ(m.values()(0, 1), 2.0);
    EXPECT_EQ(m.values()(1, 0), 4.5);
    EXPECT_EQ(m.values()(1, 2), 7.0);
}

TEST(ExpressionMatrixParse, RaggedRowReportsLine) {
    std::istringstream in("sample_id\tg0\tg1\tg2\ns1\t1\t2\t3\ns2\t1\t2\n");
    try {
        parse_expression_matrix(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), Errc::RaggedRow);
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ExpressionMatrixParse, RejectsBadCells) {
    std::istringstream nan_cell("sample_id\tg0\ns1\tabc\n");
    EXPECT_EQ(code_of([&] { parse_expression_matrix(nan_cell); }), Errc::NonNumericCell);
    std::istringstream neg("sample_id\tg0\ns1\t-1\n");
    EXPECT_EQ(code_of([&] { parse_expression_matrix(neg); }), Errc::NegativeValue);
    std::istringstream dup("sample_id\tg0\tg0\ns1\t1\t2\n");
    EXPECT_EQ(code_of([&] { parse_expression_matrix(dup); }), Errc::DuplicateId);
    std::istringstream empty("");
    EXPECT_EQ(code_of([&] { parse_expression_matrix(empty); }), Errc::EmptyInput);
}

TEST(ExpressionMatrixParse, GenesAsRowsTransposes) {
    std::istringstream in("gene_id,s1,s2\ng0,1,2\ng1,3,4\ng2,5,6\n");
    ParseOptions opt;
    opt.delimiter = ',';
    opt.orientation = Orientation::GenesAsRows;
    const auto m = parse_expression_matrix(in, opt);
    ASSERT_EQ(m.rows(), 2u);
    ASSERT_EQ(m.cols(), 3u);
    EXPECT_EQ(m.values()(1, 2), 6.0);
    EXPECT_EQ(m.gene_ids()[2], "g2");
}

TEST(ExpressionMatrixParse, Log2Transform) {
    std::istringstream in("sample_id\tg0\ns1\t3\n");
    ParseOptions opt;
    opt.log2_transform = true;
    EXPECT_DOUBLE_EQ(parse_expression_matrix(in, opt).values()(0, 0), 2.0);
}

TEST(ExpressionMatrixParse, WriteRoundTrips) {
    Matrix v(2, 2);
    v << 0.1, 1e-300, 12345.678, 0.0;
    const ExpressionMatrix m({"a", "b"}, {"x", "y"}, v);
    std::stringstream buf;
    write_expression_matrix(buf, m);
    const auto back = parse_expression_matrix(buf);
    EXPECT_EQ(back.values(), v);
    EXPECT_EQ(back.gene_ids(), m.gene_ids());
}

TEST(StageLabels, Mapping) {
    EXPECT_EQ(map_stage_label("t2a"), Stage::Early);
    EXPECT_EQ(map_stage_label("T1c"), Stage::Early);
    EXPECT_EQ(map_stage_label(" t2c "), Stage::Early);
    EXPECT_EQ(map_stage_label("T4"), Stage::Late);
    EXPECT_EQ(map_stage_label("t3b"), Stage::Late);
    EXPECT_EQ(code_of([] { map_stage_label("t5"); }), Errc::UnknownStage);
    EXPECT_EQ(code_of([] { map_stage_label(""); }), Errc::UnknownStage);
}

TEST(StageLabels, TableWithHeaderAndAlignment) {
    std::istringstream in("sample\tstage\ns2\tT3a\ns1\tt2b\n");
    const auto labels = parse_label_table(in);
    ASSERT_EQ(labels.size(), 2u);
    Matrix v(2, 1);
    v << 1, 2;
    const auto ds = align_labels(ExpressionMatrix({"s1", "s2"}, {"g"}, v), labels);
    EXPECT_EQ(ds.labels(), (std::vector<Stage>{Stage::Early, Stage::Late}));

    std::vector<LabelEntry> missing{{"s1", Stage::Early}};
    EXPECT_EQ(code_of([&] { align_labels(ExpressionMatrix({"s1", "s2"}, {"g"}, v), missing); }), Errc::MissingLabel);
    std::vector<LabelEntry> twice{{"s1", Stage::Early}, {"s2", Stage::Late}, {"s1", Stage::Late}};
    EXPECT_EQ(code_of([&] { align_labels(ExpressionMatrix({"s1", "s2"}, {"g"}, v), twice); }), Errc::DuplicateId);
}

TEST(Split, SizesAndDisjointness) {
    std::vector<Stage> y(10, Stage::Early);
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = Stage::Late;
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        for (bool strat : {false, true}) {
            const auto s = split_indices(y, 0.2, strat, seed);
            EXPECT_EQ(s.test.size(), 2u);
            EXPECT_EQ(s.train.size(), 8u);
            EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
            for (auto i : s.test) EXPECT_EQ(std::count(s.train.begin(), s.train.end(), i), 0);
        }
    }
}

TEST(Split, StratifiedProportionsOnCohortSizes) {
    std::vector<Stage> y(184, Stage::Early);
    y.insert(y.end(), 302, Stage::Late);
    const auto s = split_indices(y, 0.2, true, 7);
    std::vector<Stage> train;
    for (auto i : s.train) train.push_back(y[i]);
    const auto c = count_classes(train);
    EXPECT_LT(std::abs(static_cast<double>(c[0]) - 0.8 * 184), 1.0);
    EXPECT_LT(std::abs(static_cast<double>(c[1]) - 0.8 * 302), 1.0);
    EXPECT_EQ(c[0] + c[1], 389u);
}

TEST(Split, Deterministic) {
    std::vector<Stage> y(50, Stage::Late);
    for (std::size_t i = 0; i < 20; ++i) y[i] = Stage::Early;
    const auto a = split_indices(y, 0.3, true, 42);
    const auto b = split_indices(y, 0.3, true, 42);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    const auto c = split_indices(y, 0.3, true, 43);
    EXPECT_NE(a.test, c.test);
}

TEST(Samples, SubsetKeepsRowsAndRole) {
    Samples s;
    s.x = Matrix::Identity(3, 3);
    s.y = {Stage::Early, Stage::Late, Stage::Early};
    const auto sub = s.subset(std::vector<std::size_t>{2, 1}, Role::Test);
    EXPECT_EQ(sub.role, Role::Test);
    EXPECT_EQ(sub.y, (std::vector<Stage>{Stage::Early, Stage::Late}));
    EXPECT_EQ(sub.x(0, 2), 1.0);
}

TEST(Errors, ExitCodes) {
    EXPECT_EQ(exit_code(Errc::Schema), 1);
    EXPECT_EQ(exit_code(Errc::StageLegality), 1);
    EXPECT_EQ(exit_code(Errc::RaggedRow), 2);
    EXPECT_EQ(exit_code(Errc::EmptySelection), 2);
    EXPECT_EQ(exit_code(Errc::NumericalFailure), 3);
}
