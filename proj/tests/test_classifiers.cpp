#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pcstage/classifiers/classifier.hpp"
#include "pcstage/error.hpp"

using namespace pcstage;

namespace {

struct Blobs {
    Matrix x;
    std::vector<Stage> y;
};

Blobs blobs(std::uint64_t seed, std::size_t n, double gap) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Blobs b;
    b.x.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Stage s = i % 2 ? Stage::Late : Stage::Early;
        const double c = s == Stage::Late ? gap : -gap;
        b.x(static_cast<Eigen::Index>(i), 0) = c + d(rng);
        b.x(static_cast<Eigen::Index>(i), 1) = c + d(rng);
        b.y.push_back(s);
    }
    return b;
}

double accuracy(const std::vector<Stage>& a, const std::vector<Stage>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

const std::vector<Stage> kXorY{Stage::Early, Stage::Early, Stage::Late, Stage::Late};

Matrix xor_x() {
    Matrix x(4, 2);
    x << 1, 1, -1, -1, 1, -1, -1, 1;
    return x;
}

} // namespace

TEST(Tree, Impurities) {
    EXPECT_EQ(gini_impurity(5, 0), 0.0);
    EXPECT_EQ(entropy_impurity(0, 7), 0.0);
    EXPECT_DOUBLE_EQ(gini_impurity(2, 2), 0.5);
    EXPECT_DOUBLE_EQ(entropy_impurity(3, 3), 1.0);
}

TEST(Tree, SeparableOneDimensional) {
    Matrix x(6, 1);
    x << -3, -2, -0.5, 0, 1, 4;
    const std::vector<Stage> y{Stage::Early, Stage::Early, Stage::Early, Stage::Late, Stage::Late, Stage::Late};
    const auto tree = DecisionTree::fit(TreeParams{}, x, y, 0);
    ASSERT_EQ(tree.nodes().size(), 3u);
    EXPECT_EQ(tree.nodes()[0].threshold, -0.5);
    for (Eigen::Index i = 0; i < 6; ++i) EXPECT_EQ(tree.predict_row(x.row(i)), y[static_cast<std::size_t>(i)]);
}

TEST(Tree, DepthZeroIsMajorityLeaf) {
    const auto b = blobs(1, 21, 1.0);
    TreeParams p;
    p.max_depth = 0;
    const auto tree = DecisionTree::fit(p, b.x, b.y, 0);
    ASSERT_EQ(tree.nodes().size(), 1u);
    EXPECT_EQ(tree.nodes()[0].label, Stage::Early); // 11 Early, 10 Late
}

TEST(Tree, MonotoneTransformInvariance) {
    const auto b = blobs(2, 60, 0.5);
    const Matrix shifted = (b.x.array() * 3.0 + 7.0).matrix();
    const auto t1 = DecisionTree::fit(TreeParams{}, b.x, b.y, 0);
    const auto t2 = DecisionTree::fit(TreeParams{}, shifted, b.y, 0);
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) EXPECT_EQ(t1.predict_row(b.x.row(i)), t2.predict_row(shifted.row(i)));
}

TEST(Forest, SingleTreeWithoutBaggingEqualsTree) {
    const auto b = blobs(3, 80, 0.4);
    ForestParams fp;
    fp.n_estimators = 1;
    fp.bootstrap = false;
    fp.max_features = {MaxFeatures::Mode::All, 0};
    const auto forest = RandomForest::fit(fp, b.x, b.y, 9);
    const auto tree = DecisionTree::fit(TreeParams{}, b.x, b.y, 9);
    const auto probe = blobs(4, 200, 0.4);
    for (Eigen::Index i = 0; i < probe.x.rows(); ++i) {
        EXPECT_EQ(forest.predict_row(probe.x.row(i)), tree.predict_row(probe.x.row(i)));
    }
}

TEST(Forest, HeldOutBlobs) {
    const auto train = blobs(5, 200, 2.0);
    const auto test = blobs(6, 200, 2.0);
    ForestParams fp;
    fp.n_estimators = 50;
    const auto model = TrainedModel::fit({ClassifierKind::RF, fp}, train.x, train.y, 1);
    EXPECT_GE(accuracy(model.predict(test.x), test.y), 0.95);
}

TEST(Forest, PrefixEqualsSmallerFit) {
    const auto b = blobs(7, 60, 0.5);
    ForestParams fp;
    fp.n_estimators = 12;
    const auto big = RandomForest::fit(fp, b.x, b.y, 21);
    fp.n_estimators = 5;
    const auto small = RandomForest::fit(fp, b.x, b.y, 21);
    EXPECT_EQ(big.prefix(5).to_json(), small.to_json());
}

TEST(Gbt, PrefixEqualsSmallerFit) {
    const auto b = blobs(8, 60, 0.5);
    GbtParams gp;
    gp.n_estimators = 20;
    const auto big = GradientBoostedTrees::fit(gp, b.x, b.y);
    gp.n_estimators = 7;
    const auto small = GradientBoostedTrees::fit(gp, b.x, b.y);
    EXPECT_EQ(big.prefix(7).to_json(), small.to_json());
}

TEST(Gbt, ZeroLearningRatePredictsBaseRate) {
    auto b = blobs(9, 30, 1.0);
    b.y[0] = Stage::Late; // 16 Late, 14 Early
    GbtParams gp;
    gp.learning_rate = 0.0;
    gp.n_estimators = 10;
    const auto model = GradientBoostedTrees::fit(gp, b.x, b.y);
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
        EXPECT_EQ(model.predict_row(b.x.row(i)), Stage::Late);
        EXPECT_NEAR(model.score_row(b.x.row(i)), 16.0 / 30.0, 1e-12);
    }
}

TEST(Gbt, LossNeverIncreases) {
    const auto b = blobs(10, 100, 0.3);
    const auto model = GradientBoostedTrees::fit(GbtParams{}, b.x, b.y);
    const auto& h = model.loss_history();
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] + 1e-12);
}

TEST(Knn, OneNeighbourMemorises) {
    const auto b = blobs(11, 50, 0.2);
    const auto knn = KNearestNeighbors::fit({1, KnnWeights::Uniform, DistanceMetric::Euclidean}, b.x, b.y);
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) EXPECT_EQ(knn.predict_row(b.x.row(i)), b.y[static_cast<std::size_t>(i)]);
}

TEST(Knn, Distances) {
    RowVector a(2), c(2);
    a << 0, 0;
    c << 3, 4;
    EXPECT_EQ(distance(a, c, DistanceMetric::Euclidean), 5.0);
    EXPECT_EQ(distance(a, c, DistanceMetric::Manhattan), 7.0);
}

TEST(NaiveBayes, SymmetricBoundary) {
    Matrix x(4, 1);
    x << -1.5, -0.5, 0.5, 1.5; // class means -1 and 1, equal spread
    const std::vector<Stage> y{Stage::Early, Stage::Early, Stage::Late, Stage::Late};
    const auto nb = GaussianNaiveBayes::fit({}, x, y);
    RowVector zero(1);
    zero << 0.0;
    EXPECT_NEAR(nb.score_row(zero), 0.5, 1e-15);
    RowVector right(1);
    right << 0.1;
    EXPECT_EQ(nb.predict_row(right), Stage::Late);
}

TEST(NaiveBayes, HandPosterior) {
    Matrix x(4, 1);
    x << 0, 2, 3, 5;
    const std::vector<Stage> y{Stage::Early, Stage::Early, Stage::Late, Stage::Late};
    const auto nb = GaussianNaiveBayes::fit({}, x, y);
    // Class variances are 1 (population); the largest feature variance is 3.25.
    const double v = 1.0 + 1e-9 * 3.25;
    EXPECT_NEAR(nb.epsilon(), 1e-9 * 3.25, 1e-24);
    RowVector q(1);
    q << 2.0;
    // log N(2|1,v) - log N(2|4,v) = (4 - 1) / (2v)
    const double want = 1.0 / (1.0 + std::exp(3.0 / (2.0 * v)));
    EXPECT_NEAR(nb.score_row(q), want, 1e-12);
}

TEST(Logistic, SeparableDataFitsPerfectly) {
    const auto b = blobs(12, 60, 4.0);
    LogisticParams p;
    p.max_iter = 1000;
    const auto model = LogisticRegression::fit(p, b.x, b.y);
    std::vector<Stage> pred;
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) pred.push_back(model.predict_row(b.x.row(i)));
    EXPECT_EQ(accuracy(pred, b.y), 1.0);
}

TEST(Svm, XorNeedsNonlinearKernel) {
    const Matrix x = xor_x();
    SvmParams rbf;
    const auto m1 = TrainedModel::fit({ClassifierKind::SVM, rbf}, x, kXorY, 0);
    EXPECT_EQ(accuracy(m1.predict(x), kXorY), 1.0);
    SvmParams lin;
    lin.kernel = Kernel::Linear;
    const auto m2 = TrainedModel::fit({ClassifierKind::SVM, lin}, x, kXorY, 0);
    EXPECT_LE(accuracy(m2.predict(x), kXorY), 0.75);
}

TEST(Svm, DualFeasibility) {
    const auto b = blobs(13, 30, 0.3);
    SvmParams p;
    p.C = 0.5;
    const auto svm = SupportVectorMachine::fit(p, b.x, b.y);
    double eq = 0.0;
    for (Eigen::Index i = 0; i < svm.alphas().size(); ++i) {
        EXPECT_GE(svm.alphas()(i), 0.0);
        EXPECT_LE(svm.alphas()(i), 0.5);
        eq += svm.alphas()(i) * (b.y[static_cast<std::size_t>(i)] == Stage::Late ? 1.0 : -1.0);
    }
    EXPECT_LT(std::abs(eq), 1e-6);
}

TEST(Mlp, ZeroOutputLayerGivesHalf) {
    const auto b = blobs(14, 10, 1.0);
    const std::vector<std::size_t> hidden{5, 3};
    const auto net = MultilayerPerceptron::initialise(2, hidden, 3, true);
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) EXPECT_EQ(net.score_row(b.x.row(i)), 0.5);
}

TEST(Mlp, ParameterCount) {
    const std::vector<std::size_t> widths{256, 128, 64, 32, 1};
    EXPECT_EQ(mlp_parameter_count(60659, widths), 15572225u);
    const std::vector<std::size_t> tiny{3, 1};
    EXPECT_EQ(mlp_parameter_count(2, tiny), 2u * 3 + 3 + 3 + 1);
}

TEST(Mlp, TrainingLowersLoss) {
    const auto b = blobs(15, 80, 1.5);
    MlpParams p;
    p.hidden = {8, 4};
    p.epochs = 40;
    p.learning_rate = 0.05;
    const auto net = MultilayerPerceptron::fit(p, b.x, b.y, 2);
    ASSERT_EQ(net.loss_history().size(), 40u);
    EXPECT_LT(net.loss_history().back(), net.loss_history().front());
}

TEST(Specs, ReferenceConfigurationsAccepted) {
    EXPECT_NO_THROW(make_spec(ClassifierKind::RF, {{"n_estimators", 50}, {"max_depth", 20}, {"min_samples_split", 10}}));
    EXPECT_NO_THROW(make_spec(ClassifierKind::KNN, {{"n_neighbors", 11}, {"weights", "uniform"}, {"metric", "manhattan"}}));
    EXPECT_NO_THROW(make_spec(ClassifierKind::NB, {{"var_smoothing", 1e-9}}));
    EXPECT_NO_THROW(make_spec(ClassifierKind::LR, {{"C", 0.001}, {"penalty", "l2"}}));
    EXPECT_NO_THROW(make_spec(ClassifierKind::SVM, {{"kernel", "rbf"}, {"C", 1}, {"gamma", "scale"}}));
    EXPECT_NO_THROW(
        make_spec(ClassifierKind::GBT, {{"n_estimators", 100}, {"max_depth", 5}, {"learning_rate", 0.1}}));
    EXPECT_THROW(make_spec(ClassifierKind::RF, {{"n_trees", 5}}), Error);
    EXPECT_THROW(make_spec(ClassifierKind::KNN, {{"n_neighbors", 0}}), Error);
}

TEST(TrainedModel, JsonRoundTripPredictsIdentically) {
    const auto b = blobs(16, 40, 0.8);
    for (auto kind : {ClassifierKind::DT, ClassifierKind::RF, ClassifierKind::KNN, ClassifierKind::NB, ClassifierKind::LR,
                      ClassifierKind::SVM, ClassifierKind::GBT}) {
        const auto model = TrainedModel::fit(default_spec(kind), b.x, b.y, 5);
        const auto back = TrainedModel::from_json(nlohmann::json::parse(model.to_json().dump()));
        EXPECT_EQ(back.predict(b.x), model.predict(b.x)) << to_string(kind);
        EXPECT_EQ(back.predict_score(b.x), model.predict_score(b.x)) << to_string(kind);
    }
}

TEST(TrainedModel, RefusesTestRoleAndBadTruncation) {
    Samples s;
    const auto b = blobs(17, 10, 1.0);
    s.x = b.x;
    s.y = b.y;
    s.role = Role::Test;
    EXPECT_THROW(TrainedModel::fit(default_spec(ClassifierKind::DT), s, 0), Error);
    const auto knn = TrainedModel::fit(default_spec(ClassifierKind::KNN), b.x, b.y, 0);
    EXPECT_THROW(knn.truncated(1), Error);
}
