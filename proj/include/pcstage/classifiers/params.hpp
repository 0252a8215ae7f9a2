#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace pcstage {

enum class ClassifierKind { DT, RF, KNN, NB, LR, SVM, GBT, MLP };

ClassifierKind parse_classifier_kind(std::string_view name);
std::string_view to_string(ClassifierKind kind) noexcept;

enum class Criterion { Gini, Entropy };

/// Number of features examined per split. Counts above the feature total
/// clamp to all features.
struct MaxFeatures {
    enum class Mode { All, Sqrt, Count };
    Mode mode = Mode::All;
    std::size_t count = 0;

    std::size_t resolve(std::size_t n_features) const noexcept;
};

struct TreeParams {
    Criterion criterion = Criterion::Gini;
    std::optional<std::size_t> max_depth; // nullopt = grow until pure
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    MaxFeatures max_features{};
};

struct ForestParams {
    std::size_t n_estimators = 100;
    Criterion criterion = Criterion::Gini;
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    MaxFeatures max_features{MaxFeatures::Mode::Sqrt, 0};
    bool bootstrap = true;
};

enum class KnnWeights { Uniform, Distance };
enum class DistanceMetric { Euclidean, Manhattan };

struct KnnParams {
    std::size_t n_neighbors = 5;
    KnnWeights weights = KnnWeights::Uniform;
    DistanceMetric metric = DistanceMetric::Euclidean;
};

struct NaiveBayesParams {
    double var_smoothing = 1e-9;
};

enum class Penalty { L1, L2, ElasticNet, None };
// Accepted for grid compatibility; both map onto the same proximal-gradient solver.
enum class LogisticSolver { Liblinear, Saga };

struct LogisticParams {
    double C = 1.0;
    Penalty penalty = Penalty::L2;
    LogisticSolver solver = LogisticSolver::Saga;
    int max_iter = 100;
    double tol = 1e-4;
    double l1_ratio = 0.5;
};

enum class Kernel { Linear, Poly, Rbf, Sigmoid };

struct Gamma {
    enum class Mode { Scale, Auto, Value };
    Mode mode = Mode::Scale;
    double value = 0.0;
};

struct SvmParams {
    double C = 1.0;
    Kernel kernel = Kernel::Rbf;
    Gamma gamma{};
    int degree = 3;
    double coef0 = 0.0;
    double tol = 1e-3; // KKT violation tolerance
    std::size_t max_iter = 10'000'000;
};

struct GbtParams {
    std::size_t n_estimators = 100;
    std::size_t max_depth = 6;
    double learning_rate = 0.3;
    double reg_lambda = 1.0;
    double min_child_weight = 1.0;
    double min_split_gain = 0.0;
};

struct MlpParams {
    std::vector<std::size_t> hidden{256, 128, 64, 32};
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double momentum = 0.9;
};

using Hyperparameters = std::variant<TreeParams, ForestParams, KnnParams, NaiveBayesParams, LogisticParams, SvmParams,
                                     GbtParams, MlpParams>;

} // namespace pcstage
