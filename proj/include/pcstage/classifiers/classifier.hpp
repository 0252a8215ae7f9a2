#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/forest.hpp"
#include "pcstage/classifiers/gbt.hpp"
#include "pcstage/classifiers/knn.hpp"
#include "pcstage/classifiers/logistic.hpp"
#include "pcstage/classifiers/mlp.hpp"
#include "pcstage/classifiers/naive_bayes.hpp"
#include "pcstage/classifiers/params.hpp"
#include "pcstage/classifiers/svm.hpp"
#include "pcstage/classifiers/tree.hpp"

namespace pcstage {

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::DT;
    Hyperparameters params = TreeParams{};
};

ClassifierSpec default_spec(ClassifierKind kind);

/// Builds a spec from defaults overridden by `params` (a JSON object using
/// the grid vocabulary: n_estimators, max_depth, criterion, ...). Unknown
/// keys and out-of-range values raise InvalidArgument.
ClassifierSpec make_spec(ClassifierKind kind, const nlohmann::json& params);

/// Every hyperparameter of the spec, in make_spec vocabulary.
nlohmann::json params_to_json(const ClassifierSpec& spec);
/// {"kind": ..., "params": {...}}
nlohmann::json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j);

/// A fitted classifier of any kind. Immutable; predict is safe to call
/// concurrently.
class TrainedModel {
public:
    using State = std::variant<DecisionTree, RandomForest, KNearestNeighbors, GaussianNaiveBayes, LogisticRegression,
                               SupportVectorMachine, GradientBoostedTrees, MultilayerPerceptron>;

    /// Refuses samples whose role is Test.
    static TrainedModel fit(const ClassifierSpec& spec, const Samples& train, std::uint64_t seed);
    static TrainedModel fit(const ClassifierSpec& spec, const Matrix& x, std::span<const Stage> y, std::uint64_t seed);

    std::vector<Stage> predict(const Matrix& x) const;
    /// Larger means more Late: P(Late) for NB/LR/GBT/MLP, vote share for
    /// DT/RF/KNN, decision value for SVM.
    Vector predict_score(const Matrix& x) const;

    const ClassifierSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t n_features() const noexcept { return n_features_; }
    /// RF and GBT: the model a fit with n_estimators = n (n no larger than the
    /// current count) and the same seed would produce. Throws for other kinds.
    TrainedModel truncated(std::size_t n_estimators) const;

    /// False only for iterative solvers that stopped at their iteration cap.
    bool converged() const noexcept;
    const State& state() const noexcept { return state_; }

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);

private:
    TrainedModel(ClassifierSpec spec, std::uint64_t seed, std::size_t n_features, State state)
        : spec_(std::move(spec)), seed_(seed), n_features_(n_features), state_(std::move(state)) {}

    ClassifierSpec spec_;
    std::uint64_t seed_ = 0;
    std::size_t n_features_ = 0;
    State state_;
};

} // namespace pcstage
