#pragma once

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/tree.hpp"

namespace pcstage {

/// Bagged CART ensemble with per-split feature subsampling. Majority vote;
/// a tied vote predicts Early.
class RandomForest {
public:
    static RandomForest fit(const ForestParams& params, const Matrix& x, std::span<const Stage> y, std::uint64_t seed);

    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    /// Fraction of trees voting Late.
    double score_row(const Eigen::Ref<const RowVector>& row) const;

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    /// The first n trees. Tree t is seeded from (seed, t) alone, so this is
    /// the forest a fit with n_estimators = n would have grown.
    RandomForest prefix(std::size_t n) const;

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& j);

private:
    std::vector<DecisionTree> trees_;
};

} // namespace pcstage
