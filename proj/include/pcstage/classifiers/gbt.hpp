#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"

namespace pcstage {

struct RegressionNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1; // x[feature] <= threshold
    int right = -1;
    double value = 0.0;
};

/// Gradient-boosted regression trees on the logistic loss. Each round fits a
/// tree to first/second derivatives of the loss with leaf values
/// -G / (H + lambda) and split gain
///   0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - min_split_gain.
/// The initial margin is the log-odds of the training prevalence.
///
/// A round whose shrunken Newton step would raise the training loss is
/// damped by halving until it does not, so the recorded loss history never
/// increases.
class GradientBoostedTrees {
public:
    static GradientBoostedTrees fit(const GbtParams& params, const Matrix& x, std::span<const Stage> y);

    double margin_row(const Eigen::Ref<const RowVector>& row) const;
    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    /// P(Late).
    double score_row(const Eigen::Ref<const RowVector>& row) const;

    double base_score() const noexcept { return base_score_; }
    /// Mean training log-loss before the first round and after each round.
    const std::vector<double>& loss_history() const noexcept { return loss_history_; }
    std::size_t rounds() const noexcept { return trees_.size(); }
    /// The model after the first n rounds; identical to fitting with
    /// n_estimators = n, since no round looks ahead.
    GradientBoostedTrees prefix(std::size_t n) const;

    nlohmann::json to_json() const;
    static GradientBoostedTrees from_json(const nlohmann::json& j);

private:
    double base_score_ = 0.0;
    std::vector<std::vector<RegressionNode>> trees_;
    std::vector<double> step_; // effective shrinkage per round
    std::vector<double> loss_history_;
};

} // namespace pcstage
