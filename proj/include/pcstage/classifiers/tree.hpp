#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"
#include "pcstage/random.hpp"

namespace pcstage {

double gini_impurity(std::size_t early, std::size_t late) noexcept;
double entropy_impurity(std::size_t early, std::size_t late) noexcept;

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  // x[feature] <= threshold
    int right = -1; // x[feature] >  threshold
    Stage label = Stage::Early;
    double late_fraction = 0.0;
    std::size_t samples = 0;
};

/// Dense per-feature ranks of a training matrix (equal values share a rank),
/// shared by every tree grown on that matrix.
class FeatureRanks {
public:
    explicit FeatureRanks(const Matrix& x);

    std::uint32_t rank(std::size_t row, std::size_t feature) const noexcept { return ranks_[feature * rows_ + row]; }
    double value(std::size_t feature, std::uint32_t rank) const noexcept { return values_[offsets_[feature] + rank]; }
    std::size_t levels(std::size_t feature) const noexcept { return offsets_[feature + 1] - offsets_[feature]; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t features() const noexcept { return offsets_.size() - 1; }

private:
    std::size_t rows_ = 0;
    std::vector<std::uint32_t> ranks_; // feature-major
    std::vector<double> values_;       // sorted distinct values, feature after feature
    std::vector<std::size_t> offsets_;
};

/// CART classification tree. Splits maximise the (count-weighted) impurity
/// decrease; thresholds sit on observed training values, so any strictly
/// increasing per-feature transform leaves every prediction unchanged. Ties
/// resolve to the lowest feature index, then the lowest threshold.
class DecisionTree {
public:
    /// `rows` may repeat (bootstrap draws). `rng` is consulted only when
    /// max_features selects fewer than all features.
    static DecisionTree fit(const TreeParams& params, const Matrix& x, std::span<const Stage> y,
                            std::span<const std::size_t> rows, Rng& rng);
    static DecisionTree fit(const TreeParams& params, const Matrix& x, std::span<const Stage> y, std::uint64_t seed);
    static DecisionTree fit(const TreeParams& params, const FeatureRanks& ranks, std::span<const Stage> y,
                            std::span<const std::size_t> rows, Rng& rng);

    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    double score_row(const Eigen::Ref<const RowVector>& row) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const noexcept;

    nlohmann::json to_json() const;
    static DecisionTree from_json(const nlohmann::json& j);

private:
    const TreeNode& leaf_for(const Eigen::Ref<const RowVector>& row) const;

    std::vector<TreeNode> nodes_;
};

} // namespace pcstage
