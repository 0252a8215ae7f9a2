#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pcstage/data.hpp"

namespace pcstage {

// Univariate scoring functions. Only the ANOVA F test is provided.
enum class ScoreFunc { FClassif };

ScoreFunc parse_score_func(std::string_view name);
std::string_view to_string(ScoreFunc f) noexcept;

struct FeatureScore {
    std::size_t feature_index;
    double f_stat;
    double p_value;
    bool degenerate; // zero within-class variance
};

/// One-way ANOVA F per column with (k-1, n-k) degrees of freedom, k = number
/// of classes present. Constant columns score F = 0, p = 1; columns with zero
/// within-class but positive between-class variance score F = inf, p = 0.
std::vector<FeatureScore> anova_f_classif(const Matrix& x, std::span<const Stage> y);

struct SelectionMask {
    Indices kept; // strictly increasing
    double alpha = 0.05;
    std::size_t n_features = 0;

    bool empty() const noexcept { return kept.empty(); }
};

/// Keeps features with p < alpha, in feature order.
SelectionMask select_fpr(std::span<const FeatureScore> scores, double alpha = 0.05);

/// Column subset. Throws EmptySelection for an empty mask and
/// IndexOutOfRange when the mask does not fit the matrix.
ExpressionMatrix project(const ExpressionMatrix& matrix, const SelectionMask& mask);
Matrix project(const Matrix& x, const SelectionMask& mask);

/// Header `feature_index,gene_id,f_stat,p_value,kept`.
void write_scores_csv(std::ostream& out, std::span<const FeatureScore> scores, std::span<const std::string> gene_ids,
                      const SelectionMask& mask);

} // namespace pcstage
