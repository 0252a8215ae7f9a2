#pragma once

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"

namespace pcstage {

struct LogisticObjective {
    double value;
    Vector grad_w; // includes sign(w) as the l1 subgradient
    double grad_b;
};

/// (1/n) sum log(1 + exp(-y (w.x + b))) + R(w) / (C n), y = +1 for Late.
/// R is 0.5|w|^2 (l2), |w|_1 (l1), or r|w|_1 + 0.5(1 - r)|w|^2 (elasticnet).
LogisticObjective logistic_objective(const Matrix& x, std::span<const Stage> y, const Vector& w, double b,
                                     const LogisticParams& params);

/// Binary logistic regression fitted by accelerated proximal gradient with
/// backtracking; the l1 part of the penalty is handled by soft-thresholding.
/// Stops once the gradient-mapping norm falls below tol or after max_iter.
class LogisticRegression {
public:
    static LogisticRegression fit(const LogisticParams& params, const Matrix& x, std::span<const Stage> y);

    double decision_row(const Eigen::Ref<const RowVector>& row) const { return row.dot(weights_) + bias_; }
    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    double score_row(const Eigen::Ref<const RowVector>& row) const;

    const Vector& weights() const noexcept { return weights_; }
    double bias() const noexcept { return bias_; }
    bool converged() const noexcept { return converged_; }
    int iterations() const noexcept { return iterations_; }

    nlohmann::json to_json() const;
    static LogisticRegression from_json(const nlohmann::json& j);

private:
    Vector weights_;
    double bias_ = 0.0;
    bool converged_ = false;
    int iterations_ = 0;
};

} // namespace pcstage
