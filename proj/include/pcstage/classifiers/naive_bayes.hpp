#pragma once

#include <array>

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"

namespace pcstage {

/// Gaussian naive Bayes. Every class variance is inflated by
/// var_smoothing * (largest per-feature variance of the training data).
class GaussianNaiveBayes {
public:
    static GaussianNaiveBayes fit(const NaiveBayesParams& params, const Matrix& x, std::span<const Stage> y);

    /// log P(class) + sum_j log N(x_j | mean, var); -inf for an absent class.
    std::array<double, 2> joint_log_likelihood(const Eigen::Ref<const RowVector>& row) const;
    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    /// Posterior P(Late | x).
    double score_row(const Eigen::Ref<const RowVector>& row) const;

    const std::array<double, 2>& priors() const noexcept { return priors_; }
    const Matrix& means() const noexcept { return means_; }         // 2 x p
    const Matrix& variances() const noexcept { return variances_; } // 2 x p, smoothed
    double epsilon() const noexcept { return epsilon_; }

    nlohmann::json to_json() const;
    static GaussianNaiveBayes from_json(const nlohmann::json& j);

private:
    std::array<double, 2> priors_{0.0, 0.0};
    Matrix means_;
    Matrix variances_;
    double epsilon_ = 0.0;
};

} // namespace pcstage
