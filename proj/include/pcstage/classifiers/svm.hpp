#pragma once

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"

namespace pcstage {

struct KernelFunction {
    Kernel kind = Kernel::Rbf;
    double gamma = 1.0;
    int degree = 3;
    double coef0 = 0.0;

    double operator()(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) const;
};

/// gamma = 1 / (p * Var(X)) for Scale (Var over all entries), 1 / p for Auto.
double resolve_gamma(const Gamma& gamma, const Matrix& x);

/// C-SVM trained by SMO on the dual
///   max sum(a) - 0.5 sum_ij a_i a_j y_i y_j K(x_i, x_j)
///   s.t. 0 <= a_i <= C, sum_i a_i y_i = 0,
/// with second-order working-set selection. Late is the +1 class.
class SupportVectorMachine {
public:
    static SupportVectorMachine fit(const SvmParams& params, const Matrix& x, std::span<const Stage> y);

    double decision_row(const Eigen::Ref<const RowVector>& row) const;
    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    double score_row(const Eigen::Ref<const RowVector>& row) const { return decision_row(row); }

    /// Dual variables for every training sample (empty after from_json).
    const Vector& alphas() const noexcept { return alphas_; }
    double bias() const noexcept { return bias_; }
    double dual_objective() const noexcept { return dual_objective_; }
    bool converged() const noexcept { return converged_; }
    std::size_t iterations() const noexcept { return iterations_; }
    const KernelFunction& kernel() const noexcept { return kernel_; }
    std::size_t support_vector_count() const noexcept { return static_cast<std::size_t>(support_.rows()); }

    nlohmann::json to_json() const;
    static SupportVectorMachine from_json(const nlohmann::json& j);

private:
    KernelFunction kernel_;
    Matrix support_;
    Vector coefficients_; // a_i y_i for each support vector
    double bias_ = 0.0;
    Vector alphas_;
    double dual_objective_ = 0.0;
    bool converged_ = false;
    std::size_t iterations_ = 0;
};

} // namespace pcstage
