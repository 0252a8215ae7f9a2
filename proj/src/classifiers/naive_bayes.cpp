#include "pcstage/classifiers/naive_bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"

namespace pcstage {

GaussianNaiveBayes GaussianNaiveBayes::fit(const NaiveBayesParams& params, const Matrix& x, std::span<const Stage> y) {
    if (!(params.var_smoothing >= 0.0)) throw Error(Errc::InvalidArgument, "var_smoothing must be >= 0");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "naive Bayes needs training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");

    const auto p = x.cols();
    const double n = static_cast<double>(x.rows());
    const RowVector total_mean = x.colwise().mean();
    const double max_var = ((x.rowwise() - total_mean).array().square().colwise().sum() / n).maxCoeff();

    GaussianNaiveBayes model;
    model.epsilon_ = params.var_smoothing * max_var;
    // All-constant input would leave zero variances; fall back to the raw smoothing value.
    if (model.epsilon_ == 0.0) model.epsilon_ = std::max(params.var_smoothing, std::numeric_limits<double>::min());
    model.means_ = Matrix::Zero(2, p);
    model.variances_ = Matrix::Zero(2, p);
    const auto counts = count_classes(y);
    for (std::size_t c = 0; c < 2; ++c) {
        model.priors_[c] = static_cast<double>(counts[c]) / n;
        if (counts[c] == 0) continue;
        RowVector sum = RowVector::Zero(p);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (index_of(y[static_cast<std::size_t>(i)]) == c) sum += x.row(i);
        }
        const RowVector mean = sum / static_cast<double>(counts[c]);
        RowVector ss = RowVector::Zero(p);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (index_of(y[static_cast<std::size_t>(i)]) == c) ss += (x.row(i) - mean).array().square().matrix();
        }
        model.means_.row(static_cast<Eigen::Index>(c)) = mean;
        model.variances_.row(static_cast<Eigen::Index>(c)) =
            (ss / static_cast<double>(counts[c])).array() + model.epsilon_;
    }
    return model;
}

std::array<double, 2> GaussianNaiveBayes::joint_log_likelihood(const Eigen::Ref<const RowVector>& row) const {
    std::array<double, 2> out{};
    for (Eigen::Index c = 0; c < 2; ++c) {
        if (priors_[static_cast<std::size_t>(c)] == 0.0) {
            out[static_cast<std::size_t>(c)] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const auto var = variances_.row(c).array();
        const double log_norm = -0.5 * (2.0 * std::numbers::pi * var).log().sum();
        const double quad = -0.5 * ((row.array() - means_.row(c).array()).square() / var).sum();
        out[static_cast<std::size_t>(c)] = std::log(priors_[static_cast<std::size_t>(c)]) + log_norm + quad;
    }
    return out;
}

Stage GaussianNaiveBayes::predict_row(const Eigen::Ref<const RowVector>& row) const {
    const auto jll = joint_log_likelihood(row);
    return jll[1] > jll[0] ? Stage::Late : Stage::Early;
}

double GaussianNaiveBayes::score_row(const Eigen::Ref<const RowVector>& row) const {
    const auto jll = joint_log_likelihood(row);
    if (jll[1] == -std::numeric_limits<double>::infinity()) return 0.0;
    if (jll[0] == -std::numeric_limits<double>::infinity()) return 1.0;
    return 1.0 / (1.0 + std::exp(jll[0] - jll[1]));
}

nlohmann::json GaussianNaiveBayes::to_json() const {
    return {{"priors", priors_},
            {"means", matrix_to_json(means_)},
            {"variances", matrix_to_json(variances_)},
            {"epsilon", epsilon_}};
}

GaussianNaiveBayes GaussianNaiveBayes::from_json(const nlohmann::json& j) {
    GaussianNaiveBayes m;
    m.priors_ = j.at("priors").get<std::array<double, 2>>();
    m.means_ = matrix_from_json(j.at("means"));
    m.variances_ = matrix_from_json(j.at("variances"));
    m.epsilon_ = j.at("epsilon").get<double>();
    return m;
}

} // namespace pcstage
