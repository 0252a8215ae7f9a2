#include "pcstage/classifiers/logistic.hpp"

#include <cmath>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"

namespace pcstage {
namespace {

struct PenaltyWeights {
    double l1 = 0.0; // coefficient on |w|_1
    double l2 = 0.0; // coefficient on 0.5 |w|^2
};

PenaltyWeights penalty_weights(const LogisticParams& params, std::size_t n) {
    const double lambda = 1.0 / (params.C * static_cast<double>(n));
    switch (params.penalty) {
    case Penalty::L1: return {lambda, 0.0};
    case Penalty::L2: return {0.0, lambda};
    case Penalty::ElasticNet: return {lambda * params.l1_ratio, lambda * (1.0 - params.l1_ratio)};
    case Penalty::None: return {};
    }
    return {};
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

Vector signed_targets(std::span<const Stage> y) {
    Vector t(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) t(static_cast<Eigen::Index>(i)) = y[i] == Stage::Late ? 1.0 : -1.0;
    return t;
}

struct Smooth {
    double value;
    Vector grad_w;
    double grad_b;
};

// Loss plus the differentiable (l2) part of the penalty.
Smooth smooth_part(const Matrix& x, const Vector& t, const Vector& w, double b, double l2) {
    const double n = static_cast<double>(x.rows());
    const Vector margin = ((x * w).array() + b).matrix();
    double loss = 0.0;
    Vector coef(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double ym = t(i) * margin(i);
        loss += softplus(-ym);
        // d/dm softplus(-y m) = -y * sigmoid(-y m)
        coef(i) = -t(i) / (1.0 + std::exp(ym));
    }
    Smooth s;
    s.value = loss / n + 0.5 * l2 * w.squaredNorm();
    s.grad_w = x.transpose() * coef / n + l2 * w;
    s.grad_b = coef.sum() / n;
    return s;
}

double smooth_value(const Matrix& x, const Vector& t, const Vector& w, double b, double l2) {
    const Vector margin = ((x * w).array() + b).matrix();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) loss += softplus(-t(i) * margin(i));
    return loss / static_cast<double>(x.rows()) + 0.5 * l2 * w.squaredNorm();
}

Vector soft_threshold(const Vector& v, double k) {
    return v.unaryExpr([k](double a) { return a > k ? a - k : (a < -k ? a + k : 0.0); });
}

} // namespace

LogisticObjective logistic_objective(const Matrix& x, std::span<const Stage> y, const Vector& w, double b,
                                     const LogisticParams& params) {
    const auto pw = penalty_weights(params, y.size());
    auto s = smooth_part(x, signed_targets(y), w, b, pw.l2);
    LogisticObjective out;
    out.value = s.value + pw.l1 * w.cwiseAbs().sum();
    out.grad_w = s.grad_w + pw.l1 * w.unaryExpr([](double a) { return static_cast<double>((a > 0.0) - (a < 0.0)); });
    out.grad_b = s.grad_b;
    return out;
}

LogisticRegression LogisticRegression::fit(const LogisticParams& params, const Matrix& x, std::span<const Stage> y) {
    if (!(params.C > 0.0)) throw Error(Errc::InvalidArgument, "C must be positive");
    if (params.max_iter < 1) throw Error(Errc::InvalidArgument, "max_iter must be positive");
    if (!(params.l1_ratio >= 0.0 && params.l1_ratio <= 1.0)) throw Error(Errc::InvalidArgument, "l1_ratio must lie in [0, 1]");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "logistic regression needs training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");

    const auto pw = penalty_weights(params, y.size());
    const Vector t = signed_targets(y);
    const auto p = x.cols();

    Vector w = Vector::Zero(p);
    double b = 0.0;
    Vector zw = w;
    double zb = b;
    double momentum = 1.0;
    double lipschitz = 1.0;

    LogisticRegression model;
    for (int iter = 1; iter <= params.max_iter; ++iter) {
        model.iterations_ = iter;
        const auto s = smooth_part(x, t, zw, zb, pw.l2);
        Vector next_w;
        double next_b = 0.0;
        while (true) {
            next_w = soft_threshold(zw - s.grad_w / lipschitz, pw.l1 / lipschitz);
            next_b = zb - s.grad_b / lipschitz;
            const Vector dw = next_w - zw;
            const double db = next_b - zb;
            const double model_bound = s.value + s.grad_w.dot(dw) + s.grad_b * db +
                                       0.5 * lipschitz * (dw.squaredNorm() + db * db);
            if (smooth_value(x, t, next_w, next_b, pw.l2) <= model_bound + 1e-15 * std::abs(s.value)) break;
            lipschitz *= 2.0;
            if (!std::isfinite(lipschitz)) throw Error(Errc::NumericalFailure, "logistic line search diverged");
        }

        // Gradient mapping at the extrapolated point; zero exactly at a minimiser.
        const double mapping_norm =
            lipschitz * std::sqrt((zw - next_w).squaredNorm() + (zb - next_b) * (zb - next_b));

        // Adaptive restart when the momentum direction opposes progress.
        const double progress = (zw - next_w).dot(next_w - w) + (zb - next_b) * (next_b - b);
        if (progress > 0.0) momentum = 1.0;
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const double beta = (momentum - 1.0) / next_momentum;
        zw = next_w + beta * (next_w - w);
        zb = next_b + beta * (next_b - b);
        w = std::move(next_w);
        b = next_b;
        momentum = next_momentum;

        if (mapping_norm < params.tol) {
            model.converged_ = true;
            break;
        }
    }
    if (!w.allFinite() || !std::isfinite(b)) throw Error(Errc::NumericalFailure, "logistic regression diverged");
    model.weights_ = std::move(w);
    model.bias_ = b;
    return model;
}

Stage LogisticRegression::predict_row(const Eigen::Ref<const RowVector>& row) const {
    return decision_row(row) > 0.0 ? Stage::Late : Stage::Early;
}

double LogisticRegression::score_row(const Eigen::Ref<const RowVector>& row) const {
    return 1.0 / (1.0 + std::exp(-decision_row(row)));
}

nlohmann::json LogisticRegression::to_json() const {
    return {{"weights", vector_to_json(weights_)},
            {"bias", bias_},
            {"converged", converged_},
            {"iterations", iterations_}};
}

LogisticRegression LogisticRegression::from_json(const nlohmann::json& j) {
    LogisticRegression m;
    m.weights_ = vector_from_json(j.at("weights"));
    m.bias_ = j.at("bias").get<double>();
    m.converged_ = j.at("converged").get<bool>();
    m.iterations_ = j.at("iterations").get<int>();
    return m;
}

} // namespace pcstage
