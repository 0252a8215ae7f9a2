#include "pcstage/classifiers/svm.hpp"

#include <cmath>
#include <limits>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"

namespace pcstage {

double KernelFunction::operator()(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) const {
    switch (kind) {
    case Kernel::Linear: return a.dot(b);
    case Kernel::Poly: return std::pow(gamma * a.dot(b) + coef0, degree);
    case Kernel::Rbf: return std::exp(-gamma * (a - b).squaredNorm());
    case Kernel::Sigmoid: return std::tanh(gamma * a.dot(b) + coef0);
    }
    return 0.0;
}

double resolve_gamma(const Gamma& gamma, const Matrix& x) {
    const double p = static_cast<double>(x.cols());
    switch (gamma.mode) {
    case Gamma::Mode::Value: return gamma.value;
    case Gamma::Mode::Auto: return 1.0 / p;
    case Gamma::Mode::Scale: {
        const double mean = x.mean();
        const double var = (x.array() - mean).square().mean();
        return var > 0.0 ? 1.0 / (p * var) : 1.0;
    }
    }
    return 1.0;
}

namespace {

constexpr double kTau = 1e-12;

// Pairwise SMO on min 0.5 a'Qa - e'a, Q_ij = y_i y_j K_ij.
struct SmoSolver {
    const Matrix& kernel; // K, not Q
    const Vector& y;      // +/-1
    double c;
    double eps;
    std::size_t max_iter;

    Vector alpha;
    Vector grad;
    double rho = 0.0;
    bool converged = false;
    std::size_t iterations = 0;

    bool upper(Eigen::Index i) const { return alpha(i) >= c; }
    bool lower(Eigen::Index i) const { return alpha(i) <= 0.0; }
    double q(Eigen::Index i, Eigen::Index j) const { return y(i) * y(j) * kernel(i, j); }

    bool select(Eigen::Index& out_i, Eigen::Index& out_j) const {
        const auto n = y.size();
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        Eigen::Index imax = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (y(t) > 0) {
                if (!upper(t) && -grad(t) >= gmax) { gmax = -grad(t); imax = t; }
            } else {
                if (!lower(t) && grad(t) >= gmax) { gmax = grad(t); imax = t; }
            }
        }
        if (imax < 0) return false;
        const Eigen::Index i = imax;
        Eigen::Index jmin = -1;
        double obj_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (y(j) > 0) {
                if (lower(j)) continue;
                const double grad_diff = gmax + grad(j);
                if (grad(j) >= gmax2) gmax2 = grad(j);
                if (grad_diff > 0) {
                    const double quad = kernel(i, i) + kernel(j, j) - 2.0 * y(i) * q(i, j);
                    const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
                    if (obj <= obj_min) { jmin = j; obj_min = obj; }
                }
            } else {
                if (upper(j)) continue;
                const double grad_diff = gmax - grad(j);
                if (-grad(j) >= gmax2) gmax2 = -grad(j);
                if (grad_diff > 0) {
                    const double quad = kernel(i, i) + kernel(j, j) + 2.0 * y(i) * q(i, j);
                    const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
                    if (obj <= obj_min) { jmin = j; obj_min = obj; }
                }
            }
        }
        if (gmax + gmax2 < eps || jmin < 0) return false;
        out_i = i;
        out_j = jmin;
        return true;
    }

    void update(Eigen::Index i, Eigen::Index j) {
        const double old_i = alpha(i);
        const double old_j = alpha(j);
        double& ai = alpha(i);
        double& aj = alpha(j);
        if (y(i) != y(j)) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) { aj = 0; ai = diff; }
            } else {
                if (ai < 0) { ai = 0; aj = -diff; }
            }
            if (diff > 0) {
                if (ai > c) { ai = c; aj = c - diff; }
            } else {
                if (aj > c) { aj = c; ai = c + diff; }
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) { ai = c; aj = sum - c; }
            } else {
                if (aj < 0) { aj = 0; ai = sum; }
            }
            if (sum > c) {
                if (aj > c) { aj = c; ai = sum - c; }
            } else {
                if (ai < 0) { ai = 0; aj = sum; }
            }
        }
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (Eigen::Index k = 0; k < y.size(); ++k) grad(k) += q(i, k) * di + q(j, k) * dj;
    }

    void solve() {
        const auto n = y.size();
        alpha = Vector::Zero(n);
        grad = Vector::Constant(n, -1.0);
        Eigen::Index i = 0;
        Eigen::Index j = 0;
        while (true) {
            if (!select(i, j)) {
                converged = true;
                break;
            }
            if (iterations >= max_iter) break;
            ++iterations;
            update(i, j);
        }
        compute_rho();
    }

    void compute_rho() {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t n_free = 0;
        for (Eigen::Index t = 0; t < y.size(); ++t) {
            const double yg = y(t) * grad(t);
            if (upper(t)) {
                if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else if (lower(t)) {
                if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
            } else {
                ++n_free;
                sum_free += yg;
            }
        }
        rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    }
};

} // namespace

SupportVectorMachine SupportVectorMachine::fit(const SvmParams& params, const Matrix& x, std::span<const Stage> y) {
    if (!(params.C > 0.0)) throw Error(Errc::InvalidArgument, "C must be positive");
    if (!(params.tol > 0.0)) throw Error(Errc::InvalidArgument, "SVM tolerance must be positive");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "SVM needs training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    const auto counts = count_classes(y);
    if (counts[0] == 0 || counts[1] == 0) throw Error(Errc::SingleClass, "SVM needs both classes");

    SupportVectorMachine model;
    model.kernel_ = {params.kernel, resolve_gamma(params.gamma, x), params.degree, params.coef0};

    const auto n = x.rows();
    Matrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = model.kernel_(x.row(i), x.row(j));
    }
    Vector signs(n);
    for (Eigen::Index i = 0; i < n; ++i) signs(i) = y[static_cast<std::size_t>(i)] == Stage::Late ? 1.0 : -1.0;

    SmoSolver solver{gram, signs, params.C, params.tol, params.max_iter, {}, {}};
    solver.solve();

    model.alphas_ = solver.alpha;
    model.bias_ = -solver.rho;
    model.converged_ = solver.converged;
    model.iterations_ = solver.iterations;
    const Vector ya = signs.cwiseProduct(solver.alpha);
    model.dual_objective_ = solver.alpha.sum() - 0.5 * ya.dot(gram * ya);

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (solver.alpha(i) > 0.0) sv.push_back(i);
    }
    model.support_.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    model.coefficients_.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
        model.coefficients_(static_cast<Eigen::Index>(k)) = ya(sv[k]);
    }
    return model;
}

double SupportVectorMachine::decision_row(const Eigen::Ref<const RowVector>& row) const {
    double sum = bias_;
    for (Eigen::Index k = 0; k < support_.rows(); ++k) sum += coefficients_(k) * kernel_(support_.row(k), row);
    return sum;
}

Stage SupportVectorMachine::predict_row(const Eigen::Ref<const RowVector>& row) const {
    return decision_row(row) > 0.0 ? Stage::Late : Stage::Early;
}

nlohmann::json SupportVectorMachine::to_json() const {
    return {{"kernel", static_cast<int>(kernel_.kind)},
            {"gamma", kernel_.gamma},
            {"degree", kernel_.degree},
            {"coef0", kernel_.coef0},
            {"support", matrix_to_json(support_)},
            {"coefficients", vector_to_json(coefficients_)},
            {"bias", bias_},
            {"dual_objective", dual_objective_},
            {"converged", converged_},
            {"iterations", iterations_}};
}

SupportVectorMachine SupportVectorMachine::from_json(const nlohmann::json& j) {
    SupportVectorMachine m;
    m.kernel_.kind = static_cast<Kernel>(j.at("kernel").get<int>());
    m.kernel_.gamma = j.at("gamma").get<double>();
    m.kernel_.degree = j.at("degree").get<int>();
    m.kernel_.coef0 = j.at("coef0").get<double>();
    m.support_ = matrix_from_json(j.at("support"));
    m.coefficients_ = vector_from_json(j.at("coefficients"));
    m.bias_ = j.at("bias").get<double>();
    m.dual_objective_ = j.at("dual_objective").get<double>();
    m.converged_ = j.at("converged").get<bool>();
    m.iterations_ = j.at("iterations").get<std::size_t>();
    return m;
}

} // namespace pcstage
