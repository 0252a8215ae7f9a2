#include "pcstage/transform.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"
#include "pcstage/random.hpp"

namespace pcstage {
namespace {

void check_components(const Matrix& x, std::size_t n_components, const char* what) {
    if (x.rows() < 2) throw Error(Errc::InvalidArgument, std::string(what) + " needs at least 2 samples");
    const auto limit = static_cast<std::size_t>(std::min<Eigen::Index>(x.rows() - 1, x.cols()));
    if (n_components < 1 || n_components > limit) {
        throw Error(Errc::InvalidArgument, std::string(what) + " n_components must lie in [1, " +
                                               std::to_string(limit) + "], got " + std::to_string(n_components));
    }
}

void check_width(const Vector& mean, const Matrix& x, const char* what) {
    if (x.cols() != mean.size()) {
        throw Error(Errc::ShapeMismatch, std::string(what) + " expects " + std::to_string(mean.size()) +
                                             " features, got " + std::to_string(x.cols()));
    }
}

// Flip the sign of each row so that its largest-magnitude entry is positive.
Eigen::VectorXd canonical_signs(const Matrix& rows) {
    Eigen::VectorXd signs(rows.rows());
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        Eigen::Index arg = 0;
        rows.row(r).cwiseAbs().maxCoeff(&arg);
        signs(r) = rows(r, arg) < 0.0 ? -1.0 : 1.0;
    }
    return signs;
}

struct CentredSvd {
    Vector mean;
    Vector singular_values;
    Matrix right_vectors; // n_features x rank
};

CentredSvd centred_svd(const Matrix& x) {
    CentredSvd out;
    out.mean = x.colwise().mean().transpose();
    const Matrix centred = x.rowwise() - out.mean.transpose();
    Eigen::BDCSVD<Matrix> svd(centred, Eigen::ComputeThinV);
    out.singular_values = svd.singularValues();
    out.right_vectors = svd.matrixV();
    return out;
}

} // namespace

Standardizer fit_standardizer(const Matrix& x) {
    if (x.rows() < 2) throw Error(Errc::InvalidArgument, "standardizer needs at least 2 samples");
    const double n = static_cast<double>(x.rows());
    constexpr double eps = std::numeric_limits<double>::epsilon();
    Standardizer model;
    model.means = x.colwise().mean().transpose();
    model.stds.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = model.means(j);
        const double var = (x.col(j).array() - mean).square().sum() / n;
        // Variance indistinguishable from rounding noise counts as constant.
        const double bound = n * eps * var + (n * mean * eps) * (n * mean * eps);
        model.stds(j) = var <= bound ? 0.0 : std::sqrt(var);
    }
    return model;
}

Matrix apply_standardizer(const Standardizer& model, const Matrix& x) {
    check_width(model.means, x, "standardizer");
    const Eigen::RowVectorXd scale = model.stds.unaryExpr([](double s) { return s == 0.0 ? 1.0 : s; }).transpose();
    return (x.rowwise() - model.means.transpose()).array().rowwise() / scale.array();
}

PcaModel pca_fit(const Matrix& x, std::size_t n_components) {
    check_components(x, n_components, "PCA");
    const auto k = static_cast<Eigen::Index>(n_components);
    auto svd = centred_svd(x);
    const double dof = static_cast<double>(x.rows() - 1);

    PcaModel model;
    model.mean = std::move(svd.mean);
    model.components = svd.right_vectors.leftCols(k).transpose();
    model.explained_variance = svd.singular_values.head(k).array().square() / dof;
    const auto signs = canonical_signs(model.components);
    model.components = signs.asDiagonal() * model.components;
    return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    check_width(model.mean, x, "PCA transform");
    return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

IcaModel ica_fit(const Matrix& x, const IcaOptions& options) {
    check_components(x, options.n_components, "ICA");
    if (options.max_iter < 1) throw Error(Errc::InvalidArgument, "ICA max_iter must be positive");
    const auto k = static_cast<Eigen::Index>(options.n_components);
    const double dof = static_cast<double>(x.rows() - 1);
    auto svd = centred_svd(x);

    const Vector eigenvalues = svd.singular_values.head(k).array().square() / dof;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (eigenvalues(i) < 1e-12) {
            throw Error(Errc::RankDeficient, "covariance eigenvalue " + std::to_string(eigenvalues(i)) +
                                                 " for component " + std::to_string(i) + " is too small to whiten");
        }
    }

    IcaModel model;
    model.mean = std::move(svd.mean);
    model.n_components = options.n_components;
    model.whitening = eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * svd.right_vectors.leftCols(k).transpose();
    const Matrix white = (x.rowwise() - model.mean.transpose()) * model.whitening.transpose(); // n x k
    const double n = static_cast<double>(x.rows());

    Rng rng(derive_seed(options.seed, 0x1ca));
    Matrix unmixing = Matrix::Zero(k, k);
    model.converged = true;
    model.iterations_used = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
        Vector w(k);
        for (Eigen::Index i = 0; i < k; ++i) w(i) = standard_normal(rng);
        w.normalize();
        bool done = false;
        int iter = 0;
        while (iter < options.max_iter && !done) {
            ++iter;
            const Vector projection = white * w;
            const Vector g = projection.array().tanh();
            const double g_prime_mean = (1.0 - g.array().square()).mean();
            Vector next = white.transpose() * g / n - g_prime_mean * w;
            // Gram-Schmidt against the components already found.
            for (Eigen::Index p = 0; p < c; ++p) {
                const auto prev = unmixing.row(p).transpose();
                next -= next.dot(prev) * prev;
            }
            const double norm = next.norm();
            if (!(norm > 0.0) || !std::isfinite(norm)) {
                throw Error(Errc::NumericalFailure, "FastICA update collapsed for component " + std::to_string(c));
            }
            next /= norm;
            done = std::abs(std::abs(next.dot(w)) - 1.0) < options.tol;
            w = std::move(next);
        }
        model.converged = model.converged && done;
        model.iterations_used = std::max(model.iterations_used, iter);
        unmixing.row(c) = w.transpose();
    }

    const auto signs = canonical_signs(unmixing * model.whitening);
    model.unmixing = signs.asDiagonal() * unmixing;
    // Whitening pseudo-inverse is V_k * sqrt(lambda); W^-1 = W^T.
    const Matrix whitening_pinv = svd.right_vectors.leftCols(k) * eigenvalues.cwiseSqrt().asDiagonal();
    model.mixing_estimate = whitening_pinv * model.unmixing.transpose();
    return model;
}

Matrix ica_transform(const IcaModel& model, const Matrix& x) {
    check_width(model.mean, x, "ICA transform");
    return (x.rowwise() - model.mean.transpose()) * model.filters().transpose();
}

nlohmann::json to_json(const Standardizer& model) {
    return {{"format", "pcstage-standardizer"},
            {"version", 1},
            {"means", vector_to_json(model.means)},
            {"stds", vector_to_json(model.stds)}};
}

nlohmann::json to_json(const PcaModel& model) {
    return {{"format", "pcstage-pca"},
            {"version", 1},
            {"mean", vector_to_json(model.mean)},
            {"components", matrix_to_json(model.components)},
            {"explained_variance", vector_to_json(model.explained_variance)}};
}

nlohmann::json to_json(const IcaModel& model) {
    return {{"format", "pcstage-ica"},
            {"version", 1},
            {"mean", vector_to_json(model.mean)},
            {"whitening", matrix_to_json(model.whitening)},
            {"unmixing", matrix_to_json(model.unmixing)},
            {"mixing_estimate", matrix_to_json(model.mixing_estimate)},
            {"n_components", model.n_components},
            {"converged", model.converged},
            {"iterations_used", model.iterations_used}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
    check_format(j, "pcstage-standardizer", 1);
    return {vector_from_json(j.at("means")), vector_from_json(j.at("stds"))};
}

PcaModel pca_from_json(const nlohmann::json& j) {
    check_format(j, "pcstage-pca", 1);
    return {vector_from_json(j.at("mean")), matrix_from_json(j.at("components")),
            vector_from_json(j.at("explained_variance"))};
}

IcaModel ica_from_json(const nlohmann::json& j) {
    check_format(j, "pcstage-ica", 1);
    IcaModel m;
    m.mean = vector_from_json(j.at("mean"));
    m.whitening = matrix_from_json(j.at("whitening"));
    m.unmixing = matrix_from_json(j.at("unmixing"));
    m.mixing_estimate = matrix_from_json(j.at("mixing_estimate"));
    m.n_components = j.at("n_components").get<std::size_t>();
    m.converged = j.at("converged").get<bool>();
    m.iterations_used = j.at("iterations_used").get<int>();
    return m;
}

} // namespace pcstage
