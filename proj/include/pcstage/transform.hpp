#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "pcstage/data.hpp"

namespace pcstage {

/// Per-column mean and population standard deviation. Columns whose std is
/// zero (to within rounding of the mean) keep std = 0 and are divided by 1
/// when applied, so they map to 0.
struct Standardizer {
    Vector means;
    Vector stds;
};

Standardizer fit_standardizer(const Matrix& x);
Matrix apply_standardizer(const Standardizer& model, const Matrix& x);

/// Principal axes of the sample covariance (denominator n - 1).
struct PcaModel {
    Vector mean;
    Matrix components;        // n_components x n_features, orthonormal rows
    Vector explained_variance; // descending eigenvalues
};

/// Computed from the thin SVD of the centred data; each component is signed
/// so its largest-magnitude coordinate is positive.
PcaModel pca_fit(const Matrix& x, std::size_t n_components);
Matrix pca_transform(const PcaModel& model, const Matrix& x);

struct IcaOptions {
    std::size_t n_components = 2;
    int max_iter = 200;
    double tol = 1e-4;
    std::uint64_t seed = 0;
};

/// FastICA (deflation, g = tanh) on data whitened to identity sample
/// covariance using the top n_components covariance eigenpairs.
struct IcaModel {
    Vector mean;
    Matrix whitening;       // n_components x n_features
    Matrix unmixing;        // n_components x n_components, orthonormal rows
    Matrix mixing_estimate; // n_features x n_components, pseudo-inverse of unmixing * whitening
    std::size_t n_components = 0;
    bool converged = false;
    int iterations_used = 0;

    /// unmixing * whitening: maps a centred sample to source estimates.
    Matrix filters() const { return unmixing * whitening; }
};

IcaModel ica_fit(const Matrix& x, const IcaOptions& options);
Matrix ica_transform(const IcaModel& model, const Matrix& x);

nlohmann::json to_json(const Standardizer& model);
nlohmann::json to_json(const PcaModel& model);
nlohmann::json to_json(const IcaModel& model);
Standardizer standardizer_from_json(const nlohmann::json& j);
PcaModel pca_from_json(const nlohmann::json& j);
IcaModel ica_from_json(const nlohmann::json& j);

} // namespace pcstage
