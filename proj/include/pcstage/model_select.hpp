#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/metrics.hpp"
#include "pcstage/pipeline.hpp"

namespace pcstage {

struct Fold {
    Indices train; // ascending
    Indices test;  // ascending
};

/// Contiguous folds over a (optionally shuffled) index order; the first
/// n % k folds hold one extra sample.
std::vector<Fold> kfold(std::size_t n, std::size_t k, bool shuffle, std::uint64_t seed);

/// Each class's indices are (optionally) shuffled, the per-class lists are
/// concatenated Early first, and position i goes to fold i mod k. Every
/// fold's class counts are then floor or ceil of class_size / k.
std::vector<Fold> stratified_kfold(std::span<const Stage> labels, std::size_t k, bool shuffle, std::uint64_t seed);

struct GridAxis {
    std::string name;
    std::vector<nlohmann::json> values;
};

/// Cartesian hyperparameter grid. Points enumerate with the last axis
/// varying fastest.
struct GridSpec {
    ClassifierKind kind = ClassifierKind::RF;
    nlohmann::json fixed = nlohmann::json::object(); // applied to every point
    std::vector<GridAxis> axes;
    std::size_t cv_folds = 5;
};

/// The standard search grid for `kind` (MLP has none: a single point).
GridSpec reference_grid(ClassifierKind kind);
std::size_t grid_size(const GridSpec& grid) noexcept;
/// Parameter objects (fixed merged with the axis values) in enumeration order.
std::vector<nlohmann::json> grid_points(const GridSpec& grid);

nlohmann::json grid_to_json(const GridSpec& grid);
/// {"kind", "fixed"?, "cv_folds"?, "axes": [{"name", "values"}] | "reference"}.
GridSpec grid_from_json(const nlohmann::json& j);

struct CvRow {
    std::size_t point;
    std::size_t fold;
    double f1; // weighted, percent
    bool flagged; // single-class training fold or degenerate metric
};

struct GridResult {
    std::vector<nlohmann::json> points;
    std::vector<double> mean_f1;
    std::vector<bool> flagged;
    std::vector<CvRow> cv_table; // point-major, fold-minor
    std::size_t best_index = 0;
    ClassifierSpec best;
};

/// Stratified k-fold weighted-F1 search. Feature stages are refitted inside
/// every training fold. The best point maximises the mean score; ties go to
/// the earliest point. A point whose fold has single-class training data
/// scores 0 on that fold and is flagged.
GridResult grid_search(const GridSpec& grid, const ModelStages& stages, const Samples& train, std::uint64_t seed,
                       std::size_t threads = 1);

struct CvResult {
    std::vector<double> fold_f1;
    std::vector<bool> flagged;
    std::vector<ConfusionMatrix> confusion;
    double mean_f1 = 0.0;
    double best_f1 = 0.0;
};

/// Stratified k-fold evaluation of a fixed pipeline; every fit-type stage is
/// fitted on the training fold only.
CvResult cross_validate(const ModelStages& stages, const ClassifierSpec& spec, const Samples& data, std::size_t k,
                        std::uint64_t seed, std::size_t threads = 1);

struct Experiment {
    ModelStages stages;
    std::optional<ClassifierSpec> classifier; // fixed hyperparameters, or
    std::optional<GridSpec> grid;             // grid-searched per run
    double test_fraction = 0.2;
    bool stratified = true;
};

struct TrialRun {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    ConfusionMatrix confusion;
    MetricReport report;
    nlohmann::json selected_params;
    std::size_t selected_features = 0;
    std::optional<GridResult> grid; // when hyperparameters were searched
};

struct MetricSummary {
    double mean = 0.0;
    double best = 0.0;
    std::vector<double> values;
};

struct TrialSummary {
    std::vector<TrialRun> runs;
    MetricSummary precision;
    MetricSummary recall;
    MetricSummary f1;
};

/// n_runs independent split/fit/evaluate cycles; run r uses seed
/// derive_seed(seed, r). Failures abort with the run index in the message.
TrialSummary repeated_trials(const Experiment& experiment, const Samples& data, std::size_t n_runs, std::uint64_t seed,
                             std::size_t threads = 1);

MetricSummary summarize(std::vector<double> values);

} // namespace pcstage
