#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/de.hpp"
#include "pcstage/model_select.hpp"

namespace pcstage {

struct InputConfig {
    std::filesystem::path matrix;
    std::filesystem::path labels;
    char delimiter = '\t';
    Orientation orientation = Orientation::SamplesAsRows;
};

struct DegConfig {
    bool enabled = true;
    DegOptions options{};
};

/// One algorithm in the experiment: fixed hyperparameters or a grid.
struct AlgorithmConfig {
    std::string name;
    std::optional<ClassifierSpec> spec;
    std::optional<GridSpec> grid;
};

struct EvaluationConfig {
    double test_fraction = 0.2;
    bool stratified = true;
    std::size_t n_runs = 100;
    std::size_t cv_folds = 10;
    bool trials = true;
    bool cross_validation = false;
};

struct PipelineConfig {
    InputConfig input;
    bool log_transform = false;
    DegConfig deg;
    ModelStages stages;
    std::vector<AlgorithmConfig> algorithms;
    EvaluationConfig evaluation;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::optional<std::filesystem::path> output_dir;
};

/// Parses and validates a config document. Unknown keys raise Schema;
/// fitting a stage on data outside the training split raises StageLegality.
/// Relative input paths are resolved against `base_dir`.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Every setting with defaults filled in. The output directory and thread
/// count are left out: they say where and how a run goes, not what it computes.
nlohmann::json resolved_config_json(const PipelineConfig& config);

/// Lower-case hex SHA-256 of resolved_config_json(config).dump().
std::string config_hash(const PipelineConfig& config);
std::string sha256_hex(std::string_view data);

Experiment make_experiment(const PipelineConfig& config, const AlgorithmConfig& algorithm);

} // namespace pcstage
