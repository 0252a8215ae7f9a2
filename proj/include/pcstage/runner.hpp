#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcstage/config.hpp"
#include "pcstage/report.hpp"

namespace pcstage {

LabeledDataset load_dataset(const InputConfig& input, bool log_transform);

struct PipelineRun {
    RunResults results;
    std::vector<std::string> files; // written into the output directory
};

/// Runs DEG, trials and cross-validation as configured and writes every
/// report plus resolved_config.json and manifest.json into `out_dir`.
/// Progress lines go to `log` when given.
PipelineRun run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir, std::ostream* log = nullptr);

} // namespace pcstage
