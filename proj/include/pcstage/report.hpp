#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/de.hpp"
#include "pcstage/model_select.hpp"

namespace pcstage {

struct AlgorithmResults {
    std::string name;
    std::optional<TrialSummary> trials;
    std::optional<CvResult> cv;
};

struct RunResults {
    std::vector<AlgorithmResults> algorithms;
    std::optional<DegTable> deg;

    bool empty() const noexcept;
};

/// Long format `algorithm,run,metric,value` (precision, recall, f1 per run).
void write_boxplot_csv(std::ostream& out, const RunResults& results);
/// `algorithm,run,seed,metric,value`, including accuracy and the number of
/// features reaching the classifier.
void write_trials_csv(std::ostream& out, const RunResults& results);
/// `algorithm,run,actual,predicted,count`; cross-validation folds use run "cv<fold>".
void write_confusion_csv(std::ostream& out, const RunResults& results);
/// One row per (run, grid point, fold): `algorithm,run,point,fold,params,f1,flagged`.
void write_cv_table_csv(std::ostream& out, const RunResults& results);
/// `algorithm,fold,f1,flagged`.
void write_cv_csv(std::ostream& out, const RunResults& results);
/// {"algorithms": {name: {"mean": {precision, recall, f1}, "best": {...}, ...}}}.
nlohmann::json summary_json(const RunResults& results);

/// Writes every report that applies to `results` into `dir` and returns the
/// file names. Throws (writing nothing) when there are no results.
std::vector<std::string> emit_reports(const RunResults& results, const std::filesystem::path& dir);

inline constexpr const char* kToolVersion = "1.0.0";

/// Written when a run starts and rewritten when it ends.
class RunManifest {
public:
    RunManifest(std::string config_hash, std::uint64_t seed);

    void begin_stage(const std::string& name);
    void end_stage();
    void add_outputs(const std::vector<std::string>& files);
    void write(const std::filesystem::path& dir, const std::string& status) const;

    nlohmann::json to_json(const std::string& status) const;

private:
    using Clock = std::chrono::system_clock;

    std::string config_hash_;
    std::uint64_t seed_;
    Clock::time_point started_;
    std::vector<std::pair<std::string, double>> durations_ms_;
    std::optional<std::pair<std::string, std::chrono::steady_clock::time_point>> open_stage_;
    std::vector<std::string> outputs_;
};

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace pcstage
