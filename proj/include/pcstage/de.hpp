#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/data.hpp"

namespace pcstage {

enum class TTestVariant { Pooled, Welch };

TTestVariant parse_ttest_variant(std::string_view name);
std::string_view to_string(TTestVariant v) noexcept;

/// Smallest p-value ever reported; zero-variance separations and volcano
/// coordinates are clamped to it.
inline constexpr double kPFloor = 1e-300;

struct TTestResult {
    double t;
    double p;
    double df;
};

/// Two-sided independent two-sample t-test of mean(a) - mean(b).
/// Both groups constant: t = 0, p = 1 when the means agree; otherwise
/// t = +/-DBL_MAX and p = kPFloor.
TTestResult two_sample_t(std::span<const double> a, std::span<const double> b, TTestVariant variant);

/// log2((mean_late + pseudocount) / (mean_early + pseudocount)).
double log2_fold_change(double mean_late, double mean_early, double pseudocount);

enum class Regulation { Up, Down, NotSignificant };
std::string_view to_string(Regulation r) noexcept;

struct DegRecord {
    std::string gene_id;
    double log2fc;
    double t_stat; // Late minus Early
    double p_value;
    Regulation status;
};

struct DegOptions {
    double alpha = 0.05;
    double lfc_threshold = 1.0;
    TTestVariant variant = TTestVariant::Pooled;
    double pseudocount = 1e-9;
};

struct DegTable {
    std::vector<DegRecord> records;
    DegOptions options;
    std::size_t up = 0;
    std::size_t down = 0;
    std::size_t not_significant = 0;
};

Regulation classify_regulation(double log2fc, double p_value, const DegOptions& options) noexcept;

DegTable deg_analysis(const LabeledDataset& dataset, const DegOptions& options = {});

struct VolcanoRow {
    std::string gene_id;
    double log2fc;
    double neg_log10_p;
    Regulation status;
};

std::vector<VolcanoRow> volcano_export(const DegTable& table);

/// Header `gene_id,log2fc,neg_log10_p,status`.
void write_volcano_csv(std::ostream& out, std::span<const VolcanoRow> rows);

/// `{up, down, ns, alpha, lfc_threshold}`.
nlohmann::json deg_summary_json(const DegTable& table);

} // namespace pcstage
