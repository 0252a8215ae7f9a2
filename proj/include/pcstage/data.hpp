#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pcstage {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Indices = std::vector<std::size_t>;

// Ordered Early < Late; the numeric value doubles as a class index.
enum class Stage : std::uint8_t { Early = 0, Late = 1 };

inline constexpr std::array<Stage, 2> kStages{Stage::Early, Stage::Late};

constexpr std::size_t index_of(Stage s) noexcept { return static_cast<std::size_t>(s); }
std::string_view to_string(Stage s) noexcept;
/// Parses "Early"/"Late" (case-insensitive), as written by this library.
Stage parse_stage_name(std::string_view name);

/// Maps a pathological T-stage code to Early (t1a..t2c) or Late (t3a, t3b, t4).
/// Case-insensitive; surrounding whitespace ignored. Throws UnknownStage.
Stage map_stage_label(std::string_view t_stage_code);

using ClassCounts = std::array<std::size_t, 2>;
ClassCounts count_classes(std::span<const Stage> labels) noexcept;

/// Sample x gene table of TPM values. Immutable once constructed; the
/// constructor enforces shape, uniqueness, finiteness and (unless a derived
/// feature table is being wrapped) non-negativity.
class ExpressionMatrix {
public:
    ExpressionMatrix(std::vector<std::string> sample_ids, std::vector<std::string> gene_ids, Matrix values,
                     bool allow_negative = false);

    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
    const std::vector<std::string>& gene_ids() const noexcept { return gene_ids_; }
    const Matrix& values() const noexcept { return values_; }
    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    ExpressionMatrix select_rows(std::span<const std::size_t> rows) const;
    ExpressionMatrix select_columns(std::span<const std::size_t> cols) const;

private:
    std::vector<std::string> sample_ids_;
    std::vector<std::string> gene_ids_;
    Matrix values_;
};

enum class Orientation { SamplesAsRows, GenesAsRows };

struct ParseOptions {
    char delimiter = '\t';
    Orientation orientation = Orientation::SamplesAsRows;
    bool log2_transform = false; // log2(x + 1) after validation
    bool allow_negative = false; // for derived (standardized, projected) tables
};

ExpressionMatrix parse_expression_matrix(std::istream& source, const ParseOptions& options = {});
ExpressionMatrix read_expression_matrix(const std::filesystem::path& path, const ParseOptions& options = {});

/// Canonical form: samples as rows, header "sample_id" + gene ids, values in
/// shortest round-trip decimal representation.
void write_expression_matrix(std::ostream& out, const ExpressionMatrix& matrix, char delimiter = '\t');

struct LabelEntry {
    std::string sample_id;
    Stage stage;
};

/// Two-column table (sample_id, t_stage_code). A first row whose code is not
/// a recognised stage is treated as a header.
std::vector<LabelEntry> parse_label_table(std::istream& source, char delimiter = '\t');
std::vector<LabelEntry> read_label_table(const std::filesystem::path& path, char delimiter = '\t');

class LabeledDataset {
public:
    LabeledDataset(ExpressionMatrix matrix, std::vector<Stage> labels);

    const ExpressionMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<Stage>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    ClassCounts class_counts() const noexcept { return count_classes(labels_); }

    LabeledDataset subset(std::span<const std::size_t> rows) const;

private:
    ExpressionMatrix matrix_;
    std::vector<Stage> labels_;
};

/// Orders labels by matrix row. Throws MissingLabel when a sample has none,
/// DuplicateId when a sample is labelled twice.
LabeledDataset align_labels(ExpressionMatrix matrix, std::span<const LabelEntry> labels);

struct IndexSplit {
    Indices train; // ascending
    Indices test;  // ascending
};

/// |test| = round(test_fraction * n). Stratified splits allocate per-class
/// test counts by largest remainder so each deviates from the exact share by
/// less than one sample.
IndexSplit split_indices(std::span<const Stage> labels, double test_fraction, bool stratified, std::uint64_t seed);

struct SplitPair {
    LabeledDataset train;
    LabeledDataset test;
    IndexSplit indices;
    std::uint64_t seed;
};

SplitPair split(const LabeledDataset& dataset, double test_fraction, bool stratified, std::uint64_t seed);

/// Feature matrix handed to the learning stages. `role` records which side
/// of a split the rows came from; fit-type stages refuse Test data.
enum class Role { Train, Test, Unsplit };

struct Samples {
    Matrix x;
    std::vector<Stage> y;
    Role role = Role::Unsplit;

    std::size_t size() const noexcept { return y.size(); }
    Samples subset(std::span<const std::size_t> rows, Role new_role) const;
};

Samples to_samples(const LabeledDataset& dataset, Role role);

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows);
Matrix select_columns(const Matrix& x, std::span<const std::size_t> cols);

} // namespace pcstage
