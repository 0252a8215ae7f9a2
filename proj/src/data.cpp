#include "pcstage/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "pcstage/error.hpp"
#include "pcstage/format.hpp"
#include "pcstage/random.hpp"

namespace pcstage {
namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\v\f";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line, char delimiter) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

struct Line {
    std::size_t number;
    std::string text;
};

std::vector<Line> read_nonblank_lines(std::istream& source) {
    std::vector<Line> lines;
    std::string text;
    std::size_t number = 0;
    while (std::getline(source, text)) {
        ++number;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (trim(text).empty()) continue;
        lines.push_back({number, std::move(text)});
    }
    return lines;
}

double parse_cell(std::string_view raw, std::size_t line, std::size_t column, bool allow_negative) {
    const auto cell = trim(raw);
    if (cell.empty()) throw ParseError(Errc::NonNumericCell, line, column, "missing value");
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw ParseError(Errc::NonNumericCell, line, column, "non-numeric cell '" + std::string(cell) + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError(Errc::NonNumericCell, line, column, "non-finite cell '" + std::string(cell) + "'");
    }
    if (!allow_negative && value < 0.0) {
        throw ParseError(Errc::NegativeValue, line, column, "negative value '" + std::string(cell) + "'");
    }
    return value;
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw Error(Errc::DuplicateId, std::string("duplicate ") + what + " '" + id + "'");
    }
}

} // namespace

std::string_view to_string(Stage s) noexcept { return s == Stage::Early ? "Early" : "Late"; }

Stage parse_stage_name(std::string_view name) {
    std::string lower;
    for (char c : trim(name)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "early") return Stage::Early;
    if (lower == "late") return Stage::Late;
    throw Error(Errc::UnknownStage, "unknown stage name '" + std::string(name) + "'");
}

Stage map_stage_label(std::string_view t_stage_code) {
    std::string code;
    for (char c : trim(t_stage_code)) code.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    static const std::unordered_map<std::string, Stage> table{
        {"t1a", Stage::Early}, {"t1b", Stage::Early}, {"t1c", Stage::Early}, {"t2", Stage::Early},
        {"t2a", Stage::Early}, {"t2b", Stage::Early}, {"t2c", Stage::Early}, {"t3a", Stage::Late},
        {"t3b", Stage::Late},  {"t4", Stage::Late},
    };
    const auto it = table.find(code);
    if (it == table.end()) throw Error(Errc::UnknownStage, "unknown T-stage code '" + std::string(t_stage_code) + "'");
    return it->second;
}

ClassCounts count_classes(std::span<const Stage> labels) noexcept {
    ClassCounts counts{0, 0};
    for (Stage s : labels) ++counts[index_of(s)];
    return counts;
}

ExpressionMatrix::ExpressionMatrix(std::vector<std::string> sample_ids, std::vector<std::string> gene_ids,
                                   Matrix values, bool allow_negative)
    : sample_ids_(std::move(sample_ids)), gene_ids_(std::move(gene_ids)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.rows()) != sample_ids_.size() ||
        static_cast<std::size_t>(values_.cols()) != gene_ids_.size()) {
        throw Error(Errc::ShapeMismatch, "value matrix is " + std::to_string(values_.rows()) + "x" +
                                             std::to_string(values_.cols()) + " but ids are " +
                                             std::to_string(sample_ids_.size()) + "x" +
                                             std::to_string(gene_ids_.size()));
    }
    check_unique(sample_ids_, "sample id");
    check_unique(gene_ids_, "gene id");
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            const double v = values_(i, j);
            if (!std::isfinite(v)) {
                throw Error(Errc::NonNumericCell, "non-finite value at sample '" + sample_ids_[i] + "', gene '" +
                                                      gene_ids_[j] + "'");
            }
            if (!allow_negative && v < 0.0) {
                throw Error(Errc::NegativeValue, "negative value at sample '" + sample_ids_[i] + "', gene '" +
                                                     gene_ids_[j] + "'");
            }
        }
    }
}

ExpressionMatrix ExpressionMatrix::select_rows(std::span<const std::size_t> rows) const {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (auto r : rows) {
        if (r >= this->rows()) throw Error(Errc::IndexOutOfRange, "row index " + std::to_string(r));
        ids.push_back(sample_ids_[r]);
    }
    return ExpressionMatrix(std::move(ids), gene_ids_, pcstage::select_rows(values_, rows), true);
}

ExpressionMatrix ExpressionMatrix::select_columns(std::span<const std::size_t> cols) const {
    std::vector<std::string> ids;
    ids.reserve(cols.size());
    for (auto c : cols) {
        if (c >= this->cols()) throw Error(Errc::IndexOutOfRange, "column index " + std::to_string(c));
        ids.push_back(gene_ids_[c]);
    }
    return ExpressionMatrix(sample_ids_, std::move(ids), pcstage::select_columns(values_, cols), true);
}

ExpressionMatrix parse_expression_matrix(std::istream& source, const ParseOptions& options) {
    const auto lines = read_nonblank_lines(source);
    if (lines.empty()) throw ParseError(Errc::EmptyInput, 0, 0, "empty matrix file");

    const auto header = split_cells(lines.front().text, options.delimiter);
    if (header.size() < 2) throw ParseError(Errc::EmptyInput, lines.front().number, 1, "header has no data columns");
    if (lines.size() < 2) throw ParseError(Errc::EmptyInput, lines.front().number, 0, "no data rows");

    std::vector<std::string> column_ids;
    column_ids.reserve(header.size() - 1);
    std::unordered_set<std::string> seen_columns;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string id(trim(header[c]));
        if (!seen_columns.insert(id).second) {
            throw ParseError(Errc::DuplicateId, lines.front().number, c + 1, "duplicate id '" + id + "'");
        }
        column_ids.push_back(std::move(id));
    }

    const std::size_t n_rows = lines.size() - 1;
    const std::size_t n_cols = column_ids.size();
    Matrix file_values(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    std::vector<std::string> row_ids;
    row_ids.reserve(n_rows);
    std::unordered_set<std::string> seen_rows;
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto& line = lines[r + 1];
        const auto cells = split_cells(line.text, options.delimiter);
        if (cells.size() != header.size()) {
            throw ParseError(Errc::RaggedRow, line.number, cells.size(),
                             "row has " + std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(header.size()));
        }
        std::string id(trim(cells[0]));
        if (!seen_rows.insert(id).second) throw ParseError(Errc::DuplicateId, line.number, 1, "duplicate id '" + id + "'");
        row_ids.push_back(std::move(id));
        for (std::size_t c = 0; c < n_cols; ++c) {
            file_values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(cells[c + 1], line.number, c + 2, options.allow_negative);
        }
    }

    Matrix values;
    std::vector<std::string> sample_ids;
    std::vector<std::string> gene_ids;
    if (options.orientation == Orientation::SamplesAsRows) {
        values = std::move(file_values);
        sample_ids = std::move(row_ids);
        gene_ids = std::move(column_ids);
    } else {
        values = file_values.transpose();
        sample_ids = std::move(column_ids);
        gene_ids = std::move(row_ids);
    }
    if (options.log2_transform) values = (values.array() + 1.0).log() / std::log(2.0);
    return ExpressionMatrix(std::move(sample_ids), std::move(gene_ids), std::move(values), options.allow_negative);
}

ExpressionMatrix read_expression_matrix(const std::filesystem::path& path, const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open matrix file '" + path.string() + "'");
    return parse_expression_matrix(in, options);
}

void write_expression_matrix(std::ostream& out, const ExpressionMatrix& matrix, char delimiter) {
    out << "sample_id";
    for (const auto& g : matrix.gene_ids()) out << delimiter << g;
    out << '\n';
    const auto& v = matrix.values();
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out << matrix.sample_ids()[i];
        for (Eigen::Index j = 0; j < v.cols(); ++j) out << delimiter << format_double(v(static_cast<Eigen::Index>(i), j));
        out << '\n';
    }
}

std::vector<LabelEntry> parse_label_table(std::istream& source, char delimiter) {
    const auto lines = read_nonblank_lines(source);
    std::vector<LabelEntry> entries;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto cells = split_cells(lines[k].text, delimiter);
        if (cells.size() != 2) {
            throw ParseError(Errc::RaggedRow, lines[k].number, cells.size(), "label rows need exactly 2 cells");
        }
        Stage stage{};
        try {
            stage = map_stage_label(cells[1]);
        } catch (const Error&) {
            if (k == 0) continue; // header
            throw ParseError(Errc::UnknownStage, lines[k].number, 2,
                             "unknown T-stage code '" + std::string(trim(cells[1])) + "'");
        }
        entries.push_back({std::string(trim(cells[0])), stage});
    }
    if (entries.empty()) throw ParseError(Errc::EmptyInput, 0, 0, "empty label file");
    return entries;
}

std::vector<LabelEntry> read_label_table(const std::filesystem::path& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open label file '" + path.string() + "'");
    return parse_label_table(in, delimiter);
}

LabeledDataset::LabeledDataset(ExpressionMatrix matrix, std::vector<Stage> labels)
    : matrix_(std::move(matrix)), labels_(std::move(labels)) {
    if (labels_.size() != matrix_.rows()) {
        throw Error(Errc::ShapeMismatch, std::to_string(labels_.size()) + " labels for " +
                                             std::to_string(matrix_.rows()) + " samples");
    }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
    std::vector<Stage> labels;
    labels.reserve(rows.size());
    for (auto r : rows) {
        if (r >= labels_.size()) throw Error(Errc::IndexOutOfRange, "row index " + std::to_string(r));
        labels.push_back(labels_[r]);
    }
    return LabeledDataset(matrix_.select_rows(rows), std::move(labels));
}

LabeledDataset align_labels(ExpressionMatrix matrix, std::span<const LabelEntry> labels) {
    std::unordered_map<std::string_view, Stage> by_id;
    for (const auto& e : labels) {
        if (!by_id.emplace(e.sample_id, e.stage).second) {
            throw Error(Errc::DuplicateId, "sample '" + e.sample_id + "' labelled twice");
        }
    }
    std::vector<Stage> aligned;
    aligned.reserve(matrix.rows());
    for (const auto& id : matrix.sample_ids()) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw Error(Errc::MissingLabel, "no stage label for sample '" + id + "'");
        aligned.push_back(it->second);
    }
    return LabeledDataset(std::move(matrix), std::move(aligned));
}

IndexSplit split_indices(std::span<const Stage> labels, double test_fraction, bool stratified, std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw Error(Errc::InvalidArgument, "test fraction must lie in (0, 1)");
    }
    if (n < 2) throw Error(Errc::InvalidArgument, "need at least 2 samples to split");
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test == n) {
        throw Error(Errc::InvalidArgument, "test fraction leaves one side of the split empty");
    }

    Rng rng(derive_seed(seed, 0x5b1175));
    IndexSplit result;
    if (!stratified) {
        Indices order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        result.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
        result.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    } else {
        std::array<Indices, 2> members;
        for (std::size_t i = 0; i < n; ++i) members[index_of(labels[i])].push_back(i);

        // Largest-remainder allocation of n_test across classes.
        std::array<std::size_t, 2> take{0, 0};
        std::array<double, 2> remainder{0.0, 0.0};
        std::size_t allocated = 0;
        for (std::size_t c = 0; c < 2; ++c) {
            const double exact = test_fraction * static_cast<double>(members[c].size());
            take[c] = static_cast<std::size_t>(std::floor(exact));
            remainder[c] = exact - std::floor(exact);
            allocated += take[c];
        }
        std::array<std::size_t, 2> order{0, 1};
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
        for (std::size_t k = 0; allocated < n_test; ++k, ++allocated) ++take[order[k % 2]];

        for (std::size_t c = 0; c < 2; ++c) {
            if (members[c].empty()) continue;
            if (take[c] == 0 || take[c] >= members[c].size()) {
                throw Error(Errc::InvalidArgument, std::string("stratified split impossible: class ") +
                                                       std::string(to_string(static_cast<Stage>(c))) + " has " +
                                                       std::to_string(members[c].size()) + " samples");
            }
            std::shuffle(members[c].begin(), members[c].end(), rng);
            result.test.insert(result.test.end(), members[c].begin(),
                               members[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
            result.train.insert(result.train.end(), members[c].begin() + static_cast<std::ptrdiff_t>(take[c]),
                                members[c].end());
        }
    }
    std::sort(result.train.begin(), result.train.end());
    std::sort(result.test.begin(), result.test.end());
    return result;
}

SplitPair split(const LabeledDataset& dataset, double test_fraction, bool stratified, std::uint64_t seed) {
    auto indices = split_indices(dataset.labels(), test_fraction, stratified, seed);
    auto train = dataset.subset(indices.train);
    auto test = dataset.subset(indices.test);
    return SplitPair{std::move(train), std::move(test), std::move(indices), seed};
}

Samples Samples::subset(std::span<const std::size_t> rows, Role new_role) const {
    Samples out;
    out.x = select_rows(x, rows);
    out.y.reserve(rows.size());
    for (auto r : rows) out.y.push_back(y.at(r));
    out.role = new_role;
    return out;
}

Samples to_samples(const LabeledDataset& dataset, Role role) {
    return Samples{dataset.matrix().values(), dataset.labels(), role};
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= static_cast<std::size_t>(x.rows())) {
            throw Error(Errc::IndexOutOfRange, "row index " + std::to_string(rows[k]));
        }
        out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
}

Matrix select_columns(const Matrix& x, std::span<const std::size_t> cols) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] >= static_cast<std::size_t>(x.cols())) {
            throw Error(Errc::IndexOutOfRange, "column index " + std::to_string(cols[k]));
        }
        out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(cols[k]));
    }
    return out;
}

} // namespace pcstage
