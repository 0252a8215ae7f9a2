#include "pcstage/select.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "pcstage/error.hpp"
#include "pcstage/format.hpp"
#include "pcstage/special.hpp"

namespace pcstage {

ScoreFunc parse_score_func(std::string_view name) {
    if (name == "f_classif") return ScoreFunc::FClassif;
    throw Error(Errc::InvalidArgument, "unsupported score function '" + std::string(name) + "'");
}

std::string_view to_string(ScoreFunc) noexcept { return "f_classif"; }

std::vector<FeatureScore> anova_f_classif(const Matrix& x, std::span<const Stage> y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw Error(Errc::ShapeMismatch, "feature matrix and labels differ in length");
    }
    const auto counts = count_classes(y);
    std::vector<std::size_t> present;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0) present.push_back(c);
    }
    const std::size_t k = present.size();
    const std::size_t n = y.size();
    if (k < 2) throw Error(Errc::SingleClass, "ANOVA F needs at least two classes");
    if (n <= k) throw Error(Errc::InvalidArgument, "ANOVA F needs more samples than classes");

    const double df_between = static_cast<double>(k - 1);
    const double df_within = static_cast<double>(n - k);
    std::vector<FeatureScore> scores;
    scores.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::array<double, 2> class_sum{0.0, 0.0};
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x(static_cast<Eigen::Index>(i), j);
            class_sum[index_of(y[i])] += v;
            total += v;
        }
        const double grand_mean = total / static_cast<double>(n);
        std::array<double, 2> class_mean{0.0, 0.0};
        for (auto c : present) class_mean[c] = class_sum[c] / static_cast<double>(counts[c]);

        double ss_within = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x(static_cast<Eigen::Index>(i), j) - class_mean[index_of(y[i])];
            ss_within += d * d;
        }
        double ss_between = 0.0;
        for (auto c : present) {
            const double d = class_mean[c] - grand_mean;
            ss_between += static_cast<double>(counts[c]) * d * d;
        }

        FeatureScore s{static_cast<std::size_t>(j), 0.0, 1.0, false};
        if (ss_within == 0.0) {
            s.degenerate = true;
            if (ss_between > 0.0) {
                s.f_stat = std::numeric_limits<double>::infinity();
                s.p_value = 0.0;
            }
        } else {
            s.f_stat = (ss_between / df_between) / (ss_within / df_within);
            s.p_value = f_upper_tail(s.f_stat, df_between, df_within);
        }
        scores.push_back(s);
    }
    return scores;
}

SelectionMask select_fpr(std::span<const FeatureScore> scores, double alpha) {
    if (scores.empty()) throw Error(Errc::EmptyInput, "no feature scores to select from");
    SelectionMask mask;
    mask.alpha = alpha;
    mask.n_features = scores.size();
    for (const auto& s : scores) {
        if (s.p_value < alpha) mask.kept.push_back(s.feature_index);
    }
    return mask;
}

ExpressionMatrix project(const ExpressionMatrix& matrix, const SelectionMask& mask) {
    if (mask.empty()) throw Error(Errc::EmptySelection, "feature selection kept no features");
    return matrix.select_columns(mask.kept);
}

Matrix project(const Matrix& x, const SelectionMask& mask) {
    if (mask.empty()) throw Error(Errc::EmptySelection, "feature selection kept no features");
    return select_columns(x, mask.kept);
}

void write_scores_csv(std::ostream& out, std::span<const FeatureScore> scores, std::span<const std::string> gene_ids,
                      const SelectionMask& mask) {
    out << "feature_index,gene_id,f_stat,p_value,kept\n";
    std::size_t next_kept = 0;
    for (const auto& s : scores) {
        while (next_kept < mask.kept.size() && mask.kept[next_kept] < s.feature_index) ++next_kept;
        const bool kept = next_kept < mask.kept.size() && mask.kept[next_kept] == s.feature_index;
        const std::string gene = s.feature_index < gene_ids.size() ? gene_ids[s.feature_index] : "";
        out << s.feature_index << ',' << gene << ',' << format_double(s.f_stat) << ',' << format_double(s.p_value)
            << ',' << (kept ? 1 : 0) << '\n';
    }
}

} // namespace pcstage
