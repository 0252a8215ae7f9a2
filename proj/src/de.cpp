#include "pcstage/de.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "pcstage/error.hpp"
#include "pcstage/format.hpp"
#include "pcstage/special.hpp"

namespace pcstage {
namespace {

struct Moments {
    double mean;
    double var; // unbiased
};

Moments moments(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, ss / static_cast<double>(v.size() - 1)};
}

} // namespace

TTestVariant parse_ttest_variant(std::string_view name) {
    if (name == "pooled" || name == "student") return TTestVariant::Pooled;
    if (name == "welch") return TTestVariant::Welch;
    throw Error(Errc::InvalidArgument, "unknown t-test variant '" + std::string(name) + "'");
}

std::string_view to_string(TTestVariant v) noexcept { return v == TTestVariant::Pooled ? "pooled" : "welch"; }

std::string_view to_string(Regulation r) noexcept {
    switch (r) {
    case Regulation::Up: return "Up";
    case Regulation::Down: return "Down";
    case Regulation::NotSignificant: return "NotSignificant";
    }
    return "NotSignificant";
}

TTestResult two_sample_t(std::span<const double> a, std::span<const double> b, TTestVariant variant) {
    if (a.size() < 2 || b.size() < 2) throw Error(Errc::InvalidArgument, "t-test needs at least 2 values per group");
    for (auto group : {a, b}) {
        for (double x : group) {
            if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "t-test input contains non-finite values");
        }
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const auto ma = moments(a);
    const auto mb = moments(b);

    double se = 0.0;
    double df = 0.0;
    if (variant == TTestVariant::Pooled) {
        df = na + nb - 2.0;
        const double pooled = ((na - 1.0) * ma.var + (nb - 1.0) * mb.var) / df;
        se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    } else {
        const double va = ma.var / na;
        const double vb = mb.var / nb;
        se = std::sqrt(va + vb);
        const double denom = va * va / (na - 1.0) + vb * vb / (nb - 1.0);
        df = denom > 0.0 ? (va + vb) * (va + vb) / denom : na + nb - 2.0;
    }

    const double gap = ma.mean - mb.mean;
    if (se == 0.0) {
        if (gap == 0.0) return {0.0, 1.0, df};
        const double t = std::copysign(std::numeric_limits<double>::max(), gap);
        return {t, kPFloor, df};
    }
    const double t = gap / se;
    return {t, student_t_two_sided(t, df), df};
}

double log2_fold_change(double mean_late, double mean_early, double pseudocount) {
    return std::log2((mean_late + pseudocount) / (mean_early + pseudocount));
}

Regulation classify_regulation(double log2fc, double p_value, const DegOptions& options) noexcept {
    if (p_value < options.alpha) {
        if (log2fc > options.lfc_threshold) return Regulation::Up;
        if (log2fc < -options.lfc_threshold) return Regulation::Down;
    }
    return Regulation::NotSignificant;
}

DegTable deg_analysis(const LabeledDataset& dataset, const DegOptions& options) {
    if (!(options.pseudocount > 0.0)) throw Error(Errc::InvalidArgument, "pseudocount must be positive");
    const auto counts = dataset.class_counts();
    if (counts[0] == 0 || counts[1] == 0) throw Error(Errc::SingleClass, "differential expression needs both stages");

    const auto& labels = dataset.labels();
    const auto& values = dataset.matrix().values();
    DegTable table;
    table.options = options;
    table.records.reserve(dataset.matrix().cols());

    std::vector<double> late;
    std::vector<double> early;
    for (Eigen::Index g = 0; g < values.cols(); ++g) {
        late.clear();
        early.clear();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double v = values(static_cast<Eigen::Index>(i), g);
            (labels[i] == Stage::Late ? late : early).push_back(v);
        }
        const auto test = two_sample_t(late, early, options.variant);
        double mean_late = 0.0;
        for (double v : late) mean_late += v;
        mean_late /= static_cast<double>(late.size());
        double mean_early = 0.0;
        for (double v : early) mean_early += v;
        mean_early /= static_cast<double>(early.size());

        DegRecord rec;
        rec.gene_id = dataset.matrix().gene_ids()[static_cast<std::size_t>(g)];
        rec.log2fc = log2_fold_change(mean_late, mean_early, options.pseudocount);
        rec.t_stat = test.t;
        rec.p_value = test.p;
        rec.status = classify_regulation(rec.log2fc, rec.p_value, options);
        switch (rec.status) {
        case Regulation::Up: ++table.up; break;
        case Regulation::Down: ++table.down; break;
        case Regulation::NotSignificant: ++table.not_significant; break;
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

std::vector<VolcanoRow> volcano_export(const DegTable& table) {
    std::vector<VolcanoRow> rows;
    rows.reserve(table.records.size());
    for (const auto& r : table.records) {
        rows.push_back({r.gene_id, r.log2fc, -std::log10(std::max(r.p_value, kPFloor)), r.status});
    }
    return rows;
}

void write_volcano_csv(std::ostream& out, std::span<const VolcanoRow> rows) {
    out << "gene_id,log2fc,neg_log10_p,status\n";
    for (const auto& r : rows) {
        out << r.gene_id << ',' << format_double(r.log2fc) << ',' << format_double(r.neg_log10_p) << ','
            << to_string(r.status) << '\n';
    }
}

nlohmann::json deg_summary_json(const DegTable& table) {
    return nlohmann::json{{"up", table.up},
                          {"down", table.down},
                          {"ns", table.not_significant},
                          {"alpha", table.options.alpha},
                          {"lfc_threshold", table.options.lfc_threshold}};
}

} // namespace pcstage
