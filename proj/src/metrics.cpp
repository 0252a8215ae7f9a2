#include "pcstage/metrics.hpp"

#include <cstdio>

#include "pcstage/error.hpp"

namespace pcstage {

std::size_t ConfusionMatrix::total() const noexcept {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

std::size_t ConfusionMatrix::support(Stage actual) const noexcept {
    const auto& row = counts[index_of(actual)];
    return row[0] + row[1];
}

ConfusionMatrix confusion(std::span<const Stage> truth, std::span<const Stage> predicted) {
    if (truth.size() != predicted.size()) throw Error(Errc::ShapeMismatch, "truth and prediction lengths differ");
    if (truth.empty()) throw Error(Errc::EmptyInput, "confusion matrix of no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
    return cm;
}

MetricReport metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw Error(Errc::EmptyInput, "metrics of an empty confusion matrix");
    MetricReport report;
    for (Stage c : kStages) {
        const std::size_t i = index_of(c);
        const std::size_t other = 1 - i;
        const double tp = static_cast<double>(cm.counts[i][i]);
        const double fp = static_cast<double>(cm.counts[other][i]);
        const double fn = static_cast<double>(cm.counts[i][other]);
        auto& m = report.per_class[i];
        m.support = cm.support(c);
        if (tp + fp > 0) m.precision = 100.0 * tp / (tp + fp); else m.precision_degenerate = true;
        if (tp + fn > 0) m.recall = 100.0 * tp / (tp + fn); else m.recall_degenerate = true;
        if (m.precision + m.recall > 0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            m.f1_degenerate = true;
        }
        const double w = static_cast<double>(m.support);
        report.precision += w * m.precision;
        report.recall += w * m.recall;
        report.f1 += w * m.f1;
        report.degenerate = report.degenerate || m.precision_degenerate || m.recall_degenerate || m.f1_degenerate;
    }
    const double n = static_cast<double>(total);
    report.precision /= n;
    report.recall /= n;
    report.f1 /= n;
    report.accuracy = 100.0 * static_cast<double>(cm.counts[0][0] + cm.counts[1][1]) / n;
    return report;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

} // namespace pcstage
