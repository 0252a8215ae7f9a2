#pragma once

#include <array>
#include <span>
#include <string>

#include "pcstage/data.hpp"

namespace pcstage {

/// counts[actual][predicted], indexed Early = 0, Late = 1.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, 2>, 2> counts{};

    std::size_t operator()(Stage actual, Stage predicted) const noexcept {
        return counts[index_of(actual)][index_of(predicted)];
    }
    std::size_t total() const noexcept;
    std::size_t support(Stage actual) const noexcept;
};

ConfusionMatrix confusion(std::span<const Stage> truth, std::span<const Stage> predicted);

/// Percentages in [0, 100]. A metric whose denominator is zero is reported
/// as 0 and flagged.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

struct MetricReport {
    std::array<ClassMetrics, 2> per_class; // Early, Late
    double precision = 0.0; // support-weighted
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    bool degenerate = false; // any per-class flag raised
};

MetricReport metrics(const ConfusionMatrix& cm);

/// Fixed-point text with `decimals` places, as printf would round it.
std::string format_fixed(double value, int decimals = 2);

} // namespace pcstage
