#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "pcstage/data.hpp"

namespace pcstage::testing {

// Gaussian noise everywhere; the first `informative` genes of Late samples
// are shifted by `shift` standard deviations. Rows are shuffled so classes
// interleave.
inline Samples planted_signal(std::size_t n, std::size_t p, std::size_t informative, double late_fraction, double shift,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n_late = static_cast<std::size_t>(late_fraction * static_cast<double>(n) + 0.5);
    std::vector<Stage> y(n, Stage::Early);
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_late), Stage::Late);
    std::shuffle(y.begin(), y.end(), rng);
    Samples s;
    s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double v = normal(rng);
            if (y[i] == Stage::Late && j < informative) v += shift;
            s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    s.y = std::move(y);
    s.role = Role::Unsplit;
    return s;
}

} // namespace pcstage::testing
