#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcstage/data.hpp"

namespace pcstage {

struct SmoteParams {
    std::size_t k_neighbors = 5;
    /// Target minority/majority ratio after resampling; nullopt balances the
    /// classes exactly.
    std::optional<double> ratio;
    std::uint64_t seed = 0;
};

struct ProvenanceRecord {
    std::string kind; // smote | sfa | gaussian
    std::size_t output_row;
    std::size_t base_row;
    std::optional<std::size_t> neighbor_row;
    double delta_or_sigma;
};

struct AugmentResult {
    Samples data;
    std::vector<ProvenanceRecord> provenance;
    std::vector<std::string> warnings;
};

/// Appends synthetic minority rows x + delta * (neighbor - x), delta in (0, 1),
/// neighbor among the k Euclidean-nearest minority samples of x. Original
/// rows come first, unchanged. Refuses Test-role data.
AugmentResult smote(const Samples& train, const SmoteParams& params);

/// Same on an expression table; synthetic samples are named "smote_<n>".
LabeledDataset smote(const LabeledDataset& train, const SmoteParams& params,
                     std::vector<ProvenanceRecord>* provenance = nullptr);

/// Stochastic feature augmentation: alpha (.) z + beta per row with
/// alpha ~ N(mu, sigma1^2 I), beta ~ N(0, sigma2^2 I).
struct SfaParams {
    double mu = 1.0;
    double sigma1 = 0.01;
    double sigma2 = 0.01;
};

Matrix sfa(const Matrix& features, const SfaParams& params, std::uint64_t seed);

/// Originals followed by (factor - 1) SFA copies of every row.
AugmentResult sfa_expand(const Samples& train, const SfaParams& params, std::size_t factor, std::uint64_t seed);

struct NoiseParams {
    double mu = 0.0;
    double sigma = 0.01;
    bool relative = true; // sigma multiplies each feature's training std
    std::size_t factor = 10;
};

/// Originals followed by (factor - 1) copies X + mu + sigma * Z of every row.
AugmentResult gaussian_expand(const Samples& train, const NoiseParams& params, std::uint64_t seed);

/// Header `kind,base_row,neighbor_row,delta_or_sigma`.
void write_provenance_csv(std::ostream& out, std::span<const ProvenanceRecord> records);

} // namespace pcstage
