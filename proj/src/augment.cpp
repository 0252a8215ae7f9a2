#include "pcstage/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "pcstage/error.hpp"
#include "pcstage/format.hpp"
#include "pcstage/random.hpp"

namespace pcstage {
namespace {

void require_training(const Samples& s, const char* stage) {
    if (s.role == Role::Test) {
        throw Error(Errc::StageLegality, std::string(stage) + " may only be applied to training data");
    }
}

// k nearest (Euclidean) members of `members` for each member, excluding
// itself; ties go to the lower row index.
std::vector<Indices> minority_neighbors(const Matrix& x, const Indices& members, std::size_t k) {
    const std::size_t m = members.size();
    std::vector<Indices> out(m);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < m; ++a) {
        dist.clear();
        const auto row_a = x.row(static_cast<Eigen::Index>(members[a]));
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            const double d = (row_a - x.row(static_cast<Eigen::Index>(members[b]))).squaredNorm();
            dist.emplace_back(d, b);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t i = 0; i < k; ++i) out[a].push_back(dist[i].second);
    }
    return out;
}

} // namespace

AugmentResult smote(const Samples& train, const SmoteParams& params) {
    require_training(train, "SMOTE");
    if (params.k_neighbors < 1) throw Error(Errc::InvalidArgument, "SMOTE k_neighbors must be at least 1");
    if (params.ratio && !(*params.ratio > 0.0 && *params.ratio <= 1.0)) {
        throw Error(Errc::InvalidArgument, "SMOTE ratio must lie in (0, 1]");
    }
    const auto counts = count_classes(train.y);
    AugmentResult result;
    result.data = train;
    if (counts[0] == counts[1]) return result;

    const Stage minority = counts[0] < counts[1] ? Stage::Early : Stage::Late;
    const std::size_t n_min = counts[index_of(minority)];
    const std::size_t n_maj = counts[1 - index_of(minority)];
    if (n_min < 2) throw Error(Errc::InvalidArgument, "SMOTE needs at least 2 minority samples");

    const std::size_t target =
        params.ratio ? static_cast<std::size_t>(std::floor(*params.ratio * static_cast<double>(n_maj))) : n_maj;
    if (target <= n_min) return result;
    const std::size_t n_new = target - n_min;

    std::size_t k = params.k_neighbors;
    if (k >= n_min) {
        k = n_min - 1;
        result.warnings.push_back("k_neighbors=" + std::to_string(params.k_neighbors) + " clamped to " +
                                  std::to_string(k) + " (minority class has " + std::to_string(n_min) + " samples)");
    }

    Indices members;
    for (std::size_t i = 0; i < train.y.size(); ++i) {
        if (train.y[i] == minority) members.push_back(i);
    }
    const auto neighbors = minority_neighbors(train.x, members, k);

    const auto n = static_cast<Eigen::Index>(train.size());
    result.data.x.conservativeResize(n + static_cast<Eigen::Index>(n_new), Eigen::NoChange);
    result.data.y.resize(train.size() + n_new, minority);
    result.provenance.reserve(n_new);
    for (std::size_t s = 0; s < n_new; ++s) {
        auto rng = make_rng(params.seed, s);
        const std::size_t a = uniform_index(rng, n_min);
        const std::size_t b = neighbors[a][uniform_index(rng, k)];
        const double delta = uniform_open(rng);
        const auto base = train.x.row(static_cast<Eigen::Index>(members[a]));
        const auto other = train.x.row(static_cast<Eigen::Index>(members[b]));
        const auto out_row = n + static_cast<Eigen::Index>(s);
        result.data.x.row(out_row) = base + delta * (other - base);
        result.provenance.push_back({"smote", static_cast<std::size_t>(out_row), members[a], members[b], delta});
    }
    return result;
}

LabeledDataset smote(const LabeledDataset& train, const SmoteParams& params,
                     std::vector<ProvenanceRecord>* provenance) {
    auto result = smote(to_samples(train, Role::Train), params);
    auto sample_ids = train.matrix().sample_ids();
    for (std::size_t i = train.size(); i < result.data.size(); ++i) {
        sample_ids.push_back("smote_" + std::to_string(i - train.size()));
    }
    if (provenance) *provenance = std::move(result.provenance);
    return LabeledDataset(ExpressionMatrix(std::move(sample_ids), train.matrix().gene_ids(), std::move(result.data.x)),
                          std::move(result.data.y));
}

Matrix sfa(const Matrix& features, const SfaParams& params, std::uint64_t seed) {
    if (params.sigma1 < 0.0 || params.sigma2 < 0.0) throw Error(Errc::InvalidArgument, "SFA sigmas must be >= 0");
    Matrix out(features.rows(), features.cols());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            const double alpha = params.mu + params.sigma1 * standard_normal(rng);
            const double beta = params.sigma2 * standard_normal(rng);
            out(i, j) = alpha * features(i, j) + beta;
        }
    }
    return out;
}

AugmentResult sfa_expand(const Samples& train, const SfaParams& params, std::size_t factor, std::uint64_t seed) {
    require_training(train, "SFA");
    if (factor < 1) throw Error(Errc::InvalidArgument, "augmentation factor must be at least 1");
    AugmentResult result;
    result.data.role = train.role;
    const auto n = train.x.rows();
    result.data.x.resize(n * static_cast<Eigen::Index>(factor), train.x.cols());
    result.data.x.topRows(n) = train.x;
    result.data.y = train.y;
    for (std::size_t copy = 1; copy < factor; ++copy) {
        const auto offset = n * static_cast<Eigen::Index>(copy);
        result.data.x.middleRows(offset, n) = sfa(train.x, params, derive_seed(seed, copy));
        result.data.y.insert(result.data.y.end(), train.y.begin(), train.y.end());
        for (Eigen::Index i = 0; i < n; ++i) {
            result.provenance.push_back(
                {"sfa", static_cast<std::size_t>(offset + i), static_cast<std::size_t>(i), std::nullopt, params.sigma1});
        }
    }
    return result;
}

AugmentResult gaussian_expand(const Samples& train, const NoiseParams& params, std::uint64_t seed) {
    require_training(train, "Gaussian expansion");
    if (params.factor < 1) throw Error(Errc::InvalidArgument, "augmentation factor must be at least 1");
    if (params.sigma < 0.0) throw Error(Errc::InvalidArgument, "noise sigma must be >= 0");
    const auto n = train.x.rows();
    const auto p = train.x.cols();

    Vector scale = Vector::Constant(p, params.sigma);
    if (params.relative && n > 0) {
        const RowVector mean = train.x.colwise().mean();
        const RowVector std = ((train.x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n)).sqrt();
        scale = params.sigma * std.transpose();
    }

    AugmentResult result;
    result.data.role = train.role;
    result.data.x.resize(n * static_cast<Eigen::Index>(params.factor), p);
    result.data.x.topRows(n) = train.x;
    result.data.y = train.y;
    for (std::size_t copy = 1; copy < params.factor; ++copy) {
        const auto offset = n * static_cast<Eigen::Index>(copy);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto rng = make_rng(derive_seed(seed, copy), static_cast<std::uint64_t>(i));
            for (Eigen::Index j = 0; j < p; ++j) {
                result.data.x(offset + i, j) = train.x(i, j) + params.mu + scale(j) * standard_normal(rng);
            }
            result.provenance.push_back(
                {"gaussian", static_cast<std::size_t>(offset + i), static_cast<std::size_t>(i), std::nullopt, params.sigma});
        }
        result.data.y.insert(result.data.y.end(), train.y.begin(), train.y.end());
    }
    return result;
}

void write_provenance_csv(std::ostream& out, std::span<const ProvenanceRecord> records) {
    out << "kind,base_row,neighbor_row,delta_or_sigma\n";
    for (const auto& r : records) {
        out << r.kind << ',' << r.base_row << ',';
        if (r.neighbor_row) out << *r.neighbor_row;
        out << ',' << format_double(r.delta_or_sigma) << '\n';
    }
}

} // namespace pcstage
