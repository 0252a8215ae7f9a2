#include "pcstage/classifiers/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcstage/error.hpp"

namespace pcstage {

double gini_impurity(std::size_t early, std::size_t late) noexcept {
    const double n = static_cast<double>(early + late);
    if (n == 0.0) return 0.0;
    const double pe = static_cast<double>(early) / n;
    const double pl = static_cast<double>(late) / n;
    return 1.0 - pe * pe - pl * pl;
}

double entropy_impurity(std::size_t early, std::size_t late) noexcept {
    const double n = static_cast<double>(early + late);
    double h = 0.0;
    for (auto c : {early, late}) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

FeatureRanks::FeatureRanks(const Matrix& x) : rows_(static_cast<std::size_t>(x.rows())) {
    const auto p = static_cast<std::size_t>(x.cols());
    ranks_.resize(rows_ * p);
    offsets_.reserve(p + 1);
    offsets_.push_back(0);
    std::vector<std::pair<double, std::size_t>> sorted(rows_);
    for (std::size_t f = 0; f < p; ++f) {
        const auto col = x.col(static_cast<Eigen::Index>(f));
        for (std::size_t i = 0; i < rows_; ++i) sorted[i] = {col(static_cast<Eigen::Index>(i)), i};
        std::sort(sorted.begin(), sorted.end());
        std::uint32_t rank = 0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const double v = sorted[i].first;
            if (i > 0 && v != values_.back()) ++rank;
            if (i == 0 || v != values_.back()) values_.push_back(v);
            ranks_[f * rows_ + sorted[i].second] = rank;
        }
        offsets_.push_back(values_.size());
    }
}

namespace {

class Builder {
public:
    Builder(const TreeParams& params, const FeatureRanks& ranks, std::span<const Stage> y, Rng& rng)
        : params_(params), ranks_(ranks), y_(y), rng_(rng), n_try_(params.max_features.resolve(ranks.features())),
          features_(ranks.features()) {
        std::size_t widest = 0;
        for (std::size_t f = 0; f < ranks.features(); ++f) widest = std::max(widest, ranks.levels(f));
        bucket_early_.assign(widest, 0);
        bucket_late_.assign(widest, 0);
    }

    std::vector<TreeNode> run(Indices rows) {
        build(rows, 0);
        return std::move(nodes_);
    }

private:
    struct Split {
        int feature = -1;
        std::uint32_t rank = 0;
        double gain = 0.0;
    };

    int build(Indices& rows, std::size_t depth) {
        std::size_t late = 0;
        for (auto r : rows) late += y_[r] == Stage::Late ? 1 : 0;
        const std::size_t m = rows.size();
        const std::size_t early = m - late;

        const int index = static_cast<int>(nodes_.size());
        TreeNode leaf;
        leaf.samples = m;
        leaf.late_fraction = m ? static_cast<double>(late) / static_cast<double>(m) : 0.0;
        leaf.label = late > early ? Stage::Late : Stage::Early;
        nodes_.push_back(leaf);

        const bool stop = (params_.max_depth && depth >= *params_.max_depth) || m < params_.min_samples_split ||
                          m < 2 * params_.min_samples_leaf || late == 0 || early == 0;
        if (stop) return index;

        const Split split = params_.criterion == Criterion::Gini ? best_split<true>(rows, early, late)
                                                                 : best_split<false>(rows, early, late);
        if (split.feature < 0) return index;

        const auto f = static_cast<std::size_t>(split.feature);
        Indices left;
        Indices right;
        for (auto r : rows) (ranks_.rank(r, f) <= split.rank ? left : right).push_back(r);
        Indices().swap(rows);
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(index)];
        node.feature = split.feature;
        node.threshold = ranks_.value(f, split.rank);
        node.left = l;
        node.right = r;
        return index;
    }

    void draw_features() {
        const auto p = ranks_.features();
        features_.resize(p);
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        if (n_try_ < p) {
            for (std::size_t i = 0; i < n_try_; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, p - 1);
                std::swap(features_[i], features_[pick(rng_)]);
            }
            features_.resize(n_try_);
            std::sort(features_.begin(), features_.end());
        }
    }

    // Impurity times node size.
    template <bool Gini>
    static double weighted_impurity(std::size_t early, std::size_t late) noexcept {
        const double n = static_cast<double>(early + late);
        if constexpr (Gini) {
            if (n == 0.0) return 0.0;
            const double e = static_cast<double>(early);
            const double l = static_cast<double>(late);
            return n - (e * e + l * l) / n;
        } else {
            return entropy_impurity(early, late) * n;
        }
    }

    // Candidate thresholds are visited in ascending order; a split between
    // the group ending at `rank` and the next present value.
    template <bool Gini>
    void consider(Split& best, double parent, std::size_t f, std::uint32_t rank, std::size_t nl, std::size_t left_late,
                  std::size_t m, std::size_t early, std::size_t late) const {
        const std::size_t nr = m - nl;
        if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf) return;
        const std::size_t left_early = nl - left_late;
        const double child =
            weighted_impurity<Gini>(left_early, left_late) + weighted_impurity<Gini>(early - left_early, late - left_late);
        const double gain = parent - child;
        if (gain > best.gain && gain > 1e-12) best = {static_cast<int>(f), rank, gain};
    }

    template <bool Gini>
    Split best_split(const Indices& rows, std::size_t early, std::size_t late) {
        const std::size_t m = rows.size();
        const double parent = weighted_impurity<Gini>(early, late);
        std::size_t log_m = 1;
        while ((std::size_t{1} << log_m) < m) ++log_m;
        Split best;
        draw_features();
        for (auto f : features_) {
            const auto levels = ranks_.levels(f);
            if (levels < 2) continue;
            if (m * log_m * 3 >= levels) {
                // Counting pass over the feature's rank range.
                for (auto r : rows) {
                    auto& bucket = y_[r] == Stage::Late ? bucket_late_ : bucket_early_;
                    ++bucket[ranks_.rank(r, f)];
                }
                std::size_t nl = 0;
                std::size_t left_late = 0;
                for (std::uint32_t k = 0; k < levels; ++k) {
                    const std::size_t e = bucket_early_[k];
                    const std::size_t l = bucket_late_[k];
                    if (e + l == 0) continue;
                    bucket_early_[k] = 0;
                    bucket_late_[k] = 0;
                    nl += e + l;
                    left_late += l;
                    if (nl < m) consider<Gini>(best, parent, f, k, nl, left_late, m, early, late);
                }
            } else {
                keys_.resize(m);
                for (std::size_t i = 0; i < m; ++i) {
                    keys_[i] = (ranks_.rank(rows[i], f) << 1) | (y_[rows[i]] == Stage::Late ? 1u : 0u);
                }
                std::sort(keys_.begin(), keys_.end());
                std::size_t left_late = 0;
                for (std::size_t i = 0; i + 1 < m; ++i) {
                    left_late += keys_[i] & 1u;
                    if ((keys_[i] >> 1) == (keys_[i + 1] >> 1)) continue;
                    consider<Gini>(best, parent, f, keys_[i] >> 1, i + 1, left_late, m, early, late);
                }
            }
        }
        return best;
    }

    const TreeParams& params_;
    const FeatureRanks& ranks_;
    std::span<const Stage> y_;
    Rng& rng_;
    std::size_t n_try_;
    Indices features_;
    std::vector<std::uint32_t> keys_;
    std::vector<std::size_t> bucket_early_;
    std::vector<std::size_t> bucket_late_;
    std::vector<TreeNode> nodes_;
};

} // namespace

DecisionTree DecisionTree::fit(const TreeParams& params, const FeatureRanks& ranks, std::span<const Stage> y,
                               std::span<const std::size_t> rows, Rng& rng) {
    if (rows.empty() || ranks.rows() == 0) throw Error(Errc::EmptyInput, "decision tree needs training samples");
    if (ranks.rows() != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    Builder builder(params, ranks, y, rng);
    DecisionTree tree;
    tree.nodes_ = builder.run(Indices(rows.begin(), rows.end()));
    return tree;
}

DecisionTree DecisionTree::fit(const TreeParams& params, const Matrix& x, std::span<const Stage> y,
                               std::span<const std::size_t> rows, Rng& rng) {
    if (rows.empty() || x.rows() == 0) throw Error(Errc::EmptyInput, "decision tree needs training samples");
    return fit(params, FeatureRanks(x), y, rows, rng);
}

DecisionTree DecisionTree::fit(const TreeParams& params, const Matrix& x, std::span<const Stage> y,
                               std::uint64_t seed) {
    Indices rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x7ee));
    return fit(params, x, y, rows, rng);
}

const TreeNode& DecisionTree::leaf_for(const Eigen::Ref<const RowVector>& row) const {
    const TreeNode* node = &nodes_.front();
    while (node->feature >= 0) {
        node = &nodes_[static_cast<std::size_t>(row(node->feature) <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

Stage DecisionTree::predict_row(const Eigen::Ref<const RowVector>& row) const { return leaf_for(row).label; }

double DecisionTree::score_row(const Eigen::Ref<const RowVector>& row) const { return leaf_for(row).late_fraction; }

std::size_t DecisionTree::depth() const noexcept {
    std::size_t deepest = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [idx, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const auto& node = nodes_[static_cast<std::size_t>(idx)];
        if (node.feature >= 0) {
            stack.emplace_back(node.left, d + 1);
            stack.emplace_back(node.right, d + 1);
        }
    }
    return deepest;
}

nlohmann::json DecisionTree::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, index_of(n.label), n.late_fraction, n.samples});
    }
    return nodes;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
    DecisionTree tree;
    for (const auto& n : j) {
        TreeNode node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.label = static_cast<Stage>(n.at(4).get<int>());
        node.late_fraction = n.at(5).get<double>();
        node.samples = n.at(6).get<std::size_t>();
        tree.nodes_.push_back(node);
    }
    if (tree.nodes_.empty()) throw Error(Errc::Schema, "tree has no nodes");
    const auto n = static_cast<int>(tree.nodes_.size());
    for (const auto& node : tree.nodes_) {
        if (node.feature >= 0 && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n)) {
            throw Error(Errc::Schema, "tree node links out of range");
        }
    }
    return tree;
}

} // namespace pcstage
