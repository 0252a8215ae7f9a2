#include "pcstage/classifiers/forest.hpp"

#include <numeric>

#include "pcstage/error.hpp"

namespace pcstage {

RandomForest RandomForest::fit(const ForestParams& params, const Matrix& x, std::span<const Stage> y,
                               std::uint64_t seed) {
    if (params.n_estimators < 1) throw Error(Errc::InvalidArgument, "n_estimators must be at least 1");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "random forest needs training samples");
    const TreeParams tree_params{params.criterion, params.max_depth, params.min_samples_split,
                                 params.min_samples_leaf, params.max_features};
    const auto n = static_cast<std::size_t>(x.rows());
    RandomForest forest;
    forest.trees_.reserve(params.n_estimators);
    if (y.size() != n) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    const FeatureRanks ranks(x);
    Indices rows(n);
    for (std::size_t t = 0; t < params.n_estimators; ++t) {
        Rng rng(derive_seed(seed, t));
        if (params.bootstrap) {
            for (auto& r : rows) r = uniform_index(rng, n);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        forest.trees_.push_back(DecisionTree::fit(tree_params, ranks, y, rows, rng));
    }
    return forest;
}

RandomForest RandomForest::prefix(std::size_t n) const {
    if (n < 1 || n > trees_.size()) throw Error(Errc::InvalidArgument, "forest prefix out of range");
    RandomForest f;
    f.trees_.assign(trees_.begin(), trees_.begin() + static_cast<std::ptrdiff_t>(n));
    return f;
}

Stage RandomForest::predict_row(const Eigen::Ref<const RowVector>& row) const {
    std::size_t late = 0;
    for (const auto& t : trees_) late += t.predict_row(row) == Stage::Late ? 1 : 0;
    return 2 * late > trees_.size() ? Stage::Late : Stage::Early;
}

double RandomForest::score_row(const Eigen::Ref<const RowVector>& row) const {
    std::size_t late = 0;
    for (const auto& t : trees_) late += t.predict_row(row) == Stage::Late ? 1 : 0;
    return static_cast<double>(late) / static_cast<double>(trees_.size());
}

nlohmann::json RandomForest::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return trees;
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
    RandomForest forest;
    for (const auto& t : j) forest.trees_.push_back(DecisionTree::from_json(t));
    if (forest.trees_.empty()) throw Error(Errc::Schema, "forest has no trees");
    return forest;
}

} // namespace pcstage
