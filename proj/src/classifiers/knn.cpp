#include "pcstage/classifiers/knn.hpp"

#include <algorithm>
#include <cmath>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"

namespace pcstage {

double distance(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b, DistanceMetric metric) {
    if (metric == DistanceMetric::Manhattan) return (a - b).cwiseAbs().sum();
    return std::sqrt((a - b).squaredNorm());
}

KNearestNeighbors KNearestNeighbors::fit(const KnnParams& params, const Matrix& x, std::span<const Stage> y) {
    if (params.n_neighbors < 1) throw Error(Errc::InvalidArgument, "n_neighbors must be at least 1");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "k-NN needs training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    KNearestNeighbors model;
    model.params_ = params;
    model.x_ = x;
    model.y_.assign(y.begin(), y.end());
    return model;
}

KNearestNeighbors::Vote KNearestNeighbors::vote(const Eigen::Ref<const RowVector>& row) const {
    const auto n = static_cast<std::size_t>(x_.rows());
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {distance(row, x_.row(static_cast<Eigen::Index>(i)), params_.metric), i};
    const std::size_t k = std::min(params_.n_neighbors, n);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    Vote v;
    v.nearest = y_[dist[0].second];
    const bool exact = params_.weights == KnnWeights::Distance && dist[0].first == 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double w = 1.0;
        if (params_.weights == KnnWeights::Distance) {
            if (exact) {
                if (dist[i].first != 0.0) break;
            } else {
                w = 1.0 / dist[i].first;
            }
        }
        (y_[dist[i].second] == Stage::Late ? v.late : v.early) += w;
    }
    return v;
}

Stage KNearestNeighbors::predict_row(const Eigen::Ref<const RowVector>& row) const {
    const auto v = vote(row);
    if (v.late > v.early) return Stage::Late;
    if (v.early > v.late) return Stage::Early;
    return v.nearest;
}

double KNearestNeighbors::score_row(const Eigen::Ref<const RowVector>& row) const {
    const auto v = vote(row);
    return v.late / (v.late + v.early);
}

nlohmann::json KNearestNeighbors::to_json() const {
    std::vector<int> labels;
    for (auto s : y_) labels.push_back(static_cast<int>(index_of(s)));
    return {{"x", matrix_to_json(x_)}, {"y", labels}};
}

KNearestNeighbors KNearestNeighbors::from_json(const KnnParams& params, const nlohmann::json& j) {
    std::vector<Stage> y;
    for (int v : j.at("y").get<std::vector<int>>()) y.push_back(v ? Stage::Late : Stage::Early);
    return fit(params, matrix_from_json(j.at("x")), y);
}

} // namespace pcstage
