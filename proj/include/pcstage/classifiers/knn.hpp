#pragma once

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"

namespace pcstage {

double distance(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b, DistanceMetric metric);

/// Lazy learner over the stored training set. Neighbours are ordered by
/// (distance, training index). Distance weighting uses 1/d, except that
/// exact matches (d = 0), when present, carry all the weight. A tied vote
/// goes to the class of the nearest neighbour.
class KNearestNeighbors {
public:
    static KNearestNeighbors fit(const KnnParams& params, const Matrix& x, std::span<const Stage> y);

    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;
    /// Weighted share of the Late vote.
    double score_row(const Eigen::Ref<const RowVector>& row) const;

    nlohmann::json to_json() const;
    static KNearestNeighbors from_json(const KnnParams& params, const nlohmann::json& j);

private:
    struct Vote {
        double early = 0.0;
        double late = 0.0;
        Stage nearest = Stage::Early;
    };
    Vote vote(const Eigen::Ref<const RowVector>& row) const;

    KnnParams params_;
    Matrix x_;
    std::vector<Stage> y_;
};

} // namespace pcstage
