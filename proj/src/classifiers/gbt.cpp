#include "pcstage/classifiers/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcstage/error.hpp"

namespace pcstage {
namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean_log_loss(const Vector& margin, const Vector& target) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) s += softplus(margin(i)) - target(i) * margin(i);
    return s / static_cast<double>(margin.size());
}

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }
double structure_score(double g, double h, double lambda) { return g * g / (h + lambda); }

class TreeBuilder {
public:
    TreeBuilder(const GbtParams& params, const Matrix& x, const Vector& grad, const Vector& hess)
        : params_(params), x_(x), grad_(grad), hess_(hess) {}

    std::vector<RegressionNode> build() {
        std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    int grow(std::vector<std::size_t>& rows, std::size_t depth) {
        double g = 0.0;
        double h = 0.0;
        for (auto r : rows) {
            g += grad_(static_cast<Eigen::Index>(r));
            h += hess_(static_cast<Eigen::Index>(r));
        }
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        nodes_[static_cast<std::size_t>(id)].value = leaf_weight(g, h, params_.reg_lambda);
        if (depth >= params_.max_depth || rows.size() < 2) return id;

        const Split best = find_split(rows, g, h);
        if (best.feature < 0) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto r : rows) {
            (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int rt = grow(right, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = rt;
        return id;
    }

    Split find_split(const std::vector<std::size_t>& rows, double g, double h) const {
        const double lambda = params_.reg_lambda;
        const double parent = structure_score(g, h, lambda);
        Split best;
        std::vector<std::pair<double, std::size_t>> order(rows.size());
        for (Eigen::Index f = 0; f < x_.cols(); ++f) {
            for (std::size_t k = 0; k < rows.size(); ++k) order[k] = {x_(static_cast<Eigen::Index>(rows[k]), f), rows[k]};
            std::sort(order.begin(), order.end());
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                gl += grad_(static_cast<Eigen::Index>(order[k].second));
                hl += hess_(static_cast<Eigen::Index>(order[k].second));
                if (order[k].first == order[k + 1].first) continue;
                const double hr = h - hl;
                if (hl < params_.min_child_weight || hr < params_.min_child_weight) continue;
                const double gain =
                    0.5 * (structure_score(gl, hl, lambda) + structure_score(g - gl, hr, lambda) - parent) -
                    params_.min_split_gain;
                // Strict improvement keeps the lowest feature, then the lowest threshold.
                if (gain > 1e-12 && gain > best.gain + 1e-12) best = {static_cast<int>(f), order[k].first, gain};
            }
        }
        return best;
    }

    const GbtParams& params_;
    const Matrix& x_;
    const Vector& grad_;
    const Vector& hess_;
    std::vector<RegressionNode> nodes_;
};

double evaluate(const std::vector<RegressionNode>& nodes, const Eigen::Ref<const RowVector>& row) {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        i = static_cast<std::size_t>(row(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
    }
    return nodes[i].value;
}

} // namespace

GradientBoostedTrees GradientBoostedTrees::fit(const GbtParams& params, const Matrix& x, std::span<const Stage> y) {
    if (!(params.learning_rate >= 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be >= 0");
    if (!(params.reg_lambda >= 0.0)) throw Error(Errc::InvalidArgument, "reg_lambda must be >= 0");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "boosting needs training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    const auto counts = count_classes(y);
    if (counts[0] == 0 || counts[1] == 0) throw Error(Errc::SingleClass, "boosting needs both classes");

    const auto n = x.rows();
    Vector target(n);
    for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)] == Stage::Late ? 1.0 : 0.0;

    GradientBoostedTrees model;
    const double prevalence = static_cast<double>(counts[1]) / static_cast<double>(n);
    model.base_score_ = std::log(prevalence / (1.0 - prevalence));

    Vector margin = Vector::Constant(n, model.base_score_);
    double loss = mean_log_loss(margin, target);
    model.loss_history_.push_back(loss);

    Vector grad(n);
    Vector hess(n);
    Vector update(n);
    for (std::size_t round = 0; round < params.n_estimators; ++round) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(margin(i));
            grad(i) = p - target(i);
            hess(i) = p * (1.0 - p);
        }
        auto tree = TreeBuilder(params, x, grad, hess).build();
        for (Eigen::Index i = 0; i < n; ++i) update(i) = evaluate(tree, x.row(i));

        double step = params.learning_rate;
        double next_loss = mean_log_loss(margin + step * update, target);
        for (int halving = 0; next_loss > loss && halving < 60; ++halving) {
            step *= 0.5;
            next_loss = mean_log_loss(margin + step * update, target);
        }
        if (next_loss > loss) {
            step = 0.0;
            next_loss = loss;
        }
        if (!std::isfinite(next_loss)) throw Error(Errc::NumericalFailure, "boosting loss is not finite");
        margin += step * update;
        loss = next_loss;
        model.loss_history_.push_back(loss);
        model.trees_.push_back(std::move(tree));
        model.step_.push_back(step);
    }
    return model;
}

GradientBoostedTrees GradientBoostedTrees::prefix(std::size_t n) const {
    if (n > trees_.size()) throw Error(Errc::InvalidArgument, "boosting prefix out of range");
    GradientBoostedTrees m;
    m.base_score_ = base_score_;
    m.trees_.assign(trees_.begin(), trees_.begin() + static_cast<std::ptrdiff_t>(n));
    m.step_.assign(step_.begin(), step_.begin() + static_cast<std::ptrdiff_t>(n));
    m.loss_history_.assign(loss_history_.begin(), loss_history_.begin() + static_cast<std::ptrdiff_t>(n) + 1);
    return m;
}

double GradientBoostedTrees::margin_row(const Eigen::Ref<const RowVector>& row) const {
    double m = base_score_;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        if (step_[t] != 0.0) m += step_[t] * evaluate(trees_[t], row);
    }
    return m;
}

Stage GradientBoostedTrees::predict_row(const Eigen::Ref<const RowVector>& row) const {
    return margin_row(row) > 0.0 ? Stage::Late : Stage::Early;
}

double GradientBoostedTrees::score_row(const Eigen::Ref<const RowVector>& row) const { return sigmoid(margin_row(row)); }

nlohmann::json GradientBoostedTrees::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : tree) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        trees.push_back(std::move(nodes));
    }
    return {{"base_score", base_score_}, {"steps", step_}, {"loss_history", loss_history_}, {"trees", trees}};
}

GradientBoostedTrees GradientBoostedTrees::from_json(const nlohmann::json& j) {
    GradientBoostedTrees m;
    m.base_score_ = j.at("base_score").get<double>();
    m.step_ = j.at("steps").get<std::vector<double>>();
    m.loss_history_ = j.at("loss_history").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
        std::vector<RegressionNode> nodes;
        for (const auto& n : t) {
            nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                             n.at(4).get<double>()});
        }
        const auto size = static_cast<int>(nodes.size());
        if (size == 0) throw Error(Errc::Schema, "empty boosted tree");
        for (int i = 0; i < size; ++i) {
            const auto& node = nodes[static_cast<std::size_t>(i)];
            if (node.feature >= 0 && (node.left <= i || node.left >= size || node.right <= i || node.right >= size)) {
                throw Error(Errc::Schema, "boosted tree node links out of range");
            }
        }
        m.trees_.push_back(std::move(nodes));
    }
    if (m.step_.size() != m.trees_.size()) throw Error(Errc::Schema, "boosting step count mismatch");
    return m;
}

} // namespace pcstage
