#include "pcstage/classifiers/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"
#include "pcstage/random.hpp"

namespace pcstage {

std::size_t mlp_parameter_count(std::size_t input_width, std::span<const std::size_t> widths) noexcept {
    std::size_t total = 0;
    std::size_t prev = input_width;
    for (auto w : widths) {
        total += prev * w + w;
        prev = w;
    }
    return total;
}

std::vector<MultilayerPerceptron::Layer> MultilayerPerceptron::layers() const {
    std::vector<Layer> out;
    std::size_t prev = input_;
    std::size_t offset = 0;
    for (auto w : widths_) {
        out.push_back({prev, w, offset});
        offset += prev * w + w;
        prev = w;
    }
    return out;
}

MultilayerPerceptron MultilayerPerceptron::initialise(std::size_t input_width, std::span<const std::size_t> hidden,
                                                      std::uint64_t seed, bool zero_output_layer) {
    if (input_width == 0) throw Error(Errc::InvalidArgument, "network input width must be positive");
    for (auto w : hidden) {
        if (w == 0) throw Error(Errc::InvalidArgument, "hidden layer widths must be positive");
    }
    MultilayerPerceptron net;
    net.input_ = input_width;
    net.widths_.assign(hidden.begin(), hidden.end());
    net.widths_.push_back(1);
    net.params_ = Vector::Zero(static_cast<Eigen::Index>(mlp_parameter_count(input_width, net.widths_)));

    Rng rng = make_rng(seed, 0x6c70);
    const auto ls = net.layers();
    for (std::size_t l = 0; l < ls.size(); ++l) {
        if (zero_output_layer && l + 1 == ls.size()) break;
        const double limit = std::sqrt(6.0 / static_cast<double>(ls[l].in + ls[l].out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t k = 0; k < ls[l].in * ls[l].out; ++k) net.params_(static_cast<Eigen::Index>(ls[l].offset + k)) = dist(rng);
    }
    return net;
}

void MultilayerPerceptron::set_parameters(Vector p) {
    if (p.size() != params_.size()) throw Error(Errc::ShapeMismatch, "parameter vector has the wrong length");
    params_ = std::move(p);
}

namespace {

using ConstMap = Eigen::Map<const Matrix>;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

} // namespace

Vector MultilayerPerceptron::logits(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != input_) throw Error(Errc::ShapeMismatch, "input width does not match network");
    Matrix a = x;
    const auto ls = layers();
    for (std::size_t l = 0; l < ls.size(); ++l) {
        const ConstMap w(params_.data() + ls[l].offset, static_cast<Eigen::Index>(ls[l].out), static_cast<Eigen::Index>(ls[l].in));
        const Eigen::Map<const RowVector> b(params_.data() + ls[l].offset + ls[l].in * ls[l].out, static_cast<Eigen::Index>(ls[l].out));
        Matrix z = a * w.transpose();
        z.rowwise() += b;
        if (l + 1 < ls.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a.col(0);
}

LossGradient MultilayerPerceptron::loss_and_gradient(const Matrix& x, std::span<const Stage> y) const {
    if (static_cast<std::size_t>(x.cols()) != input_) throw Error(Errc::ShapeMismatch, "input width does not match network");
    if (static_cast<std::size_t>(x.rows()) != y.size() || y.empty()) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    const auto ls = layers();
    const double n = static_cast<double>(x.rows());

    // Forward pass keeping every activation; acts[0] is the input.
    std::vector<Matrix> acts;
    acts.reserve(ls.size() + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < ls.size(); ++l) {
        const ConstMap w(params_.data() + ls[l].offset, static_cast<Eigen::Index>(ls[l].out), static_cast<Eigen::Index>(ls[l].in));
        const Eigen::Map<const RowVector> b(params_.data() + ls[l].offset + ls[l].in * ls[l].out, static_cast<Eigen::Index>(ls[l].out));
        Matrix z = acts.back() * w.transpose();
        z.rowwise() += b;
        if (l + 1 < ls.size()) z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }

    LossGradient out;
    out.gradient = Vector::Zero(params_.size());
    const Vector& logit = acts.back().col(0);
    Matrix delta(x.rows(), 1);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double t = y[static_cast<std::size_t>(i)] == Stage::Late ? 1.0 : 0.0;
        out.loss += softplus(logit(i)) - t * logit(i);
        delta(i, 0) = (1.0 / (1.0 + std::exp(-logit(i))) - t) / n;
    }
    out.loss /= n;

    for (std::size_t l = ls.size(); l-- > 0;) {
        const auto in = static_cast<Eigen::Index>(ls[l].in);
        const auto outw = static_cast<Eigen::Index>(ls[l].out);
        Eigen::Map<Matrix> gw(out.gradient.data() + ls[l].offset, outw, in);
        Eigen::Map<RowVector> gb(out.gradient.data() + ls[l].offset + ls[l].in * ls[l].out, outw);
        gw = delta.transpose() * acts[l];
        gb = delta.colwise().sum();
        if (l == 0) break;
        const ConstMap w(params_.data() + ls[l].offset, outw, in);
        Matrix back = delta * w;
        // ReLU derivative; acts[l] holds the post-activation of layer l - 1.
        delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
    return out;
}

double MultilayerPerceptron::score_row(const Eigen::Ref<const RowVector>& row) const {
    const Matrix x = row;
    return 1.0 / (1.0 + std::exp(-logits(x)(0)));
}

Stage MultilayerPerceptron::predict_row(const Eigen::Ref<const RowVector>& row) const {
    return score_row(row) > 0.5 ? Stage::Late : Stage::Early;
}

MultilayerPerceptron MultilayerPerceptron::fit(const MlpParams& params, const Matrix& x, std::span<const Stage> y,
                                               std::uint64_t seed, bool zero_output_layer) {
    if (params.epochs == 0 || params.batch_size == 0) throw Error(Errc::InvalidArgument, "epochs and batch size must be positive");
    if (!(params.learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning rate must be positive");
    if (!(params.momentum >= 0.0 && params.momentum < 1.0)) throw Error(Errc::InvalidArgument, "momentum must lie in [0, 1)");
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "network needs training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");

    auto net = initialise(static_cast<std::size_t>(x.cols()), params.hidden, seed, zero_output_layer);
    Vector velocity = Vector::Zero(net.params_.size());
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        Rng rng = make_rng(seed, 0x1000 + epoch);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += params.batch_size) {
            const std::size_t stop = std::min(n, start + params.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            const Matrix xb = select_rows(x, rows);
            std::vector<Stage> yb;
            yb.reserve(rows.size());
            for (auto r : rows) yb.push_back(y[r]);
            const auto lg = net.loss_and_gradient(xb, yb);
            if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
                throw Error(Errc::NumericalFailure, "network loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                                        ", batch starting at row " + std::to_string(start));
            }
            epoch_loss += lg.loss * static_cast<double>(rows.size());
            velocity = params.momentum * velocity - params.learning_rate * lg.gradient;
            net.params_ += velocity;
        }
        net.loss_history_.push_back(epoch_loss / static_cast<double>(n));
    }
    return net;
}

nlohmann::json MultilayerPerceptron::to_json() const {
    return {{"input", input_}, {"widths", widths_}, {"parameters", vector_to_json(params_)}, {"loss_history", loss_history_}};
}

MultilayerPerceptron MultilayerPerceptron::from_json(const nlohmann::json& j) {
    MultilayerPerceptron m;
    m.input_ = j.at("input").get<std::size_t>();
    m.widths_ = j.at("widths").get<std::vector<std::size_t>>();
    m.params_ = vector_from_json(j.at("parameters"));
    m.loss_history_ = j.at("loss_history").get<std::vector<double>>();
    if (m.widths_.empty() || m.widths_.back() != 1) throw Error(Errc::Schema, "network must end in a single output");
    if (static_cast<std::size_t>(m.params_.size()) != mlp_parameter_count(m.input_, m.widths_)) {
        throw Error(Errc::Schema, "network parameter count does not match its widths");
    }
    return m;
}

} // namespace pcstage
