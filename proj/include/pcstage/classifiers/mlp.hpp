#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/classifiers/params.hpp"
#include "pcstage/data.hpp"

namespace pcstage {

/// Weights plus biases for dense layers input -> widths[0] -> ... -> widths.back().
std::size_t mlp_parameter_count(std::size_t input_width, std::span<const std::size_t> widths) noexcept;

struct LossGradient {
    double loss = 0.0;
    Vector gradient; // same layout as MultilayerPerceptron::parameters()
};

/// Dense ReLU network with a single sigmoid output trained on binary
/// cross-entropy by mini-batch SGD with classical momentum. Weights use
/// Glorot-uniform initialisation and zero biases.
class MultilayerPerceptron {
public:
    /// Untrained network; zero_output_layer zeroes the last layer so every
    /// initial prediction is exactly 0.5.
    static MultilayerPerceptron initialise(std::size_t input_width, std::span<const std::size_t> hidden,
                                           std::uint64_t seed, bool zero_output_layer = false);

    static MultilayerPerceptron fit(const MlpParams& params, const Matrix& x, std::span<const Stage> y,
                                    std::uint64_t seed, bool zero_output_layer = false);

    /// Mean binary cross-entropy over the rows of x and its gradient.
    LossGradient loss_and_gradient(const Matrix& x, std::span<const Stage> y) const;

    Vector logits(const Matrix& x) const;
    double score_row(const Eigen::Ref<const RowVector>& row) const;
    Stage predict_row(const Eigen::Ref<const RowVector>& row) const;

    /// Flattened [W1 (column-major), b1, W2, b2, ...].
    const Vector& parameters() const noexcept { return params_; }
    void set_parameters(Vector p);
    const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    std::size_t input_width() const noexcept { return input_; }
    /// Mean training loss per epoch.
    const std::vector<double>& loss_history() const noexcept { return loss_history_; }

    nlohmann::json to_json() const;
    static MultilayerPerceptron from_json(const nlohmann::json& j);

private:
    struct Layer {
        std::size_t in;
        std::size_t out;
        std::size_t offset; // start of W; b follows at offset + in * out
    };
    std::vector<Layer> layers() const;

    std::size_t input_ = 0;
    std::vector<std::size_t> widths_; // hidden widths followed by 1
    Vector params_;
    std::vector<double> loss_history_;
};

} // namespace pcstage
