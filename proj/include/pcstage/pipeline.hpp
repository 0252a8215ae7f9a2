#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcstage/augment.hpp"
#include "pcstage/classifiers/classifier.hpp"
#include "pcstage/select.hpp"
#include "pcstage/transform.hpp"

namespace pcstage {

enum class Reduction { None, Pca, Ica };
enum class Augmentation { None, Smote, Sfa, Gaussian };

Reduction parse_reduction(std::string_view name);
std::string_view to_string(Reduction r) noexcept;
Augmentation parse_augmentation(std::string_view name);
std::string_view to_string(Augmentation a) noexcept;

struct SelectionStage {
    bool enabled = false;
    double alpha = 0.05;
    ScoreFunc score_func = ScoreFunc::FClassif;
};

struct ReductionStage {
    Reduction method = Reduction::None;
    std::size_t n_components = 100;
    int max_iter = 200; // ICA only
    double tol = 1e-4;
};

struct AugmentStage {
    Augmentation method = Augmentation::None;
    std::size_t k_neighbors = 5;    // SMOTE
    std::optional<double> ratio;    // SMOTE; nullopt balances
    SfaParams sfa{};
    std::size_t sfa_factor = 2;     // SFA: originals plus factor - 1 copies
    NoiseParams noise{};
};

/// Fit-type stages between the raw feature matrix and the classifier, in
/// the order standardize -> select -> reduce -> augment.
struct ModelStages {
    bool standardize = true;
    SelectionStage selection{};
    ReductionStage reduction{};
    AugmentStage augment{};
};

/// The fitted feature stages. transform() applies standardization,
/// selection and reduction; augmentation only ever touches training rows.
class FeaturePipeline {
public:
    struct Fitted;

    /// Fits on `train` (Test-role samples are refused) and returns the
    /// pipeline together with the transformed, augmented training set.
    static Fitted fit(const ModelStages& stages, const Samples& train, std::uint64_t seed);

    Matrix transform(const Matrix& x) const;

    const std::optional<Standardizer>& standardizer() const noexcept { return standardizer_; }
    const std::optional<SelectionMask>& selection() const noexcept { return selection_; }
    const std::optional<PcaModel>& pca() const noexcept { return pca_; }
    const std::optional<IcaModel>& ica() const noexcept { return ica_; }
    std::size_t input_features() const noexcept { return input_features_; }
    std::size_t output_features() const noexcept { return output_features_; }

private:
    std::optional<Standardizer> standardizer_;
    std::optional<SelectionMask> selection_;
    std::optional<PcaModel> pca_;
    std::optional<IcaModel> ica_;
    std::size_t input_features_ = 0;
    std::size_t output_features_ = 0;
};

struct FeaturePipeline::Fitted {
    FeaturePipeline pipeline;
    Samples train; // transformed and augmented
    std::vector<ProvenanceRecord> provenance;
    std::vector<std::string> warnings;
};

/// Feature stages plus classifier.
class FittedPipeline {
public:
    static FittedPipeline fit(const ModelStages& stages, const ClassifierSpec& spec, const Samples& train,
                              std::uint64_t seed);

    std::vector<Stage> predict(const Matrix& x) const { return model_.predict(features_.transform(x)); }

    const FeaturePipeline& features() const noexcept { return features_; }
    const TrainedModel& model() const noexcept { return model_; }
    std::size_t augmented_train_size() const noexcept { return augmented_size_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    FittedPipeline(FeaturePipeline f, TrainedModel m, std::size_t n, std::vector<std::string> w)
        : features_(std::move(f)), model_(std::move(m)), augmented_size_(n), warnings_(std::move(w)) {}

    FeaturePipeline features_;
    TrainedModel model_;
    std::size_t augmented_size_;
    std::vector<std::string> warnings_;
};

nlohmann::json stages_to_json(const ModelStages& stages);

} // namespace pcstage
