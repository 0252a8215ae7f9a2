#include "pcstage/pipeline.hpp"

#include <algorithm>
#include <string>

#include "pcstage/error.hpp"
#include "pcstage/random.hpp"

namespace pcstage {

Reduction parse_reduction(std::string_view name) {
    if (name == "none") return Reduction::None;
    if (name == "pca") return Reduction::Pca;
    if (name == "ica") return Reduction::Ica;
    throw Error(Errc::Schema, "unknown reduction '" + std::string(name) + "'");
}

std::string_view to_string(Reduction r) noexcept {
    switch (r) {
    case Reduction::None: return "none";
    case Reduction::Pca: return "pca";
    case Reduction::Ica: return "ica";
    }
    return "?";
}

Augmentation parse_augmentation(std::string_view name) {
    if (name == "none") return Augmentation::None;
    if (name == "smote") return Augmentation::Smote;
    if (name == "sfa") return Augmentation::Sfa;
    if (name == "gaussian") return Augmentation::Gaussian;
    throw Error(Errc::Schema, "unknown augmentation '" + std::string(name) + "'");
}

std::string_view to_string(Augmentation a) noexcept {
    switch (a) {
    case Augmentation::None: return "none";
    case Augmentation::Smote: return "smote";
    case Augmentation::Sfa: return "sfa";
    case Augmentation::Gaussian: return "gaussian";
    }
    return "?";
}

FeaturePipeline::Fitted FeaturePipeline::fit(const ModelStages& stages, const Samples& train, std::uint64_t seed) {
    if (train.role == Role::Test) throw Error(Errc::StageLegality, "feature stages may only be fitted on training data");
    if (train.size() == 0) throw Error(Errc::EmptyInput, "no training samples");

    Fitted out;
    FeaturePipeline& fp = out.pipeline;
    fp.input_features_ = static_cast<std::size_t>(train.x.cols());
    Matrix x = train.x;

    if (stages.standardize) {
        fp.standardizer_ = fit_standardizer(x);
        x = apply_standardizer(*fp.standardizer_, x);
    }
    if (stages.selection.enabled) {
        const auto scores = anova_f_classif(x, train.y);
        fp.selection_ = select_fpr(scores, stages.selection.alpha);
        x = project(x, *fp.selection_);
    }
    if (stages.reduction.method != Reduction::None) {
        const auto limit = std::min<std::size_t>(static_cast<std::size_t>(x.rows()) - 1, static_cast<std::size_t>(x.cols()));
        std::size_t k = stages.reduction.n_components;
        if (k > limit) {
            out.warnings.push_back("n_components " + std::to_string(k) + " reduced to " + std::to_string(limit) +
                                   " to fit the training data");
            k = limit;
        }
        if (stages.reduction.method == Reduction::Pca) {
            fp.pca_ = pca_fit(x, k);
            x = pca_transform(*fp.pca_, x);
        } else {
            fp.ica_ = ica_fit(x, {k, stages.reduction.max_iter, stages.reduction.tol, derive_seed(seed, 0x1ca)});
            if (!fp.ica_->converged) out.warnings.push_back("ICA did not converge");
            x = ica_transform(*fp.ica_, x);
        }
    }
    fp.output_features_ = static_cast<std::size_t>(x.cols());

    Samples prepared{std::move(x), train.y, Role::Train};
    const auto& aug = stages.augment;
    const std::uint64_t aug_seed = derive_seed(seed, 0xa06);
    switch (aug.method) {
    case Augmentation::None: out.train = std::move(prepared); break;
    case Augmentation::Smote: {
        auto r = smote(prepared, {aug.k_neighbors, aug.ratio, aug_seed});
        out.train = std::move(r.data);
        out.provenance = std::move(r.provenance);
        out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
        break;
    }
    case Augmentation::Sfa: {
        auto r = sfa_expand(prepared, aug.sfa, aug.sfa_factor, aug_seed);
        out.train = std::move(r.data);
        out.provenance = std::move(r.provenance);
        break;
    }
    case Augmentation::Gaussian: {
        auto r = gaussian_expand(prepared, aug.noise, aug_seed);
        out.train = std::move(r.data);
        out.provenance = std::move(r.provenance);
        break;
    }
    }
    out.train.role = Role::Train;
    return out;
}

Matrix FeaturePipeline::transform(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != input_features_) {
        throw Error(Errc::ShapeMismatch, "expected " + std::to_string(input_features_) + " features, got " +
                                             std::to_string(x.cols()));
    }
    Matrix out = standardizer_ ? apply_standardizer(*standardizer_, x) : x;
    if (selection_) out = project(out, *selection_);
    if (pca_) out = pca_transform(*pca_, out);
    if (ica_) out = ica_transform(*ica_, out);
    return out;
}

FittedPipeline FittedPipeline::fit(const ModelStages& stages, const ClassifierSpec& spec, const Samples& train,
                                   std::uint64_t seed) {
    auto fitted = FeaturePipeline::fit(stages, train, seed);
    auto model = TrainedModel::fit(spec, fitted.train, derive_seed(seed, 0xc1a));
    const auto n = fitted.train.size();
    return FittedPipeline(std::move(fitted.pipeline), std::move(model), n, std::move(fitted.warnings));
}

nlohmann::json stages_to_json(const ModelStages& s) {
    nlohmann::json aug = {{"method", to_string(s.augment.method)}};
    switch (s.augment.method) {
    case Augmentation::None: break;
    case Augmentation::Smote:
        aug["k_neighbors"] = s.augment.k_neighbors;
        aug["ratio"] = s.augment.ratio ? nlohmann::json(*s.augment.ratio) : nlohmann::json(nullptr);
        break;
    case Augmentation::Sfa:
        aug["mu"] = s.augment.sfa.mu;
        aug["sigma1"] = s.augment.sfa.sigma1;
        aug["sigma2"] = s.augment.sfa.sigma2;
        aug["factor"] = s.augment.sfa_factor;
        break;
    case Augmentation::Gaussian:
        aug["mu"] = s.augment.noise.mu;
        aug["sigma"] = s.augment.noise.sigma;
        aug["relative"] = s.augment.noise.relative;
        aug["factor"] = s.augment.noise.factor;
        break;
    }
    return {{"standardize", s.standardize},
            {"selection",
             {{"enabled", s.selection.enabled},
              {"alpha", s.selection.alpha},
              {"score_func", to_string(s.selection.score_func)}}},
            {"transform",
             {{"method", to_string(s.reduction.method)},
              {"n_components", s.reduction.n_components},
              {"max_iter", s.reduction.max_iter},
              {"tol", s.reduction.tol}}},
            {"augmentation", aug}};
}

} // namespace pcstage
