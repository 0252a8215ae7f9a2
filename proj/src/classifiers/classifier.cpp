#include "pcstage/classifiers/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>

#include "pcstage/error.hpp"
#include "pcstage/json_io.hpp"

namespace pcstage {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    throw Error(Errc::InvalidArgument, "hyperparameter '" + key + "': " + what);
}

// Pulls typed values out of a JSON object, remembering which keys were used
// so leftovers can be rejected.
class Reader {
public:
    explicit Reader(const nlohmann::json& j) : j_(j) {
        if (!j_.is_object() && !j_.is_null()) throw Error(Errc::InvalidArgument, "hyperparameters must be a JSON object");
    }

    const nlohmann::json* find(const std::string& key) {
        if (!j_.is_object() || !j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    void count(const std::string& key, std::size_t& out, std::size_t min) {
        if (const auto* v = find(key)) out = as_count(key, *v, min);
    }

    void optional_count(const std::string& key, std::optional<std::size_t>& out, std::size_t min) {
        if (const auto* v = find(key)) {
            if (v->is_null() || (v->is_string() && lower(v->get<std::string>()) == "none")) {
                out.reset();
            } else {
                out = as_count(key, *v, min);
            }
        }
    }

    void real(const std::string& key, double& out, double min, bool strict, double max = HUGE_VAL) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) bad(key, "expected a number");
            const double d = v->get<double>();
            if (!std::isfinite(d) || (strict ? !(d > min) : !(d >= min)) || d > max) bad(key, "value out of range");
            out = d;
        }
    }

    template <class E>
    void choice(const std::string& key, E& out, std::initializer_list<std::pair<const char*, E>> options) {
        const auto* v = find(key);
        if (!v) return;
        std::string name = v->is_null() ? "none" : (v->is_string() ? lower(v->get<std::string>()) : "");
        for (const auto& [n, e] : options) {
            if (name == n) {
                out = e;
                return;
            }
        }
        bad(key, "unrecognised value " + v->dump());
    }

    void finish() const {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items()) {
            if (!used_.contains(key)) throw Error(Errc::InvalidArgument, "unknown hyperparameter '" + key + "'");
        }
    }

    static std::size_t as_count(const std::string& key, const nlohmann::json& v, std::size_t min) {
        if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) {
            const auto n = v.get<std::size_t>();
            if (n < min) bad(key, "must be at least " + std::to_string(min));
            return n;
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= static_cast<double>(min) && d == std::floor(d) && d < 1e15) return static_cast<std::size_t>(d);
        }
        bad(key, "expected an integer >= " + std::to_string(min));
    }

private:
    const nlohmann::json& j_;
    std::set<std::string> used_;
};

void read_max_features(Reader& r, MaxFeatures& out) {
    const auto* v = r.find("max_features");
    if (!v) return;
    if (v->is_null() || (v->is_string() && lower(v->get<std::string>()) == "none")) {
        out = {MaxFeatures::Mode::All, 0};
    } else if (v->is_string() && lower(v->get<std::string>()) == "sqrt") {
        out = {MaxFeatures::Mode::Sqrt, 0};
    } else {
        out = {MaxFeatures::Mode::Count, Reader::as_count("max_features", *v, 1)};
    }
}

nlohmann::json max_features_json(const MaxFeatures& m) {
    switch (m.mode) {
    case MaxFeatures::Mode::All: return nullptr;
    case MaxFeatures::Mode::Sqrt: return "sqrt";
    case MaxFeatures::Mode::Count: return m.count;
    }
    return nullptr;
}

nlohmann::json optional_json(const std::optional<std::size_t>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

const char* name(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

const char* name(Penalty p) {
    switch (p) {
    case Penalty::L1: return "l1";
    case Penalty::L2: return "l2";
    case Penalty::ElasticNet: return "elasticnet";
    case Penalty::None: return "none";
    }
    return "";
}

const char* name(Kernel k) {
    switch (k) {
    case Kernel::Linear: return "linear";
    case Kernel::Poly: return "poly";
    case Kernel::Rbf: return "rbf";
    case Kernel::Sigmoid: return "sigmoid";
    }
    return "";
}

constexpr std::initializer_list<std::pair<const char*, Criterion>> kCriteria{{"gini", Criterion::Gini},
                                                                           {"entropy", Criterion::Entropy}};

} // namespace

std::size_t MaxFeatures::resolve(std::size_t n_features) const noexcept {
    switch (mode) {
    case Mode::All: return n_features;
    case Mode::Sqrt: {
        auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
        while ((k + 1) * (k + 1) <= n_features) ++k;
        while (k * k > n_features) --k;
        return std::max<std::size_t>(1, std::min(k, n_features));
    }
    case Mode::Count: return std::min(count, n_features);
    }
    return n_features;
}

ClassifierKind parse_classifier_kind(std::string_view text) {
    const auto s = lower(text);
    if (s == "dt") return ClassifierKind::DT;
    if (s == "rf") return ClassifierKind::RF;
    if (s == "knn") return ClassifierKind::KNN;
    if (s == "nb") return ClassifierKind::NB;
    if (s == "lr") return ClassifierKind::LR;
    if (s == "svm") return ClassifierKind::SVM;
    if (s == "gbt" || s == "xgb") return ClassifierKind::GBT;
    if (s == "mlp") return ClassifierKind::MLP;
    throw Error(Errc::InvalidArgument, "unknown classifier '" + std::string(text) + "'");
}

std::string_view to_string(ClassifierKind kind) noexcept {
    switch (kind) {
    case ClassifierKind::DT: return "DT";
    case ClassifierKind::RF: return "RF";
    case ClassifierKind::KNN: return "KNN";
    case ClassifierKind::NB: return "NB";
    case ClassifierKind::LR: return "LR";
    case ClassifierKind::SVM: return "SVM";
    case ClassifierKind::GBT: return "GBT";
    case ClassifierKind::MLP: return "MLP";
    }
    return "?";
}

ClassifierSpec default_spec(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::DT: return {kind, TreeParams{}};
    case ClassifierKind::RF: return {kind, ForestParams{}};
    case ClassifierKind::KNN: return {kind, KnnParams{}};
    case ClassifierKind::NB: return {kind, NaiveBayesParams{}};
    case ClassifierKind::LR: return {kind, LogisticParams{}};
    case ClassifierKind::SVM: return {kind, SvmParams{}};
    case ClassifierKind::GBT: return {kind, GbtParams{}};
    case ClassifierKind::MLP: return {kind, MlpParams{}};
    }
    return {};
}

ClassifierSpec make_spec(ClassifierKind kind, const nlohmann::json& params) {
    ClassifierSpec spec = default_spec(kind);
    Reader r(params);
    switch (kind) {
    case ClassifierKind::DT: {
        auto& p = std::get<TreeParams>(spec.params);
        r.choice("criterion", p.criterion, kCriteria);
        r.optional_count("max_depth", p.max_depth, 0);
        r.count("min_samples_split", p.min_samples_split, 2);
        r.count("min_samples_leaf", p.min_samples_leaf, 1);
        read_max_features(r, p.max_features);
        break;
    }
    case ClassifierKind::RF: {
        auto& p = std::get<ForestParams>(spec.params);
        r.count("n_estimators", p.n_estimators, 1);
        r.choice("criterion", p.criterion, kCriteria);
        r.optional_count("max_depth", p.max_depth, 0);
        r.count("min_samples_split", p.min_samples_split, 2);
        r.count("min_samples_leaf", p.min_samples_leaf, 1);
        read_max_features(r, p.max_features);
        if (const auto* v = r.find("bootstrap")) {
            if (!v->is_boolean()) bad("bootstrap", "expected true or false");
            p.bootstrap = v->get<bool>();
        }
        break;
    }
    case ClassifierKind::KNN: {
        auto& p = std::get<KnnParams>(spec.params);
        r.count("n_neighbors", p.n_neighbors, 1);
        r.choice("weights", p.weights, {{"uniform", KnnWeights::Uniform}, {"distance", KnnWeights::Distance}});
        r.choice("metric", p.metric, {{"euclidean", DistanceMetric::Euclidean}, {"manhattan", DistanceMetric::Manhattan}});
        break;
    }
    case ClassifierKind::NB: {
        auto& p = std::get<NaiveBayesParams>(spec.params);
        r.real("var_smoothing", p.var_smoothing, 0.0, false);
        break;
    }
    case ClassifierKind::LR: {
        auto& p = std::get<LogisticParams>(spec.params);
        r.real("C", p.C, 0.0, true);
        r.choice("penalty", p.penalty,
                 {{"l1", Penalty::L1}, {"l2", Penalty::L2}, {"elasticnet", Penalty::ElasticNet}, {"none", Penalty::None}});
        r.choice("solver", p.solver, {{"liblinear", LogisticSolver::Liblinear}, {"saga", LogisticSolver::Saga}});
        std::size_t iters = static_cast<std::size_t>(p.max_iter);
        r.count("max_iter", iters, 1);
        if (iters > 10'000'000) bad("max_iter", "value out of range");
        p.max_iter = static_cast<int>(iters);
        r.real("tol", p.tol, 0.0, true);
        r.real("l1_ratio", p.l1_ratio, 0.0, false, 1.0);
        break;
    }
    case ClassifierKind::SVM: {
        auto& p = std::get<SvmParams>(spec.params);
        r.real("C", p.C, 0.0, true);
        r.choice("kernel", p.kernel,
                 {{"linear", Kernel::Linear}, {"poly", Kernel::Poly}, {"rbf", Kernel::Rbf}, {"sigmoid", Kernel::Sigmoid}});
        if (const auto* v = r.find("gamma")) {
            if (v->is_string() && lower(v->get<std::string>()) == "scale") {
                p.gamma = {Gamma::Mode::Scale, 0.0};
            } else if (v->is_string() && lower(v->get<std::string>()) == "auto") {
                p.gamma = {Gamma::Mode::Auto, 0.0};
            } else if (v->is_number() && v->get<double>() > 0.0 && std::isfinite(v->get<double>())) {
                p.gamma = {Gamma::Mode::Value, v->get<double>()};
            } else {
                bad("gamma", "expected 'scale', 'auto' or a positive number");
            }
        }
        std::size_t degree = static_cast<std::size_t>(p.degree);
        r.count("degree", degree, 1);
        if (degree > 100) bad("degree", "value out of range");
        p.degree = static_cast<int>(degree);
        r.real("coef0", p.coef0, -HUGE_VAL, false);
        r.real("tol", p.tol, 0.0, true);
        r.count("max_iter", p.max_iter, 1);
        break;
    }
    case ClassifierKind::GBT: {
        auto& p = std::get<GbtParams>(spec.params);
        r.count("n_estimators", p.n_estimators, 1);
        r.count("max_depth", p.max_depth, 0);
        r.real("learning_rate", p.learning_rate, 0.0, false);
        r.real("reg_lambda", p.reg_lambda, 0.0, false);
        r.real("min_child_weight", p.min_child_weight, 0.0, false);
        r.real("min_split_gain", p.min_split_gain, 0.0, false);
        break;
    }
    case ClassifierKind::MLP: {
        auto& p = std::get<MlpParams>(spec.params);
        if (const auto* v = r.find("hidden")) {
            if (!v->is_array()) bad("hidden", "expected an array of layer widths");
            p.hidden.clear();
            for (const auto& w : *v) p.hidden.push_back(Reader::as_count("hidden", w, 1));
        }
        r.count("epochs", p.epochs, 1);
        r.count("batch_size", p.batch_size, 1);
        r.real("learning_rate", p.learning_rate, 0.0, true);
        r.real("momentum", p.momentum, 0.0, false, 0.999999);
        break;
    }
    }
    r.finish();
    return spec;
}

nlohmann::json params_to_json(const ClassifierSpec& spec) {
    return std::visit(
        [](const auto& p) -> nlohmann::json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, TreeParams>) {
                return {{"criterion", name(p.criterion)},
                        {"max_depth", optional_json(p.max_depth)},
                        {"min_samples_split", p.min_samples_split},
                        {"min_samples_leaf", p.min_samples_leaf},
                        {"max_features", max_features_json(p.max_features)}};
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                return {{"n_estimators", p.n_estimators},
                        {"criterion", name(p.criterion)},
                        {"max_depth", optional_json(p.max_depth)},
                        {"min_samples_split", p.min_samples_split},
                        {"min_samples_leaf", p.min_samples_leaf},
                        {"max_features", max_features_json(p.max_features)},
                        {"bootstrap", p.bootstrap}};
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                return {{"n_neighbors", p.n_neighbors},
                        {"weights", p.weights == KnnWeights::Uniform ? "uniform" : "distance"},
                        {"metric", p.metric == DistanceMetric::Euclidean ? "euclidean" : "manhattan"}};
            } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                return {{"var_smoothing", p.var_smoothing}};
            } else if constexpr (std::is_same_v<P, LogisticParams>) {
                return {{"C", p.C},
                        {"penalty", name(p.penalty)},
                        {"solver", p.solver == LogisticSolver::Liblinear ? "liblinear" : "saga"},
                        {"max_iter", p.max_iter},
                        {"tol", p.tol},
                        {"l1_ratio", p.l1_ratio}};
            } else if constexpr (std::is_same_v<P, SvmParams>) {
                nlohmann::json gamma = p.gamma.mode == Gamma::Mode::Scale  ? nlohmann::json("scale")
                                       : p.gamma.mode == Gamma::Mode::Auto ? nlohmann::json("auto")
                                                                           : nlohmann::json(p.gamma.value);
                return {{"C", p.C},       {"kernel", name(p.kernel)}, {"gamma", gamma},
                        {"degree", p.degree}, {"coef0", p.coef0},     {"tol", p.tol},
                        {"max_iter", p.max_iter}};
            } else if constexpr (std::is_same_v<P, GbtParams>) {
                return {{"n_estimators", p.n_estimators},   {"max_depth", p.max_depth},
                        {"learning_rate", p.learning_rate}, {"reg_lambda", p.reg_lambda},
                        {"min_child_weight", p.min_child_weight}, {"min_split_gain", p.min_split_gain}};
            } else {
                return {{"hidden", p.hidden},
                        {"epochs", p.epochs},
                        {"batch_size", p.batch_size},
                        {"learning_rate", p.learning_rate},
                        {"momentum", p.momentum}};
            }
        },
        spec.params);
}

nlohmann::json spec_to_json(const ClassifierSpec& spec) {
    return {{"kind", std::string(to_string(spec.kind))}, {"params", params_to_json(spec)}};
}

ClassifierSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw Error(Errc::Schema, "classifier spec needs a string 'kind'");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "kind" && key != "params") throw Error(Errc::Schema, "unknown classifier spec key '" + key + "'");
    }
    return make_spec(parse_classifier_kind(j.at("kind").get<std::string>()),
                     j.contains("params") ? j.at("params") : nlohmann::json::object());
}

TrainedModel TrainedModel::fit(const ClassifierSpec& spec, const Samples& train, std::uint64_t seed) {
    if (train.role == Role::Test) throw Error(Errc::StageLegality, "refusing to fit a classifier on test data");
    return fit(spec, train.x, train.y, seed);
}

TrainedModel TrainedModel::fit(const ClassifierSpec& spec, const Matrix& x, std::span<const Stage> y, std::uint64_t seed) {
    if (x.rows() == 0) throw Error(Errc::EmptyInput, "no training samples");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::ShapeMismatch, "labels do not match rows");
    const auto p = static_cast<std::size_t>(x.cols());
    State state = std::visit(
        [&](const auto& params) -> State {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, TreeParams>) return DecisionTree::fit(params, x, y, seed);
            else if constexpr (std::is_same_v<P, ForestParams>) return RandomForest::fit(params, x, y, seed);
            else if constexpr (std::is_same_v<P, KnnParams>) return KNearestNeighbors::fit(params, x, y);
            else if constexpr (std::is_same_v<P, NaiveBayesParams>) return GaussianNaiveBayes::fit(params, x, y);
            else if constexpr (std::is_same_v<P, LogisticParams>) return LogisticRegression::fit(params, x, y);
            else if constexpr (std::is_same_v<P, SvmParams>) return SupportVectorMachine::fit(params, x, y);
            else if constexpr (std::is_same_v<P, GbtParams>) return GradientBoostedTrees::fit(params, x, y);
            else return MultilayerPerceptron::fit(params, x, y, seed);
        },
        spec.params);
    return TrainedModel(spec, seed, p, std::move(state));
}

std::vector<Stage> TrainedModel::predict(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != n_features_) throw Error(Errc::ShapeMismatch, "feature count does not match model");
    std::vector<Stage> out(static_cast<std::size_t>(x.rows()));
    std::visit(
        [&](const auto& m) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = m.predict_row(x.row(i));
        },
        state_);
    return out;
}

Vector TrainedModel::predict_score(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != n_features_) throw Error(Errc::ShapeMismatch, "feature count does not match model");
    Vector out(x.rows());
    std::visit(
        [&](const auto& m) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = m.score_row(x.row(i));
        },
        state_);
    return out;
}

TrainedModel TrainedModel::truncated(std::size_t n_estimators) const {
    ClassifierSpec spec = spec_;
    if (auto* rf = std::get_if<RandomForest>(&state_)) {
        std::get<ForestParams>(spec.params).n_estimators = n_estimators;
        return TrainedModel(spec, seed_, n_features_, rf->prefix(n_estimators));
    }
    if (auto* gbt = std::get_if<GradientBoostedTrees>(&state_)) {
        std::get<GbtParams>(spec.params).n_estimators = n_estimators;
        return TrainedModel(spec, seed_, n_features_, gbt->prefix(n_estimators));
    }
    throw Error(Errc::InvalidArgument, std::string(to_string(spec_.kind)) + " models cannot be truncated");
}

bool TrainedModel::converged() const noexcept {
    if (const auto* lr = std::get_if<LogisticRegression>(&state_)) return lr->converged();
    if (const auto* svm = std::get_if<SupportVectorMachine>(&state_)) return svm->converged();
    return true;
}

nlohmann::json TrainedModel::to_json() const {
    return {{"format", "pcstage-model"},
            {"version", 1},
            {"spec", spec_to_json(spec_)},
            {"seed", seed_},
            {"n_features", n_features_},
            {"state", std::visit([](const auto& m) { return m.to_json(); }, state_)}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    check_format(j, "pcstage-model", 1);
    try {
        auto spec = spec_from_json(j.at("spec"));
        const auto seed = j.at("seed").get<std::uint64_t>();
        const auto p = j.at("n_features").get<std::size_t>();
        const auto& s = j.at("state");
        State state = [&]() -> State {
            switch (spec.kind) {
            case ClassifierKind::DT: return DecisionTree::from_json(s);
            case ClassifierKind::RF: return RandomForest::from_json(s);
            case ClassifierKind::KNN: return KNearestNeighbors::from_json(std::get<KnnParams>(spec.params), s);
            case ClassifierKind::NB: return GaussianNaiveBayes::from_json(s);
            case ClassifierKind::LR: return LogisticRegression::from_json(s);
            case ClassifierKind::SVM: return SupportVectorMachine::from_json(s);
            case ClassifierKind::GBT: return GradientBoostedTrees::from_json(s);
            case ClassifierKind::MLP: return MultilayerPerceptron::from_json(s);
            }
            throw Error(Errc::Schema, "unknown classifier kind");
        }();
        return TrainedModel(std::move(spec), seed, p, std::move(state));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Schema, std::string("malformed model file: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::InvalidArgument) throw Error(Errc::Schema, e.what());
        throw;
    }
}

} // namespace pcstage
