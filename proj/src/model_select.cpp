#include "pcstage/model_select.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "pcstage/error.hpp"
#include "pcstage/parallel.hpp"
#include "pcstage/random.hpp"

namespace pcstage {
namespace {

Fold complement(std::size_t n, Indices test) {
    std::sort(test.begin(), test.end());
    Fold f;
    f.train.reserve(n - test.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (t < test.size() && test[t] == i) {
            ++t;
        } else {
            f.train.push_back(i);
        }
    }
    f.test = std::move(test);
    return f;
}

void check_k(std::size_t n, std::size_t k) {
    if (k < 2) throw Error(Errc::InvalidArgument, "k must be at least 2");
    if (k > n) throw Error(Errc::InvalidArgument, "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
}

bool prefix_capable(const ClassifierSpec& spec) {
    return spec.kind == ClassifierKind::RF || spec.kind == ClassifierKind::GBT;
}

std::size_t estimator_count(const ClassifierSpec& spec) {
    if (const auto* rf = std::get_if<ForestParams>(&spec.params)) return rf->n_estimators;
    if (const auto* gbt = std::get_if<GbtParams>(&spec.params)) return gbt->n_estimators;
    return 0;
}

bool single_class(std::span<const Stage> y) {
    const auto c = count_classes(y);
    return c[0] == 0 || c[1] == 0;
}

// Weighted F1 and whether any metric was degenerate.
std::pair<double, bool> score(std::span<const Stage> truth, std::span<const Stage> predicted) {
    const auto r = metrics(confusion(truth, predicted));
    return {r.f1, r.degenerate};
}

} // namespace

std::vector<Fold> kfold(std::size_t n, std::size_t k, bool shuffle, std::uint64_t seed) {
    check_k(n, k);
    Indices order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        Rng rng = make_rng(seed, 0xf01d);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<Fold> folds;
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        folds.push_back(complement(n, Indices(order.begin() + static_cast<std::ptrdiff_t>(start),
                                              order.begin() + static_cast<std::ptrdiff_t>(start + size))));
        start += size;
    }
    return folds;
}

std::vector<Fold> stratified_kfold(std::span<const Stage> labels, std::size_t k, bool shuffle, std::uint64_t seed) {
    const std::size_t n = labels.size();
    check_k(n, k);
    Indices order;
    order.reserve(n);
    for (Stage c : kStages) {
        Indices members;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        if (!members.empty() && members.size() < k) {
            throw Error(Errc::InvalidArgument, "class " + std::string(to_string(c)) + " has " +
                                                   std::to_string(members.size()) + " samples, fewer than k = " +
                                                   std::to_string(k));
        }
        if (shuffle) {
            Rng rng = make_rng(seed, 0x5f00 + index_of(c));
            std::shuffle(members.begin(), members.end(), rng);
        }
        order.insert(order.end(), members.begin(), members.end());
    }
    std::vector<Indices> tests(k);
    for (std::size_t i = 0; i < n; ++i) tests[i % k].push_back(order[i]);
    std::vector<Fold> folds;
    for (auto& t : tests) folds.push_back(complement(n, std::move(t)));
    return folds;
}

GridSpec reference_grid(ClassifierKind kind) {
    using J = nlohmann::json;
    GridSpec g;
    g.kind = kind;
    const J none = nullptr;
    switch (kind) {
    case ClassifierKind::RF:
        g.axes = {{"n_estimators", {50, 100, 200}},
                  {"max_depth", {none, 10, 20, 30}},
                  {"min_samples_split", {2, 5, 10}}};
        break;
    case ClassifierKind::DT:
        g.axes = {{"criterion", {"gini", "entropy"}},
                  {"max_depth", {none, 10, 20, 30}},
                  {"min_samples_split", {2, 5, 10}},
                  {"max_features", {4, 6, 8}},
                  {"min_samples_leaf", {1, 2, 4}}};
        break;
    case ClassifierKind::KNN:
        g.axes = {{"n_neighbors", {3, 5, 7, 9, 11}},
                  {"weights", {"uniform", "distance"}},
                  {"metric", {"euclidean", "manhattan"}}};
        break;
    case ClassifierKind::LR:
        g.axes = {{"C", {0.001, 0.01, 0.1, 1, 10, 100}},
                  {"penalty", {"l1", "l2", "elasticnet", "none"}},
                  {"solver", {"liblinear", "saga"}},
                  {"max_iter", {100, 200, 300}}};
        break;
    case ClassifierKind::NB: g.axes = {{"var_smoothing", {1e-9, 1e-8, 1e-7, 1e-6}}}; break;
    case ClassifierKind::SVM:
        g.axes = {{"C", {0.1, 1, 10, 100}},
                  {"kernel", {"linear", "poly", "rbf", "sigmoid"}},
                  {"gamma", {"scale", "auto"}}};
        break;
    case ClassifierKind::GBT:
        g.axes = {{"n_estimators", {50, 100, 150}},
                  {"max_depth", {3, 5, 7}},
                  {"learning_rate", {0.01, 0.1, 0.2}}};
        break;
    case ClassifierKind::MLP: break;
    }
    return g;
}

std::size_t grid_size(const GridSpec& grid) noexcept {
    std::size_t n = 1;
    for (const auto& a : grid.axes) n *= a.values.size();
    return n;
}

std::vector<nlohmann::json> grid_points(const GridSpec& grid) {
    const std::size_t total = grid_size(grid);
    std::vector<nlohmann::json> points;
    points.reserve(total);
    for (std::size_t p = 0; p < total; ++p) {
        nlohmann::json point = grid.fixed.is_null() ? nlohmann::json::object() : grid.fixed;
        std::size_t rest = p;
        for (std::size_t a = grid.axes.size(); a-- > 0;) {
            const auto& axis = grid.axes[a];
            point[axis.name] = axis.values[rest % axis.values.size()];
            rest /= axis.values.size();
        }
        points.push_back(std::move(point));
    }
    return points;
}

nlohmann::json grid_to_json(const GridSpec& grid) {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : grid.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    return {{"kind", std::string(to_string(grid.kind))}, {"fixed", grid.fixed}, {"axes", axes}, {"cv_folds", grid.cv_folds}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) throw Error(Errc::Schema, "grid needs a string 'kind'");
    for (const auto& [key, value] : j.items()) {
        if (key != "kind" && key != "fixed" && key != "axes" && key != "cv_folds") {
            throw Error(Errc::Schema, "unknown grid key '" + key + "'");
        }
    }
    const auto kind = parse_classifier_kind(j.at("kind").get<std::string>());
    GridSpec g;
    g.kind = kind;
    if (!j.contains("axes") || (j.at("axes").is_string() && j.at("axes").get<std::string>() == "reference")) {
        g = reference_grid(kind);
    } else if (j.at("axes").is_array()) {
        for (const auto& a : j.at("axes")) {
            if (!a.is_object() || !a.contains("name") || !a.at("name").is_string() || !a.contains("values") ||
                !a.at("values").is_array() || a.at("values").empty() || a.size() != 2) {
                throw Error(Errc::Schema, "grid axes need exactly 'name' and a non-empty 'values' array");
            }
            g.axes.push_back({a.at("name").get<std::string>(), a.at("values").get<std::vector<nlohmann::json>>()});
        }
    } else {
        throw Error(Errc::Schema, "grid 'axes' must be an array or \"reference\"");
    }
    if (j.contains("fixed")) {
        if (!j.at("fixed").is_object()) throw Error(Errc::Schema, "grid 'fixed' must be an object");
        g.fixed = j.at("fixed");
    }
    if (j.contains("cv_folds")) {
        const auto& folds = j.at("cv_folds");
        if (!folds.is_number_integer() || folds.get<long long>() < 2) {
            throw Error(Errc::Schema, "cv_folds must be an integer >= 2");
        }
        g.cv_folds = j.at("cv_folds").get<std::size_t>();
    }
    // Validate every point now rather than in the middle of a search.
    try {
        for (const auto& p : grid_points(g)) make_spec(kind, p);
    } catch (const Error& e) {
        throw Error(Errc::Schema, std::string("grid: ") + e.what());
    }
    return g;
}

GridResult grid_search(const GridSpec& grid, const ModelStages& stages, const Samples& train, std::uint64_t seed,
                       std::size_t threads) {
    if (train.role == Role::Test) throw Error(Errc::StageLegality, "grid search may only use training data");
    GridResult result;
    result.points = grid_points(grid);
    if (result.points.empty()) throw Error(Errc::InvalidArgument, "empty grid");
    std::vector<ClassifierSpec> specs;
    for (const auto& p : result.points) specs.push_back(make_spec(grid.kind, p));

    const auto folds = stratified_kfold(train.y, grid.cv_folds, true, derive_seed(seed, 0xf0));
    const std::size_t k = folds.size();

    // Feature stages depend only on the fold, so fit them once per fold.
    struct Prepared {
        std::optional<FeaturePipeline::Fitted> fitted;
        Matrix test_x;
        std::vector<Stage> test_y;
    };
    std::vector<Prepared> prepared(k);
    parallel_for(k, static_cast<unsigned>(threads), [&](std::size_t f) {
        const Samples fold_train = train.subset(folds[f].train, Role::Train);
        const Samples fold_test = train.subset(folds[f].test, Role::Test);
        prepared[f].test_y = fold_test.y;
        if (single_class(fold_train.y)) return;
        prepared[f].fitted = FeaturePipeline::fit(stages, fold_train, derive_seed(seed, 0x100 + f));
        prepared[f].test_x = prepared[f].fitted->pipeline.transform(fold_test.x);
    });

    // Ensembles whose points differ only in n_estimators are fitted once at
    // the largest size; smaller sizes are exact prefixes of it.
    const std::size_t n_points = specs.size();
    std::vector<std::vector<std::size_t>> groups;
    {
        std::map<std::string, std::size_t> by_key;
        for (std::size_t p = 0; p < n_points; ++p) {
            auto key = params_to_json(specs[p]);
            if (prefix_capable(specs[p])) key.erase("n_estimators");
            else key["point"] = p;
            const auto [it, inserted] = by_key.emplace(key.dump(), groups.size());
            if (inserted) groups.emplace_back();
            groups[it->second].push_back(p);
        }
    }

    result.cv_table.resize(n_points * k);
    parallel_for(groups.size() * k, static_cast<unsigned>(threads), [&](std::size_t task) {
        const auto& members = groups[task / k];
        const std::size_t f = task % k;
        const auto& prep = prepared[f];
        const bool usable = prep.fitted && !single_class(prep.fitted->train.y);
        std::optional<TrainedModel> largest;
        if (usable) {
            std::size_t top = members.front();
            for (auto p : members) {
                if (estimator_count(specs[p]) > estimator_count(specs[top])) top = p;
            }
            // The classifier seed depends on the fold only, so a point's score
            // does not depend on where it sits in the enumeration.
            largest = TrainedModel::fit(specs[top], prep.fitted->train, derive_seed(seed, 0x200 + f));
        }
        for (auto p : members) {
            CvRow row{p, f, 0.0, true};
            if (largest) {
                const auto count = estimator_count(specs[p]);
                const auto predictions = count == estimator_count(largest->spec()) ? largest->predict(prep.test_x)
                                                                                   : largest->truncated(count).predict(prep.test_x);
                const auto [f1, degenerate] = score(prep.test_y, predictions);
                row.f1 = f1;
                row.flagged = degenerate;
            }
            result.cv_table[p * k + f] = row;
        }
    });

    result.mean_f1.assign(n_points, 0.0);
    result.flagged.assign(n_points, false);
    for (const auto& row : result.cv_table) {
        result.mean_f1[row.point] += row.f1 / static_cast<double>(k);
        if (row.flagged) result.flagged[row.point] = true;
    }
    for (std::size_t p = 1; p < n_points; ++p) {
        if (result.mean_f1[p] > result.mean_f1[result.best_index]) result.best_index = p;
    }
    result.best = specs[result.best_index];
    return result;
}

CvResult cross_validate(const ModelStages& stages, const ClassifierSpec& spec, const Samples& data, std::size_t k,
                        std::uint64_t seed, std::size_t threads) {
    const auto folds = stratified_kfold(data.y, k, true, derive_seed(seed, 0xcf));
    CvResult result;
    result.fold_f1.assign(k, 0.0);
    result.flagged.assign(k, true);
    result.confusion.resize(k);
    parallel_for(k, static_cast<unsigned>(threads), [&](std::size_t f) {
        const Samples train = data.subset(folds[f].train, Role::Train);
        const Samples test = data.subset(folds[f].test, Role::Test);
        if (single_class(train.y)) return;
        const auto fitted = FittedPipeline::fit(stages, spec, train, derive_seed(seed, 0x300 + f));
        const auto cm = confusion(test.y, fitted.predict(test.x));
        const auto r = metrics(cm);
        result.confusion[f] = cm;
        result.fold_f1[f] = r.f1;
        result.flagged[f] = r.degenerate;
    });
    const auto s = summarize(result.fold_f1);
    result.mean_f1 = s.mean;
    result.best_f1 = s.best;
    return result;
}

MetricSummary summarize(std::vector<double> values) {
    if (values.empty()) throw Error(Errc::EmptyInput, "no values to summarise");
    MetricSummary s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.best = *std::max_element(values.begin(), values.end());
    s.values = std::move(values);
    return s;
}

TrialSummary repeated_trials(const Experiment& experiment, const Samples& data, std::size_t n_runs, std::uint64_t seed,
                             std::size_t threads) {
    if (n_runs < 1) throw Error(Errc::InvalidArgument, "n_runs must be at least 1");
    if (!experiment.classifier && !experiment.grid) throw Error(Errc::InvalidArgument, "experiment has no classifier");
    if (data.role == Role::Test) throw Error(Errc::StageLegality, "trials need the full dataset, not a test split");

    TrialSummary summary;
    summary.runs.resize(n_runs);
    parallel_for(n_runs, static_cast<unsigned>(threads), [&](std::size_t r) {
        try {
            const std::uint64_t run_seed = derive_seed(seed, r);
            const auto split = split_indices(data.y, experiment.test_fraction, experiment.stratified, derive_seed(run_seed, 1));
            const Samples train = data.subset(split.train, Role::Train);
            const Samples test = data.subset(split.test, Role::Test);
            TrialRun run;
            ClassifierSpec spec;
            if (experiment.grid) {
                run.grid = grid_search(*experiment.grid, experiment.stages, train, derive_seed(run_seed, 2));
                spec = run.grid->best;
            } else {
                spec = *experiment.classifier;
            }
            const auto fitted = FittedPipeline::fit(experiment.stages, spec, train, derive_seed(run_seed, 3));
            run.run = r;
            run.seed = run_seed;
            run.confusion = confusion(test.y, fitted.predict(test.x));
            run.report = metrics(run.confusion);
            run.selected_params = params_to_json(spec);
            run.selected_features = fitted.features().output_features();
            summary.runs[r] = std::move(run);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw Error(e.code(), "run " + std::to_string(r) + ": " + e.what());
        }
    });

    std::vector<double> p, rc, f;
    for (const auto& run : summary.runs) {
        p.push_back(run.report.precision);
        rc.push_back(run.report.recall);
        f.push_back(run.report.f1);
    }
    summary.precision = summarize(std::move(p));
    summary.recall = summarize(std::move(rc));
    summary.f1 = summarize(std::move(f));
    return summary;
}

} // namespace pcstage
