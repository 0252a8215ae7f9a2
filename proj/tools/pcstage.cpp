// pcstage command-line front end.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcstage/augment.hpp"
#include "pcstage/config.hpp"
#include "pcstage/de.hpp"
#include "pcstage/error.hpp"
#include "pcstage/format.hpp"
#include "pcstage/metrics.hpp"
#include "pcstage/random.hpp"
#include "pcstage/report.hpp"
#include "pcstage/runner.hpp"
#include "pcstage/select.hpp"
#include "pcstage/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pcstage;

namespace {

constexpr const char* kOutputEnv = "PCSTAGE_OUTPUT_DIR";

struct MatrixArgs {
    std::string matrix;
    std::string labels;
    std::string delimiter = "\t";
    bool genes_as_rows = false;
    bool log2 = false;

    void add(CLI::App* app, bool labels_required) {
        app->add_option("--matrix", matrix, "expression matrix (TPM)")->required()->check(CLI::ExistingFile);
        auto* l = app->add_option("--labels", labels, "sample_id / T-stage table")->check(CLI::ExistingFile);
        if (labels_required) l->required();
        app->add_option("--delimiter", delimiter, "field delimiter (default tab)");
        app->add_flag("--genes-as-rows", genes_as_rows, "matrix has one gene per row");
        app->add_flag("--log2", log2, "apply log2(x + 1)");
    }

    InputConfig input() const {
        if (delimiter.size() != 1) throw Error(Errc::InvalidArgument, "--delimiter must be one character");
        InputConfig in;
        in.matrix = matrix;
        in.labels = labels;
        in.delimiter = delimiter[0];
        in.orientation = genes_as_rows ? Orientation::GenesAsRows : Orientation::SamplesAsRows;
        return in;
    }

    ExpressionMatrix read_matrix() const {
        const auto in = input();
        ParseOptions options;
        options.delimiter = in.delimiter;
        options.orientation = in.orientation;
        options.log2_transform = log2;
        return read_expression_matrix(in.matrix, options);
    }

    LabeledDataset read_dataset() const { return load_dataset(input(), log2); }

    json to_json() const {
        return {{"matrix", fs::absolute(matrix).lexically_normal().string()},
                {"labels", labels.empty() ? json(nullptr) : json(fs::absolute(labels).lexically_normal().string())},
                {"delimiter", delimiter},
                {"orientation", genes_as_rows ? "genes_as_rows" : "samples_as_rows"},
                {"log_transform", log2}};
    }
};

// Flag > config file > environment > ./pcstage-output.
fs::path output_dir(const std::string& flag, const std::optional<fs::path>& from_config = std::nullopt) {
    if (!flag.empty()) return flag;
    if (from_config) return *from_config;
    if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
    return "pcstage-output";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

// Output bundle for the single-step subcommands: named files plus the
// resolved settings and a manifest, written only once everything rendered.
class Bundle {
public:
    Bundle(fs::path dir, json settings, std::uint64_t seed)
        : dir_(std::move(dir)), settings_(std::move(settings)), manifest_(sha256_hex(settings_.dump()), seed) {
        manifest_.write(dir_, "running");
    }

    void add(const std::string& name, std::string text) { files_.emplace_back(name, std::move(text)); }
    void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
    RunManifest& manifest() { return manifest_; }

    void commit() {
        std::vector<std::string> names;
        for (const auto& [name, text] : files_) {
            write_text(dir_ / name, text);
            names.push_back(name);
        }
        write_json_file(dir_ / "resolved_config.json", settings_);
        names.push_back("resolved_config.json");
        manifest_.end_stage();
        manifest_.add_outputs(names);
        manifest_.write(dir_, "complete");
    }

    void fail() noexcept {
        try {
            manifest_.end_stage();
            manifest_.write(dir_, "failed");
        } catch (...) {
        }
    }

private:
    fs::path dir_;
    json settings_;
    RunManifest manifest_;
    std::vector<std::pair<std::string, std::string>> files_;
};

template <class F>
void with_bundle(Bundle& bundle, F&& body) {
    try {
        body();
        bundle.commit();
    } catch (...) {
        bundle.fail();
        throw;
    }
}

std::string to_text(const ExpressionMatrix& m) {
    std::ostringstream s;
    write_expression_matrix(s, m);
    return s.str();
}

std::string labels_text(std::span<const std::string> ids, std::span<const Stage> labels) {
    std::ostringstream s;
    s << "sample_id\tstage\n";
    for (std::size_t i = 0; i < ids.size(); ++i) s << ids[i] << '\t' << to_string(labels[i]) << '\n';
    return s.str();
}

std::string describe_counts(const ClassCounts& c) {
    return "early " + std::to_string(c[index_of(Stage::Early)]) + ", late " + std::to_string(c[index_of(Stage::Late)]);
}

json parse_json_arg(const std::string& text, const std::string& what) {
    if (text.empty()) return json::object();
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, what + " is not valid JSON: " + e.what());
    }
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(Errc::Schema, path.string() + ": invalid JSON: " + e.what());
    }
}

void print_report(const std::string& name, const MetricReport& r) {
    std::cout << name << ": precision " << format_fixed(r.precision) << ", recall " << format_fixed(r.recall) << ", f1 "
              << format_fixed(r.f1) << ", accuracy " << format_fixed(r.accuracy) << (r.degenerate ? " (degenerate)" : "")
              << '\n';
}

json report_json(const ConfusionMatrix& cm, const MetricReport& r) {
    json per_class = json::object();
    for (Stage s : kStages) {
        const auto& c = r.per_class[index_of(s)];
        per_class[std::string(to_string(s))] = {
            {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
    }
    json counts = json::array();
    for (Stage a : kStages) {
        json row = json::array();
        for (Stage p : kStages) row.push_back(cm(a, p));
        counts.push_back(row);
    }
    return {{"precision", r.precision}, {"recall", r.recall},         {"f1", r.f1},
            {"accuracy", r.accuracy},   {"degenerate", r.degenerate}, {"per_class", per_class},
            {"confusion", counts}};
}

// Config-driven subcommands share these overrides.
struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> threads;

    void add(CLI::App* app, bool with_runs) {
        app->add_option("--config", config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
        app->add_option("--output-dir", out, std::string("output directory (default $") + kOutputEnv + ")");
        app->add_option("--seed", seed, "master seed (overrides config)");
        app->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        if (with_runs) app->add_option("--runs", runs, "repeated trials (overrides config)")->check(CLI::PositiveNumber);
    }

    PipelineConfig load() const {
        auto c = load_pipeline_config(config);
        if (seed) c.seed = *seed;
        if (runs) c.evaluation.n_runs = *runs;
        if (threads) c.threads = *threads;
        return c;
    }
};

int run_validate(const MatrixArgs& m) {
    if (m.labels.empty()) {
        const auto matrix = m.read_matrix();
        std::cout << "shape (" << matrix.rows() << "," << matrix.cols() << ")\n";
        return 0;
    }
    const auto data = m.read_dataset();
    std::cout << "shape (" << data.size() << "," << data.matrix().cols() << ")\n";
    std::cout << "labels: " << describe_counts(data.class_counts()) << '\n';
    return 0;
}

int run_deg(const MatrixArgs& m, DegOptions options, const std::string& variant, const std::string& out) {
    options.variant = parse_ttest_variant(variant);
    json settings = {{"command", "deg"},
                     {"input", m.to_json()},
                     {"deg",
                      {{"alpha", options.alpha},
                       {"lfc_threshold", options.lfc_threshold},
                       {"variant", std::string(to_string(options.variant))},
                       {"pseudocount", options.pseudocount}}}};
    const auto data = m.read_dataset();
    Bundle bundle(output_dir(out), settings, 0);
    with_bundle(bundle, [&] {
        bundle.manifest().begin_stage("deg");
        const auto table = deg_analysis(data, options);
        std::ostringstream volcano;
        write_volcano_csv(volcano, volcano_export(table));
        bundle.add("volcano.csv", volcano.str());
        bundle.add_json("deg_summary.json", deg_summary_json(table));
        std::cout << table.up << " up-regulated, " << table.down << " down-regulated, " << table.not_significant
                  << " not significant (of " << table.records.size() << " genes)\n";
    });
    return 0;
}

int run_select(const MatrixArgs& m, double alpha, bool standardize, const std::string& out) {
    json settings = {{"command", "select"}, {"input", m.to_json()}, {"alpha", alpha}, {"standardize", standardize}};
    const auto data = m.read_dataset();
    Bundle bundle(output_dir(out), settings, 0);
    with_bundle(bundle, [&] {
        bundle.manifest().begin_stage("select");
        Matrix x = data.matrix().values();
        if (standardize) x = apply_standardizer(fit_standardizer(x), x);
        const auto scores = anova_f_classif(x, data.labels());
        const auto mask = select_fpr(scores, alpha);
        std::ostringstream csv;
        write_scores_csv(csv, scores, data.matrix().gene_ids(), mask);
        bundle.add("anova_scores.csv", csv.str());
        bundle.add("selected_matrix.tsv", to_text(project(data.matrix(), mask)));
        std::cout << mask.kept.size() << " of " << mask.n_features << " genes with p < " << format_double(alpha) << '\n';
    });
    return 0;
}

int run_transform(const MatrixArgs& m, const std::string& method, std::size_t n_components, bool standardize,
                  std::uint64_t seed, int max_iter, double tol, const std::string& out) {
    const auto reduction = parse_reduction(method);
    if (reduction == Reduction::None) throw Error(Errc::InvalidArgument, "--method must be pca or ica");
    json settings = {{"command", "transform"}, {"input", m.to_json()},  {"method", method},
                     {"n_components", n_components}, {"standardize", standardize}, {"seed", seed},
                     {"max_iter", max_iter},          {"tol", tol}};
    const auto matrix = m.read_matrix();
    Bundle bundle(output_dir(out), settings, seed);
    with_bundle(bundle, [&] {
        bundle.manifest().begin_stage("transform");
        Matrix x = matrix.values();
        json model = json::object();
        if (standardize) {
            const auto s = fit_standardizer(x);
            x = apply_standardizer(s, x);
            model["standardizer"] = to_json(s);
        }
        const std::size_t limit = std::min<std::size_t>(x.rows() > 1 ? x.rows() - 1 : 1, x.cols());
        if (n_components > limit) {
            std::cerr << "warning: n_components " << n_components << " clamped to " << limit << '\n';
            n_components = limit;
        }
        Matrix z;
        std::string prefix;
        if (reduction == Reduction::Pca) {
            const auto pca = pca_fit(x, n_components);
            z = pca_transform(pca, x);
            model["pca"] = to_json(pca);
            prefix = "PC";
        } else {
            const auto ica = ica_fit(x, {n_components, max_iter, tol, derive_seed(seed, 0x1ca)});
            if (!ica.converged) std::cerr << "warning: ICA stopped at max_iter without converging\n";
            z = ica_transform(ica, x);
            model["ica"] = to_json(ica);
            prefix = "IC";
        }
        std::vector<std::string> names;
        for (Eigen::Index j = 0; j < z.cols(); ++j) names.push_back(prefix + std::to_string(j + 1));
        bundle.add("transformed.tsv", to_text(ExpressionMatrix(matrix.sample_ids(), names, z, true)));
        bundle.add_json("transform_model.json", model);
        std::cout << method << ": " << matrix.rows() << " samples -> " << z.cols() << " components\n";
    });
    return 0;
}

struct AugmentArgs {
    std::string method = "smote";
    std::size_t k_neighbors = 5;
    std::optional<double> ratio;
    double mu = std::numeric_limits<double>::quiet_NaN(); // method default when unset
    double sigma1 = 0.01;
    std::optional<double> sigma2;
    double sigma = 0.01;
    bool absolute = false;
    std::size_t factor = 0; // method default when 0
    std::uint64_t seed = 0;
};

int run_augment(const MatrixArgs& m, const AugmentArgs& a, const std::string& out) {
    const auto method = parse_augmentation(a.method);
    if (method == Augmentation::None) throw Error(Errc::InvalidArgument, "--method must be smote, sfa or gaussian");
    json settings = {{"command", "augment"}, {"input", m.to_json()}, {"method", a.method}, {"seed", a.seed}};
    const auto data = m.read_dataset();
    const auto train = to_samples(data, Role::Train);
    const auto aug_seed = derive_seed(a.seed, 0xa06);
    AugmentResult result;
    std::string tag;
    switch (method) {
    case Augmentation::Smote: {
        if (a.ratio && (!(*a.ratio > 0.0) || *a.ratio > 1.0)) throw Error(Errc::InvalidArgument, "--ratio must lie in (0, 1]");
        settings["k_neighbors"] = a.k_neighbors;
        settings["ratio"] = a.ratio ? json(*a.ratio) : json(nullptr);
        result = smote(train, {a.k_neighbors, a.ratio, aug_seed});
        tag = "smote";
        break;
    }
    case Augmentation::Sfa: {
        SfaParams p{std::isnan(a.mu) ? 1.0 : a.mu, a.sigma1, a.sigma2.value_or(a.sigma1)};
        const std::size_t factor = a.factor ? a.factor : 2;
        settings.update({{"mu", p.mu}, {"sigma1", p.sigma1}, {"sigma2", p.sigma2}, {"factor", factor}});
        result = sfa_expand(train, p, factor, aug_seed);
        tag = "sfa";
        break;
    }
    case Augmentation::Gaussian: {
        NoiseParams p{std::isnan(a.mu) ? 0.0 : a.mu, a.sigma, !a.absolute, a.factor ? a.factor : 10};
        settings.update({{"mu", p.mu}, {"sigma", p.sigma}, {"relative", p.relative}, {"factor", p.factor}});
        result = gaussian_expand(train, p, aug_seed);
        tag = "gaussian";
        break;
    }
    case Augmentation::None: break;
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    Bundle bundle(output_dir(out), settings, a.seed);
    with_bundle(bundle, [&] {
        auto ids = data.matrix().sample_ids();
        for (std::size_t i = ids.size(); i < result.data.size(); ++i) {
            ids.push_back(tag + "_" + std::to_string(i - data.size()));
        }
        bundle.add("augmented_matrix.tsv",
                   to_text(ExpressionMatrix(ids, data.matrix().gene_ids(), result.data.x, true)));
        bundle.add("augmented_labels.tsv", labels_text(ids, result.data.y));
        std::ostringstream prov;
        write_provenance_csv(prov, result.provenance);
        bundle.add("provenance.csv", prov.str());
        std::cout << a.method << ": " << data.size() << " -> " << result.data.size() << " samples ("
                  << describe_counts(count_classes(result.data.y)) << ")\n";
    });
    return 0;
}

ClassifierSpec spec_from_args(const std::string& kind, const std::string& params) {
    return make_spec(parse_classifier_kind(kind), parse_json_arg(params, "--params"));
}

int run_train(const MatrixArgs& m, const std::string& kind, const std::string& params, std::uint64_t seed,
              const std::string& out) {
    const auto spec = spec_from_args(kind, params);
    json settings = {{"command", "train"}, {"input", m.to_json()}, {"classifier", spec_to_json(spec)}, {"seed", seed}};
    const auto data = m.read_dataset();
    Bundle bundle(output_dir(out), settings, seed);
    with_bundle(bundle, [&] {
        bundle.manifest().begin_stage("train");
        const auto model = TrainedModel::fit(spec, to_samples(data, Role::Train), derive_seed(seed, 0xc1a));
        if (!model.converged()) std::cerr << "warning: solver stopped at its iteration limit\n";
        bundle.add_json("model.json", {{"genes", data.matrix().gene_ids()}, {"model", model.to_json()}});
        std::cout << to_string(spec.kind) << " trained on " << data.size() << " samples x " << data.matrix().cols()
                  << " genes\n";
    });
    return 0;
}

int run_evaluate(const MatrixArgs& m, const std::string& model_path, const std::string& out) {
    const auto doc = read_json_file(model_path);
    if (!doc.is_object() || !doc.contains("genes") || !doc.contains("model")) {
        throw Error(Errc::Schema, model_path + ": expected {\"genes\", \"model\"}");
    }
    std::vector<std::string> genes;
    try {
        genes = doc.at("genes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(Errc::Schema, model_path + ": genes: " + e.what());
    }
    const auto model = TrainedModel::from_json(doc.at("model"));
    json settings = {{"command", "evaluate"}, {"input", m.to_json()}, {"model_sha256", sha256_hex(doc.dump())}};

    const auto matrix = m.read_matrix();
    std::map<std::string, std::size_t> column;
    for (std::size_t j = 0; j < matrix.cols(); ++j) column.emplace(matrix.gene_ids()[j], j);
    Indices cols;
    for (const auto& g : genes) {
        const auto it = column.find(g);
        if (it == column.end()) throw Error(Errc::ShapeMismatch, "gene " + g + " used by the model is missing");
        cols.push_back(it->second);
    }
    const Matrix x = select_columns(matrix.values(), cols);
    const auto pred = model.predict(x);
    const auto score = model.predict_score(x);

    Bundle bundle(output_dir(out), settings, model.seed());
    with_bundle(bundle, [&] {
        std::ostringstream csv;
        csv << "sample_id,predicted,score\n";
        for (std::size_t i = 0; i < pred.size(); ++i) {
            csv << matrix.sample_ids()[i] << ',' << to_string(pred[i]) << ',' << format_double(score(i)) << '\n';
        }
        bundle.add("predictions.csv", csv.str());
        if (!m.labels.empty()) {
            const auto labels = read_label_table(m.labels, m.input().delimiter);
            const auto truth = align_labels(matrix, labels).labels();
            const auto cm = confusion(truth, pred);
            const auto r = metrics(cm);
            bundle.add_json("metrics.json", report_json(cm, r));
            print_report(std::string(to_string(model.spec().kind)), r);
        } else {
            const auto c = count_classes(pred);
            std::cout << "predicted " << describe_counts(c) << '\n';
        }
    });
    return 0;
}

int run_grid(const RunArgs& args) {
    const auto config = args.load();
    const auto settings = resolved_config_json(config);
    const auto data = load_dataset(config.input, config.log_transform);
    const auto samples = to_samples(data, Role::Train);
    Bundle bundle(output_dir(args.out, config.output_dir), settings, config.seed);
    with_bundle(bundle, [&] {
        std::ostringstream table;
        table << "algorithm,point,fold,params,f1,flagged\n";
        json summary = json::object();
        for (const auto& a : config.algorithms) {
            bundle.manifest().begin_stage("grid:" + a.name);
            GridSpec grid;
            if (a.grid) {
                grid = *a.grid;
            } else {
                grid.kind = a.spec->kind;
                grid.fixed = params_to_json(*a.spec);
            }
            const auto r = grid_search(grid, config.stages, samples, derive_seed(config.seed, 2), config.threads);
            for (const auto& row : r.cv_table) {
                std::string params = r.points[row.point].dump();
                std::string quoted = "\"";
                for (char ch : params) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                table << a.name << ',' << row.point << ',' << row.fold << ',' << quoted << "\"," << format_double(row.f1)
                      << ',' << (row.flagged ? "true" : "false") << '\n';
            }
            summary[a.name] = {{"best_index", r.best_index},
                               {"best_params", r.points[r.best_index]},
                               {"best_mean_f1", r.mean_f1[r.best_index]},
                               {"mean_f1", r.mean_f1},
                               {"points", r.points.size()}};
            std::cout << a.name << ": best of " << r.points.size() << " points " << r.points[r.best_index].dump()
                      << " mean f1 " << format_fixed(r.mean_f1[r.best_index]) << '\n';
        }
        bundle.add("grid_cv_table.csv", table.str());
        bundle.add_json("grid_summary.json", summary);
    });
    return 0;
}

int run_config(const RunArgs& args, std::optional<bool> trials, std::optional<bool> cv) {
    auto config = args.load();
    if (trials) config.evaluation.trials = *trials;
    if (cv) config.evaluation.cross_validation = *cv;
    if (trials || cv) config.deg.enabled = false;
    if (config.evaluation.cross_validation) {
        for (const auto& a : config.algorithms) {
            if (!a.spec) throw Error(Errc::Schema, "cross-validation needs fixed params for " + a.name);
        }
    }
    const auto dir = output_dir(args.out, config.output_dir);
    const auto run = run_pipeline(config, dir, &std::cout);
    std::cout << "wrote " << run.files.size() << " files to " << dir.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prostate cancer stage classification pipeline"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    MatrixArgs validate_m;
    auto* validate = app.add_subcommand("validate", "parse and check a matrix and label table");
    validate_m.add(validate, false);

    MatrixArgs deg_m;
    DegOptions deg_opt;
    std::string deg_variant = "pooled";
    std::string deg_out;
    auto* deg = app.add_subcommand("deg", "differential expression (t-test + log2 fold change)");
    deg_m.add(deg, true);
    deg->add_option("--alpha", deg_opt.alpha, "p-value threshold")->check(CLI::Range(0.0, 1.0));
    deg->add_option("--lfc", deg_opt.lfc_threshold, "|log2 fold change| threshold")->check(CLI::NonNegativeNumber);
    deg->add_option("--variant", deg_variant, "pooled or welch");
    deg->add_option("--pseudocount", deg_opt.pseudocount, "added to group means")->check(CLI::NonNegativeNumber);
    deg->add_option("--output-dir", deg_out, "output directory");

    MatrixArgs sel_m;
    double sel_alpha = 0.05;
    bool sel_std = false;
    std::string sel_out;
    auto* select = app.add_subcommand("select", "ANOVA F scores and false-positive-rate selection");
    sel_m.add(select, true);
    select->add_option("--alpha", sel_alpha, "keep genes with p < alpha")->check(CLI::Range(0.0, 1.0));
    select->add_flag("--standardize", sel_std, "z-score genes first");
    select->add_option("--output-dir", sel_out, "output directory");

    MatrixArgs tr_m;
    std::string tr_method = "pca";
    std::size_t tr_components = 2;
    bool tr_std = false;
    std::uint64_t tr_seed = 0;
    int tr_max_iter = 200;
    double tr_tol = 1e-4;
    std::string tr_out;
    auto* transform = app.add_subcommand("transform", "PCA or FastICA projection");
    tr_m.add(transform, false);
    transform->add_option("--method", tr_method, "pca or ica");
    transform->add_option("--n-components", tr_components, "components to keep")->check(CLI::PositiveNumber);
    transform->add_flag("--standardize", tr_std, "z-score genes first");
    transform->add_option("--seed", tr_seed, "ICA seed");
    transform->add_option("--max-iter", tr_max_iter, "ICA iteration cap")->check(CLI::PositiveNumber);
    transform->add_option("--tol", tr_tol, "ICA tolerance")->check(CLI::PositiveNumber);
    transform->add_option("--output-dir", tr_out, "output directory");

    MatrixArgs aug_m;
    AugmentArgs aug_a;
    std::string aug_out;
    auto* augment = app.add_subcommand("augment", "SMOTE, SFA or Gaussian-noise augmentation of a training set");
    aug_m.add(augment, true);
    augment->add_option("--method", aug_a.method, "smote, sfa or gaussian");
    augment->add_option("--k-neighbors", aug_a.k_neighbors, "SMOTE neighbours")->check(CLI::PositiveNumber);
    augment->add_option("--ratio", aug_a.ratio, "SMOTE minority/majority target ratio");
    augment->add_option("--mu", aug_a.mu, "SFA scale mean / noise mean");
    augment->add_option("--sigma1", aug_a.sigma1, "SFA scale std")->check(CLI::NonNegativeNumber);
    augment->add_option("--sigma2", aug_a.sigma2, "SFA shift std (default sigma1)")->check(CLI::NonNegativeNumber);
    augment->add_option("--sigma", aug_a.sigma, "noise std")->check(CLI::NonNegativeNumber);
    augment->add_flag("--absolute", aug_a.absolute, "noise sigma is absolute, not relative to gene std");
    augment->add_option("--factor", aug_a.factor, "output size multiple (sfa 2, gaussian 10)")->check(CLI::PositiveNumber);
    augment->add_option("--seed", aug_a.seed, "seed");
    augment->add_option("--output-dir", aug_out, "output directory");

    MatrixArgs train_m;
    std::string train_kind = "rf";
    std::string train_params;
    std::uint64_t train_seed = 0;
    std::string train_out;
    auto* train = app.add_subcommand("train", "fit one classifier on a labelled matrix");
    train_m.add(train, true);
    train->add_option("--classifier", train_kind, "dt, rf, knn, nb, lr, svm, gbt or mlp");
    train->add_option("--params", train_params, "hyperparameters as a JSON object");
    train->add_option("--seed", train_seed, "seed");
    train->add_option("--output-dir", train_out, "output directory");

    MatrixArgs eval_m;
    std::string eval_model;
    std::string eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "predict with a trained model; scores it when labels are given");
    eval_m.add(evaluate, false);
    evaluate->add_option("--model", eval_model, "model.json from train")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--output-dir", eval_out, "output directory");

    RunArgs grid_args, cv_args, trials_args, pipe_args;
    auto* grid = app.add_subcommand("grid", "cross-validated grid search on the whole dataset");
    grid_args.add(grid, false);
    auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
    cv_args.add(cv, false);
    auto* trials = app.add_subcommand("trials", "repeated split/fit/evaluate runs");
    trials_args.add(trials, true);
    auto* pipeline = app.add_subcommand("pipeline", "everything the config enables");
    pipe_args.add(pipeline, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*validate) return run_validate(validate_m);
        if (*deg) return run_deg(deg_m, deg_opt, deg_variant, deg_out);
        if (*select) return run_select(sel_m, sel_alpha, sel_std, sel_out);
        if (*transform) return run_transform(tr_m, tr_method, tr_components, tr_std, tr_seed, tr_max_iter, tr_tol, tr_out);
        if (*augment) return run_augment(aug_m, aug_a, aug_out);
        if (*train) return run_train(train_m, train_kind, train_params, train_seed, train_out);
        if (*evaluate) return run_evaluate(eval_m, eval_model, eval_out);
        if (*grid) return run_grid(grid_args);
        if (*cv) return run_config(cv_args, false, true);
        if (*trials) return run_config(trials_args, true, false);
        if (*pipeline) return run_config(pipe_args, std::nullopt, std::nullopt);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
