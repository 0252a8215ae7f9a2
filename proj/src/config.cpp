#include "pcstage/config.hpp"

#include <fstream>
#include <set>

#include <openssl/evp.h>

#include "pcstage/error.hpp"

namespace pcstage {
namespace {

using nlohmann::json;

// JSON built in code stores small integers as signed.
bool non_negative_integer(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

[[noreturn]] void schema(const std::string& what) { throw Error(Errc::Schema, what); }

// Checked access to one config object.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) schema(path_ + " must be an object");
    }

    const json* get(const std::string& key) {
        allowed_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    bool flag(const std::string& key, bool fallback) {
        const auto* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) schema(where(key) + " must be true or false");
        return v->get<bool>();
    }

    double number(const std::string& key, double fallback, double lo, double hi, bool open_lo = false, bool open_hi = false) {
        const auto* v = get(key);
        if (!v) return fallback;
        if (!v->is_number()) schema(where(key) + " must be a number");
        const double d = v->get<double>();
        const bool ok = (open_lo ? d > lo : d >= lo) && (open_hi ? d < hi : d <= hi);
        if (!ok) schema(where(key) + " is out of range");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t lo) {
        const auto* v = get(key);
        if (!v) return fallback;
        if (!non_negative_integer(*v) || v->get<std::size_t>() < lo) {
            schema(where(key) + " must be an integer >= " + std::to_string(lo));
        }
        return v->get<std::size_t>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const auto* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) schema(where(key) + " must be a string");
        return v->get<std::string>();
    }

    std::optional<Section> child(const std::string& key) {
        const auto* v = get(key);
        if (!v) return std::nullopt;
        return Section(*v, where(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!allowed_.contains(key)) schema("unknown key " + where(key));
        }
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> allowed_;
};

// Stages that learn from data must only see the training split.
void require_train_scope(Section& s, const std::string& stage) {
    const auto scope = s.text("scope", "train");
    if (scope == "train") return;
    if (scope == "all") {
        throw Error(Errc::StageLegality, stage + " is a fit-type stage and cannot be fitted on the full dataset");
    }
    schema(s.where("scope") + " must be \"train\"");
}

AlgorithmConfig parse_algorithm(const json& j, std::size_t index) {
    const std::string path = "classifiers[" + std::to_string(index) + "]";
    Section s(j, path);
    AlgorithmConfig a;
    const auto kind_name = s.text("kind", "");
    if (kind_name.empty()) schema(path + ".kind is required");
    ClassifierKind kind{};
    try {
        kind = parse_classifier_kind(kind_name);
    } catch (const Error& e) {
        schema(path + ": " + e.what());
    }
    a.name = s.text("name", std::string(to_string(kind)));
    const auto* params = s.get("params");
    const auto* grid = s.get("grid");
    if (params && grid) schema(path + " takes either params or grid, not both");
    try {
        if (grid) {
            json g = grid->is_string() ? json{{"axes", *grid}} : *grid;
            if (!g.is_object()) schema(path + ".grid must be an object or \"reference\"");
            if (g.contains("kind")) schema(path + ".grid must not repeat kind");
            g["kind"] = kind_name;
            a.grid = grid_from_json(g);
        } else {
            a.spec = make_spec(kind, params ? *params : json::object());
        }
    } catch (const Error& e) {
        if (e.code() == Errc::Schema) throw;
        schema(path + ": " + e.what());
    }
    s.finish();
    return a;
}

} // namespace

PipelineConfig parse_pipeline_config(const json& j, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    Section root(j, "");

    auto input = root.child("input");
    if (!input) schema("input is required");
    const auto matrix = input->text("matrix", "");
    const auto labels = input->text("labels", "");
    if (matrix.empty() || labels.empty()) schema("input.matrix and input.labels are required");
    c.input.matrix = std::filesystem::path(matrix).is_absolute() ? std::filesystem::path(matrix) : base_dir / matrix;
    c.input.labels = std::filesystem::path(labels).is_absolute() ? std::filesystem::path(labels) : base_dir / labels;
    const auto delim = input->text("delimiter", "\t");
    if (delim.size() != 1) schema("input.delimiter must be a single character");
    c.input.delimiter = delim[0];
    const auto orient = input->text("orientation", "samples_as_rows");
    if (orient == "samples_as_rows") {
        c.input.orientation = Orientation::SamplesAsRows;
    } else if (orient == "genes_as_rows") {
        c.input.orientation = Orientation::GenesAsRows;
    } else {
        schema("input.orientation must be samples_as_rows or genes_as_rows");
    }
    input->finish();

    c.log_transform = root.flag("log_transform", false);

    if (auto deg = root.child("deg")) {
        c.deg.enabled = deg->flag("enabled", true);
        c.deg.options.alpha = deg->number("alpha", 0.05, 0.0, 1.0, true);
        c.deg.options.lfc_threshold = deg->number("lfc_threshold", 1.0, 0.0, 1e300);
        try {
            c.deg.options.variant = parse_ttest_variant(deg->text("variant", "pooled"));
        } catch (const Error& e) {
            schema(std::string("deg.variant: ") + e.what());
        }
        c.deg.options.pseudocount = deg->number("pseudocount", 1e-9, 0.0, 1e300, true);
        deg->finish();
    }

    c.stages.standardize = root.flag("standardize", true);

    if (auto sel = root.child("selection")) {
        const auto method = sel->text("method", "select_fpr");
        if (method == "select_fpr") {
            c.stages.selection.enabled = true;
        } else if (method == "none") {
            c.stages.selection.enabled = false;
        } else {
            schema("selection.method must be select_fpr or none");
        }
        c.stages.selection.alpha = sel->number("alpha", 0.05, 0.0, 1.0, true);
        try {
            c.stages.selection.score_func = parse_score_func(sel->text("score_func", "f_classif"));
        } catch (const Error& e) {
            schema(std::string("selection.score_func: ") + e.what());
        }
        require_train_scope(*sel, "selection");
        sel->finish();
    }

    if (auto tr = root.child("transform")) {
        c.stages.reduction.method = parse_reduction(tr->text("method", "none"));
        c.stages.reduction.n_components = tr->count("n_components", 100, 1);
        c.stages.reduction.max_iter = static_cast<int>(tr->count("max_iter", 200, 1));
        c.stages.reduction.tol = tr->number("tol", 1e-4, 0.0, 1.0, true);
        require_train_scope(*tr, "transform");
        tr->finish();
    }

    if (auto aug = root.child("augmentation")) {
        auto& a = c.stages.augment;
        a.method = parse_augmentation(aug->text("method", "none"));
        switch (a.method) {
        case Augmentation::None: break;
        case Augmentation::Smote:
            a.k_neighbors = aug->count("k_neighbors", 5, 1);
            if (const auto* r = aug->get("ratio"); r && !r->is_null()) {
                if (!r->is_number() || !(r->get<double>() > 0.0) || r->get<double>() > 1.0) {
                    schema("augmentation.ratio must lie in (0, 1]");
                }
                a.ratio = r->get<double>();
            }
            break;
        case Augmentation::Sfa:
            a.sfa.mu = aug->number("mu", 1.0, -1e300, 1e300);
            a.sfa.sigma1 = aug->number("sigma1", 0.01, 0.0, 1e300);
            a.sfa.sigma2 = aug->number("sigma2", a.sfa.sigma1, 0.0, 1e300);
            a.sfa_factor = aug->count("factor", 2, 1);
            break;
        case Augmentation::Gaussian:
            a.noise.mu = aug->number("mu", 0.0, -1e300, 1e300);
            a.noise.sigma = aug->number("sigma", 0.01, 0.0, 1e300);
            a.noise.relative = aug->flag("relative", true);
            a.noise.factor = aug->count("factor", 10, 1);
            break;
        }
        require_train_scope(*aug, "augmentation");
        aug->finish();
    }

    const auto* algos = root.get("classifiers");
    if (!algos || !algos->is_array() || algos->empty()) schema("classifiers must be a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < algos->size(); ++i) {
        c.algorithms.push_back(parse_algorithm(algos->at(i), i));
        if (!names.insert(c.algorithms.back().name).second) schema("duplicate classifier name " + c.algorithms.back().name);
    }

    if (auto ev = root.child("evaluation")) {
        c.evaluation.test_fraction = ev->number("test_fraction", 0.2, 0.0, 1.0, true, true);
        c.evaluation.stratified = ev->flag("stratified", true);
        c.evaluation.n_runs = ev->count("n_runs", 100, 1);
        c.evaluation.cv_folds = ev->count("cv_folds", 10, 2);
        c.evaluation.trials = ev->flag("trials", true);
        c.evaluation.cross_validation = ev->flag("cross_validation", false);
        ev->finish();
    }
    if (c.evaluation.cross_validation) {
        for (const auto& a : c.algorithms) {
            if (!a.spec) schema("cross-validation needs fixed params for " + a.name + " (grids are searched per trial)");
        }
    }

    if (const auto* seed = root.get("seed")) {
        if (!non_negative_integer(*seed)) schema("seed must be a non-negative integer");
        c.seed = seed->get<std::uint64_t>();
    }
    c.threads = root.count("threads", 1, 1);
    if (const auto* out = root.get("output_dir")) {
        if (!out->is_string()) schema("output_dir must be a string");
        c.output_dir = out->get<std::string>();
    }
    root.finish();
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::Schema, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_pipeline_config(j, path.parent_path());
}

nlohmann::json resolved_config_json(const PipelineConfig& c) {
    json algos = json::array();
    for (const auto& a : c.algorithms) {
        json entry = {{"name", a.name}};
        if (a.spec) {
            entry["kind"] = std::string(to_string(a.spec->kind));
            entry["params"] = params_to_json(*a.spec);
        } else {
            auto g = grid_to_json(*a.grid);
            entry["kind"] = g["kind"];
            g.erase("kind");
            entry["grid"] = g;
        }
        algos.push_back(entry);
    }
    const auto stages = stages_to_json(c.stages);
    return {{"input",
             {{"matrix", c.input.matrix.generic_string()},
              {"labels", c.input.labels.generic_string()},
              {"delimiter", std::string(1, c.input.delimiter)},
              {"orientation", c.input.orientation == Orientation::SamplesAsRows ? "samples_as_rows" : "genes_as_rows"}}},
            {"log_transform", c.log_transform},
            {"deg",
             {{"enabled", c.deg.enabled},
              {"alpha", c.deg.options.alpha},
              {"lfc_threshold", c.deg.options.lfc_threshold},
              {"variant", to_string(c.deg.options.variant)},
              {"pseudocount", c.deg.options.pseudocount}}},
            {"standardize", c.stages.standardize},
            {"selection",
             {{"method", c.stages.selection.enabled ? "select_fpr" : "none"},
              {"alpha", c.stages.selection.alpha},
              {"score_func", to_string(c.stages.selection.score_func)}}},
            {"transform", stages.at("transform")},
            {"augmentation", stages.at("augmentation")},
            {"classifiers", algos},
            {"evaluation",
             {{"test_fraction", c.evaluation.test_fraction},
              {"stratified", c.evaluation.stratified},
              {"n_runs", c.evaluation.n_runs},
              {"cv_folds", c.evaluation.cv_folds},
              {"trials", c.evaluation.trials},
              {"cross_validation", c.evaluation.cross_validation}}},
            {"seed", c.seed}};
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::Io, "SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string config_hash(const PipelineConfig& config) { return sha256_hex(resolved_config_json(config).dump()); }

Experiment make_experiment(const PipelineConfig& config, const AlgorithmConfig& algorithm) {
    Experiment e;
    e.stages = config.stages;
    e.classifier = algorithm.spec;
    e.grid = algorithm.grid;
    e.test_fraction = config.evaluation.test_fraction;
    e.stratified = config.evaluation.stratified;
    return e;
}

} // namespace pcstage
