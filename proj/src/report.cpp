#include "pcstage/report.hpp"

#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pcstage/error.hpp"
#include "pcstage/format.hpp"

namespace pcstage {
namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string iso_time(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json triple(double p, double r, double f) { return {{"precision", p}, {"recall", r}, {"f1", f}}; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

} // namespace

bool RunResults::empty() const noexcept {
    if (deg) return false;
    for (const auto& a : algorithms) {
        if (a.trials || a.cv) return false;
    }
    return true;
}

void write_boxplot_csv(std::ostream& out, const RunResults& results) {
    out << "algorithm,run,metric,value\n";
    for (const auto& a : results.algorithms) {
        if (!a.trials) continue;
        for (const auto& run : a.trials->runs) {
            const auto& r = run.report;
            for (const auto& [metric, value] : {std::pair{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}}) {
                out << csv_quote(a.name) << ',' << run.run << ',' << metric << ',' << format_double(value) << '\n';
            }
        }
    }
}

void write_trials_csv(std::ostream& out, const RunResults& results) {
    out << "algorithm,run,seed,metric,value\n";
    for (const auto& a : results.algorithms) {
        if (!a.trials) continue;
        for (const auto& run : a.trials->runs) {
            const auto& r = run.report;
            const auto prefix = csv_quote(a.name) + ',' + std::to_string(run.run) + ',' + std::to_string(run.seed) + ',';
            out << prefix << "precision," << format_double(r.precision) << '\n';
            out << prefix << "recall," << format_double(r.recall) << '\n';
            out << prefix << "f1," << format_double(r.f1) << '\n';
            out << prefix << "accuracy," << format_double(r.accuracy) << '\n';
            out << prefix << "selected_features," << run.selected_features << '\n';
        }
    }
}

void write_confusion_csv(std::ostream& out, const RunResults& results) {
    out << "algorithm,run,actual,predicted,count\n";
    auto emit = [&](const std::string& name, const std::string& run, const ConfusionMatrix& cm) {
        for (Stage a : kStages) {
            for (Stage p : kStages) {
                out << csv_quote(name) << ',' << run << ',' << to_string(a) << ',' << to_string(p) << ',' << cm(a, p) << '\n';
            }
        }
    };
    for (const auto& a : results.algorithms) {
        if (a.trials) {
            for (const auto& run : a.trials->runs) emit(a.name, std::to_string(run.run), run.confusion);
        }
        if (a.cv) {
            for (std::size_t f = 0; f < a.cv->confusion.size(); ++f) emit(a.name, "cv" + std::to_string(f), a.cv->confusion[f]);
        }
    }
}

void write_cv_table_csv(std::ostream& out, const RunResults& results) {
    out << "algorithm,run,point,fold,params,f1,flagged\n";
    for (const auto& a : results.algorithms) {
        if (!a.trials) continue;
        for (const auto& run : a.trials->runs) {
            if (!run.grid) continue;
            for (const auto& row : run.grid->cv_table) {
                out << csv_quote(a.name) << ',' << run.run << ',' << row.point << ',' << row.fold << ','
                    << csv_quote(run.grid->points[row.point].dump()) << ',' << format_double(row.f1) << ','
                    << (row.flagged ? "true" : "false") << '\n';
            }
        }
    }
}

void write_cv_csv(std::ostream& out, const RunResults& results) {
    out << "algorithm,fold,f1,flagged\n";
    for (const auto& a : results.algorithms) {
        if (!a.cv) continue;
        for (std::size_t f = 0; f < a.cv->fold_f1.size(); ++f) {
            out << csv_quote(a.name) << ',' << f << ',' << format_double(a.cv->fold_f1[f]) << ','
                << (a.cv->flagged[f] ? "true" : "false") << '\n';
        }
    }
}

nlohmann::json summary_json(const RunResults& results) {
    nlohmann::json algos = nlohmann::json::object();
    for (const auto& a : results.algorithms) {
        nlohmann::json entry = nlohmann::json::object();
        if (a.trials) {
            const auto& t = *a.trials;
            entry["mean"] = triple(t.precision.mean, t.recall.mean, t.f1.mean);
            entry["best"] = triple(t.precision.best, t.recall.best, t.f1.best);
            entry["n_runs"] = t.runs.size();
            std::vector<std::size_t> features;
            nlohmann::json params = nlohmann::json::array();
            for (const auto& run : t.runs) {
                features.push_back(run.selected_features);
                params.push_back(run.selected_params);
            }
            entry["selected_features"] = features;
            entry["selected_params"] = params;
        }
        if (a.cv) entry["cv"] = {{"mean_f1", a.cv->mean_f1}, {"best_f1", a.cv->best_f1}, {"folds", a.cv->fold_f1.size()}};
        algos[a.name] = entry;
    }
    nlohmann::json out = {{"algorithms", algos}};
    if (results.deg) out["deg"] = deg_summary_json(*results.deg);
    return out;
}

std::vector<std::string> emit_reports(const RunResults& results, const std::filesystem::path& dir) {
    if (results.empty()) throw Error(Errc::EmptyInput, "no results to report");

    // Render everything first so a failure leaves the directory untouched.
    std::vector<std::pair<std::string, std::string>> files;
    auto render = [&](const std::string& name, auto&& writer) {
        std::ostringstream s;
        writer(s, results);
        files.emplace_back(name, s.str());
    };
    bool any_trials = false;
    bool any_grid = false;
    bool any_cv = false;
    for (const auto& a : results.algorithms) {
        if (a.trials) {
            any_trials = true;
            for (const auto& r : a.trials->runs) any_grid = any_grid || r.grid.has_value();
        }
        any_cv = any_cv || a.cv.has_value();
    }
    if (any_trials) {
        render("boxplot.csv", write_boxplot_csv);
        render("trials.csv", write_trials_csv);
    }
    if (any_trials || any_cv) render("confusion.csv", write_confusion_csv);
    if (any_grid) render("cv_table.csv", write_cv_table_csv);
    if (any_cv) render("cv.csv", write_cv_csv);
    if (results.deg) {
        std::ostringstream s;
        write_volcano_csv(s, volcano_export(*results.deg));
        files.emplace_back("volcano.csv", s.str());
        files.emplace_back("deg_summary.json", deg_summary_json(*results.deg).dump(2) + "\n");
    }
    files.emplace_back("summary.json", summary_json(results).dump(2) + "\n");

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::string> names;
    for (const auto& [name, text] : files) {
        write_text_file(dir / name, text);
        names.push_back(name);
    }
    return names;
}

RunManifest::RunManifest(std::string config_hash, std::uint64_t seed)
    : config_hash_(std::move(config_hash)), seed_(seed), started_(Clock::now()) {}

void RunManifest::begin_stage(const std::string& name) {
    end_stage();
    open_stage_.emplace(name, std::chrono::steady_clock::now());
}

void RunManifest::end_stage() {
    if (!open_stage_) return;
    const auto elapsed = std::chrono::steady_clock::now() - open_stage_->second;
    durations_ms_.emplace_back(open_stage_->first, std::chrono::duration<double, std::milli>(elapsed).count());
    open_stage_.reset();
}

void RunManifest::add_outputs(const std::vector<std::string>& files) {
    outputs_.insert(outputs_.end(), files.begin(), files.end());
}

nlohmann::json RunManifest::to_json(const std::string& status) const {
    nlohmann::json durations = nlohmann::json::array();
    for (const auto& [name, ms] : durations_ms_) durations.push_back({{"stage", name}, {"ms", ms}});
    nlohmann::json j = {{"tool", "pcstage"},
                        {"version", kToolVersion},
                        {"config_sha256", config_hash_},
                        {"seed", seed_},
                        {"status", status},
                        {"started_at", iso_time(started_)},
                        {"stage_durations", durations},
                        {"outputs", outputs_}};
    if (status != "running") j["finished_at"] = iso_time(Clock::now());
    return j;
}

void RunManifest::write(const std::filesystem::path& dir, const std::string& status) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_json_file(dir / "manifest.json", to_json(status));
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace pcstage
