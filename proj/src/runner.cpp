#include "pcstage/runner.hpp"

#include <ostream>

#include "pcstage/error.hpp"
#include "pcstage/metrics.hpp"
#include "pcstage/random.hpp"

namespace pcstage {

LabeledDataset load_dataset(const InputConfig& input, bool log_transform) {
    ParseOptions options;
    options.delimiter = input.delimiter;
    options.orientation = input.orientation;
    options.log2_transform = log_transform;
    auto matrix = read_expression_matrix(input.matrix, options);
    const auto labels = read_label_table(input.labels, input.delimiter);
    return align_labels(std::move(matrix), labels);
}

PipelineRun run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir, std::ostream* log) {
    RunManifest manifest(config_hash(config), config.seed);
    manifest.write(out_dir, "running");
    try {
        PipelineRun run;
        manifest.begin_stage("load");
        const auto dataset = load_dataset(config.input, config.log_transform);
        const auto counts = dataset.class_counts();
        if (log) {
            *log << "loaded " << dataset.size() << " samples x " << dataset.matrix().cols() << " genes (early "
                 << counts[index_of(Stage::Early)] << ", late " << counts[index_of(Stage::Late)] << ")\n";
        }

        if (config.deg.enabled) {
            manifest.begin_stage("deg");
            run.results.deg = deg_analysis(dataset, config.deg.options);
            if (log) {
                *log << "deg: " << run.results.deg->up << " up, " << run.results.deg->down << " down\n";
            }
        }

        const auto samples = to_samples(dataset, Role::Unsplit);
        for (const auto& algorithm : config.algorithms) {
            AlgorithmResults entry{algorithm.name, std::nullopt, std::nullopt};
            if (config.evaluation.trials) {
                manifest.begin_stage("trials:" + algorithm.name);
                entry.trials = repeated_trials(make_experiment(config, algorithm), samples, config.evaluation.n_runs,
                                               config.seed, config.threads);
                if (log) {
                    *log << algorithm.name << " trials: mean f1 " << format_fixed(entry.trials->f1.mean) << ", best f1 "
                         << format_fixed(entry.trials->f1.best) << '\n';
                }
            }
            if (config.evaluation.cross_validation) {
                manifest.begin_stage("cv:" + algorithm.name);
                entry.cv = cross_validate(config.stages, *algorithm.spec, samples, config.evaluation.cv_folds,
                                          derive_seed(config.seed, 0xcf), config.threads);
                if (log) {
                    *log << algorithm.name << " cv: mean f1 " << format_fixed(entry.cv->mean_f1) << ", best f1 "
                         << format_fixed(entry.cv->best_f1) << '\n';
                }
            }
            run.results.algorithms.push_back(std::move(entry));
        }

        manifest.begin_stage("report");
        run.files = emit_reports(run.results, out_dir);
        write_json_file(out_dir / "resolved_config.json", resolved_config_json(config));
        run.files.push_back("resolved_config.json");
        manifest.end_stage();
        manifest.add_outputs(run.files);
        manifest.write(out_dir, "complete");
        run.files.push_back("manifest.json");
        return run;
    } catch (...) {
        manifest.end_stage();
        try {
            manifest.write(out_dir, "failed");
        } catch (...) {
        }
        throw;
    }
}

} // namespace pcstage
