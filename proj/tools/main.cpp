#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sppl/errors.hpp"
#include "sppl/pipeline.hpp"
#include "sppl/version.hpp"

namespace {

struct GlobalFlags {
    std::string config_path;
    sppl::CliOverrides overrides;
};

void add_common_flags(CLI::App* cmd, GlobalFlags& flags, bool config_required = true) {
    auto* config = cmd->add_option("--config", flags.config_path, "Run configuration JSON");
    if (config_required) {
        config->required();
    }
    cmd->add_option("--out", flags.overrides.out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", flags.overrides.seed, "Seed (overrides config)");
    cmd->add_option("--calibration-start", flags.overrides.calibration_start,
                    "Calibration slice start (overrides config)");
    cmd->add_option("--calibration-count", flags.overrides.calibration_count,
                    "Calibration slice size (overrides config)");
    cmd->add_option("--metric", flags.overrides.metric, "Ranking metric: sppl or ppl")
        ->check(CLI::IsMember({"sppl", "ppl"}));
    cmd->add_option("--mock-backend", flags.overrides.mock_backend,
                    "Score with the local mock backend using this rules file");
}

sppl::RunConfig load(const GlobalFlags& flags) {
    return sppl::load_run_config(flags.config_path, flags.overrides);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Response-generation strategy selection via self-aligned perplexity"};
    app.set_version_flag("--version", sppl::kVersion);
    app.require_subcommand(1);

    GlobalFlags generate_flags;
    auto* generate = app.add_subcommand(
        "generate", "Generate candidate responses per strategy (cached, resumable)");
    add_common_flags(generate, generate_flags);

    GlobalFlags pool_flags;
    auto* pool = app.add_subcommand(
        "pool", "Build the style pool from the target model's zero-shot predictions");
    add_common_flags(pool, pool_flags);

    GlobalFlags score_flags;
    auto* score = app.add_subcommand("score", "Score candidates with PPL and SPPL");
    add_common_flags(score, score_flags);

    GlobalFlags rank_flags;
    auto* rank = app.add_subcommand("rank", "Aggregate scores and select the best strategy");
    add_common_flags(rank, rank_flags);

    GlobalFlags report_flags;
    auto* report = app.add_subcommand("report", "Print a summary of the run's artifacts");
    add_common_flags(report, report_flags);

    sppl::EvaluateOptions evaluate_options;
    std::string evaluate_out = "out";
    std::optional<long> n_train_small;
    auto* evaluate = app.add_subcommand(
        "evaluate", "Evaluate a ranking metric against recorded training outcomes");
    evaluate->add_option("--table", evaluate_options.table, "Accuracy table (JSONL)")->required();
    evaluate->add_option("--metric-scores", evaluate_options.metric_scores,
                         "Per-(model,dataset,strategy) metric scores (JSONL)")
        ->required();
    evaluate->add_option("--n-train", evaluate_options.n_train,
                         "Training-set size the accuracies were recorded at");
    evaluate->add_option("--n-train-small", n_train_small,
                         "Smaller training-set size; enables improvement-ratio reporting");
    evaluate->add_option("--std-threshold", evaluate_options.std_thresholds,
                         "Accuracy-std group thresholds");
    evaluate->add_option("--out", evaluate_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) {
            sppl::run_generate(load(generate_flags));
        } else if (pool->parsed()) {
            sppl::run_pool(load(pool_flags));
        } else if (score->parsed()) {
            sppl::run_score(load(score_flags));
        } else if (rank->parsed()) {
            sppl::run_rank(load(rank_flags));
        } else if (report->parsed()) {
            sppl::run_report(load(report_flags), std::cout);
        } else if (evaluate->parsed()) {
            evaluate_options.n_train_small = n_train_small;
            evaluate_options.out_dir = evaluate_out;
            sppl::run_evaluate(evaluate_options);
        }
    } catch (const sppl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const sppl::ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return 3;
    } catch (const sppl::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
