#include "sppl/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "sppl/errors.hpp"
#include "sppl/evaluator.hpp"
#include "sppl/hashing.hpp"
#include "sppl/parallel.hpp"
#include "sppl/version.hpp"

namespace sppl {

namespace {

std::filesystem::path out_path(const RunConfig& config, const std::string& name) {
    return std::filesystem::path(config.output_dir) / name;
}

json hash_outputs(const std::filesystem::path& out_dir, const std::vector<std::string>& names) {
    json hashes = json::object();
    for (const auto& name : names) {
        hashes[name] = hash_file(out_dir / name);
    }
    return hashes;
}

/// True when the stage's meta records the same inputs and every output still
/// exists with the recorded hash.
bool stage_up_to_date(const RunConfig& config, const std::string& stage, const json& inputs) {
    std::filesystem::path meta_path = out_path(config, stage + ".meta.json");
    if (!std::filesystem::exists(meta_path)) {
        return false;
    }
    json meta = json::parse(read_file(meta_path), nullptr, false);
    if (meta.is_discarded() || meta.value("stage", "") != stage || !meta.contains("inputs") ||
        meta["inputs"] != inputs || !meta.contains("outputs")) {
        return false;
    }
    for (const auto& [name, hash] : meta["outputs"].items()) {
        std::filesystem::path p = out_path(config, name);
        if (!std::filesystem::exists(p) || hash_file(p) != hash.get<std::string>()) {
            return false;
        }
    }
    return true;
}

void write_stage_meta(const RunConfig& config, const std::string& stage, const json& inputs,
                      const std::vector<std::string>& outputs, const json& params) {
    json meta{{"stage", stage},
              {"toolkit_version", kVersion},
              {"inputs", inputs},
              {"outputs", hash_outputs(config.output_dir, outputs)},
              {"params", params}};
    write_file_atomic(out_path(config, stage + ".meta.json"), dump_stable(meta));
}

void note(const PipelineEnv& env, const std::string& message) {
    if (!env.quiet) {
        std::cerr << message << "\n";
    }
}

std::unique_ptr<ChatClient> build_client(const RunConfig& config, const PipelineEnv& env,
                                         const std::string& endpoint_name) {
    const EndpointConfig& endpoint = config.endpoint(endpoint_name);
    if (env.make_client) {
        return env.make_client(endpoint);
    }
    return make_chat_client(endpoint);
}

/// Correctness check bound to the run's extractor endpoint; the extractor
/// client is created only if some task actually needs it.
struct CorrectnessContext {
    std::unique_ptr<ChatClient> extractor;

    CorrectnessContext(const RunConfig& config, const PipelineEnv& env,
                       const CalibrationSet& cal) {
        bool needs_extractor =
            std::any_of(cal.tasks.begin(), cal.tasks.end(), [](const TaskInstance& t) {
                return t.evaluator == EvaluatorKind::ExtractorModel;
            });
        if (needs_extractor) {
            extractor = build_client(config, env, config.extractor_endpoint);
        }
    }

    CorrectnessFn fn() const {
        ChatClient* client = extractor.get();
        return [client](std::string_view text, const TaskInstance& task) {
            return evaluate_correctness(text, task, client);
        };
    }
};

CalibrationSet load_calibration(const RunConfig& config) {
    TaskSet set = load_tasks(config.task_file, std::nullopt, config.taskset_name);
    try {
        return slice_calibration(set, static_cast<size_t>(config.calibration.start),
                                 static_cast<size_t>(config.calibration.count));
    } catch (const std::out_of_range& e) {
        throw ConfigError(std::string("calibration: ") + e.what());
    }
}

std::string candidates_file(const Strategy& strategy) {
    return "candidates/" + strategy.id + ".jsonl";
}

json generate_inputs(const RunConfig& config) {
    return json{{"config", config.config_hash()}, {"tasks", hash_file(config.task_file)}};
}

json pool_inputs(const RunConfig& config) {
    return generate_inputs(config);
}

json score_inputs(const RunConfig& config) {
    json inputs = generate_inputs(config);
    std::filesystem::path pool = out_path(config, "pool.jsonl");
    if (!std::filesystem::exists(pool)) {
        throw ArtifactError("pool.jsonl not found in " + config.output_dir + ": run pool first");
    }
    inputs["pool"] = hash_file(pool);
    for (const auto& strategy : config.strategies) {
        std::filesystem::path store = out_path(config, candidates_file(strategy));
        if (!std::filesystem::exists(store)) {
            throw ArtifactError(candidates_file(strategy) + " not found in " + config.output_dir +
                                ": run generate first");
        }
        inputs["candidates/" + strategy.id] = hash_file(store);
    }
    return inputs;
}

json rank_inputs(const RunConfig& config) {
    std::filesystem::path scores = out_path(config, "scores.jsonl");
    if (!std::filesystem::exists(scores)) {
        throw ArtifactError("scores.jsonl not found in " + config.output_dir +
                            ": run score first");
    }
    return json{{"config", config.config_hash()}, {"scores", hash_file(scores)}};
}

} // namespace

void run_generate(const RunConfig& config, const PipelineEnv& env) {
    std::filesystem::create_directories(config.output_dir);
    const json inputs = generate_inputs(config);
    if (stage_up_to_date(config, "generate", inputs)) {
        note(env, "generate: up to date");
        return;
    }
    CalibrationSet cal = load_calibration(config);
    CorrectnessContext correctness(config, env, cal);

    std::vector<std::string> outputs;
    for (const auto& strategy : config.strategies) {
        CandidateStore store(out_path(config, candidates_file(strategy)));
        std::unique_ptr<ChatClient> client = build_client(config, env, strategy.teacher_endpoint);
        std::vector<CandidateResponse> responses =
            build_candidate_set(*client, strategy, cal, store, correctness.fn(),
                                config.generation);
        size_t correct = 0;
        for (const auto& r : responses) {
            correct += r.correct ? 1 : 0;
        }
        note(env, "generate: strategy \"" + strategy.id + "\": " +
                      std::to_string(responses.size()) + " candidates, " +
                      std::to_string(correct) + " correct");
        outputs.push_back(candidates_file(strategy));
    }

    json params{{"temperature", config.generation.temperature},
                {"parallelism", config.generation.parallelism},
                {"calibration", cal.descriptor()}};
    write_stage_meta(config, "generate", inputs, outputs, params);
}

void run_pool(const RunConfig& config, const PipelineEnv& env) {
    std::filesystem::create_directories(config.output_dir);
    const json inputs = pool_inputs(config);
    if (stage_up_to_date(config, "pool", inputs)) {
        note(env, "pool: up to date");
        return;
    }
    CalibrationSet cal = load_calibration(config);
    CorrectnessContext correctness(config, env, cal);
    std::unique_ptr<ChatClient> target = build_client(config, env, config.target_endpoint);

    std::vector<InitialPrediction> predictions =
        generate_initial_predictions(*target, cal, correctness.fn(), config.generation);

    std::ostringstream prediction_lines;
    for (const auto& p : predictions) {
        prediction_lines << json{{"task_id", p.task_id}, {"text", p.text}, {"correct", p.correct}}
                                .dump()
                         << "\n";
    }
    write_file_atomic(out_path(config, "initial_predictions.jsonl"), prediction_lines.str());

    StylePool pool = build_style_pool(predictions, cal, target->model());
    save_style_pool(pool, out_path(config, "pool.jsonl"));
    note(env, "pool: " + std::to_string(pool.entries.size()) + " of " +
                  std::to_string(predictions.size()) + " predictions retained");

    json params{{"zero_shot_instruction", std::string(kZeroShotInstruction)},
                {"source_model", target->model()},
                {"calibration", cal.descriptor()}};
    write_stage_meta(config, "pool", inputs, {"initial_predictions.jsonl", "pool.jsonl"}, params);
}

void run_score(const RunConfig& config, const PipelineEnv& env) {
    std::filesystem::create_directories(config.output_dir);
    const json inputs = score_inputs(config);
    if (stage_up_to_date(config, "score", inputs)) {
        note(env, "score: up to date");
        return;
    }
    CalibrationSet cal = load_calibration(config);
    StylePool pool = load_style_pool(out_path(config, "pool.jsonl"), cal);

    std::unique_ptr<ScoringBackend> owned_backend;
    ScoringBackend* backend = env.backend_override;
    if (backend == nullptr) {
        owned_backend = make_scoring_backend(config.scorer_backend);
        backend = owned_backend.get();
    }

    struct Job {
        const TaskInstance* task;
        CandidateResponse candidate;
    };
    std::vector<Job> jobs;
    for (const auto& strategy : config.strategies) {
        CandidateStore store(out_path(config, candidates_file(strategy)));
        for (const auto& task : cal.tasks) {
            const std::string prompt_hash = content_hash(render_prompt(strategy, task));
            auto cached = store.lookup(task.id, strategy.id, prompt_hash);
            if (!cached) {
                throw ArtifactError("no candidate for task \"" + task.id + "\", strategy \"" +
                                    strategy.id + "\" (stale or missing store): run generate "
                                    "first");
            }
            jobs.push_back({&task, std::move(*cached)});
        }
    }

    std::vector<ExampleScore> scores =
        ordered_parallel_map(jobs, config.scorer_parallelism, [&](const Job& job, size_t) {
            return sppl_score(*backend, pool, *job.task, job.candidate, config.sppl);
        });
    std::sort(scores.begin(), scores.end(), [](const ExampleScore& a, const ExampleScore& b) {
        return std::tie(a.strategy_id, a.task_id) < std::tie(b.strategy_id, b.task_id);
    });

    std::ostringstream lines;
    for (const auto& score : scores) {
        lines << example_score_to_json(score).dump() << "\n";
    }
    write_file_atomic(out_path(config, "scores.jsonl"), lines.str());
    note(env, "score: " + std::to_string(scores.size()) + " example scores");

    json params{{"exemplar_count", config.sppl.exemplar_count},
                {"fallback", to_string(config.sppl.fallback)},
                {"instruction_text", config.sppl.instruction_text},
                {"seed", config.seed},
                {"backend", json{{"name", config.scorer_backend.name},
                                 {"mode", config.scorer_backend.mode},
                                 {"model", config.scorer_backend.model}}},
                {"calibration", cal.descriptor()}};
    write_stage_meta(config, "score", inputs, {"scores.jsonl"}, params);
}

void run_rank(const RunConfig& config, const PipelineEnv& env) {
    std::filesystem::create_directories(config.output_dir);
    const json inputs = rank_inputs(config);
    if (stage_up_to_date(config, "rank", inputs)) {
        note(env, "rank: up to date");
        return;
    }
    CalibrationSet cal = load_calibration(config);

    std::map<std::string, std::vector<ExampleScore>> by_strategy;
    for_each_jsonl(out_path(config, "scores.jsonl"), [&](const json& record, size_t) {
        ExampleScore score = example_score_from_json(record);
        by_strategy[score.strategy_id].push_back(std::move(score));
    });
    std::map<std::string, StrategyScore> aggregated;
    for (const auto& [strategy_id, scores] : by_strategy) {
        if (scores.size() != cal.tasks.size()) {
            throw ArtifactError("strategy \"" + strategy_id + "\" has " +
                                std::to_string(scores.size()) + " scores for a calibration of " +
                                std::to_string(cal.tasks.size()) + ": rerun score");
        }
        aggregated[strategy_id] = aggregate_strategy_score(strategy_id, scores);
    }

    RankingReport primary = rank_strategies(aggregated, config.metric, cal.descriptor(),
                                            config.seed);
    RankMetric other = config.metric == RankMetric::Sppl ? RankMetric::Ppl : RankMetric::Sppl;
    RankingReport alternate = rank_strategies(aggregated, other, cal.descriptor(), config.seed);

    json alternate_json{{"metric", to_string(alternate.metric)},
                        {"selected", alternate.selected},
                        {"order", json::array()}};
    for (const auto& e : alternate.entries) {
        alternate_json["order"].push_back(e.strategy_id);
    }
    json metadata{{"input_hashes", inputs},
                  {"config_snapshot", config.snapshot},
                  {"alternate", alternate_json}};
    select_and_emit(primary, out_path(config, "ranking.json"), metadata);

    const std::string target_model = config.endpoint(config.target_endpoint).model;
    for (RankMetric metric : {RankMetric::Sppl, RankMetric::Ppl}) {
        std::ostringstream lines;
        for (const auto& [strategy_id, score] : aggregated) {
            lines << json{{"model", target_model},
                          {"dataset", config.taskset_name},
                          {"strategy_id", strategy_id},
                          {"score", metric == RankMetric::Sppl ? score.mean_sppl
                                                               : score.mean_ppl}}
                         .dump()
                  << "\n";
        }
        write_file_atomic(out_path(config, "metric_scores_" + to_string(metric) + ".jsonl"),
                          lines.str());
    }

    note(env, "rank: selected \"" + primary.selected + "\" by " + to_string(config.metric));
    write_stage_meta(config, "rank", inputs,
                     {"ranking.json", "metric_scores_sppl.jsonl", "metric_scores_ppl.jsonl"},
                     json{{"metric", to_string(config.metric)}});
}

void run_evaluate(const EvaluateOptions& options) {
    AccuracyTable table = load_accuracy_table(options.table);
    std::vector<MetricScoreRow> metric_scores = load_metric_scores(options.metric_scores);

    SelectorEvaluation eval = evaluate_selector(table, metric_scores, options.n_train);

    json pairs = json::array();
    std::set<std::string> scoped_strategies;
    for (const auto& outcome : eval.pairs) {
        for (const auto& s : outcome.strategies) {
            scoped_strategies.insert(s);
        }
        json pair{{"model", outcome.pair.model},
                  {"dataset", outcome.pair.dataset},
                  {"strategies", outcome.strategies},
                  {"gold_ranks", outcome.gold_ranks},
                  {"metric_ranks", outcome.metric_ranks},
                  {"weight", outcome.weight},
                  {"selected_strategy", outcome.selected_strategy},
                  {"selected_accuracy", outcome.selected_accuracy},
                  {"best_strategy", outcome.best_strategy},
                  {"best_accuracy", outcome.best_accuracy}};
        if (outcome.rho) {
            pair["rho"] = *outcome.rho;
        }
        pairs.push_back(std::move(pair));
    }

    json groups = json::array();
    for (double threshold : options.std_thresholds) {
        auto retained = std_group_filter(table, threshold, options.n_train, scoped_strategies);
        json keys = json::array();
        for (const auto& pair : retained) {
            keys.push_back(pair.model + "/" + pair.dataset);
        }
        groups.push_back(json{{"threshold", threshold},
                              {"retained", retained.size()},
                              {"pairs", std::move(keys)}});
    }

    json doc{{"macro_accuracy", eval.macro_accuracy},
             {"weighted_rho_mode", "per_pair_weighted_mean"},
             {"weight_convention", "population_std"},
             {"n_train", options.n_train},
             {"pairs", std::move(pairs)},
             {"std_groups", std::move(groups)},
             {"toolkit_version", kVersion},
             {"input_hashes", json{{"table", hash_file(options.table)},
                                   {"metric_scores", hash_file(options.metric_scores)}}}};
    if (eval.weighted_rho) doc["weighted_rho"] = *eval.weighted_rho;
    if (eval.flattened_rho) doc["flattened_rho"] = *eval.flattened_rho;

    if (options.n_train_small) {
        auto large = collect_pairs(table, options.n_train);
        auto small = collect_pairs(table, *options.n_train_small);
        json ratios = json::array();
        for (const auto& [pair, by_strategy] : large) {
            auto small_it = small.find(pair);
            if (small_it == small.end()) continue;
            for (const auto& [strategy, acc_large] : by_strategy) {
                auto acc_it = small_it->second.find(strategy);
                if (acc_it == small_it->second.end()) continue;
                json entry{{"model", pair.model},
                           {"dataset", pair.dataset},
                           {"strategy_id", strategy},
                           {"acc_large", acc_large},
                           {"acc_small", acc_it->second}};
                auto ratio = improvement_ratio(acc_large, acc_it->second);
                if (ratio) {
                    entry["ratio"] = *ratio;
                } else {
                    entry["ratio_undefined"] = true;
                }
                ratios.push_back(std::move(entry));
            }
        }
        doc["improvement_ratios"] = std::move(ratios);
        doc["n_train_small"] = *options.n_train_small;
    }

    write_file_atomic(options.out_dir / "evaluation.json", dump_stable(doc));
}

void run_report(const RunConfig& config, std::ostream& out) {
    std::filesystem::path ranking_path = out_path(config, "ranking.json");
    if (!std::filesystem::exists(ranking_path)) {
        throw ArtifactError("ranking.json not found in " + config.output_dir + ": run rank first");
    }
    json ranking = json::parse(read_file(ranking_path));

    std::ostringstream text;
    char line[256];
    text << "sppl-toolkit report (version " << ranking.value("toolkit_version", "?") << ")\n";
    text << "calibration: " << ranking.value("calibration", "?")
         << "  seed: " << ranking.value("seed", 0ull) << "\n";
    text << "metric: " << ranking.value("metric", "?") << "  selected: "
         << ranking.value("selected", "?") << "\n\n";

    std::map<std::string, int> ppl_rank;
    if (ranking.contains("entries")) {
        std::vector<std::pair<double, std::string>> by_ppl;
        for (const auto& e : ranking["entries"]) {
            by_ppl.emplace_back(e.value("mean_ppl", 0.0), e.value("strategy_id", ""));
        }
        std::sort(by_ppl.begin(), by_ppl.end());
        for (size_t i = 0; i < by_ppl.size(); ++i) {
            ppl_rank[by_ppl[i].second] = static_cast<int>(i + 1);
        }
        std::snprintf(line, sizeof(line), "%-28s %12s %12s %6s %6s\n", "strategy", "mean_ppl",
                      "mean_sppl", "r_ppl", "r_sppl");
        text << line;
        std::vector<json> entries(ranking["entries"].begin(), ranking["entries"].end());
        std::sort(entries.begin(), entries.end(), [](const json& a, const json& b) {
            return a.value("mean_sppl", 0.0) < b.value("mean_sppl", 0.0);
        });
        for (const auto& e : entries) {
            std::snprintf(line, sizeof(line), "%-28s %12.6f %12.6f %6d %6d\n",
                          e.value("strategy_id", "").c_str(), e.value("mean_ppl", 0.0),
                          e.value("mean_sppl", 0.0), ppl_rank[e.value("strategy_id", "")],
                          e.value("rank", 0));
            text << line;
        }
    }

    std::filesystem::path evaluation_path = out_path(config, "evaluation.json");
    if (std::filesystem::exists(evaluation_path)) {
        json evaluation = json::parse(read_file(evaluation_path));
        text << "\nselector evaluation (n_train=" << evaluation.value("n_train", 0L) << ")\n";
        std::snprintf(line, sizeof(line), "macro accuracy: %.4f\n",
                      evaluation.value("macro_accuracy", 0.0));
        text << line;
        if (evaluation.contains("weighted_rho")) {
            std::snprintf(line, sizeof(line), "weighted rho (%s): %.4f\n",
                          evaluation.value("weighted_rho_mode", "?").c_str(),
                          evaluation["weighted_rho"].get<double>());
            text << line;
        }
        if (evaluation.contains("flattened_rho")) {
            std::snprintf(line, sizeof(line), "weighted rho (flattened): %.4f\n",
                          evaluation["flattened_rho"].get<double>());
            text << line;
        }
        for (const auto& group : evaluation.value("std_groups", json::array())) {
            std::snprintf(line, sizeof(line), "pairs with accuracy std > %.2f%%: %zu\n",
                          group.value("threshold", 0.0) * 100.0,
                          group.value("retained", size_t{0}));
            text << line;
        }
    }

    write_file_atomic(out_path(config, "report.txt"), text.str());
    out << text.str();
}

} // namespace sppl
