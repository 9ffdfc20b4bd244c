#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sppl/chat.hpp"
#include "sppl/corpus.hpp"
#include "sppl/jsonl.hpp"

namespace sppl {

enum class PromptTemplate {
    AnswerDirectly,
    StepByStep,
    RewriteGroundTruth,
    TeacherExamples,
    HumanExamples,
};

std::string to_string(PromptTemplate t);
std::optional<PromptTemplate> template_from_string(std::string_view name);

/// A named candidate response-generation method: teacher endpoint x prompt
/// template x retry policy.
struct Strategy {
    std::string id;
    std::string teacher_endpoint;
    PromptTemplate prompt_template = PromptTemplate::AnswerDirectly;
    std::string template_text; // resolved text; defaults per template kind
    bool provides_ground_truth = true;
    int max_attempts = 3;
    std::optional<std::pair<std::string, std::string>> exemplar_texts;
};

/// Built-in template text for a template kind. Templates that withhold the
/// gold answer (provides_ground_truth = false) omit the {gold_answer}
/// placeholder entirely.
std::string default_template_text(PromptTemplate t, bool provides_ground_truth);

/// Substitutes {question}, {gold_answer}, {gold_cot}, {example_1}, {example_2}
/// verbatim. A placeholder present in the template with no value available is
/// an error (e.g. rewrite_groundtruth on a task without gold_cot).
std::string render_prompt(const Strategy& strategy, const TaskInstance& task);

struct CandidateResponse {
    std::string task_id;
    std::string strategy_id;
    std::string text;
    int attempt_index = 1;
    bool correct = false;
    std::string teacher_model;
    std::string created_at;
    std::string prompt_hash; // cache key component; invalidates on template edits
};

using CorrectnessFn = std::function<bool(std::string_view, const TaskInstance&)>;

/// Calls the endpoint up to strategy.max_attempts times with the same rendered
/// prompt, returning the first correct attempt. When every attempt is
/// incorrect, the last attempt is returned with correct=false. Empty
/// completions are an error.
CandidateResponse generate_with_retry(ChatClient& client, const Strategy& strategy,
                                      const TaskInstance& task, const CorrectnessFn& evaluator);

/// Append-only JSONL store of candidate responses, doubling as the generation
/// cache keyed by (task_id, strategy_id, prompt_hash). Writes are serialized.
class CandidateStore {
public:
    explicit CandidateStore(std::filesystem::path path);

    std::optional<CandidateResponse> lookup(const std::string& task_id,
                                            const std::string& strategy_id,
                                            const std::string& prompt_hash) const;
    void append(const CandidateResponse& response);
    size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::map<std::string, CandidateResponse> cache_;
    mutable std::mutex mutex_;
};

struct GenerationOptions {
    int parallelism = 4;
    double temperature = 1.0;
};

/// One candidate per calibration task, in calibration order. The store is
/// consulted before any endpoint call; fresh results are appended to it as
/// they are committed, so a failed run keeps everything generated before the
/// failing task. Errors carry the task id.
std::vector<CandidateResponse> build_candidate_set(ChatClient& client, const Strategy& strategy,
                                                   const CalibrationSet& cal, CandidateStore& store,
                                                   const CorrectnessFn& evaluator,
                                                   const GenerationOptions& options = {});

json candidate_to_json(const CandidateResponse& response);
CandidateResponse candidate_from_json(const json& record);

} // namespace sppl
