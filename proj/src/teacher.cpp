#include "sppl/teacher.hpp"

#include <ctime>

#include "sppl/errors.hpp"
#include "sppl/hashing.hpp"
#include "sppl/parallel.hpp"

namespace sppl {

std::string to_string(PromptTemplate t) {
    switch (t) {
    case PromptTemplate::AnswerDirectly: return "answer_directly";
    case PromptTemplate::StepByStep: return "step_by_step";
    case PromptTemplate::RewriteGroundTruth: return "rewrite_groundtruth";
    case PromptTemplate::TeacherExamples: return "teacher_examples";
    case PromptTemplate::HumanExamples: return "human_examples";
    }
    return "answer_directly";
}

std::optional<PromptTemplate> template_from_string(std::string_view name) {
    if (name == "answer_directly") return PromptTemplate::AnswerDirectly;
    if (name == "step_by_step") return PromptTemplate::StepByStep;
    if (name == "rewrite_groundtruth") return PromptTemplate::RewriteGroundTruth;
    if (name == "teacher_examples") return PromptTemplate::TeacherExamples;
    if (name == "human_examples") return PromptTemplate::HumanExamples;
    return std::nullopt;
}

std::string default_template_text(PromptTemplate t, bool provides_ground_truth) {
    switch (t) {
    case PromptTemplate::AnswerDirectly:
        if (provides_ground_truth) {
            return "Answer the question below in your own words and end with the final answer.\n"
                   "The correct final answer is provided for reference.\n\n"
                   "Question: {question}\nCorrect answer: {gold_answer}\n";
        }
        return "Answer the question below in your own words and end with the final answer.\n\n"
               "Question: {question}\n";
    case PromptTemplate::StepByStep:
        if (provides_ground_truth) {
            return "Solve the problem below step by step. Number each step and end with the final "
                   "answer.\nThe correct final answer is provided for reference.\n\n"
                   "Question: {question}\nCorrect answer: {gold_answer}\n";
        }
        return "Solve the problem below step by step. Number each step and end with the final "
               "answer.\n\nQuestion: {question}\n";
    case PromptTemplate::RewriteGroundTruth:
        return "Rewrite the reference solution below in your own words, keeping the reasoning and "
               "the final answer intact.\n\nQuestion: {question}\n"
               "Reference solution: {gold_cot}\n";
    case PromptTemplate::TeacherExamples:
    case PromptTemplate::HumanExamples:
        if (provides_ground_truth) {
            return "Here are two example solutions that show the expected format.\n\n"
                   "Example 1:\n{example_1}\n\nExample 2:\n{example_2}\n\n"
                   "Now answer the question below in the same format and end with the final "
                   "answer.\nThe correct final answer is provided for reference.\n\n"
                   "Question: {question}\nCorrect answer: {gold_answer}\n";
        }
        return "Here are two example solutions that show the expected format.\n\n"
               "Example 1:\n{example_1}\n\nExample 2:\n{example_2}\n\n"
               "Now answer the question below in the same format and end with the final "
               "answer.\n\nQuestion: {question}\n";
    }
    return "{question}";
}

namespace {

void replace_all(std::string& text, std::string_view placeholder, std::string_view value) {
    size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

std::string now_iso8601() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string cache_key(const std::string& task_id, const std::string& strategy_id,
                      const std::string& prompt_hash) {
    return task_id + "\x1f" + strategy_id + "\x1f" + prompt_hash;
}

} // namespace

std::string render_prompt(const Strategy& strategy, const TaskInstance& task) {
    std::string text = strategy.template_text.empty()
                           ? default_template_text(strategy.prompt_template,
                                                   strategy.provides_ground_truth)
                           : strategy.template_text;

    if (text.find("{gold_cot}") != std::string::npos && !task.gold_cot.has_value()) {
        throw ConfigError("strategy \"" + strategy.id + "\": template needs gold_cot but task \"" +
                          task.id + "\" has none");
    }
    bool needs_examples = text.find("{example_1}") != std::string::npos ||
                          text.find("{example_2}") != std::string::npos;
    if (needs_examples && !strategy.exemplar_texts.has_value()) {
        throw ConfigError("strategy \"" + strategy.id +
                          "\": template needs exemplar_texts but none are configured");
    }

    replace_all(text, "{question}", task.question);
    replace_all(text, "{gold_answer}", task.gold_answer);
    if (task.gold_cot) {
        replace_all(text, "{gold_cot}", *task.gold_cot);
    }
    if (strategy.exemplar_texts) {
        replace_all(text, "{example_1}", strategy.exemplar_texts->first);
        replace_all(text, "{example_2}", strategy.exemplar_texts->second);
    }
    return text;
}

CandidateResponse generate_with_retry(ChatClient& client, const Strategy& strategy,
                                      const TaskInstance& task, const CorrectnessFn& evaluator) {
    if (strategy.max_attempts < 1) {
        throw ConfigError("strategy \"" + strategy.id + "\": max_attempts must be >= 1");
    }
    const std::string prompt = render_prompt(strategy, task);

    ChatRequest request;
    request.model = client.model();
    request.messages.push_back({"user", prompt});

    CandidateResponse response;
    response.task_id = task.id;
    response.strategy_id = strategy.id;
    response.teacher_model = client.model();
    response.prompt_hash = content_hash(prompt);

    for (int attempt = 1; attempt <= strategy.max_attempts; ++attempt) {
        std::string text = client.complete(request);
        if (text.empty()) {
            throw BackendError("strategy \"" + strategy.id + "\", task \"" + task.id +
                               "\": empty completion");
        }
        response.text = std::move(text);
        response.attempt_index = attempt;
        response.correct = evaluator(response.text, task);
        if (response.correct) {
            break;
        }
    }
    response.created_at = now_iso8601();
    return response;
}

CandidateStore::CandidateStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    if (std::filesystem::exists(path_)) {
        for_each_jsonl(path_, [&](const json& record, size_t) {
            CandidateResponse r = candidate_from_json(record);
            cache_[cache_key(r.task_id, r.strategy_id, r.prompt_hash)] = std::move(r);
        });
    }
}

std::optional<CandidateResponse> CandidateStore::lookup(const std::string& task_id,
                                                        const std::string& strategy_id,
                                                        const std::string& prompt_hash) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(cache_key(task_id, strategy_id, prompt_hash));
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

void CandidateStore::append(const CandidateResponse& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    append_jsonl(path_, candidate_to_json(response));
    cache_[cache_key(response.task_id, response.strategy_id, response.prompt_hash)] = response;
}

size_t CandidateStore::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

std::vector<CandidateResponse> build_candidate_set(ChatClient& client, const Strategy& strategy,
                                                   const CalibrationSet& cal, CandidateStore& store,
                                                   const CorrectnessFn& evaluator,
                                                   const GenerationOptions& options) {
    struct Slot {
        const TaskInstance* task = nullptr;
        std::optional<CandidateResponse> cached;
    };
    std::vector<Slot> slots;
    slots.reserve(cal.tasks.size());
    for (const auto& task : cal.tasks) {
        const std::string prompt_hash = content_hash(render_prompt(strategy, task));
        slots.push_back({&task, store.lookup(task.id, strategy.id, prompt_hash)});
    }

    std::vector<CandidateResponse> out(cal.tasks.size());
    std::vector<const TaskInstance*> pending;
    std::vector<size_t> pending_index;
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].cached) {
            out[i] = *slots[i].cached;
        } else {
            pending.push_back(slots[i].task);
            pending_index.push_back(i);
        }
    }

    ordered_parallel_pipeline(
        pending, options.parallelism,
        [&](const TaskInstance* task, size_t) {
            try {
                return generate_with_retry(client, strategy, *task, evaluator);
            } catch (const BackendError& e) {
                throw BackendError("task \"" + task->id + "\": " + e.what());
            }
        },
        [&](CandidateResponse&& response, size_t k) {
            store.append(response);
            out[pending_index[k]] = std::move(response);
        });
    return out;
}

json candidate_to_json(const CandidateResponse& r) {
    return json{{"task_id", r.task_id},
                {"strategy_id", r.strategy_id},
                {"text", r.text},
                {"attempt_index", r.attempt_index},
                {"correct", r.correct},
                {"teacher_model", r.teacher_model},
                {"created_at", r.created_at},
                {"prompt_hash", r.prompt_hash}};
}

CandidateResponse candidate_from_json(const json& record) {
    CandidateResponse r;
    try {
        r.task_id = record.at("task_id").get<std::string>();
        r.strategy_id = record.at("strategy_id").get<std::string>();
        r.text = record.at("text").get<std::string>();
        r.attempt_index = record.at("attempt_index").get<int>();
        r.correct = record.at("correct").get<bool>();
        r.teacher_model = record.at("teacher_model").get<std::string>();
        r.created_at = record.at("created_at").get<std::string>();
        r.prompt_hash = record.at("prompt_hash").get<std::string>();
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("invalid candidate record: ") + e.what());
    }
    return r;
}

} // namespace sppl
