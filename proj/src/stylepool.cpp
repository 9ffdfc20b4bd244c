#include "sppl/stylepool.hpp"

#include <sstream>

#include "sppl/errors.hpp"
#include "sppl/jsonl.hpp"
#include "sppl/parallel.hpp"

namespace sppl {

std::vector<InitialPrediction> generate_initial_predictions(ChatClient& target,
                                                            const CalibrationSet& cal,
                                                            const CorrectnessFn& evaluator,
                                                            const GenerationOptions& options) {
    std::vector<const TaskInstance*> tasks;
    tasks.reserve(cal.tasks.size());
    for (const auto& t : cal.tasks) {
        tasks.push_back(&t);
    }
    return ordered_parallel_map(tasks, options.parallelism,
                                [&](const TaskInstance* task, size_t) {
                                    ChatRequest request;
                                    request.model = target.model();
                                    request.temperature = options.temperature;
                                    request.messages.push_back(
                                        {"user", task->question + "\n\n" +
                                                     std::string(kZeroShotInstruction)});
                                    InitialPrediction prediction;
                                    prediction.task_id = task->id;
                                    prediction.text = target.complete(request);
                                    prediction.correct =
                                        !prediction.text.empty() &&
                                        evaluator(prediction.text, *task);
                                    return prediction;
                                });
}

StylePool build_style_pool(const std::vector<InitialPrediction>& predictions,
                           const CalibrationSet& cal, std::string source_model) {
    if (predictions.size() != cal.tasks.size()) {
        throw std::invalid_argument("predictions do not cover the calibration set: " +
                                    std::to_string(predictions.size()) + " predictions for " +
                                    std::to_string(cal.tasks.size()) + " tasks");
    }
    StylePool pool;
    pool.source_model = std::move(source_model);
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].task_id != cal.tasks[i].id) {
            throw std::invalid_argument("prediction " + std::to_string(i) + " is for task \"" +
                                        predictions[i].task_id + "\" but calibration task is \"" +
                                        cal.tasks[i].id + "\"");
        }
        if (predictions[i].correct) {
            pool.entries[predictions[i].task_id] = {predictions[i].text, cal.tasks[i].question};
        }
    }
    return pool;
}

void save_style_pool(const StylePool& pool, const std::filesystem::path& path) {
    std::ostringstream out;
    out << json{{"source_model", pool.source_model}}.dump() << "\n";
    for (const auto& [task_id, entry] : pool.entries) {
        out << json{{"task_id", task_id}, {"text", entry.text}}.dump() << "\n";
    }
    write_file_atomic(path, out.str());
}

StylePool load_style_pool(const std::filesystem::path& path, const CalibrationSet& cal) {
    StylePool pool;
    bool saw_header = false;
    for_each_jsonl(path, [&](const json& record, size_t lineno) {
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        if (!saw_header) {
            if (!record.contains("source_model")) {
                throw ArtifactError(where + ": pool header must carry source_model");
            }
            pool.source_model = record.at("source_model").get<std::string>();
            saw_header = true;
            return;
        }
        std::string task_id = record.at("task_id").get<std::string>();
        const TaskInstance* task = cal.find(task_id);
        if (task == nullptr) {
            throw ArtifactError(where + ": pool entry \"" + task_id +
                                "\" is not in the calibration set");
        }
        pool.entries[task_id] = {record.at("text").get<std::string>(), task->question};
    });
    if (!saw_header) {
        throw ArtifactError("pool file has no header line: " + path.string());
    }
    return pool;
}

} // namespace sppl
