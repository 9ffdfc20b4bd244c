#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sppl/chat.hpp"
#include "sppl/corpus.hpp"
#include "sppl/teacher.hpp"

namespace sppl {

struct InitialPrediction {
    std::string task_id;
    std::string text;
    bool correct = false;
};

struct StylePoolEntry {
    std::string text;
    std::string question; // re-attached from the calibration set
};

/// The target model's own correct zero-shot responses, keyed by task id.
struct StylePool {
    std::string source_model;
    std::map<std::string, StylePoolEntry> entries;
};

/// Zero-shot prompt suffix used for initial predictions; recorded in run metadata.
inline constexpr std::string_view kZeroShotInstruction = "Answer the question.";

/// One prediction per calibration task, in order, each evaluated immediately
/// with the task's evaluator. An empty completion is recorded as incorrect,
/// not treated as fatal.
std::vector<InitialPrediction> generate_initial_predictions(ChatClient& target,
                                                            const CalibrationSet& cal,
                                                            const CorrectnessFn& evaluator,
                                                            const GenerationOptions& options = {});

/// Keeps exactly the correct predictions. Predictions must cover the
/// calibration set exactly once, in order.
StylePool build_style_pool(const std::vector<InitialPrediction>& predictions,
                           const CalibrationSet& cal, std::string source_model);

/// Pool file: one header line {"source_model": ...} then one {"task_id","text"}
/// line per entry, in task-id order.
void save_style_pool(const StylePool& pool, const std::filesystem::path& path);
StylePool load_style_pool(const std::filesystem::path& path, const CalibrationSet& cal);

} // namespace sppl
