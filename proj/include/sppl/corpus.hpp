#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sppl {

enum class EvaluatorKind {
    LastNumber,     // compare the last number in the text to the gold answer
    ExactLabel,     // compare the extracted final-line label to the gold answer
    ExtractorModel, // ask an extraction endpoint for the label, then compare
};

std::string to_string(EvaluatorKind kind);
std::optional<EvaluatorKind> evaluator_from_string(std::string_view name);

/// One benchmark question with its gold answer and evaluator designation.
struct TaskInstance {
    std::string id;
    std::string question;
    std::string gold_answer;
    std::optional<std::string> gold_cot;
    EvaluatorKind evaluator = EvaluatorKind::LastNumber;
};

/// An ordered task corpus; order is the source-file order and stable across runs.
struct TaskSet {
    std::string name;
    std::vector<TaskInstance> tasks;

    const TaskInstance* find(std::string_view id) const;
};

/// A contiguous slice [start_index, start_index + tasks.size()) of a TaskSet.
struct CalibrationSet {
    std::string parent;
    size_t start_index = 0;
    std::vector<TaskInstance> tasks;

    const TaskInstance* find(std::string_view id) const;
    std::string descriptor() const; // e.g. "demo[60,90)"
};

struct Violation {
    std::string task_id;
    std::string rule;
    std::string detail;
};

/// Loads a task file (one JSON object per line). Stops after max_count records
/// when given. Throws ConfigError naming the line for malformed records or
/// invariant violations, and for duplicate ids or an empty file.
TaskSet load_tasks(const std::string& path,
                   std::optional<size_t> max_count = std::nullopt,
                   std::string name = "");

/// Contiguous slice of `set`; throws std::out_of_range for invalid ranges
/// and std::invalid_argument for count == 0.
CalibrationSet slice_calibration(const TaskSet& set, size_t start, size_t count);

/// Reports every invariant violation in the set; empty means all invariants hold.
std::vector<Violation> validate_taskset(const TaskSet& set);

/// True when text parses, in full, as one decimal number (optional sign,
/// optional fraction, grouping commas allowed).
bool parses_as_decimal(std::string_view text);

} // namespace sppl
