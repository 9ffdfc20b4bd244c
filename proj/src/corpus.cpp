#include "sppl/corpus.hpp"

#include <filesystem>
#include <unordered_set>

#include "sppl/errors.hpp"
#include "sppl/evaluator.hpp"
#include "sppl/jsonl.hpp"

namespace sppl {

std::string to_string(EvaluatorKind kind) {
    switch (kind) {
    case EvaluatorKind::LastNumber: return "last_number";
    case EvaluatorKind::ExactLabel: return "exact_label";
    case EvaluatorKind::ExtractorModel: return "extractor_model";
    }
    return "last_number";
}

std::optional<EvaluatorKind> evaluator_from_string(std::string_view name) {
    if (name == "last_number") return EvaluatorKind::LastNumber;
    if (name == "exact_label") return EvaluatorKind::ExactLabel;
    if (name == "extractor_model") return EvaluatorKind::ExtractorModel;
    return std::nullopt;
}

const TaskInstance* TaskSet::find(std::string_view id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

const TaskInstance* CalibrationSet::find(std::string_view id) const {
    for (const auto& t : tasks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

std::string CalibrationSet::descriptor() const {
    return parent + "[" + std::to_string(start_index) + "," +
           std::to_string(start_index + tasks.size()) + ")";
}

bool parses_as_decimal(std::string_view text) {
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return false;
    size_t end = text.find_last_not_of(" \t\r\n");
    auto extracted = extract_last_number_text(text.substr(begin, end - begin + 1));
    return extracted.has_value() && extracted->text.size() == end - begin + 1 &&
           extracted->offset == 0;
}

namespace {

void check_record_rules(const TaskInstance& task, std::vector<Violation>& out) {
    if (task.id.empty()) {
        out.push_back({task.id, "id_nonempty", "task id is empty"});
    }
    if (task.question.empty()) {
        out.push_back({task.id, "question_nonempty", "question is empty"});
    }
    if (task.gold_answer.empty()) {
        out.push_back({task.id, "gold_answer_nonempty", "gold_answer is empty"});
    }
    if (task.evaluator == EvaluatorKind::LastNumber && !task.gold_answer.empty() &&
        !parses_as_decimal(task.gold_answer)) {
        out.push_back({task.id, "gold_answer_numeric",
                       "evaluator last_number requires a numeric gold_answer, got \"" +
                           task.gold_answer + "\""});
    }
}

TaskInstance parse_record(const json& record, const std::string& where) {
    if (!record.is_object()) {
        throw ConfigError(where + ": record is not a JSON object");
    }
    TaskInstance task;
    auto require_string = [&](const char* key) -> std::string {
        if (!record.contains(key) || !record.at(key).is_string()) {
            throw ConfigError(where + ": missing or non-string field \"" + key + "\"");
        }
        return record.at(key).get<std::string>();
    };
    task.id = require_string("id");
    task.question = require_string("question");
    task.gold_answer = require_string("gold_answer");
    if (record.contains("gold_cot")) {
        if (!record.at("gold_cot").is_string()) {
            throw ConfigError(where + ": field \"gold_cot\" must be a string");
        }
        task.gold_cot = record.at("gold_cot").get<std::string>();
    }
    std::string evaluator = require_string("evaluator");
    auto kind = evaluator_from_string(evaluator);
    if (!kind) {
        throw ConfigError(where + ": unknown evaluator \"" + evaluator + "\"");
    }
    task.evaluator = *kind;
    return task;
}

} // namespace

TaskSet load_tasks(const std::string& path, std::optional<size_t> max_count, std::string name) {
    std::filesystem::path p(path);
    if (name.empty()) {
        name = p.stem().string();
    }
    TaskSet set{std::move(name), {}};
    std::unordered_set<std::string> seen;
    for_each_jsonl(p, [&](const json& record, size_t lineno) {
        if (max_count && set.tasks.size() >= *max_count) {
            return;
        }
        const std::string where = p.filename().string() + ":" + std::to_string(lineno);
        TaskInstance task = parse_record(record, where);
        std::vector<Violation> violations;
        check_record_rules(task, violations);
        if (!violations.empty()) {
            throw ConfigError(where + ": invalid record (" + violations.front().rule + "): " +
                              violations.front().detail);
        }
        if (!seen.insert(task.id).second) {
            throw ConfigError(where + ": duplicate task id \"" + task.id + "\"");
        }
        set.tasks.push_back(std::move(task));
    });
    if (set.tasks.empty()) {
        throw ConfigError("task file has no records: " + path);
    }
    return set;
}

CalibrationSet slice_calibration(const TaskSet& set, size_t start, size_t count) {
    if (count == 0) {
        throw std::invalid_argument("calibration count must be >= 1");
    }
    if (start > set.tasks.size() || count > set.tasks.size() - start) {
        throw std::out_of_range("calibration slice [" + std::to_string(start) + "," +
                                std::to_string(start + count) + ") exceeds task set of size " +
                                std::to_string(set.tasks.size()));
    }
    CalibrationSet cal;
    cal.parent = set.name;
    cal.start_index = start;
    cal.tasks.assign(set.tasks.begin() + static_cast<std::ptrdiff_t>(start),
                     set.tasks.begin() + static_cast<std::ptrdiff_t>(start + count));
    return cal;
}

std::vector<Violation> validate_taskset(const TaskSet& set) {
    std::vector<Violation> out;
    std::unordered_set<std::string> seen;
    for (const auto& task : set.tasks) {
        check_record_rules(task, out);
        if (!seen.insert(task.id).second) {
            out.push_back({task.id, "id_unique", "duplicate task id \"" + task.id + "\""});
        }
    }
    return out;
}

} // namespace sppl
