#include "sppl/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <regex>

#include "sppl/chat.hpp"
#include "sppl/errors.hpp"

namespace sppl {

namespace {

const std::regex& number_pattern() {
    // comma-grouped alternative first so "1,234" is one match, not three
    static const std::regex pattern(R"([+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?)");
    return pattern;
}

} // namespace

std::optional<NumberMatch> extract_last_number_text(std::string_view text) {
    std::string s(text);
    auto begin = std::sregex_iterator(s.begin(), s.end(), number_pattern());
    auto end = std::sregex_iterator();
    std::optional<NumberMatch> last;
    for (auto it = begin; it != end; ++it) {
        NumberMatch m;
        m.text = it->str();
        m.offset = static_cast<size_t>(it->position());
        std::string digits = m.text;
        digits.erase(std::remove(digits.begin(), digits.end(), ','), digits.end());
        m.value = std::strtod(digits.c_str(), nullptr);
        last = std::move(m);
    }
    return last;
}

std::optional<double> extract_last_number(std::string_view text) {
    auto m = extract_last_number_text(text);
    if (!m) return std::nullopt;
    return m->value;
}

bool numbers_match(double a, double gold) {
    return std::abs(a - gold) <= 1e-6 * std::max(1.0, std::abs(gold));
}

std::string normalize_label(std::string_view text) {
    auto is_wrapping = [](char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '"' || c == '\'' ||
               c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' ||
               c == '*' || c == '.' || c == ',' || c == '!' || c == '?';
    };
    size_t begin = 0, end = text.size();
    while (begin < end && is_wrapping(text[begin])) ++begin;
    while (end > begin && is_wrapping(text[end - 1])) --end;
    std::string out(text.substr(begin, end - begin));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string extract_final_label(std::string_view text) {
    // last non-empty line
    std::string_view line;
    size_t pos = text.size();
    while (pos > 0) {
        size_t start = text.rfind('\n', pos - 1);
        size_t begin = (start == std::string_view::npos) ? 0 : start + 1;
        std::string_view candidate = text.substr(begin, pos - begin);
        if (candidate.find_first_not_of(" \t\r") != std::string_view::npos) {
            line = candidate;
            break;
        }
        if (start == std::string_view::npos) break;
        pos = start;
    }
    size_t colon = line.rfind(':');
    if (colon != std::string_view::npos) {
        line = line.substr(colon + 1);
    }
    return normalize_label(line);
}

bool evaluate_correctness(std::string_view prediction, const TaskInstance& task,
                          ChatClient* extractor) {
    switch (task.evaluator) {
    case EvaluatorKind::LastNumber: {
        auto found = extract_last_number(prediction);
        auto gold = extract_last_number(task.gold_answer);
        return found && gold && numbers_match(*found, *gold);
    }
    case EvaluatorKind::ExactLabel: {
        std::string label = extract_final_label(prediction);
        return !label.empty() && label == normalize_label(task.gold_answer);
    }
    case EvaluatorKind::ExtractorModel: {
        if (extractor == nullptr) {
            throw ConfigError("task \"" + task.id +
                              "\" uses evaluator extractor_model but no extractor endpoint is configured");
        }
        ChatRequest request;
        request.model = extractor->model();
        request.messages.push_back(
            {"user", std::string(kExtractionInstruction) + "\n\nResponse:\n" + std::string(prediction)});
        try {
            std::string label = extractor->complete(request);
            return normalize_label(label) == normalize_label(task.gold_answer);
        } catch (const std::exception& e) {
            std::cerr << "extractor call failed for task \"" << task.id
                      << "\" (counted as incorrect): " << e.what() << "\n";
            return false;
        }
    }
    }
    return false;
}

} // namespace sppl
