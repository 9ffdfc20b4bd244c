#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sppl/corpus.hpp"

namespace sppl {

class ChatClient;

struct NumberMatch {
    std::string text; // matched substring, commas included
    size_t offset = 0;
    double value = 0.0;
};

/// Rightmost maximal decimal-number substring: optional sign, optional decimal
/// point, digit-grouping commas allowed (and stripped before parsing).
std::optional<NumberMatch> extract_last_number_text(std::string_view text);
std::optional<double> extract_last_number(std::string_view text);

/// Numeric comparison at relative tolerance: |a - gold| <= 1e-6 * max(1, |gold|).
bool numbers_match(double a, double gold);

/// Trims whitespace, strips wrapping punctuation/quotes/brackets, lowercases ASCII.
std::string normalize_label(std::string_view text);

/// Label on the last non-empty line; when that line contains ':', the part
/// after the last ':' is taken. Result is normalized.
std::string extract_final_label(std::string_view text);

/// Instruction sent to the label-extraction endpoint, followed by the prediction.
inline constexpr std::string_view kExtractionInstruction =
    "Extract the final answer label from the response below. Reply with the label only.";

/// Task-specific correctness check (see EvaluatorKind). extractor is required
/// only for ExtractorModel tasks; an extractor call that fails is logged and
/// counted as incorrect rather than aborting the run.
bool evaluate_correctness(std::string_view prediction, const TaskInstance& task,
                          ChatClient* extractor = nullptr);

} // namespace sppl
