#include <doctest.h>

#include "sppl/chat.hpp"
#include "sppl/errors.hpp"
#include "sppl/evaluator.hpp"

using namespace sppl;

namespace {

TaskInstance task_with(EvaluatorKind kind, const std::string& gold) {
    return {"t1", "q?", gold, std::nullopt, kind};
}

} // namespace

TEST_CASE("extract_last_number grammar") {
    CHECK(extract_last_number("so the total is 18.").value() == doctest::Approx(18));
    CHECK(extract_last_number("first 10 then 20 finally 30").value() == doctest::Approx(30));
    CHECK(extract_last_number("costs $1,234.50 today").value() == doctest::Approx(1234.50));
    CHECK(extract_last_number("dropped to -7.5 degrees").value() == doctest::Approx(-7.5));
    CHECK(extract_last_number("answer: +3").value() == doctest::Approx(3));
    CHECK_FALSE(extract_last_number("no digits at all").has_value());
    CHECK_FALSE(extract_last_number("").has_value());
    // grouping must come in threes; otherwise the comma splits the match
    CHECK(extract_last_number("12,34 pieces").value() == doctest::Approx(34));
    CHECK(extract_last_number("1,234,567 total").value() == doctest::Approx(1234567));
}

TEST_CASE("numbers_match relative tolerance") {
    CHECK(numbers_match(18.0, 18.0));
    CHECK(numbers_match(18.0000000001, 18.0));
    CHECK_FALSE(numbers_match(17.0, 18.0));
    CHECK(numbers_match(1e6 + 0.5, 1e6)); // 0.5 <= 1e-6 * 1e6
    CHECK_FALSE(numbers_match(1e6 + 2.0, 1e6));
    CHECK(numbers_match(0.0, 0.0));
}

TEST_CASE("last_number correctness") {
    TaskInstance task = task_with(EvaluatorKind::LastNumber, "18");
    CHECK(evaluate_correctness("…so the total is 18.", task));
    CHECK(evaluate_correctness("the total is 18.0", task));
    CHECK_FALSE(evaluate_correctness("…therefore 17 dollars", task));
    CHECK_FALSE(evaluate_correctness("no number", task));
}

TEST_CASE("label extraction and normalization") {
    CHECK(extract_final_label("Answer: B") == "b");
    CHECK(extract_final_label("reasoning here\nAnswer: dog\n\n") == "dog");
    CHECK(extract_final_label("Final answer:\tTrue.") == "true");
    CHECK(extract_final_label("label: (C)") == "c");
    CHECK(extract_final_label("  YES  ") == "yes");
    CHECK(extract_final_label("") == "");
    CHECK(normalize_label("\"Red\"") == "red");
}

TEST_CASE("exact_label correctness") {
    TaskInstance task = task_with(EvaluatorKind::ExactLabel, "b");
    CHECK(evaluate_correctness("Answer: B", task));
    CHECK(evaluate_correctness("Answer: B.", task));
    CHECK(evaluate_correctness("b", task));
    CHECK_FALSE(evaluate_correctness("The answer is B", task)); // no label separator
    CHECK_FALSE(evaluate_correctness("Answer: C", task));
    CHECK_FALSE(evaluate_correctness("", task));
}

TEST_CASE("extractor_model correctness") {
    TaskInstance task = task_with(EvaluatorKind::ExtractorModel, "entailment");
    SUBCASE("matching extracted label") {
        ScriptedChatClient extractor("x", "extractor",
                                     {{"Extract the final answer label", {{"Entailment"}}}});
        CHECK(evaluate_correctness("…lots of text…", task, &extractor));
        CHECK(extractor.call_count() == 1);
    }
    SUBCASE("mismatching label") {
        ScriptedChatClient extractor("x", "extractor",
                                     {{"Extract the final answer label", {{"neutral"}}}});
        CHECK_FALSE(evaluate_correctness("…lots of text…", task, &extractor));
    }
    SUBCASE("extractor failure counts as incorrect") {
        ScriptedChatClient extractor("x", "extractor",
                                     {{"Extract the final answer label",
                                       {ScriptedReply{"", true}}}});
        CHECK_FALSE(evaluate_correctness("…text…", task, &extractor));
    }
    SUBCASE("missing extractor endpoint is a config error") {
        CHECK_THROWS_AS(evaluate_correctness("…text…", task, nullptr), ConfigError);
    }
}
