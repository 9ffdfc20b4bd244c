#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "sppl/corpus.hpp"
#include "sppl/errors.hpp"

using namespace sppl;
using testutil::TempDir;

namespace {

std::string record(const std::string& id, const std::string& question, const std::string& gold,
                   const std::string& evaluator = "last_number") {
    return R"({"id":")" + id + R"(","question":")" + question + R"(","gold_answer":")" + gold +
           R"(","evaluator":")" + evaluator + R"("})" + "\n";
}

TaskSet make_set(size_t n) {
    TaskSet set{"mem", {}};
    for (size_t i = 0; i < n; ++i) {
        set.tasks.push_back({"t" + std::to_string(i), "q" + std::to_string(i),
                             std::to_string(i), std::nullopt, EvaluatorKind::LastNumber});
    }
    return set;
}

} // namespace

TEST_CASE("load_tasks keeps file order and parses fields") {
    TempDir tmp;
    auto path = tmp.path / "tasks.jsonl";
    testutil::spit(path, record("a", "one plus one?", "2") +
                             R"({"id":"b","question":"color?","gold_answer":"red",)"
                             R"("gold_cot":"it is red","evaluator":"exact_label"})"
                             "\n" +
                             record("c", "zero?", "0"));
    TaskSet set = load_tasks(path.string());
    REQUIRE(set.tasks.size() == 3);
    CHECK(set.name == "tasks");
    CHECK(set.tasks[0].id == "a");
    CHECK(set.tasks[1].id == "b");
    CHECK(set.tasks[1].gold_cot.value() == "it is red");
    CHECK(set.tasks[1].evaluator == EvaluatorKind::ExactLabel);
    CHECK(set.tasks[2].id == "c");

    SUBCASE("deterministic: same bytes, same set") {
        TaskSet again = load_tasks(path.string());
        REQUIRE(again.tasks.size() == set.tasks.size());
        for (size_t i = 0; i < set.tasks.size(); ++i) {
            CHECK(again.tasks[i].id == set.tasks[i].id);
            CHECK(again.tasks[i].question == set.tasks[i].question);
        }
    }
}

TEST_CASE("load_tasks max_count takes the file prefix") {
    TempDir tmp;
    auto path = tmp.path / "big.jsonl";
    std::string contents;
    for (int i = 0; i < 1000; ++i) {
        contents += record("t" + std::to_string(i), "q", std::to_string(i));
    }
    testutil::spit(path, contents);
    TaskSet set = load_tasks(path.string(), 50);
    REQUIRE(set.tasks.size() == 50);
    for (int i = 0; i < 50; ++i) {
        CHECK(set.tasks[static_cast<size_t>(i)].id == "t" + std::to_string(i));
    }
}

TEST_CASE("load_tasks error paths") {
    TempDir tmp;
    SUBCASE("duplicate id names the id") {
        auto path = tmp.path / "dup.jsonl";
        testutil::spit(path, record("q7", "a?", "1") + record("q7", "b?", "2"));
        CHECK_THROWS_WITH_AS(load_tasks(path.string()), doctest::Contains("q7"), ConfigError);
    }
    SUBCASE("malformed line reports the line number") {
        auto path = tmp.path / "bad.jsonl";
        testutil::spit(path, record("a", "q", "1") + "{not json\n");
        CHECK_THROWS_WITH_AS(load_tasks(path.string()), doctest::Contains(":2"), ConfigError);
    }
    SUBCASE("empty file") {
        auto path = tmp.path / "empty.jsonl";
        testutil::spit(path, "");
        CHECK_THROWS_AS(load_tasks(path.string()), ConfigError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_tasks((tmp.path / "nope.jsonl").string()), ArtifactError);
    }
    SUBCASE("numeric invariant enforced at load") {
        auto path = tmp.path / "nonnum.jsonl";
        testutil::spit(path, record("a", "q", "apple"));
        CHECK_THROWS_WITH_AS(load_tasks(path.string()), doctest::Contains("gold_answer_numeric"),
                             ConfigError);
    }
}

TEST_CASE("slice_calibration windows") {
    TaskSet set = make_set(150);
    SUBCASE("first 50") {
        CalibrationSet cal = slice_calibration(set, 0, 50);
        REQUIRE(cal.tasks.size() == 50);
        CHECK(cal.start_index == 0);
        CHECK(cal.tasks.front().id == "t0");
        CHECK(cal.tasks.back().id == "t49");
        CHECK(cal.descriptor() == "mem[0,50)");
    }
    SUBCASE("next 30 from index 60") {
        CalibrationSet cal = slice_calibration(set, 60, 30);
        REQUIRE(cal.tasks.size() == 30);
        CHECK(cal.tasks.front().id == "t60");
        CHECK(cal.tasks.back().id == "t89");
    }
    SUBCASE("whole set") {
        TaskSet ten = make_set(10);
        CalibrationSet cal = slice_calibration(ten, 0, 10);
        CHECK(cal.tasks.size() == 10);
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(slice_calibration(set, 120, 50), std::out_of_range);
        CHECK_THROWS_AS(slice_calibration(set, 151, 1), std::out_of_range);
        CHECK_THROWS_AS(slice_calibration(set, 0, 0), std::invalid_argument);
    }
}

TEST_CASE("slice_calibration equals the element-wise range") {
    TaskSet set = make_set(37);
    for (auto [start, count] : {std::pair<size_t, size_t>{0, 37}, {5, 10}, {36, 1}, {12, 25}}) {
        CalibrationSet cal = slice_calibration(set, start, count);
        REQUIRE(cal.tasks.size() == count);
        for (size_t i = 0; i < count; ++i) {
            CHECK(cal.tasks[i].id == set.tasks[start + i].id);
        }
    }
}

TEST_CASE("disjoint slices share no task ids") {
    TaskSet set = make_set(100);
    CalibrationSet a = slice_calibration(set, 0, 50);
    CalibrationSet b = slice_calibration(set, 50, 50);
    std::set<std::string> ids;
    for (const auto& t : a.tasks) ids.insert(t.id);
    for (const auto& t : b.tasks) {
        CHECK(ids.count(t.id) == 0);
    }
}

TEST_CASE("validate_taskset reports one entry per violated rule") {
    SUBCASE("all valid") {
        CHECK(validate_taskset(make_set(5)).empty());
    }
    SUBCASE("non-numeric gold under last_number") {
        TaskSet set{"v", {{"t1", "q", "apple", std::nullopt, EvaluatorKind::LastNumber}}};
        auto violations = validate_taskset(set);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].task_id == "t1");
        CHECK(violations[0].rule == "gold_answer_numeric");
    }
    SUBCASE("two violations in one task") {
        TaskSet set{"v", {{"t1", "", "apple", std::nullopt, EvaluatorKind::LastNumber}}};
        auto violations = validate_taskset(set);
        CHECK(violations.size() == 2);
    }
    SUBCASE("duplicate ids") {
        TaskSet set = make_set(2);
        set.tasks[1].id = set.tasks[0].id;
        auto violations = validate_taskset(set);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].rule == "id_unique");
    }
}

TEST_CASE("parses_as_decimal") {
    CHECK(parses_as_decimal("18"));
    CHECK(parses_as_decimal("18.0"));
    CHECK(parses_as_decimal("-3.5"));
    CHECK(parses_as_decimal("1,000"));
    CHECK(parses_as_decimal(" 42 "));
    CHECK_FALSE(parses_as_decimal("apple"));
    CHECK_FALSE(parses_as_decimal("18 dollars"));
    CHECK_FALSE(parses_as_decimal(""));
}
