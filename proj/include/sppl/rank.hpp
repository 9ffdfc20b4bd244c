#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sppl/jsonl.hpp"
#include "sppl/scorer.hpp"

namespace sppl {

enum class RankMetric { Sppl, Ppl };

std::string to_string(RankMetric m);
std::optional<RankMetric> metric_from_string(std::string_view name);

struct StrategyScore {
    std::string strategy_id;
    double mean_sppl = 0.0;
    double mean_ppl = 0.0;
    int n_examples = 0;
};

struct RankedEntry {
    std::string strategy_id;
    double mean_sppl = 0.0;
    double mean_ppl = 0.0;
    int rank = 0;
};

struct RankingReport {
    RankMetric metric = RankMetric::Sppl;
    std::vector<RankedEntry> entries; // ascending by the chosen metric's mean
    std::string selected;             // rank 1
    std::string calibration;          // e.g. "demo[0,50)"
    std::uint64_t seed = 0;
};

/// Arithmetic means of the per-example values. Any non-finite value is an
/// error naming the offending task.
StrategyScore aggregate_strategy_score(const std::string& strategy_id,
                                       std::span<const ExampleScore> scores);

/// Ascending order by the chosen metric's mean; ties break lexicographically
/// by strategy id; selected is rank 1.
RankingReport rank_strategies(const std::map<std::string, StrategyScore>& scores,
                              RankMetric metric, std::string calibration, std::uint64_t seed);

/// Serializes the report (plus toolkit version and the provided metadata:
/// input hashes, config snapshot, alternate-metric order) as a single sorted
/// JSON document; byte-stable for fixed inputs.
void select_and_emit(const RankingReport& report, const std::filesystem::path& out,
                     const json& metadata = json::object());

json ranking_to_json(const RankingReport& report, const json& metadata = json::object());

} // namespace sppl
