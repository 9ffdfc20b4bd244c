#include "sppl/rank.hpp"

#include <algorithm>
#include <cmath>

#include "sppl/errors.hpp"
#include "sppl/version.hpp"

namespace sppl {

std::string to_string(RankMetric m) {
    return m == RankMetric::Sppl ? "sppl" : "ppl";
}

std::optional<RankMetric> metric_from_string(std::string_view name) {
    if (name == "sppl") return RankMetric::Sppl;
    if (name == "ppl") return RankMetric::Ppl;
    return std::nullopt;
}

StrategyScore aggregate_strategy_score(const std::string& strategy_id,
                                       std::span<const ExampleScore> scores) {
    if (scores.empty()) {
        throw std::invalid_argument("strategy \"" + strategy_id + "\": no example scores");
    }
    double sum_sppl = 0.0;
    double sum_ppl = 0.0;
    for (const auto& s : scores) {
        if (!std::isfinite(s.sppl) || !std::isfinite(s.ppl)) {
            throw std::invalid_argument("strategy \"" + strategy_id +
                                        "\": non-finite score for task \"" + s.task_id + "\"");
        }
        sum_sppl += s.sppl;
        sum_ppl += s.ppl;
    }
    StrategyScore out;
    out.strategy_id = strategy_id;
    out.n_examples = static_cast<int>(scores.size());
    out.mean_sppl = sum_sppl / static_cast<double>(scores.size());
    out.mean_ppl = sum_ppl / static_cast<double>(scores.size());
    return out;
}

RankingReport rank_strategies(const std::map<std::string, StrategyScore>& scores,
                              RankMetric metric, std::string calibration, std::uint64_t seed) {
    if (scores.empty()) {
        throw std::invalid_argument("rank_strategies needs at least one strategy");
    }
    RankingReport report;
    report.metric = metric;
    report.calibration = std::move(calibration);
    report.seed = seed;
    for (const auto& [id, score] : scores) {
        report.entries.push_back({id, score.mean_sppl, score.mean_ppl, 0});
    }
    auto key = [metric](const RankedEntry& e) {
        return metric == RankMetric::Sppl ? e.mean_sppl : e.mean_ppl;
    };
    std::sort(report.entries.begin(), report.entries.end(),
              [&](const RankedEntry& a, const RankedEntry& b) {
                  if (key(a) != key(b)) return key(a) < key(b);
                  return a.strategy_id < b.strategy_id;
              });
    for (size_t i = 0; i < report.entries.size(); ++i) {
        report.entries[i].rank = static_cast<int>(i + 1);
    }
    report.selected = report.entries.front().strategy_id;
    return report;
}

json ranking_to_json(const RankingReport& report, const json& metadata) {
    json entries = json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"strategy_id", e.strategy_id},
                           {"mean_sppl", e.mean_sppl},
                           {"mean_ppl", e.mean_ppl},
                           {"rank", e.rank}});
    }
    json doc{{"metric", to_string(report.metric)},
             {"entries", std::move(entries)},
             {"selected", report.selected},
             {"calibration", report.calibration},
             {"seed", report.seed},
             {"toolkit_version", kVersion}};
    for (const auto& [key, value] : metadata.items()) {
        doc[key] = value;
    }
    return doc;
}

void select_and_emit(const RankingReport& report, const std::filesystem::path& out,
                     const json& metadata) {
    write_file_atomic(out, dump_stable(ranking_to_json(report, metadata)));
}

} // namespace sppl
