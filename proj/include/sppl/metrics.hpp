#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace sppl {

enum class RankDirection { Ascending, Descending };

/// 1..n ranks in the given direction; tied values receive the mean of their
/// positional ranks (fractional ranks).
std::vector<double> fractional_ranks(std::span<const double> values, RankDirection direction);

/// Weighted Pearson correlation between two rank vectors with non-negative
/// weights:
///   rho_w = sum w_i (R1_i - m1)(R2_i - m2)
///           / sqrt(sum w_i (R1_i - m1)^2) / sqrt(sum w_i (R2_i - m2)^2)
/// where m1, m2 are the weighted means. Returns nullopt when either side has
/// zero weighted variance (undefined).
std::optional<double> weighted_spearman(std::span<const double> r1, std::span<const double> r2,
                                        std::span<const double> weights);

double population_std(std::span<const double> values);

/// Relative gain acc_large / acc_small - 1; undefined when acc_small == 0.
std::optional<double> improvement_ratio(double acc_large, double acc_small);

struct AccuracyRow {
    std::string model;
    std::string dataset;
    std::string strategy_id;
    double accuracy = 0.0; // in [0, 1]
    long n_train = 0;
};

struct AccuracyTable {
    std::vector<AccuracyRow> rows;
};

/// One {"model","dataset","strategy_id","accuracy","n_train"} object per line.
AccuracyTable load_accuracy_table(const std::filesystem::path& path);

struct MetricScoreRow {
    std::string model;
    std::string dataset;
    std::string strategy_id;
    double score = 0.0; // lower is better
};

/// One {"model","dataset","strategy_id","score"} object per line.
std::vector<MetricScoreRow> load_metric_scores(const std::filesystem::path& path);

struct PairKey {
    std::string model;
    std::string dataset;
    auto operator<=>(const PairKey&) const = default;
};

struct PairOutcome {
    PairKey pair;
    std::vector<std::string> strategies;  // sorted; rank vectors align with this
    std::vector<double> gold_ranks;       // by descending accuracy (best = 1)
    std::vector<double> metric_ranks;     // by ascending metric (lowest = 1)
    double weight = 0.0;                  // population std of the pair's accuracies
    std::optional<double> rho;            // per-pair classical Spearman
    std::string selected_strategy;        // metric rank 1
    double selected_accuracy = 0.0;
    std::string best_strategy;            // gold rank 1
    double best_accuracy = 0.0;
};

struct SelectorEvaluation {
    double macro_accuracy = 0.0;
    // mode (a): per-pair classical Spearman combined as a weighted mean with
    // pair weights = accuracy std
    std::optional<double> weighted_rho;
    // mode (b): the weighted formula applied to the flattened rank/weight vectors
    std::optional<double> flattened_rho;
    std::vector<PairOutcome> pairs;
};

/// Scope is the set of (model, dataset) pairs present in the metric scores,
/// restricted to accuracy rows at the given n_train. A scoped strategy missing
/// from the table is an error naming the pair.
SelectorEvaluation evaluate_selector(const AccuracyTable& table,
                                     const std::vector<MetricScoreRow>& metric_scores,
                                     long n_train);

/// Pairs whose population standard deviation of strategy accuracies exceeds
/// the threshold. Optionally restricted to a strategy subset.
std::vector<PairKey> std_group_filter(const AccuracyTable& table, double threshold, long n_train,
                                      const std::optional<std::set<std::string>>& strategies =
                                          std::nullopt);

/// Accuracies grouped by (model, dataset) at the given n_train.
std::map<PairKey, std::map<std::string, double>> collect_pairs(const AccuracyTable& table,
                                                               long n_train);

} // namespace sppl
