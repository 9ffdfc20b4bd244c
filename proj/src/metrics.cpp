#include "sppl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sppl/errors.hpp"
#include "sppl/jsonl.hpp"

namespace sppl {

std::vector<double> fractional_ranks(std::span<const double> values, RankDirection direction) {
    if (values.empty()) {
        throw std::invalid_argument("fractional_ranks of an empty sequence");
    }
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return direction == RankDirection::Ascending ? values[a] < values[b]
                                                     : values[a] > values[b];
    });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        // positions i..j (0-based) share the mean of ranks i+1..j+1
        double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) {
            ranks[order[k]] = mean_rank;
        }
        i = j + 1;
    }
    return ranks;
}

std::optional<double> weighted_spearman(std::span<const double> r1, std::span<const double> r2,
                                        std::span<const double> weights) {
    if (r1.size() != r2.size() || r1.size() != weights.size()) {
        throw std::invalid_argument("weighted_spearman: input lengths differ");
    }
    if (r1.size() < 2) {
        throw std::invalid_argument("weighted_spearman needs at least two items");
    }
    double weight_sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw std::invalid_argument("weighted_spearman: weights must be non-negative");
        }
        weight_sum += w;
    }
    if (weight_sum <= 0.0) {
        throw std::invalid_argument("weighted_spearman: weights must not all be zero");
    }

    double m1 = 0.0;
    double m2 = 0.0;
    for (size_t i = 0; i < r1.size(); ++i) {
        m1 += weights[i] * r1[i];
        m2 += weights[i] * r2[i];
    }
    m1 /= weight_sum;
    m2 /= weight_sum;

    double cov = 0.0;
    double var1 = 0.0;
    double var2 = 0.0;
    for (size_t i = 0; i < r1.size(); ++i) {
        const double d1 = r1[i] - m1;
        const double d2 = r2[i] - m2;
        cov += weights[i] * d1 * d2;
        var1 += weights[i] * d1 * d1;
        var2 += weights[i] * d2 * d2;
    }
    if (var1 <= 0.0 || var2 <= 0.0) {
        return std::nullopt; // undefined: zero weighted variance on a side
    }
    return cov / (std::sqrt(var1) * std::sqrt(var2));
}

double population_std(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("population_std of an empty sequence");
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size()));
}

std::optional<double> improvement_ratio(double acc_large, double acc_small) {
    if (acc_small == 0.0) {
        return std::nullopt;
    }
    return acc_large / acc_small - 1.0;
}

AccuracyTable load_accuracy_table(const std::filesystem::path& path) {
    AccuracyTable table;
    std::set<std::tuple<std::string, std::string, std::string, long>> seen;
    for_each_jsonl(path, [&](const json& record, size_t lineno) {
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        AccuracyRow row;
        try {
            row.model = record.at("model").get<std::string>();
            row.dataset = record.at("dataset").get<std::string>();
            row.strategy_id = record.at("strategy_id").get<std::string>();
            row.accuracy = record.at("accuracy").get<double>();
            row.n_train = record.at("n_train").get<long>();
        } catch (const json::exception& e) {
            throw ConfigError(where + ": invalid accuracy row: " + e.what());
        }
        if (!(row.accuracy >= 0.0 && row.accuracy <= 1.0)) {
            throw ConfigError(where + ": accuracy must be in [0,1]");
        }
        if (!seen.insert({row.model, row.dataset, row.strategy_id, row.n_train}).second) {
            throw ConfigError(where + ": duplicate row for (" + row.model + ", " + row.dataset +
                              ", " + row.strategy_id + ", " + std::to_string(row.n_train) + ")");
        }
        table.rows.push_back(std::move(row));
    });
    return table;
}

std::vector<MetricScoreRow> load_metric_scores(const std::filesystem::path& path) {
    std::vector<MetricScoreRow> rows;
    for_each_jsonl(path, [&](const json& record, size_t lineno) {
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        MetricScoreRow row;
        try {
            row.model = record.at("model").get<std::string>();
            row.dataset = record.at("dataset").get<std::string>();
            row.strategy_id = record.at("strategy_id").get<std::string>();
            row.score = record.at("score").get<double>();
        } catch (const json::exception& e) {
            throw ConfigError(where + ": invalid metric-score row: " + e.what());
        }
        rows.push_back(std::move(row));
    });
    return rows;
}

std::map<PairKey, std::map<std::string, double>> collect_pairs(const AccuracyTable& table,
                                                               long n_train) {
    std::map<PairKey, std::map<std::string, double>> pairs;
    for (const auto& row : table.rows) {
        if (row.n_train == n_train) {
            pairs[{row.model, row.dataset}][row.strategy_id] = row.accuracy;
        }
    }
    return pairs;
}

SelectorEvaluation evaluate_selector(const AccuracyTable& table,
                                     const std::vector<MetricScoreRow>& metric_scores,
                                     long n_train) {
    std::map<PairKey, std::map<std::string, double>> scores_by_pair;
    for (const auto& row : metric_scores) {
        scores_by_pair[{row.model, row.dataset}][row.strategy_id] = row.score;
    }
    if (scores_by_pair.empty()) {
        throw std::invalid_argument("evaluate_selector: no metric scores");
    }
    auto gold = collect_pairs(table, n_train);

    SelectorEvaluation eval;
    std::vector<double> flat_r1;
    std::vector<double> flat_r2;
    std::vector<double> flat_w;
    double rho_num = 0.0;
    double rho_den = 0.0;
    double macro_sum = 0.0;

    for (const auto& [pair, strategy_scores] : scores_by_pair) {
        auto gold_it = gold.find(pair);
        const std::string pair_name = "(" + pair.model + ", " + pair.dataset + ")";
        if (gold_it == gold.end()) {
            throw ArtifactError("pair " + pair_name + ": no accuracy rows at n_train=" +
                                std::to_string(n_train));
        }
        PairOutcome outcome;
        outcome.pair = pair;
        std::vector<double> accuracies;
        std::vector<double> metric_values;
        for (const auto& [strategy, score] : strategy_scores) {
            auto acc_it = gold_it->second.find(strategy);
            if (acc_it == gold_it->second.end()) {
                throw ArtifactError("pair " + pair_name + ": strategy \"" + strategy +
                                    "\" missing from the accuracy table");
            }
            outcome.strategies.push_back(strategy);
            accuracies.push_back(acc_it->second);
            metric_values.push_back(score);
        }
        outcome.gold_ranks = fractional_ranks(accuracies, RankDirection::Descending);
        outcome.metric_ranks = fractional_ranks(metric_values, RankDirection::Ascending);
        outcome.weight = population_std(accuracies);

        size_t selected = 0;
        size_t best = 0;
        for (size_t i = 1; i < outcome.strategies.size(); ++i) {
            if (metric_values[i] < metric_values[selected]) selected = i; // ties: lexicographic
            if (accuracies[i] > accuracies[best]) best = i;
        }
        outcome.selected_strategy = outcome.strategies[selected];
        outcome.selected_accuracy = accuracies[selected];
        outcome.best_strategy = outcome.strategies[best];
        outcome.best_accuracy = accuracies[best];
        macro_sum += outcome.selected_accuracy;

        if (outcome.strategies.size() >= 2) {
            std::vector<double> ones(outcome.strategies.size(), 1.0);
            outcome.rho = weighted_spearman(outcome.gold_ranks, outcome.metric_ranks, ones);
        }
        if (outcome.rho) {
            rho_num += outcome.weight * *outcome.rho;
            rho_den += outcome.weight;
        }
        for (size_t i = 0; i < outcome.strategies.size(); ++i) {
            flat_r1.push_back(outcome.gold_ranks[i]);
            flat_r2.push_back(outcome.metric_ranks[i]);
            flat_w.push_back(outcome.weight);
        }
        eval.pairs.push_back(std::move(outcome));
    }

    eval.macro_accuracy = macro_sum / static_cast<double>(eval.pairs.size());
    if (rho_den > 0.0) {
        eval.weighted_rho = rho_num / rho_den;
    }
    if (flat_r1.size() >= 2) {
        double total_w = 0.0;
        for (double w : flat_w) total_w += w;
        if (total_w > 0.0) {
            eval.flattened_rho = weighted_spearman(flat_r1, flat_r2, flat_w);
        }
    }
    return eval;
}

std::vector<PairKey> std_group_filter(const AccuracyTable& table, double threshold, long n_train,
                                      const std::optional<std::set<std::string>>& strategies) {
    std::vector<PairKey> retained;
    for (const auto& [pair, accuracy_by_strategy] : collect_pairs(table, n_train)) {
        std::vector<double> accuracies;
        for (const auto& [strategy, accuracy] : accuracy_by_strategy) {
            if (!strategies || strategies->count(strategy) > 0) {
                accuracies.push_back(accuracy);
            }
        }
        if (accuracies.size() < 2) {
            continue;
        }
        if (population_std(accuracies) > threshold) {
            retained.push_back(pair);
        }
    }
    return retained;
}

} // namespace sppl
