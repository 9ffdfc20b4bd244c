#include "sppl/scorer.hpp"

#include <cmath>
#include <random>

#include "sppl/errors.hpp"
#include "sppl/hashing.hpp"

namespace sppl {

std::string to_string(ExemplarFallback f) {
    return f == ExemplarFallback::ReduceCount ? "reduce_count" : "plain_ppl";
}

std::optional<ExemplarFallback> fallback_from_string(std::string_view name) {
    if (name == "reduce_count") return ExemplarFallback::ReduceCount;
    if (name == "plain_ppl") return ExemplarFallback::PlainPpl;
    return std::nullopt;
}

double perplexity(std::span<const double> logprobs) {
    if (logprobs.empty()) {
        throw std::invalid_argument("perplexity of an empty logprob sequence is undefined");
    }
    double sum = 0.0;
    for (double lp : logprobs) {
        sum += lp;
    }
    return std::exp(-sum / static_cast<double>(logprobs.size()));
}

namespace {

// uniform draw in [0, n) by rejection; deterministic given the generator state
std::uint64_t bounded_uniform(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t v = gen();
    while (v >= limit) {
        v = gen();
    }
    return v % n;
}

} // namespace

std::vector<Exemplar> sample_exemplars(const StylePool& pool, std::string_view exclude_task,
                                       const SpplConfig& cfg) {
    if (cfg.exemplar_count < 0) {
        throw std::invalid_argument("exemplar_count must be >= 0");
    }
    std::vector<const std::pair<const std::string, StylePoolEntry>*> eligible;
    eligible.reserve(pool.entries.size());
    for (const auto& entry : pool.entries) { // std::map iteration: sorted by task id
        if (entry.first != exclude_task) {
            eligible.push_back(&entry);
        }
    }

    size_t want = static_cast<size_t>(cfg.exemplar_count);
    if (eligible.size() < want) {
        want = cfg.fallback == ExemplarFallback::ReduceCount ? eligible.size() : 0;
    }
    std::vector<Exemplar> out;
    if (want == 0) {
        return out;
    }

    std::mt19937_64 gen(mix_seed(cfg.seed, exclude_task));
    // partial Fisher-Yates: the first `want` slots end up as the draw, in order
    for (size_t i = 0; i < want; ++i) {
        size_t j = i + static_cast<size_t>(bounded_uniform(gen, eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
        out.push_back({eligible[i]->first, eligible[i]->second.question,
                       eligible[i]->second.text});
    }
    return out;
}

std::string plain_prompt(const TaskInstance& task) {
    return "Question: " + task.question + "\nAnswer: ";
}

std::string assemble_sppl_prompt(const TaskInstance& task, std::span<const Exemplar> exemplars,
                                 const SpplConfig& cfg) {
    if (exemplars.empty()) {
        return plain_prompt(task);
    }
    std::string prompt = cfg.instruction_text + "\n\n";
    for (const auto& exemplar : exemplars) {
        if (exemplar.task_id == task.id) {
            throw std::invalid_argument("exemplar for task \"" + task.id +
                                        "\" would leak its own answer");
        }
        prompt += "Question: " + exemplar.question + "\nAnswer: " + exemplar.answer + "\n\n";
    }
    prompt += plain_prompt(task);
    return prompt;
}

ExampleScore sppl_score(ScoringBackend& backend, const StylePool& pool, const TaskInstance& task,
                        const CandidateResponse& candidate, const SpplConfig& cfg) {
    if (candidate.task_id != task.id) {
        throw std::invalid_argument("candidate is for task \"" + candidate.task_id +
                                    "\" but scoring task \"" + task.id + "\"");
    }
    if (candidate.text.empty()) {
        throw std::invalid_argument("candidate text for task \"" + task.id + "\", strategy \"" +
                                    candidate.strategy_id + "\" is empty");
    }

    ExampleScore score;
    score.task_id = task.id;
    score.strategy_id = candidate.strategy_id;
    try {
        std::vector<double> plain_lp = backend.token_logprobs(plain_prompt(task), candidate.text);
        score.ppl = perplexity(plain_lp);
        score.token_count = static_cast<int>(plain_lp.size());

        std::vector<Exemplar> exemplars = sample_exemplars(pool, task.id, cfg);
        for (const auto& exemplar : exemplars) {
            score.exemplar_ids.push_back(exemplar.task_id);
        }
        if (exemplars.empty()) {
            score.sppl = score.ppl; // prompts coincide
        } else {
            std::vector<double> sppl_lp = backend.token_logprobs(
                assemble_sppl_prompt(task, exemplars, cfg), candidate.text);
            score.sppl = perplexity(sppl_lp);
        }
    } catch (const BackendError& e) {
        throw BackendError("task \"" + task.id + "\", strategy \"" + candidate.strategy_id +
                           "\": " + e.what());
    }
    return score;
}

json example_score_to_json(const ExampleScore& score) {
    return json{{"task_id", score.task_id},
                {"strategy_id", score.strategy_id},
                {"ppl", score.ppl},
                {"sppl", score.sppl},
                {"exemplar_ids", score.exemplar_ids},
                {"token_count", score.token_count}};
}

ExampleScore example_score_from_json(const json& record) {
    ExampleScore score;
    try {
        score.task_id = record.at("task_id").get<std::string>();
        score.strategy_id = record.at("strategy_id").get<std::string>();
        score.ppl = record.at("ppl").get<double>();
        score.sppl = record.at("sppl").get<double>();
        score.exemplar_ids = record.at("exemplar_ids").get<std::vector<std::string>>();
        score.token_count = record.at("token_count").get<int>();
    } catch (const json::exception& e) {
        throw ArtifactError(std::string("invalid score record: ") + e.what());
    }
    return score;
}

} // namespace sppl
