#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sppl/backend.hpp"
#include "sppl/corpus.hpp"
#include "sppl/stylepool.hpp"
#include "sppl/teacher.hpp"

namespace sppl {

enum class ExemplarFallback {
    ReduceCount, // use every eligible entry when the pool is short
    PlainPpl,    // score without exemplars when the pool is short
};

std::string to_string(ExemplarFallback f);
std::optional<ExemplarFallback> fallback_from_string(std::string_view name);

inline constexpr std::string_view kDefaultSpplInstruction =
    "The examples below show how the assistant answers questions. "
    "Match their tone and format when answering the final question.";

struct SpplConfig {
    int exemplar_count = 2;
    std::uint64_t seed = 0;
    ExemplarFallback fallback = ExemplarFallback::ReduceCount;
    std::string instruction_text = std::string(kDefaultSpplInstruction);
};

struct Exemplar {
    std::string task_id;
    std::string question;
    std::string answer;
};

struct ExampleScore {
    std::string task_id;
    std::string strategy_id;
    double ppl = 0.0;
    double sppl = 0.0;
    std::vector<std::string> exemplar_ids;
    int token_count = 0;
};

/// exp of the mean negative log-likelihood over continuation tokens.
double perplexity(std::span<const double> logprobs);

/// Draws cfg.exemplar_count pool entries uniformly without replacement,
/// excluding exclude_task, from a generator seeded by (cfg.seed, exclude_task).
/// A short pool degrades per cfg.fallback; the draw never fails.
std::vector<Exemplar> sample_exemplars(const StylePool& pool, std::string_view exclude_task,
                                       const SpplConfig& cfg);

/// Scoring prompt for plain perplexity: the question alone, no instruction.
std::string plain_prompt(const TaskInstance& task);

/// Instruction, then each exemplar as a question/answer block in sampled
/// order, then the target question. Zero exemplars reduces to plain_prompt.
std::string assemble_sppl_prompt(const TaskInstance& task, std::span<const Exemplar> exemplars,
                                 const SpplConfig& cfg);

/// Scores one candidate: ppl under the plain prompt, sppl under the
/// exemplar-augmented prompt. With no exemplars the prompts coincide and
/// sppl == ppl exactly. Backend errors carry (task_id, strategy_id).
ExampleScore sppl_score(ScoringBackend& backend, const StylePool& pool, const TaskInstance& task,
                        const CandidateResponse& candidate, const SpplConfig& cfg);

json example_score_to_json(const ExampleScore& score);
ExampleScore example_score_from_json(const json& record);

} // namespace sppl
