#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sppl {

/// Descriptor for a logprob-scoring endpoint. The backend owns tokenization:
/// it must return exactly one natural-log probability per continuation token.
struct BackendDescriptor {
    std::string name;
    std::string mode = "mock"; // "echo_completions" | "mock"
    std::string base_url;
    std::string model;
    std::string api_key_env;
    std::string rules_path; // mock mode
    int transport_retries = 2;
};

class ScoringBackend {
public:
    virtual ~ScoringBackend() = default;
    /// Log-probabilities of the continuation tokens conditioned on prompt;
    /// prompt tokens contribute no entries. continuation must be non-empty.
    virtual std::vector<double> token_logprobs(std::string_view prompt,
                                               std::string_view continuation) = 0;
    virtual const std::string& name() const = 0;
    virtual const std::string& model() const = 0;
};

std::unique_ptr<ScoringBackend> make_scoring_backend(const BackendDescriptor& descriptor);

struct MockStyle {
    std::string name;
    std::string marker;   // style detected by substring
    double base_nll = 0.0;
};

/// Scoring rules for the deterministic local backend. Modes:
///   constant        — every token scores `logprob`
///   uniform         — every token scores -ln(vocab_size)
///   token_table     — per-token lookup with `default_logprob` for unknowns
///   style_sensitive — per-token NLL from the continuation's style, plus
///                     `style_bonus` (an NLL delta; negative lowers perplexity)
///                     when the prompt contains an exemplar of the same style
struct MockRules {
    std::string mode = "constant";
    double logprob = -1.0;
    int vocab_size = 2;
    std::map<std::string, double> table;
    double default_logprob = -1.0;
    std::vector<MockStyle> styles;
    double default_nll = 2.0;
    double style_bonus = 0.0;
};

MockRules load_mock_rules(const std::filesystem::path& path);

/// Tokenizes by whitespace; pure function of (rules, prompt, continuation).
class MockBackend : public ScoringBackend {
public:
    MockBackend(std::string name, MockRules rules);
    std::vector<double> token_logprobs(std::string_view prompt,
                                       std::string_view continuation) override;
    const std::string& name() const override { return name_; }
    const std::string& model() const override { return model_; }
    int call_count() const { return calls_.load(); }

private:
    std::string name_;
    std::string model_ = "mock";
    MockRules rules_;
    std::atomic<int> calls_{0};
};

/// Client for echo-style completion scoring: POSTs {"model","prompt",
/// "max_tokens":0,"echo":true,"logprobs":true} and isolates continuation
/// tokens by the character offset where the continuation starts.
class EchoCompletionsBackend : public ScoringBackend {
public:
    explicit EchoCompletionsBackend(BackendDescriptor descriptor);
    std::vector<double> token_logprobs(std::string_view prompt,
                                       std::string_view continuation) override;
    const std::string& name() const override { return descriptor_.name; }
    const std::string& model() const override { return descriptor_.model; }

private:
    BackendDescriptor descriptor_;
};

std::vector<std::string> whitespace_tokens(std::string_view text);

} // namespace sppl
