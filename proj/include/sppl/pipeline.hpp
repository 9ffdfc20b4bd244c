#pragma once

#include <functional>
#include <iosfwd>
#include <memory>

#include "sppl/config.hpp"
#include "sppl/metrics.hpp"

namespace sppl {

/// Injection points for tests; defaults build real clients/backends from config.
struct PipelineEnv {
    std::function<std::unique_ptr<ChatClient>(const EndpointConfig&)> make_client;
    ScoringBackend* backend_override = nullptr;
    bool quiet = false;
};

/// Each stage reads only prior-stage files and config, writes its outputs plus
/// a <stage>.meta.json carrying input/output content hashes, and is skipped
/// entirely when those hashes already match (resumable, byte-stable reruns).
void run_generate(const RunConfig& config, const PipelineEnv& env = {});
void run_pool(const RunConfig& config, const PipelineEnv& env = {});
void run_score(const RunConfig& config, const PipelineEnv& env = {});
void run_rank(const RunConfig& config, const PipelineEnv& env = {});

struct EvaluateOptions {
    std::filesystem::path table;
    std::filesystem::path metric_scores;
    long n_train = 1000;
    std::optional<long> n_train_small; // enables improvement-ratio reporting
    std::vector<double> std_thresholds = {0.02, 0.04};
    std::filesystem::path out_dir = "out";
};

void run_evaluate(const EvaluateOptions& options);

void run_report(const RunConfig& config, std::ostream& out);

} // namespace sppl
