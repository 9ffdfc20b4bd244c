#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sppl/backend.hpp"
#include "sppl/chat.hpp"
#include "sppl/jsonl.hpp"
#include "sppl/rank.hpp"
#include "sppl/scorer.hpp"
#include "sppl/teacher.hpp"

namespace sppl {

struct CalibrationSpec {
    long start = 0;
    long count = 50;
};

/// Command-line overrides; folded into the config document before validation
/// so reports snapshot exactly what ran.
struct CliOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<long> calibration_start;
    std::optional<long> calibration_count;
    std::optional<std::string> metric;       // "sppl" | "ppl"
    std::optional<std::string> mock_backend; // rules path; forces the mock scorer
};

struct RunConfig {
    std::filesystem::path config_dir; // directory of the config file
    std::string task_file;            // resolved
    std::string taskset_name;
    CalibrationSpec calibration;
    std::vector<EndpointConfig> endpoints;
    std::string target_endpoint;
    std::string extractor_endpoint; // defaults to the target endpoint
    std::vector<Strategy> strategies;
    BackendDescriptor scorer_backend;
    SpplConfig sppl;
    int scorer_parallelism = 4;
    GenerationOptions generation;
    RankMetric metric = RankMetric::Sppl;
    std::string output_dir; // resolved
    std::uint64_t seed = 0;
    json snapshot; // config document with overrides applied; paths as written

    const EndpointConfig& endpoint(const std::string& name) const;
    std::string config_hash() const;
};

/// Parses and validates a run-configuration document. Validation failures are
/// ConfigError with field paths. Secrets never appear in the document; only
/// environment-variable names do.
RunConfig load_run_config(const std::filesystem::path& path, const CliOverrides& overrides = {});

} // namespace sppl
