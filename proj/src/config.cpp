#include "sppl/config.hpp"

#include <set>

#include "sppl/errors.hpp"
#include "sppl/hashing.hpp"

namespace sppl {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ConfigError(field + ": " + message);
}

std::string require_string(const json& doc, const std::string& field, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_string() || doc.at(key).get<std::string>().empty()) {
        fail(field + "." + key, "required non-empty string");
    }
    return doc.at(key).get<std::string>();
}

std::string resolve_path(const std::filesystem::path& base, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute()) {
        return p.string();
    }
    return (base / p).lexically_normal().string();
}

EndpointConfig parse_endpoint(const json& doc, const std::string& field,
                              const std::filesystem::path& config_dir) {
    EndpointConfig endpoint;
    endpoint.name = require_string(doc, field, "name");
    endpoint.kind = doc.value("kind", "http");
    endpoint.model = doc.value("model", endpoint.name);
    endpoint.base_url = doc.value("base_url", "");
    endpoint.api_key_env = doc.value("api_key_env", "");
    endpoint.temperature = doc.value("temperature", 1.0);
    endpoint.transport_retries = doc.value("transport_retries", 2);
    if (endpoint.kind == "http") {
        if (endpoint.base_url.empty()) {
            fail(field + ".base_url", "required for http endpoints");
        }
    } else if (endpoint.kind == "scripted") {
        std::string script = doc.value("script", "");
        if (script.empty()) {
            fail(field + ".script", "required for scripted endpoints");
        }
        endpoint.script_path = resolve_path(config_dir, script);
    } else {
        fail(field + ".kind", "must be \"http\" or \"scripted\", got \"" + endpoint.kind + "\"");
    }
    return endpoint;
}

Strategy parse_strategy(const json& doc, const std::string& field) {
    Strategy strategy;
    strategy.id = require_string(doc, field, "id");
    strategy.teacher_endpoint = require_string(doc, field, "teacher_endpoint");
    std::string template_name = doc.value("template", "answer_directly");
    auto kind = template_from_string(template_name);
    if (!kind) {
        fail(field + ".template", "unknown template \"" + template_name + "\"");
    }
    strategy.prompt_template = *kind;
    strategy.provides_ground_truth = doc.value("provides_ground_truth", true);
    strategy.max_attempts = doc.value("max_attempts", 3);
    if (strategy.max_attempts < 1) {
        fail(field + ".max_attempts", "must be >= 1");
    }
    if (doc.contains("exemplar_texts")) {
        const json& ex = doc.at("exemplar_texts");
        if (!ex.is_array() || ex.size() != 2 || !ex[0].is_string() || !ex[1].is_string()) {
            fail(field + ".exemplar_texts", "must be a pair of strings");
        }
        strategy.exemplar_texts = std::make_pair(ex[0].get<std::string>(),
                                                 ex[1].get<std::string>());
    }
    if ((strategy.prompt_template == PromptTemplate::TeacherExamples ||
         strategy.prompt_template == PromptTemplate::HumanExamples) &&
        !strategy.exemplar_texts) {
        fail(field + ".exemplar_texts",
             "required for template \"" + template_name + "\"");
    }
    strategy.template_text = doc.value("template_text", "");
    if (strategy.template_text.empty()) {
        strategy.template_text =
            default_template_text(strategy.prompt_template, strategy.provides_ground_truth);
    }
    return strategy;
}

} // namespace

const EndpointConfig& RunConfig::endpoint(const std::string& name) const {
    for (const auto& e : endpoints) {
        if (e.name == name) {
            return e;
        }
    }
    throw ConfigError("unknown endpoint \"" + name + "\"");
}

std::string RunConfig::config_hash() const {
    return content_hash(dump_stable(snapshot));
}

RunConfig load_run_config(const std::filesystem::path& path, const CliOverrides& overrides) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ConfigError("config file is not a JSON object: " + path.string());
    }

    if (overrides.out_dir) doc["output_dir"] = *overrides.out_dir;
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.calibration_start) doc["calibration"]["start"] = *overrides.calibration_start;
    if (overrides.calibration_count) doc["calibration"]["count"] = *overrides.calibration_count;
    if (overrides.metric) doc["metric"] = *overrides.metric;
    if (overrides.mock_backend) {
        doc["scorer"]["backend"] =
            json{{"name", "mock"}, {"mode", "mock"}, {"rules", *overrides.mock_backend}};
    }

    RunConfig config;
    config.config_dir = path.has_parent_path() ? path.parent_path()
                                               : std::filesystem::path(".");
    config.snapshot = doc;

    config.task_file = resolve_path(config.config_dir, require_string(doc, "config", "task_file"));
    config.taskset_name = doc.value("taskset_name", "");
    if (config.taskset_name.empty()) {
        config.taskset_name = std::filesystem::path(config.task_file).stem().string();
    }

    if (doc.contains("calibration")) {
        const json& cal = doc.at("calibration");
        config.calibration.start = cal.value("start", 0L);
        config.calibration.count = cal.value("count", 50L);
    }
    if (config.calibration.start < 0) fail("calibration.start", "must be >= 0");
    if (config.calibration.count < 1) fail("calibration.count", "must be >= 1");

    config.seed = doc.value("seed", 0ull);
    config.output_dir = doc.value("output_dir", "out");
    if (!std::filesystem::path(config.output_dir).is_absolute()) {
        config.output_dir =
            (std::filesystem::current_path() / config.output_dir).lexically_normal().string();
    }

    std::string metric_name = doc.value("metric", "sppl");
    auto metric = metric_from_string(metric_name);
    if (!metric) fail("metric", "must be \"sppl\" or \"ppl\", got \"" + metric_name + "\"");
    config.metric = *metric;

    if (!doc.contains("endpoints") || !doc.at("endpoints").is_array() ||
        doc.at("endpoints").empty()) {
        fail("endpoints", "at least one endpoint is required");
    }
    std::set<std::string> endpoint_names;
    for (size_t i = 0; i < doc.at("endpoints").size(); ++i) {
        const std::string field = "endpoints[" + std::to_string(i) + "]";
        EndpointConfig endpoint = parse_endpoint(doc.at("endpoints")[i], field, config.config_dir);
        if (!endpoint_names.insert(endpoint.name).second) {
            fail(field + ".name", "duplicate endpoint name \"" + endpoint.name + "\"");
        }
        config.endpoints.push_back(std::move(endpoint));
    }

    config.target_endpoint = require_string(doc, "config", "target_endpoint");
    if (endpoint_names.count(config.target_endpoint) == 0) {
        fail("target_endpoint", "unknown endpoint \"" + config.target_endpoint + "\"");
    }
    config.extractor_endpoint = doc.value("extractor_endpoint", config.target_endpoint);
    if (endpoint_names.count(config.extractor_endpoint) == 0) {
        fail("extractor_endpoint", "unknown endpoint \"" + config.extractor_endpoint + "\"");
    }

    if (!doc.contains("strategies") || !doc.at("strategies").is_array() ||
        doc.at("strategies").empty()) {
        fail("strategies", "at least one strategy is required");
    }
    std::set<std::string> strategy_ids;
    for (size_t i = 0; i < doc.at("strategies").size(); ++i) {
        const std::string field = "strategies[" + std::to_string(i) + "]";
        Strategy strategy = parse_strategy(doc.at("strategies")[i], field);
        if (!strategy_ids.insert(strategy.id).second) {
            fail(field + ".id", "duplicate strategy id \"" + strategy.id + "\"");
        }
        if (endpoint_names.count(strategy.teacher_endpoint) == 0) {
            fail(field + ".teacher_endpoint",
                 "unknown endpoint \"" + strategy.teacher_endpoint + "\"");
        }
        config.strategies.push_back(std::move(strategy));
    }

    if (!doc.contains("scorer") || !doc.at("scorer").is_object()) {
        fail("scorer", "required object");
    }
    const json& scorer = doc.at("scorer");
    if (!scorer.contains("backend") || !scorer.at("backend").is_object()) {
        fail("scorer.backend", "required object");
    }
    const json& backend = scorer.at("backend");
    config.scorer_backend.name = backend.value("name", "scorer");
    config.scorer_backend.mode = backend.value("mode", "mock");
    config.scorer_backend.model = backend.value("model", config.scorer_backend.name);
    config.scorer_backend.base_url = backend.value("base_url", "");
    config.scorer_backend.api_key_env = backend.value("api_key_env", "");
    config.scorer_backend.transport_retries = backend.value("transport_retries", 2);
    if (config.scorer_backend.mode == "mock") {
        std::string rules = backend.value("rules", "");
        if (rules.empty()) {
            fail("scorer.backend.rules", "required for mock backends");
        }
        // CLI-provided --mock-backend paths are relative to the working directory
        config.scorer_backend.rules_path =
            overrides.mock_backend ? std::filesystem::absolute(rules).lexically_normal().string()
                                   : resolve_path(config.config_dir, rules);
    } else if (config.scorer_backend.mode == "echo_completions") {
        if (config.scorer_backend.base_url.empty()) {
            fail("scorer.backend.base_url", "required for echo_completions backends");
        }
    } else {
        fail("scorer.backend.mode", "must be \"mock\" or \"echo_completions\"");
    }

    config.sppl.exemplar_count = scorer.value("exemplar_count", 2);
    if (config.sppl.exemplar_count < 0) fail("scorer.exemplar_count", "must be >= 0");
    std::string fallback_name = scorer.value("fallback", "reduce_count");
    auto fallback = fallback_from_string(fallback_name);
    if (!fallback) {
        fail("scorer.fallback", "must be \"reduce_count\" or \"plain_ppl\"");
    }
    config.sppl.fallback = *fallback;
    config.sppl.instruction_text =
        scorer.value("instruction_text", std::string(kDefaultSpplInstruction));
    config.sppl.seed = config.seed;
    config.scorer_parallelism = scorer.value("parallelism", 4);

    if (doc.contains("generation")) {
        const json& gen = doc.at("generation");
        config.generation.parallelism = gen.value("parallelism", 4);
        config.generation.temperature = gen.value("temperature", 1.0);
    }

    return config;
}

} // namespace sppl
