#include "sppl/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "sppl/errors.hpp"
#include "sppl/jsonl.hpp"

namespace sppl {

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos > start) {
            tokens.emplace_back(text.substr(start, pos - start));
        }
    }
    return tokens;
}

std::unique_ptr<ScoringBackend> make_scoring_backend(const BackendDescriptor& descriptor) {
    if (descriptor.mode == "mock") {
        if (descriptor.rules_path.empty()) {
            throw ConfigError("backend \"" + descriptor.name + "\": mock mode needs rules_path");
        }
        return std::make_unique<MockBackend>(descriptor.name,
                                             load_mock_rules(descriptor.rules_path));
    }
    if (descriptor.mode == "echo_completions") {
        return std::make_unique<EchoCompletionsBackend>(descriptor);
    }
    throw ConfigError("backend \"" + descriptor.name + "\": unknown mode \"" + descriptor.mode +
                      "\"");
}

MockRules load_mock_rules(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ConfigError("mock rules file is not a JSON object: " + path.string());
    }
    MockRules rules;
    rules.mode = doc.value("mode", "constant");
    if (rules.mode == "constant") {
        rules.logprob = doc.value("logprob", -1.0);
    } else if (rules.mode == "uniform") {
        rules.vocab_size = doc.value("vocab_size", 2);
        if (rules.vocab_size < 1) {
            throw ConfigError("mock rules: vocab_size must be >= 1");
        }
    } else if (rules.mode == "token_table") {
        rules.default_logprob = doc.value("default_logprob", -1.0);
        if (doc.contains("table")) {
            for (const auto& [token, lp] : doc.at("table").items()) {
                rules.table[token] = lp.get<double>();
            }
        }
    } else if (rules.mode == "style_sensitive") {
        rules.default_nll = doc.value("default_nll", 2.0);
        rules.style_bonus = doc.value("style_bonus", 0.0);
        if (doc.contains("styles")) {
            for (const auto& s : doc.at("styles")) {
                MockStyle style;
                style.name = s.at("name").get<std::string>();
                style.marker = s.at("marker").get<std::string>();
                style.base_nll = s.value("base_nll", rules.default_nll);
                if (style.marker.empty()) {
                    throw ConfigError("mock rules: style \"" + style.name +
                                      "\" has an empty marker");
                }
                rules.styles.push_back(std::move(style));
            }
        }
    } else {
        throw ConfigError("mock rules: unknown mode \"" + rules.mode + "\"");
    }
    return rules;
}

MockBackend::MockBackend(std::string name, MockRules rules)
    : name_(std::move(name)), rules_(std::move(rules)) {}

std::vector<double> MockBackend::token_logprobs(std::string_view prompt,
                                                std::string_view continuation) {
    calls_.fetch_add(1);
    if (continuation.empty()) {
        throw std::invalid_argument("continuation must be non-empty");
    }
    std::vector<std::string> tokens = whitespace_tokens(continuation);
    if (tokens.empty()) {
        throw BackendError("backend \"" + name_ +
                           "\": token alignment failure (continuation has no tokens)");
    }

    std::vector<double> logprobs;
    logprobs.reserve(tokens.size());
    if (rules_.mode == "constant") {
        logprobs.assign(tokens.size(), rules_.logprob);
    } else if (rules_.mode == "uniform") {
        logprobs.assign(tokens.size(), -std::log(static_cast<double>(rules_.vocab_size)));
    } else if (rules_.mode == "token_table") {
        for (const auto& token : tokens) {
            auto it = rules_.table.find(token);
            logprobs.push_back(it == rules_.table.end() ? rules_.default_logprob : it->second);
        }
    } else if (rules_.mode == "style_sensitive") {
        const MockStyle* continuation_style = nullptr;
        for (const auto& style : rules_.styles) {
            if (continuation.find(style.marker) != std::string_view::npos) {
                continuation_style = &style;
                break;
            }
        }
        double nll = continuation_style ? continuation_style->base_nll : rules_.default_nll;
        if (continuation_style != nullptr &&
            prompt.find(continuation_style->marker) != std::string_view::npos) {
            nll += rules_.style_bonus;
        }
        logprobs.assign(tokens.size(), -nll);
    }
    return logprobs;
}

EchoCompletionsBackend::EchoCompletionsBackend(BackendDescriptor descriptor)
    : descriptor_(std::move(descriptor)) {
    if (descriptor_.base_url.empty()) {
        throw ConfigError("backend \"" + descriptor_.name + "\": base_url is required");
    }
    if (descriptor_.api_key_env.empty()) {
        std::string upper = descriptor_.name;
        std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) {
            return std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
        });
        descriptor_.api_key_env = "SCORER_" + upper + "_API_KEY";
    }
}

std::vector<double> EchoCompletionsBackend::token_logprobs(std::string_view prompt,
                                                           std::string_view continuation) {
    if (continuation.empty()) {
        throw std::invalid_argument("continuation must be non-empty");
    }
    json body;
    body["model"] = descriptor_.model;
    body["prompt"] = std::string(prompt) + std::string(continuation);
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = true;

    httplib::Headers headers;
    if (const char* key = std::getenv(descriptor_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    json response;
    bool got_response = false;
    for (int attempt = 0; attempt <= descriptor_.transport_retries && !got_response; ++attempt) {
        httplib::Client client(descriptor_.base_url);
        client.set_read_timeout(300, 0);
        auto result = client.Post("/v1/completions", headers, body.dump(), "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw BackendError("backend \"" + descriptor_.name + "\": HTTP " +
                               std::to_string(result->status) + ": " + result->body);
        }
        response = json::parse(result->body, nullptr, false);
        if (response.is_discarded()) {
            throw BackendError("backend \"" + descriptor_.name + "\": response is not JSON");
        }
        got_response = true;
    }
    if (!got_response) {
        throw BackendError("backend \"" + descriptor_.name + "\": " + last_error + " (after " +
                           std::to_string(descriptor_.transport_retries) + " retries)");
    }

    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty() || !response["choices"][0].contains("logprobs")) {
        throw BackendError("backend \"" + descriptor_.name +
                           "\": response missing choices[0].logprobs");
    }
    const json& logprobs = response["choices"][0]["logprobs"];
    if (!logprobs.contains("token_logprobs") || !logprobs.contains("text_offset")) {
        throw BackendError("backend \"" + descriptor_.name +
                           "\": logprobs need token_logprobs and text_offset");
    }
    const json& lp = logprobs["token_logprobs"];
    const json& offsets = logprobs["text_offset"];
    if (!lp.is_array() || !offsets.is_array() || lp.size() != offsets.size()) {
        throw BackendError("backend \"" + descriptor_.name +
                           "\": token_logprobs and text_offset must be arrays of equal length");
    }

    const auto boundary = static_cast<long long>(prompt.size());
    std::vector<double> out;
    bool aligned = false;
    for (size_t i = 0; i < offsets.size(); ++i) {
        long long offset = offsets[i].get<long long>();
        if (offset < boundary) {
            continue;
        }
        if (offset == boundary && out.empty()) {
            aligned = true;
        }
        if (lp[i].is_null()) {
            throw BackendError("backend \"" + descriptor_.name +
                               "\": null logprob inside the continuation");
        }
        out.push_back(lp[i].get<double>());
    }
    if (!aligned || out.empty()) {
        throw BackendError("backend \"" + descriptor_.name +
                           "\": token alignment failure (no token boundary at continuation start)");
    }
    return out;
}

} // namespace sppl
