#include "sppl/chat.hpp"

#include <algorithm>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "sppl/errors.hpp"
#include "sppl/jsonl.hpp"

namespace sppl {

namespace {

std::string default_api_key_env(const std::string& name) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) {
        return std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
    });
    return "TEACHER_" + upper + "_API_KEY";
}

const std::string* last_user_content(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == "user") {
            return &it->content;
        }
    }
    return nullptr;
}

} // namespace

std::unique_ptr<ChatClient> make_chat_client(const EndpointConfig& config) {
    if (config.kind == "scripted") {
        return ScriptedChatClient::from_file(config.name, config.model, config.script_path);
    }
    if (config.kind == "http") {
        return std::make_unique<HttpChatClient>(config);
    }
    throw ConfigError("endpoint \"" + config.name + "\": unknown kind \"" + config.kind + "\"");
}

HttpChatClient::HttpChatClient(EndpointConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw ConfigError("endpoint \"" + config_.name + "\": base_url is required");
    }
    if (config_.api_key_env.empty()) {
        config_.api_key_env = default_api_key_env(config_.name);
    }
}

std::string HttpChatClient::complete(const ChatRequest& request) {
    json body;
    body["model"] = request.model.empty() ? config_.model : request.model;
    body["temperature"] = request.temperature;
    body["messages"] = json::array();
    for (const auto& m : request.messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
        httplib::Client client(config_.base_url);
        client.set_read_timeout(300, 0);
        auto result = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw BackendError("endpoint \"" + config_.name + "\": HTTP " +
                               std::to_string(result->status) + ": " + result->body);
        }
        json response = json::parse(result->body, nullptr, false);
        if (response.is_discarded() || !response.contains("choices") ||
            !response["choices"].is_array() || response["choices"].empty() ||
            !response["choices"][0].contains("message") ||
            !response["choices"][0]["message"].contains("content") ||
            !response["choices"][0]["message"]["content"].is_string()) {
            throw BackendError("endpoint \"" + config_.name +
                               "\": response missing choices[0].message.content");
        }
        return response["choices"][0]["message"]["content"].get<std::string>();
    }
    throw BackendError("endpoint \"" + config_.name + "\": " + last_error + " (after " +
                       std::to_string(config_.transport_retries) + " retries)");
}

ScriptedChatClient::ScriptedChatClient(std::string name, std::string model,
                                       std::vector<ScriptEntry> entries)
    : name_(std::move(name)), model_(std::move(model)), entries_(std::move(entries)),
      cursors_(entries_.size(), 0) {}

std::unique_ptr<ScriptedChatClient> ScriptedChatClient::from_file(
    std::string name, std::string model, const std::filesystem::path& script) {
    std::vector<ScriptEntry> entries;
    for_each_jsonl(script, [&](const json& record, size_t lineno) {
        const std::string where = script.filename().string() + ":" + std::to_string(lineno);
        ScriptEntry entry;
        if (!record.contains("match") || !record.at("match").is_string()) {
            throw ConfigError(where + ": script entry needs a string \"match\"");
        }
        entry.match = record.at("match").get<std::string>();
        if (!record.contains("replies") || !record.at("replies").is_array() ||
            record.at("replies").empty()) {
            throw ConfigError(where + ": script entry needs a non-empty \"replies\" array");
        }
        for (const auto& r : record.at("replies")) {
            ScriptedReply reply;
            if (r.is_string()) {
                reply.text = r.get<std::string>();
            } else if (r.is_object()) {
                reply.text = r.value("text", "");
                reply.transport_error = r.value("transport_error", false);
            } else {
                throw ConfigError(where + ": reply must be a string or object");
            }
            entry.replies.push_back(std::move(reply));
        }
        entries.push_back(std::move(entry));
    });
    return std::make_unique<ScriptedChatClient>(std::move(name), std::move(model),
                                                std::move(entries));
}

std::string ScriptedChatClient::complete(const ChatRequest& request) {
    const std::string* content = last_user_content(request);
    if (content == nullptr) {
        throw BackendError("scripted endpoint \"" + name_ + "\": request has no user message");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    ++calls_;
    for (size_t i = 0; i < entries_.size(); ++i) {
        if (content->find(entries_[i].match) == std::string::npos) {
            continue;
        }
        size_t cursor = std::min(cursors_[i], entries_[i].replies.size() - 1);
        ++cursors_[i];
        const ScriptedReply& reply = entries_[i].replies[cursor];
        if (reply.transport_error) {
            throw BackendError("scripted endpoint \"" + name_ + "\": transport error (scripted)");
        }
        return reply.text;
    }
    throw BackendError("scripted endpoint \"" + name_ + "\": no scripted reply matches request");
}

int ScriptedChatClient::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

} // namespace sppl
