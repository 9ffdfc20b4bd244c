#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace sppl {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
};

/// A chat-completion endpoint. complete() returns choices[0].message.content;
/// transport and protocol failures surface as BackendError.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual const std::string& endpoint_name() const = 0;
    virtual const std::string& model() const = 0;
};

struct EndpointConfig {
    std::string name;
    std::string kind = "http"; // "http" | "scripted"
    std::string base_url;
    std::string model;
    std::string api_key_env; // default: TEACHER_<NAME>_API_KEY
    std::string script_path; // scripted endpoints
    double temperature = 1.0;
    int transport_retries = 2;
};

std::unique_ptr<ChatClient> make_chat_client(const EndpointConfig& config);

/// POSTs {"model","messages","temperature"} to <base_url>/v1/chat/completions
/// with Bearer auth from the configured environment variable. Connection-level
/// failures and 5xx responses are retried transport_retries times.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(EndpointConfig config);
    std::string complete(const ChatRequest& request) override;
    const std::string& endpoint_name() const override { return config_.name; }
    const std::string& model() const override { return config_.model; }

private:
    EndpointConfig config_;
};

struct ScriptedReply {
    std::string text;
    bool transport_error = false;
};

struct ScriptEntry {
    std::string match; // substring of the last user message
    std::vector<ScriptedReply> replies;
};

/// Deterministic stand-in for a chat endpoint. Each call finds the first entry
/// whose match occurs in the last user message and consumes its next reply
/// (the final reply repeats once exhausted). No matching entry is an error.
class ScriptedChatClient : public ChatClient {
public:
    ScriptedChatClient(std::string name, std::string model, std::vector<ScriptEntry> entries);
    static std::unique_ptr<ScriptedChatClient> from_file(std::string name, std::string model,
                                                         const std::filesystem::path& script);

    std::string complete(const ChatRequest& request) override;
    const std::string& endpoint_name() const override { return name_; }
    const std::string& model() const override { return model_; }
    int call_count() const;

private:
    std::string name_;
    std::string model_;
    std::vector<ScriptEntry> entries_;
    std::vector<size_t> cursors_;
    mutable std::mutex mutex_;
    int calls_ = 0;
};

} // namespace sppl
