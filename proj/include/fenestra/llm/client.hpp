#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fenestra::llm {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct ImageAttachment {
    std::filesystem::path path;
    std::string media_type = "image/png";
};

/// Which loop phase sent the request. Stubs route on it; live clients ignore it.
enum class Purpose { Init, Feedback };

/// Which response schema the caller expects.
enum class Task { Layout, Heuristic };

std::string to_string(Purpose p);
std::string to_string(Task t);

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::vector<ImageAttachment> images;  // attached to the last user message
    Purpose purpose = Purpose::Init;
    Task task = Task::Layout;
};

struct ChatResponse {
    std::string text;
    std::optional<long> prompt_tokens;
    std::optional<long> completion_tokens;
};

/// Raised for every transport-level failure; a client never reports one as an
/// empty response.
class TransportError : public std::runtime_error {
public:
    enum class Kind { Connection, Timeout, Http, Protocol, Exhausted };
    TransportError(Kind kind, const std::string& what, int status = 0)
        : std::runtime_error(what), kind_(kind), status_(status) {}
    Kind kind() const { return kind_; }
    int status() const { return status_; }

private:
    Kind kind_;
    int status_;
};

std::string to_string(TransportError::Kind k);

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual bool supports_images() const { return false; }
    virtual std::string describe() const = 0;
};

/// Replays canned responses. Entries are consumed in order; a request takes
/// the first unconsumed entry whose match is "any" or equals its purpose. An
/// entry with "repeat": true is never consumed. Running out raises
/// TransportError(Exhausted).
class ScriptedStubClient final : public ChatClient {
public:
    struct Entry {
        std::string match = "any";  // "init" | "feedback" | "any"
        std::string response;
        bool repeat = false;
    };

    explicit ScriptedStubClient(std::vector<Entry> entries);
    /// JSON array of {match, response[, repeat]} objects.
    static ScriptedStubClient from_file(const std::filesystem::path& path);
    static std::vector<Entry> load_script(const std::filesystem::path& path);
    static std::vector<Entry> parse_script(const std::string& json_text);

    ChatResponse complete(const ChatRequest& request) override;
    std::string describe() const override { return "scripted-stub"; }
    std::size_t remaining() const;
    std::size_t served() const;

private:
    mutable std::mutex mutex_;
    std::vector<Entry> entries_;
    std::vector<bool> used_;
    std::size_t served_ = 0;
};

/// Settings for a live chat-completion endpoint.
struct ClientSettings {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string api_key;
    std::string model;
    std::string style = "openai";  // "openai" | "anthropic"
    double temperature = 0.7;
    int timeout_s = 120;
    int max_retries = 2;
    int max_tokens = 2048;
    bool images = true;

    /// Reads FENESTRA_LLM_ENDPOINT, FENESTRA_LLM_API_KEY, FENESTRA_LLM_MODEL
    /// and FENESTRA_LLM_STYLE over the defaults.
    static ClientSettings from_environment();
};

/// Chat-completion client over HTTP(S). Retries connection failures,
/// timeouts, 429 and 5xx responses up to max_retries times.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(ClientSettings settings);
    ChatResponse complete(const ChatRequest& request) override;
    bool supports_images() const override { return settings_.images; }
    std::string describe() const override;

    /// Request body the client would send (exposed for tests).
    std::string request_body(const ChatRequest& request) const;
    /// Extracts text and token counts from a response body.
    ChatResponse parse_response(const std::string& body) const;

private:
    ClientSettings settings_;
};

std::string base64_encode(const std::string& bytes);

}  // namespace fenestra::llm
