#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <openssl/evp.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fenestra/llm/client.hpp"
#include "fenestra/scenario.hpp"

namespace fenestra::llm {

std::string base64_encode(const std::string& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read image " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpChatClient::HttpChatClient(ClientSettings settings) : settings_(std::move(settings)) {
    if (settings_.style != "openai" && settings_.style != "anthropic")
        throw ConfigError("client style must be openai or anthropic, got '" + settings_.style + "'");
    if (settings_.model.empty()) throw ConfigError("live client needs a model name");
    split_endpoint(settings_.endpoint);
}

std::string HttpChatClient::describe() const { return settings_.style + ":" + settings_.model; }

std::string HttpChatClient::request_body(const ChatRequest& request) const {
    using nlohmann::json;
    const bool anthropic = settings_.style == "anthropic";
    std::size_t last_user = request.messages.size();
    for (std::size_t i = 0; i < request.messages.size(); ++i)
        if (request.messages[i].role == "user") last_user = i;

    json messages = json::array();
    std::string system;
    for (std::size_t i = 0; i < request.messages.size(); ++i) {
        const ChatMessage& m = request.messages[i];
        if (anthropic && m.role == "system") {
            system += (system.empty() ? "" : "\n\n") + m.content;
            continue;
        }
        const bool attach = settings_.images && i == last_user && !request.images.empty();
        if (!attach) {
            messages.push_back({{"role", m.role}, {"content", m.content}});
            continue;
        }
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", m.content}});
        for (const ImageAttachment& img : request.images) {
            const std::string data = base64_encode(read_file(img.path));
            if (anthropic)
                parts.push_back({{"type", "image"},
                                 {"source", {{"type", "base64"}, {"media_type", img.media_type}, {"data", data}}}});
            else
                parts.push_back({{"type", "image_url"},
                                 {"image_url", {{"url", "data:" + img.media_type + ";base64," + data}}}});
        }
        messages.push_back({{"role", m.role}, {"content", parts}});
    }
    json body = {{"model", settings_.model}, {"messages", messages}, {"temperature", settings_.temperature},
                 {"max_tokens", settings_.max_tokens}};
    if (anthropic && !system.empty()) body["system"] = system;
    return body.dump();
}

ChatResponse HttpChatClient::parse_response(const std::string& body) const {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error&) {
        throw TransportError(TransportError::Kind::Protocol, "response body is not JSON");
    }
    ChatResponse r;
    try {
        if (settings_.style == "anthropic") {
            for (const auto& part : j.at("content"))
                if (part.value("type", "") == "text") r.text += part.at("text").get<std::string>();
            if (j.contains("usage")) {
                r.prompt_tokens = j["usage"].value("input_tokens", 0L);
                r.completion_tokens = j["usage"].value("output_tokens", 0L);
            }
        } else {
            const json& content = j.at("choices").at(0).at("message").at("content");
            if (!content.is_string())
                throw TransportError(TransportError::Kind::Protocol, "message content is not text");
            r.text = content.get<std::string>();
            if (j.contains("usage")) {
                r.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
                r.completion_tokens = j["usage"].value("completion_tokens", 0L);
            }
        }
    } catch (const json::exception& e) {
        throw TransportError(TransportError::Kind::Protocol, std::string("unexpected response shape: ") + e.what());
    }
    if (r.text.empty()) throw TransportError(TransportError::Kind::Protocol, "empty completion");
    return r;
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
    const Endpoint ep = split_endpoint(settings_.endpoint);
    const std::string body = request_body(request);
    httplib::Headers headers;
    if (settings_.style == "anthropic") {
        headers.emplace("anthropic-version", "2023-06-01");
        if (!settings_.api_key.empty()) headers.emplace("x-api-key", settings_.api_key);
    } else if (!settings_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + settings_.api_key);
    }

    std::string last_error;
    TransportError::Kind last_kind = TransportError::Kind::Connection;
    int last_status = 0;
    for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << std::min(attempt, 5)));
        httplib::Client cli(ep.origin);
        cli.set_connection_timeout(settings_.timeout_s, 0);
        cli.set_read_timeout(settings_.timeout_s, 0);
        cli.set_write_timeout(settings_.timeout_s, 0);
        auto res = cli.Post(ep.path, headers, body, "application/json");
        if (!res) {
            const httplib::Error err = res.error();
            last_kind = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read
                            ? TransportError::Kind::Timeout
                            : TransportError::Kind::Connection;
            last_error = "request failed: " + httplib::to_string(err);
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_kind = TransportError::Kind::Http;
            last_status = res->status;
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError(TransportError::Kind::Http,
                                 "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300),
                                 res->status);
        return parse_response(res->body);
    }
    throw TransportError(last_kind, last_error + " after " + std::to_string(settings_.max_retries + 1) + " attempts",
                         last_status);
}

}  // namespace fenestra::llm
