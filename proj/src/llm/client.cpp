#include "fenestra/llm/client.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fenestra/scenario.hpp"

namespace fenestra::llm {

std::string to_string(Purpose p) { return p == Purpose::Init ? "init" : "feedback"; }

std::string to_string(Task t) { return t == Task::Layout ? "layout" : "heuristic"; }

std::string to_string(TransportError::Kind k) {
    switch (k) {
        case TransportError::Kind::Connection: return "connection";
        case TransportError::Kind::Timeout: return "timeout";
        case TransportError::Kind::Http: return "http";
        case TransportError::Kind::Protocol: return "protocol";
        case TransportError::Kind::Exhausted: return "exhausted";
    }
    return "unknown";
}

ScriptedStubClient::ScriptedStubClient(std::vector<Entry> entries)
    : entries_(std::move(entries)), used_(entries_.size(), false) {
    for (const Entry& e : entries_)
        if (e.match != "any" && e.match != "init" && e.match != "feedback")
            throw ConfigError("stub entry match must be init, feedback or any, got '" + e.match + "'");
}

std::vector<ScriptedStubClient::Entry> ScriptedStubClient::parse_script(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("stub script is not valid JSON: ") + e.what());
    }
    if (!j.is_array()) throw ConfigError("stub script must be a JSON array");
    std::vector<Entry> out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("response") || !item.at("response").is_string())
            throw ConfigError("stub entry needs a string 'response'");
        Entry e;
        e.response = item.at("response").get<std::string>();
        if (item.contains("match")) e.match = item.at("match").get<std::string>();
        if (item.contains("repeat")) e.repeat = item.at("repeat").get<bool>();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ScriptedStubClient::Entry> ScriptedStubClient::load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read stub script " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_script(ss.str());
}

ScriptedStubClient ScriptedStubClient::from_file(const std::filesystem::path& path) {
    return ScriptedStubClient(load_script(path));
}

ChatResponse ScriptedStubClient::complete(const ChatRequest& request) {
    const std::string purpose = to_string(request.purpose);
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (used_[i]) continue;
        if (entries_[i].match != "any" && entries_[i].match != purpose) continue;
        if (!entries_[i].repeat) used_[i] = true;
        ++served_;
        return {entries_[i].response, std::nullopt, std::nullopt};
    }
    throw TransportError(TransportError::Kind::Exhausted, "scripted stub has no response left for '" + purpose + "'");
}

std::size_t ScriptedStubClient::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t n = 0;
    for (bool u : used_) n += u ? 0 : 1;
    return n;
}

std::size_t ScriptedStubClient::served() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return served_;
}

ClientSettings ClientSettings::from_environment() {
    ClientSettings s;
    auto env = [](const char* name, std::string& field) {
        if (const char* v = std::getenv(name); v && *v) field = v;
    };
    env("FENESTRA_LLM_ENDPOINT", s.endpoint);
    env("FENESTRA_LLM_API_KEY", s.api_key);
    env("FENESTRA_LLM_MODEL", s.model);
    env("FENESTRA_LLM_STYLE", s.style);
    return s;
}

}  // namespace fenestra::llm
