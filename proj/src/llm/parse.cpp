#include "fenestra/llm/parse.hpp"

#include <algorithm>
#include <numeric>

#include "fenestra/wireless.hpp"

namespace fenestra::llm {

using nlohmann::json;

std::string to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::Ok: return "ok";
        case ParseStatus::ParseError: return "parse-error";
        case ParseStatus::ConstraintError: return "constraint-error";
    }
    return "parse-error";
}

namespace {

// End (one past) of the balanced object starting at `open`, or npos.
std::size_t balanced_end(const std::string& text, std::size_t open) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return i + 1;
    }
    return std::string::npos;
}

bool has_windows(const json& j) { return j.is_object() && j.contains("windows") && j["windows"].is_array(); }

}  // namespace

std::optional<json> find_json_object(const std::string& text, const std::function<bool(const json&)>& accept) {
    for (std::size_t open = text.find('{'); open != std::string::npos; open = text.find('{', open + 1)) {
        const std::size_t end = balanced_end(text, open);
        if (end == std::string::npos) continue;
        json j = json::parse(text.begin() + static_cast<std::ptrdiff_t>(open),
                             text.begin() + static_cast<std::ptrdiff_t>(end), nullptr, false);
        if (!j.is_discarded() && accept(j)) return j;
    }
    return std::nullopt;
}

ParseOutcome layout_from_json(const json& obj, const Scene& scene, bool validate) {
    ParseOutcome out;
    if (!has_windows(obj)) {
        out.message = "no 'windows' array";
        return out;
    }
    const json& arr = obj["windows"];
    const int n = static_cast<int>(arr.size());
    WindowLayout l(n);
    for (int k = 0; k < n; ++k) {
        const json& w = arr[static_cast<std::size_t>(k)];
        for (const char* key : {"x", "theta_deg", "psi_deg"}) {
            if (!w.is_object() || !w.contains(key) || !w[key].is_number()) {
                out.message = "window " + std::to_string(k + 1) + ": missing or non-numeric '" + key + "'";
                return out;
            }
        }
        l.x(k) = w["x"].get<double>();
        l.elevation(k) = deg2rad(w["theta_deg"].get<double>());
        l.azimuth(k) = wrap_two_pi(deg2rad(w["psi_deg"].get<double>()));
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return l.x(a) < l.x(b); });
    WindowLayout sorted(n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        sorted.x(k) = l.x(src);
        sorted.elevation(k) = l.elevation(src);
        sorted.azimuth(k) = l.azimuth(src);
    }
    if (validate) {
        if (n != scene.room.window_count) {
            out.status = ParseStatus::ConstraintError;
            out.message = "expected " + std::to_string(scene.room.window_count) + " windows, got " + std::to_string(n);
            out.violations.push_back({LayoutViolation::Kind::Count, -1, -1, out.message});
            return out;
        }
        out.violations = validate_layout(sorted, scene.room, scene.config.d_min, scene.max_elevation());
        if (!out.violations.empty()) {
            out.status = ParseStatus::ConstraintError;
            for (std::size_t i = 0; i < out.violations.size(); ++i)
                out.message += (i ? "; " : "") + out.violations[i].message;
            return out;
        }
    }
    out.status = ParseStatus::Ok;
    out.layout = std::move(sorted);
    return out;
}

ParseOutcome parse_solution(const std::string& text, const Scene& scene) {
    const auto obj = find_json_object(text, has_windows);
    if (!obj) {
        ParseOutcome out;
        out.message = "no JSON object with a 'windows' array found";
        return out;
    }
    return layout_from_json(*obj, scene, true);
}

namespace {

// Converts every convertible entry of a layout array; the rest become notes.
std::vector<WindowLayout> layouts_from_array(const json& arr, const Scene& scene, std::vector<std::string>& notes) {
    std::vector<WindowLayout> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        ParseOutcome p = layout_from_json(arr[i], scene, false);
        if (p.ok() && p.layout->size() == scene.room.window_count)
            out.push_back(std::move(*p.layout));
        else
            notes.push_back("population entry " + std::to_string(i + 1) + " skipped: " +
                            (p.ok() ? "wrong window count" : p.message));
    }
    return out;
}

}  // namespace

HeuristicParse parse_heuristic_proposal(const std::string& text, const Scene& scene,
                                        const std::vector<std::string>& pool, const HeuristicConfig& defaults) {
    HeuristicParse out;
    const auto obj = find_json_object(text, [](const json& j) {
        return j.is_object() && j.contains("algorithm") && j["algorithm"].is_string();
    });
    if (!obj) {
        out.message = "no JSON object with an 'algorithm' string found";
        return out;
    }
    HeuristicProposal p;
    p.algorithm = (*obj)["algorithm"].get<std::string>();
    std::transform(p.algorithm.begin(), p.algorithm.end(), p.algorithm.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (std::find(pool.begin(), pool.end(), p.algorithm) == pool.end()) {
        out.status = ParseStatus::ConstraintError;
        std::string names;
        for (std::size_t i = 0; i < pool.size(); ++i) names += (i ? ", " : "") + pool[i];
        out.message = "unknown algorithm '" + p.algorithm + "'; choose one of: " + names;
        return out;
    }
    p.config = defaults;
    if (obj->contains("params")) {
        const json& params = (*obj)["params"];
        if (!params.is_object()) {
            out.message = "'params' must be an object";
            return out;
        }
        json allowed = json::object();
        for (const char* key : {"population", "crossover_prob", "mutation_prob", "elite", "t_high", "t_low", "cooling",
                                "tournament", "mutation_sigma"}) {
            if (!params.contains(key)) continue;
            if (!params[key].is_number()) {
                out.message = std::string("parameter '") + key + "' is not a number";
                return out;
            }
            allowed[key] = params[key];
        }
        for (const auto& [key, value] : params.items())
            if (!allowed.contains(key)) p.notes.push_back("parameter '" + key + "' ignored");
        try {
            // Integer fields may arrive as floats.
            for (const char* key : {"population", "elite", "tournament"})
                if (allowed.contains(key)) allowed[key] = static_cast<long>(std::llround(allowed[key].get<double>()));
            from_json(allowed, p.config);
        } catch (const std::exception& e) {
            out.message = std::string("bad parameters: ") + e.what();
            return out;
        }
        for (std::string& note : p.config.clamp()) p.notes.push_back(std::move(note));
    }
    p.config.generations = defaults.generations;
    p.config.seed = defaults.seed;
    p.config.stagnation = defaults.stagnation;
    if (obj->contains("population")) {
        if (!(*obj)["population"].is_array()) {
            out.message = "'population' must be an array";
            return out;
        }
        p.population = layouts_from_array((*obj)["population"], scene, p.notes);
    }
    out.status = ParseStatus::Ok;
    out.proposal = std::move(p);
    return out;
}

InjectionParse parse_injection(const std::string& text, const Scene& scene) {
    InjectionParse out;
    const auto obj = find_json_object(text, [](const json& j) {
        return j.is_object() && ((j.contains("population") && j["population"].is_array()) || has_windows(j));
    });
    if (!obj) {
        out.message = "no JSON object with a 'population' or 'windows' array found";
        return out;
    }
    const json arr = obj->contains("population") ? (*obj)["population"] : json::array({*obj});
    out.individuals = layouts_from_array(arr, scene, out.notes);
    if (out.individuals.empty()) {
        out.status = ParseStatus::ConstraintError;
        out.message = "no usable individual";
        for (const std::string& n : out.notes) out.message += "; " + n;
        return out;
    }
    out.status = ParseStatus::Ok;
    return out;
}

}  // namespace fenestra::llm
