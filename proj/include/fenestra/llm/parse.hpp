#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fenestra/heuristics.hpp"
#include "fenestra/scene.hpp"

namespace fenestra::llm {

enum class ParseStatus { Ok, ParseError, ConstraintError };

std::string to_string(ParseStatus s);

/// First balanced {...} in `text` that parses as JSON and satisfies
/// `accept`. Code fences and surrounding prose are skipped naturally.
std::optional<nlohmann::json> find_json_object(const std::string& text,
                                               const std::function<bool(const nlohmann::json&)>& accept);

struct ParseOutcome {
    ParseStatus status = ParseStatus::ParseError;
    std::optional<WindowLayout> layout;
    std::string message;
    std::vector<LayoutViolation> violations;

    bool ok() const { return status == ParseStatus::Ok; }
};

/// Converts a {"windows":[...]} object. Degrees become radians, azimuths are
/// wrapped and windows are ordered by x. With `validate` the layout must pass
/// validate_layout (constraint-error otherwise).
ParseOutcome layout_from_json(const nlohmann::json& obj, const Scene& scene, bool validate = true);

/// Extracts and validates the first {"windows":[...]} object in a response.
ParseOutcome parse_solution(const std::string& text, const Scene& scene);

struct HeuristicProposal {
    std::string algorithm;
    HeuristicConfig config;
    std::vector<std::string> notes;  // clamping and skipped-individual notes
    std::vector<WindowLayout> population;
};

struct HeuristicParse {
    ParseStatus status = ParseStatus::ParseError;
    std::optional<HeuristicProposal> proposal;
    std::string message;
};

/// {"algorithm":..,"params":{..},"population":[..]}. An algorithm outside
/// `pool` is a constraint-error; out-of-range parameters are clamped with a
/// note; population layouts are converted without validation (they are
/// repaired by the search).
HeuristicParse parse_heuristic_proposal(const std::string& text, const Scene& scene,
                                        const std::vector<std::string>& pool, const HeuristicConfig& defaults);

struct InjectionParse {
    ParseStatus status = ParseStatus::ParseError;
    std::vector<WindowLayout> individuals;
    std::vector<std::string> notes;
    std::string message;
};

/// {"population":[..]} or a single {"windows":[..]}.
InjectionParse parse_injection(const std::string& text, const Scene& scene);

}  // namespace fenestra::llm
