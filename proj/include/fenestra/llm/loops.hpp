#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fenestra/heuristics.hpp"
#include "fenestra/llm/client.hpp"
#include "fenestra/llm/parse.hpp"
#include "fenestra/llm/prompt.hpp"
#include "fenestra/objective.hpp"

namespace fenestra::llm {

/// One request/response round trip, kept verbatim for audit.
struct LlmExchange {
    int step = 0;        // trace step the exchange belongs to
    std::string phase;   // "init" | "feedback" | "lhs-init" | "lhs-update"
    int attempt = 0;     // 0 for the first try, counts retries
    std::vector<ChatMessage> messages;
    std::vector<std::string> images;
    std::string response;
    std::string outcome;  // ok | parse-error | constraint-error | below-threshold | transport-error
    std::string detail;
    std::optional<double> phi_o;
    double latency_ms = 0.0;
    std::optional<long> prompt_tokens;
    std::optional<long> completion_tokens;
};

nlohmann::json exchange_to_json(const LlmExchange& e);
void write_exchanges_jsonl(const std::vector<LlmExchange>& exchanges, const std::filesystem::path& path);

struct LlmRunResult {
    OptimizerTrace trace;
    std::vector<LlmExchange> exchanges;
    std::optional<PerformanceReport> best;
    bool init_below_threshold = false;  // init retries ran out before beating the threshold
    bool aborted = false;               // transport failure ended the run early
    std::string error;
    std::vector<std::string> notes;
};

struct LmwoConfig {
    double init_threshold = 5.0;
    int max_init_retries = 5;  // attempts after the first
    int stall_window = 5;
    int max_steps = 10;        // optimisation steps after initialisation
    std::size_t history = 5;
    std::optional<std::filesystem::path> image_dir;  // heatmap PNGs for image-capable clients
};

/// Phase 1 asks for layouts until phi_o exceeds the threshold (keeping the
/// best attempt, flagged, when retries run out). Phase 2 feeds scores and
/// heatmaps back until the best phi_o is unchanged for stall_window steps or
/// max_steps steps ran. Trace step 0 is the accepted initial layout.
LlmRunResult lmwo_run(const Evaluator& evaluator, ChatClient& client, const LmwoConfig& config,
                      RunOptions options = {});

struct LhsConfig {
    int generations_per_update = 100;  // K
    int max_updates = 10;              // T_u
    int max_init_retries = 5;
    std::vector<std::string> pool{"ga", "saga"};
    HeuristicConfig defaults;  // used for unset parameters and the saga fallback
    std::size_t history = 5;
    std::optional<std::filesystem::path> image_dir;
};

/// LLM picks and parameterises a pooled heuristic and seeds its population,
/// then after every K generations sees the best solution and injects
/// replacement individuals. Records carry note "llm-update" at injections.
LlmRunResult lhs_run(const Evaluator& evaluator, ChatClient& client, const LhsConfig& config,
                     RunOptions options = {});

/// Built-in deterministic stand-in for an LLM. It reads the best layout from
/// the prompt, tries `candidates` window placements around it (random ones
/// at initialisation), aims each beam at heavily weighted users, scores
/// everything with its own simulator access and answers with the best, so it
/// follows the objective (including eta) the way a competent model would.
/// Identical prompts give identical answers.
class GreedyStubClient final : public ChatClient {
public:
    GreedyStubClient(const Evaluator& evaluator, std::uint64_t seed = 1, int candidates = 16);
    ChatResponse complete(const ChatRequest& request) override;
    std::string describe() const override { return "greedy-stub"; }

private:
    std::vector<SolutionVector> propose(const std::string& prompt, Purpose purpose, int count) const;

    static constexpr int kAimPoints = 16;

    const Evaluator& evaluator_;
    SearchSpace space_;
    std::uint64_t seed_;
    int candidates_;
};

}  // namespace fenestra::llm
