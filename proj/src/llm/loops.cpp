#include "fenestra/llm/loops.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fenestra/scenario.hpp"

namespace fenestra::llm {

using nlohmann::json;

json exchange_to_json(const LlmExchange& e) {
    json msgs = json::array();
    for (const ChatMessage& m : e.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    json j = {{"step", e.step},         {"phase", e.phase},     {"attempt", e.attempt},
              {"messages", msgs},       {"images", e.images},   {"response", e.response},
              {"outcome", e.outcome},   {"detail", e.detail},   {"latency_ms", e.latency_ms}};
    j["phi_o"] = e.phi_o && std::isfinite(*e.phi_o) ? json(*e.phi_o) : json(nullptr);
    j["prompt_tokens"] = e.prompt_tokens ? json(*e.prompt_tokens) : json(nullptr);
    j["completion_tokens"] = e.completion_tokens ? json(*e.completion_tokens) : json(nullptr);
    return j;
}

void write_exchanges_jsonl(const std::vector<LlmExchange>& exchanges, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const LlmExchange& e : exchanges) out << exchange_to_json(e).dump() << '\n';
}

namespace {

Scored scored_of(const PerformanceReport& r) {
    Scored s;
    s.feasible = r.feasible;
    s.objective = r.feasible ? r.phi_o : -std::numeric_limits<double>::infinity();
    s.fitness = s.objective;
    s.phi_w = std::isfinite(r.phi_w) ? r.phi_w : 0.0;
    s.phi_d = std::isfinite(r.phi_d) ? r.phi_d : 0.0;
    return s;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Sends one request and fills the audit record. Transport errors propagate
// after being logged.
ChatResponse send(ChatClient& client, const PromptBundle& bundle, Purpose purpose, Task task, LlmExchange& ex,
                  std::vector<LlmExchange>& log, const RunOptions& options) {
    ChatRequest req;
    req.messages = bundle.messages();
    req.purpose = purpose;
    req.task = task;
    if (client.supports_images()) req.images = bundle.images;
    ex.messages = req.messages;
    for (const ImageAttachment& img : req.images) ex.images.push_back(img.path.filename().string());
    const Stopwatch clock(options.record_time);
    try {
        ChatResponse r = client.complete(req);
        ex.latency_ms = clock.elapsed_ms();
        ex.response = r.text;
        ex.prompt_tokens = r.prompt_tokens;
        ex.completion_tokens = r.completion_tokens;
        return r;
    } catch (const TransportError& e) {
        ex.latency_ms = clock.elapsed_ms();
        ex.outcome = "transport-error";
        ex.detail = to_string(e.kind()) + ": " + e.what();
        log.push_back(ex);
        throw;
    }
}

std::optional<std::filesystem::path> images_for(const ChatClient& client,
                                                const std::optional<std::filesystem::path>& dir) {
    return client.supports_images() ? dir : std::nullopt;
}

}  // namespace

LlmRunResult lmwo_run(const Evaluator& evaluator, ChatClient& client, const LmwoConfig& config, RunOptions options) {
    if (config.max_init_retries < 0 || config.stall_window < 1 || config.max_steps < 0)
        throw ConfigError("lmwo: retries must be >= 0, stall window >= 1, max steps >= 0");
    const Scene& scene = evaluator.scene();
    LlmRunResult res;
    TraceRecorder rec("lmwo", 0, options);
    HistoryRing ring(config.history);

    const PromptBundle init = build_init_prompt(scene);
    PromptBundle prompt = init;
    std::optional<PerformanceReport> current;
    std::optional<PerformanceReport> best_attempt;
    bool accepted = false;

    for (int attempt = 0; attempt <= config.max_init_retries && !accepted; ++attempt) {
        LlmExchange ex;
        ex.phase = "init";
        ex.attempt = attempt;
        ChatResponse r;
        try {
            r = send(client, prompt, Purpose::Init, Task::Layout, ex, res.exchanges, options);
        } catch (const TransportError& e) {
            res.aborted = true;
            res.error = e.what();
            res.trace = rec.take();
            return res;
        }
        const ParseOutcome p = parse_solution(r.text, scene);
        if (!p.ok()) {
            ex.outcome = to_string(p.status);
            ex.detail = p.message;
            res.exchanges.push_back(ex);
            prompt = with_rejection(init, ex.outcome, p.message);
            continue;
        }
        PerformanceReport report = evaluator.evaluate(*p.layout);
        rec.count_evaluations(1);
        ex.phi_o = report.phi_o;
        if (report.feasible && (!best_attempt || report.phi_o > best_attempt->phi_o)) best_attempt = report;
        if (report.feasible && report.phi_o > config.init_threshold) {
            ex.outcome = "ok";
            accepted = true;
            current = std::move(report);
        } else {
            ex.outcome = "below-threshold";
            ex.detail = report.feasible ? "phi_o = " + num(report.phi_o) + " does not exceed the threshold " +
                                              num(config.init_threshold)
                                        : "infeasible layout";
            for (const std::string& v : report.violations) ex.detail += "; " + v;
            prompt = with_rejection(init, ex.outcome, ex.detail);
        }
        res.exchanges.push_back(ex);
    }

    std::string init_note = "init";
    if (!accepted) {
        res.init_below_threshold = true;
        if (best_attempt) {
            current = *best_attempt;
            init_note = "init-below-threshold";
            res.notes.push_back("initialisation retries exhausted; kept the best attempt (phi_o " +
                                num(best_attempt->phi_o) + ")");
        } else {
            current = evaluator.evaluate(udw_layout(scene.room));
            rec.count_evaluations(1);
            init_note = "init-fallback-udw";
            res.notes.push_back("initialisation produced no feasible layout; started from the evenly spaced layout");
        }
    }

    rec.observe(encode(current->layout), scored_of(*current));
    rec.record(0, init_note);
    ring.push(HistoryEntry::from_report(0, *current));
    PerformanceReport best = *current;
    std::optional<std::pair<std::string, std::string>> rejection;

    int stall = 0;
    for (int step = 1; step <= config.max_steps; ++step) {
        const FeedbackPayload payload = FeedbackPayload::from_report(
            *current, scene.grid, images_for(client, config.image_dir), "step_" + std::to_string(step - 1));
        PromptBundle bundle =
            build_feedback_prompt(scene, ring, HistoryEntry::from_report(0, best), payload, Task::Layout);
        if (rejection) bundle = with_rejection(std::move(bundle), rejection->first, rejection->second);
        rejection.reset();

        LlmExchange ex;
        ex.step = step;
        ex.phase = "feedback";
        ChatResponse r;
        try {
            r = send(client, bundle, Purpose::Feedback, Task::Layout, ex, res.exchanges, options);
        } catch (const TransportError& e) {
            res.aborted = true;
            res.error = e.what();
            break;
        }
        bool improved = false;
        std::string note;
        const ParseOutcome p = parse_solution(r.text, scene);
        if (!p.ok()) {
            ex.outcome = to_string(p.status);
            ex.detail = p.message;
            rejection.emplace(ex.outcome, p.message);
            note = ex.outcome;
        } else {
            PerformanceReport report = evaluator.evaluate(*p.layout);
            rec.count_evaluations(1);
            ex.outcome = "ok";
            ex.phi_o = report.phi_o;
            rec.observe(encode(report.layout), scored_of(report));
            ring.push(HistoryEntry::from_report(step, report));
            if (report.feasible && report.phi_o > best.phi_o + 1e-12) {
                improved = true;
                best = report;
            }
            current = std::move(report);
        }
        res.exchanges.push_back(ex);
        rec.record(step, note);
        stall = improved ? 0 : stall + 1;
        if (stall >= config.stall_window) break;
    }
    res.best = best;
    res.trace = rec.take();
    return res;
}

LlmRunResult lhs_run(const Evaluator& evaluator, ChatClient& client, const LhsConfig& config, RunOptions options) {
    if (config.pool.empty()) throw ConfigError("lhs: algorithm pool is empty");
    for (const std::string& a : config.pool)
        if (a != "ga" && a != "saga") throw ConfigError("lhs: unregistered algorithm '" + a + "'");
    if (config.generations_per_update < 0 || config.max_updates < 0 || config.max_init_retries < 0)
        throw ConfigError("lhs: K, T_u and retries must be >= 0");
    config.defaults.validate();

    const Scene& scene = evaluator.scene();
    LlmRunResult res;
    TraceRecorder rec("lhs", config.defaults.seed, options);
    HistoryRing ring(config.history);

    const PromptBundle init = build_init_prompt(scene, Task::Heuristic, config.pool);
    PromptBundle prompt = init;
    std::optional<HeuristicProposal> proposal;
    for (int attempt = 0; attempt <= config.max_init_retries && !proposal; ++attempt) {
        LlmExchange ex;
        ex.phase = "lhs-init";
        ex.attempt = attempt;
        ChatResponse r;
        try {
            r = send(client, prompt, Purpose::Init, Task::Heuristic, ex, res.exchanges, options);
        } catch (const TransportError& e) {
            res.aborted = true;
            res.error = e.what();
            res.trace = rec.take();
            return res;
        }
        HeuristicParse p = parse_heuristic_proposal(r.text, scene, config.pool, config.defaults);
        ex.outcome = to_string(p.status);
        ex.detail = p.message;
        if (p.proposal) {
            for (const std::string& n : p.proposal->notes) ex.detail += (ex.detail.empty() ? "" : "; ") + n;
            proposal = std::move(p.proposal);
        } else {
            prompt = with_rejection(init, ex.outcome, p.message);
        }
        res.exchanges.push_back(ex);
    }
    if (!proposal) {
        proposal.emplace();
        proposal->algorithm = "saga";
        proposal->config = HeuristicConfig{};
        proposal->config.seed = config.defaults.seed;
        res.notes.push_back("no valid algorithm proposal; fell back to saga with the reference parameters");
    }
    for (const std::string& n : proposal->notes) res.notes.push_back(n);
    res.trace.method = "lhs";

    HeuristicConfig hc = proposal->config;
    hc.replacement = proposal->algorithm == "saga" ? Replacement::Metropolis : Replacement::Generational;
    const SimulatorObjective objective(evaluator, PenaltyMode::Soft);
    const SearchSpace space = SearchSpace::from_scene(scene);
    GeneticSearch search(objective, space, hc);
    std::vector<SolutionVector> seeds;
    for (const WindowLayout& l : proposal->population) seeds.push_back(encode(l));
    search.initialize(seeds);

    auto absorb = [&] {
        for (const Individual& ind : search.drain_evaluated()) rec.observe(ind.genes, ind.score);
    };
    absorb();
    int step = 0;
    rec.record(step, "init:" + proposal->algorithm);

    for (int update = 1; update <= config.max_updates; ++update) {
        for (int g = 0; g < config.generations_per_update; ++g) {
            if (!search.step()) break;
            absorb();
            rec.record(++step);
        }
        const double before = search.best().score.fitness;
        const PerformanceReport best_report = evaluator.evaluate(decode(search.best().genes));
        rec.count_evaluations(1);
        ring.push(HistoryEntry::from_report(step, best_report));
        const FeedbackPayload payload = FeedbackPayload::from_report(
            best_report, scene.grid, images_for(client, config.image_dir), "update_" + std::to_string(update));
        const PromptBundle bundle = build_feedback_prompt(scene, ring, HistoryEntry::from_report(step, best_report),
                                                          payload, Task::Heuristic);

        LlmExchange ex;
        ex.step = step + 1;
        ex.phase = "lhs-update";
        ChatResponse r;
        try {
            r = send(client, bundle, Purpose::Feedback, Task::Heuristic, ex, res.exchanges, options);
        } catch (const TransportError& e) {
            res.aborted = true;
            res.error = e.what();
            break;
        }
        const InjectionParse p = parse_injection(r.text, scene);
        ex.outcome = to_string(p.status);
        ex.detail = p.message;
        for (const std::string& n : p.notes) ex.detail += (ex.detail.empty() ? "" : "; ") + n;
        if (p.status == ParseStatus::Ok) {
            std::vector<SolutionVector> injected;
            for (const WindowLayout& l : p.individuals) injected.push_back(encode(l));
            search.inject(injected);
            absorb();
        }
        res.exchanges.push_back(ex);
        rec.record(++step, "llm-update");
        if (search.stagnated() && search.best().score.fitness <= before) {
            res.notes.push_back("converged after update " + std::to_string(update));
            break;
        }
    }
    rec.count_evaluations(search.evaluations());
    res.best = evaluator.evaluate(decode(search.best().genes));
    res.trace = rec.take();
    return res;
}

GreedyStubClient::GreedyStubClient(const Evaluator& evaluator, std::uint64_t seed, int candidates)
    : evaluator_(evaluator), space_(SearchSpace::from_scene(evaluator.scene())), seed_(seed), candidates_(candidates) {
    if (candidates < 1) throw ConfigError("greedy stub needs at least one candidate");
}

std::vector<SolutionVector> GreedyStubClient::propose(const std::string& prompt, Purpose purpose, int count) const {
    const Scene& scene = evaluator_.scene();
    const int n = space_.windows;
    SolutionVector base = encode(udw_layout(scene.room));
    std::string anchor = "init";
    if (const auto pos = prompt.find(kBestLayoutMarker); pos != std::string::npos) {
        const std::string tail = prompt.substr(pos + std::char_traits<char>::length(kBestLayoutMarker));
        if (auto obj = find_json_object(tail, [](const json& j) { return j.is_object() && j.contains("windows"); })) {
            const ParseOutcome p = layout_from_json(*obj, scene, false);
            if (p.ok() && p.layout->size() == n) {
                base = encode(*p.layout);
                anchor = obj->dump();
            }
        }
    }
    // Seeded by the anchor layout only, so prompts differing in other lines
    // (e.g. eta) draw the same candidates.
    std::mt19937_64 rng(seed_ ^ fnv1a64(anchor));
    std::normal_distribution<double> g(0.0, 1.0);

    // Aim points: grid points drawn in proportion to user weight.
    const Eigen::VectorXd& w = scene.weights.w;
    std::discrete_distribution<Eigen::Index> pick(w.data(), w.data() + w.size());
    std::vector<Eigen::Index> aims;
    for (int k = 0; k < kAimPoints; ++k) aims.push_back(pick(rng));

    auto score = [&](const SolutionVector& v) {
        const PerformanceReport rep = evaluator_.evaluate(decode(v));
        return rep.feasible ? rep.phi_o : -std::numeric_limits<double>::infinity();
    };

    // Window positions first; daylight depends on them alone. Then each beam
    // is aimed in turn, which only moves the wireless score.
    std::vector<SolutionVector> positions{base};
    const double span = space_.upper(0) - space_.lower(0);
    for (int k = 1; k < candidates_; ++k) {
        SolutionVector v = base;
        if (purpose == Purpose::Init) {
            for (int i = 0; i < n; ++i) v(i) = space_.lower(i) + span * std::uniform_real_distribution<double>(0, 1)(rng);
        } else {
            const double sigma = std::array<double, 4>{0.2, 0.5, 1.0, 2.0}[static_cast<std::size_t>(k % 4)];
            for (int i = 0; i < n; ++i) v(i) += sigma * g(rng);
        }
        positions.push_back(repair(v, space_));
    }

    std::vector<std::pair<double, SolutionVector>> scored;
    for (const SolutionVector& start : positions) {
        SolutionVector best = start;
        double best_score = score(best);
        const WindowLayout l = decode(start);
        for (int win = 0; win < n; ++win) {
            std::vector<std::pair<double, double>> tries;
            for (Eigen::Index m : aims) {
                const LinkGeometry d = window_point_geometry(scene.room, l, win, scene.grid.point(m));
                tries.emplace_back(d.elevation, d.azimuth);
            }
            for (int j = 0; j < 4; ++j)
                tries.emplace_back(best(n + win) + deg2rad(1.0) * g(rng), best(2 * n + win) + deg2rad(2.0) * g(rng));
            for (const auto& [elev, az] : tries) {
                SolutionVector v = best;
                v(n + win) = elev;
                v(2 * n + win) = az;
                v = repair(v, space_);
                const double s = score(v);
                if (s > best_score) {
                    best_score = s;
                    best = v;
                }
            }
        }
        scored.emplace_back(best_score, best);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<SolutionVector> out;
    for (int k = 0; k < count && k < static_cast<int>(scored.size()); ++k)
        out.push_back(scored[static_cast<std::size_t>(k)].second);
    return out;
}

ChatResponse GreedyStubClient::complete(const ChatRequest& request) {
    std::string prompt;
    for (const ChatMessage& m : request.messages) prompt += m.content + "\n";
    const HeuristicConfig ref;
    if (request.task == Task::Layout) {
        const auto best = propose(prompt, request.purpose, 1);
        return {"Proposed layout:\n" + layout_json(decode(best.front())), std::nullopt, std::nullopt};
    }
    const auto top = propose(prompt, request.purpose, request.purpose == Purpose::Init ? 10 : 5);
    std::string pop;
    for (std::size_t i = 0; i < top.size(); ++i) pop += (i ? "," : "") + layout_json(decode(top[i]));
    if (request.purpose == Purpose::Feedback) return {"{\"population\":[" + pop + "]}", std::nullopt, std::nullopt};
    char params[256];
    std::snprintf(params, sizeof params,
                  "{\"population\":%d,\"crossover_prob\":%g,\"mutation_prob\":%g,\"elite\":%d,\"t_high\":%g,"
                  "\"t_low\":%g,\"cooling\":%g}",
                  ref.population, ref.crossover_prob, ref.mutation_prob, ref.elite, ref.t_high, ref.t_low, ref.cooling);
    return {std::string("{\"algorithm\":\"saga\",\"params\":") + params + ",\"population\":[" + pop + "]}",
            std::nullopt, std::nullopt};
}

}  // namespace fenestra::llm
