#include <doctest.h>

#include <sstream>

#include "fenestra/llm/parse.hpp"
#include "fenestra/llm/prompt.hpp"

using namespace fenestra;
using namespace fenestra::llm;

namespace {

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

std::string user_text(const PromptBundle& b) { return b.messages().back().content; }

}  // namespace

TEST_CASE("init prompt carries N, d_min and eta") {
    const Scene scene = Scene::build(ScenarioConfig{});
    const PromptBundle b = build_init_prompt(scene);
    const std::vector<ChatMessage> msgs = b.messages();
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].role == "system");
    CHECK(msgs[1].role == "user");
    const std::string u = msgs[1].content;
    CHECK(u.find("Windows: N = 2") != std::string::npos);
    CHECK(u.find("Minimum spacing: d_min = 0.9 m.") != std::string::npos);
    CHECK(u.find("Daylight factor: eta = 5.") != std::string::npos);
    for (const char* section : {"## Environment", "## Input and output format", "## Historical experience",
                                "## Instruction knowledge"})
        CHECK(u.find(section) != std::string::npos);
}

TEST_CASE("changing eta changes exactly one prompt line") {
    ScenarioConfig a, b;
    b.eta = 11.0;
    const auto la = lines(user_text(build_init_prompt(Scene::build(a))));
    const auto lb = lines(user_text(build_init_prompt(Scene::build(b))));
    REQUIRE(la.size() == lb.size());
    int diff = 0;
    for (std::size_t k = 0; k < la.size(); ++k)
        if (la[k] != lb[k]) {
            ++diff;
            CHECK(la[k] == "Daylight factor: eta = 5.");
            CHECK(lb[k] == "Daylight factor: eta = 11.");
        }
    CHECK(diff == 1);
    CHECK(build_init_prompt(Scene::build(a)).messages()[0].content ==
          build_init_prompt(Scene::build(b)).messages()[0].content);
}

TEST_CASE("prompts are byte-stable") {
    const Scene scene = Scene::build(ScenarioConfig{});
    CHECK(build_init_prompt(scene).render() == build_init_prompt(scene).render());
    const Evaluator ev(scene);
    const PerformanceReport r = ev.evaluate(udw_layout(scene.room));
    HistoryRing ring;
    ring.push(HistoryEntry::from_report(0, r));
    const FeedbackPayload fb = FeedbackPayload::from_report(r, scene.grid);
    const std::string one = build_feedback_prompt(scene, ring, HistoryEntry::from_report(0, r), fb).render();
    const std::string two = build_feedback_prompt(scene, ring, HistoryEntry::from_report(0, r), fb).render();
    CHECK(one == two);
    CHECK(one.find(kBestLayoutMarker) != std::string::npos);
    for (const std::string& row : lines(fb.wireless.grid)) CHECK(one.find("  " + row + "\n") != std::string::npos);
    for (const std::string& row : lines(fb.daylight.grid)) CHECK(one.find("  " + row + "\n") != std::string::npos);
}

TEST_CASE("history ring keeps the newest entries") {
    HistoryRing ring(5);
    for (int k = 0; k < 8; ++k) {
        HistoryEntry e;
        e.step = k;
        ring.push(e);
    }
    CHECK(ring.size() == 5);
    CHECK(ring.entries().front().step == 3);
    CHECK(ring.entries().back().step == 7);
}

TEST_CASE("rejection notes are appended") {
    const Scene scene = Scene::build(ScenarioConfig{});
    const PromptBundle b = with_rejection(build_init_prompt(scene), "parse-error", "no JSON");
    CHECK(b.render().find("rejected (parse-error): no JSON") != std::string::npos);
}

TEST_CASE("layout JSON is fixed precision and parses back") {
    const Scene scene = Scene::build(ScenarioConfig{});
    WindowLayout l(2);
    l.x << 25.123456, 33.5;
    l.elevation << deg2rad(12.3456), deg2rad(40);
    l.azimuth << deg2rad(270), deg2rad(300.5);
    const std::string j = layout_json(l);
    CHECK(j == R"({"windows":[{"x":25.1235,"theta_deg":12.346,"psi_deg":270.000},)"
               R"({"x":33.5000,"theta_deg":40.000,"psi_deg":300.500}]})");
    const ParseOutcome p = parse_solution(j, scene);
    REQUIRE(p.ok());
    CHECK(p.layout->x(0) == doctest::Approx(25.1235));
    CHECK(p.layout->azimuth(1) == doctest::Approx(deg2rad(300.5)));
}

TEST_CASE("solution parsing: fences, prose, ordering and wrapping") {
    const Scene scene = Scene::build(ScenarioConfig{});
    const std::string fenced = "Here you go:\n```json\n{\"windows\": [{\"x\": 34, \"theta_deg\": 10, \"psi_deg\": -90},"
                               " {\"x\": 26, \"theta_deg\": 20, \"psi_deg\": 370}]}\n```\nThe {braces} in prose are fine.";
    const ParseOutcome p = parse_solution(fenced, scene);
    REQUIRE(p.ok());
    CHECK(p.layout->x(0) == 26.0);
    CHECK(p.layout->elevation(0) == doctest::Approx(deg2rad(20)));
    CHECK(p.layout->azimuth(0) == doctest::Approx(deg2rad(10)));
    CHECK(p.layout->azimuth(1) == doctest::Approx(deg2rad(270)));

    const std::string tricky = R"(note: "{" {"windows":[{"x":25,"theta_deg":0,"psi_deg":0,"why":"a } b"},{"x":35,"theta_deg":0,"psi_deg":0}]})";
    CHECK(parse_solution(tricky, scene).ok());
}

TEST_CASE("solution parsing failures are typed") {
    const Scene scene = Scene::build(ScenarioConfig{});
    CHECK(parse_solution("I cannot help with that.", scene).status == ParseStatus::ParseError);
    CHECK(parse_solution(R"({"windows":[{"x":"a","theta_deg":0,"psi_deg":0}]})", scene).status ==
          ParseStatus::ParseError);

    const ParseOutcome close = parse_solution(
        R"({"windows":[{"x":25,"theta_deg":0,"psi_deg":0},{"x":25.5,"theta_deg":0,"psi_deg":0}]})", scene);
    CHECK(close.status == ParseStatus::ConstraintError);
    CHECK(close.message.find("windows 1 and 2") != std::string::npos);
    REQUIRE(close.violations.size() == 1);
    CHECK(close.violations[0].kind == LayoutViolation::Kind::Spacing);

    const ParseOutcome count = parse_solution(R"({"windows":[{"x":25,"theta_deg":0,"psi_deg":0}]})", scene);
    CHECK(count.status == ParseStatus::ConstraintError);
    CHECK(count.message == "expected 2 windows, got 1");

    const ParseOutcome cone = parse_solution(
        R"({"windows":[{"x":25,"theta_deg":85,"psi_deg":0},{"x":35,"theta_deg":0,"psi_deg":0}]})", scene);
    CHECK(cone.status == ParseStatus::ConstraintError);
}

TEST_CASE("heuristic proposals") {
    const Scene scene = Scene::build(ScenarioConfig{});
    const HeuristicConfig defaults;
    const std::vector<std::string> pool{"ga", "saga"};

    const HeuristicParse ok = parse_heuristic_proposal(
        R"({"algorithm":"SAGA","params":{"population":30.4,"mutation_prob":1.5},"population":[{"windows":[{"x":25,"theta_deg":10,"psi_deg":270},{"x":35,"theta_deg":10,"psi_deg":270}]}]})",
        scene, pool, defaults);
    REQUIRE(ok.status == ParseStatus::Ok);
    CHECK(ok.proposal->algorithm == "saga");
    CHECK(ok.proposal->config.population == 30);
    CHECK(ok.proposal->config.mutation_prob == 1.0);
    CHECK(ok.proposal->notes.size() == 1);
    CHECK(ok.proposal->population.size() == 1);
    CHECK(ok.proposal->config.generations == defaults.generations);

    const HeuristicParse unknown =
        parse_heuristic_proposal(R"({"algorithm":"pso","params":{}})", scene, pool, defaults);
    CHECK(unknown.status == ParseStatus::ConstraintError);
    CHECK(unknown.message.find("ga, saga") != std::string::npos);

    CHECK(parse_heuristic_proposal("use GA", scene, pool, defaults).status == ParseStatus::ParseError);
}

TEST_CASE("injection parsing") {
    const Scene scene = Scene::build(ScenarioConfig{});
    const std::string one = R"({"windows":[{"x":25,"theta_deg":10,"psi_deg":270},{"x":35,"theta_deg":10,"psi_deg":270}]})";
    const InjectionParse a = parse_injection(one, scene);
    CHECK(a.status == ParseStatus::Ok);
    CHECK(a.individuals.size() == 1);
    const InjectionParse b = parse_injection("{\"population\":[" + one + "," + one + ", {\"windows\":3}]}", scene);
    CHECK(b.status == ParseStatus::Ok);
    CHECK(b.individuals.size() == 2);
    CHECK(b.notes.size() == 1);
    CHECK(parse_injection(R"({"population":[]})", scene).status == ParseStatus::ConstraintError);
    CHECK(parse_injection("nothing", scene).status == ParseStatus::ParseError);
}
