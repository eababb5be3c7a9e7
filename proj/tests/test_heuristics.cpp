#include <doctest.h>

#include <filesystem>

#include "fenestra/heuristics.hpp"

using namespace fenestra;

namespace {

const Scene& default_scene() {
    static const Scene s = Scene::build(ScenarioConfig{});
    return s;
}

SolutionVector two_windows(double x0, double x1, double e0 = 0.1, double e1 = 0.2, double a0 = 1.0, double a1 = 2.0) {
    SolutionVector v(6);
    v << x0, x1, e0, e1, a0, a1;
    return v;
}

}  // namespace

TEST_CASE("encode and decode are inverse") {
    WindowLayout l(2);
    l.x << 25, 31;
    l.elevation << 0.3, 0.4;
    l.azimuth << 5.0, 6.0;
    CHECK(decode(encode(l)) == l);
}

TEST_CASE("repair enforces spacing, bounds, cone and order") {
    const SearchSpace space = SearchSpace::from_scene(default_scene());
    CHECK(space.lower(0) == doctest::Approx(20.45));
    CHECK(space.upper(0) == doctest::Approx(39.55));
    CHECK(space.upper(2) == doctest::Approx(deg2rad(80.0)));

    SolutionVector r = repair(two_windows(25.0, 25.1), space);
    CHECK(r(0) == doctest::Approx(25.0));
    CHECK(r(1) == doctest::Approx(25.9));

    r = repair(two_windows(20.0, 20.5), space);
    CHECK(r(0) == doctest::Approx(20.45));
    CHECK(r(1) == doctest::Approx(21.35));

    r = repair(two_windows(39.6, 39.5), space);  // also unsorted
    CHECK(r(0) == doctest::Approx(38.65));
    CHECK(r(1) == doctest::Approx(39.55));

    // Angles travel with their window when sorting.
    r = repair(two_windows(33.0, 26.0, 0.1, 0.2, 1.0, 2.0), space);
    CHECK(r(0) == doctest::Approx(26.0));
    CHECK(r(2) == doctest::Approx(0.2));
    CHECK(r(4) == doctest::Approx(2.0));

    r = repair(two_windows(25, 35, 2.0, -0.5, -1.0, 7.0), space);
    CHECK(r(2) == doctest::Approx(deg2rad(80.0)));
    CHECK(r(3) == doctest::Approx(0.0));
    CHECK(r(4) == doctest::Approx(2 * std::numbers::pi - 1.0));
    CHECK(r(5) == doctest::Approx(7.0 - 2 * std::numbers::pi));
    CHECK(validate_layout(decode(r), default_scene().room, 0.9, default_scene().max_elevation()).empty());

    SearchSpace tight = space;
    tight.d_min = 25.0;
    CHECK_THROWS_AS(repair(two_windows(25, 35), tight), ConfigError);
}

TEST_CASE("repaired random vectors are always feasible") {
    ScenarioConfig cfg;
    cfg.n_windows = 6;
    const Scene scene = Scene::build(cfg);
    const SearchSpace space = SearchSpace::from_scene(scene);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0, 10);
    for (int k = 0; k < 200; ++k) {
        SolutionVector v = uniform_sample(space, rng);
        for (int i = 0; i < 6; ++i) v(i) = 30 + g(rng);
        CHECK(validate_layout(decode(repair(v, space)), scene.room, cfg.d_min, scene.max_elevation()).empty());
    }
}

TEST_CASE("Metropolis acceptance probability") {
    CHECK(metropolis_probability(-1.0, 100.0) == doctest::Approx(std::exp(-0.01)).epsilon(1e-15));
    CHECK(metropolis_probability(-1.0, 100.0) == doctest::Approx(0.990).epsilon(1e-3));
    CHECK(metropolis_probability(0.5, 1.0) == 1.0);
    CHECK(metropolis_probability(-1.0, 0.0) == 0.0);
}

TEST_CASE("heuristic config validation, clamping and JSON") {
    HeuristicConfig c;
    CHECK_NOTHROW(c.validate());
    c.population = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.mutation_prob = 3.0;
    const std::vector<std::string> notes = c.clamp();
    CHECK(notes.size() == 3);  // population, elite (must stay below population), mutation
    CHECK_NOTHROW(c.validate());

    HeuristicConfig d;
    d.population = 30;
    d.replacement = Replacement::Metropolis;
    d.seed = 99;
    const nlohmann::json j = d;
    const HeuristicConfig back = j.get<HeuristicConfig>();
    CHECK(back.population == 30);
    CHECK(back.replacement == Replacement::Metropolis);
    CHECK(back.seed == 99);
    CHECK(replacement_from_string(to_string(Replacement::Strict)) == Replacement::Strict);
    CHECK_THROWS_AS(replacement_from_string("nope"), ConfigError);
}

TEST_CASE("optimisers converge on the sphere and traces are monotone") {
    const SearchSpace space = SearchSpace::from_scene(default_scene());
    const SphereObjective sphere = SphereObjective::for_space(space);
    CHECK(sphere(sphere.center()).objective == 0.0);

    HeuristicConfig c;
    c.generations = 300;
    c.seed = 3;
    const RunOptions quiet{false};
    const OptimizerTrace ga = ga_run(sphere, space, c, quiet);
    const OptimizerTrace sa = saga_run(sphere, space, c, quiet);
    const OptimizerTrace rs = random_search(sphere, space, heuristic_evaluation_budget(c), 3, quiet);
    for (const OptimizerTrace* t : {&ga, &sa, &rs}) {
        for (std::size_t k = 1; k < t->records.size(); ++k)
            CHECK(t->records[k].best_objective >= t->records[k - 1].best_objective);
        for (const TraceRecord& r : t->records) CHECK(r.elapsed_ms == 0.0);
    }
    CHECK(ga.final_objective() > -1e-2);
    CHECK(sa.final_objective() > -1e-2);
    CHECK(rs.final_objective() < sa.final_objective());
    CHECK(rs.evaluations == heuristic_evaluation_budget(c));
    CHECK(ga.method == "ga");
    CHECK(sa.method == "saga");
}

TEST_CASE("evaluation budget without stagnation stop") {
    const SearchSpace space = SearchSpace::from_scene(default_scene());
    const SphereObjective sphere = SphereObjective::for_space(space);
    HeuristicConfig c;
    c.population = 20;
    c.generations = 15;
    c.stagnation = 0;
    CHECK(heuristic_evaluation_budget(c) == 20 + 15 * 18);
    CHECK(ga_run(sphere, space, c, {false}).evaluations == heuristic_evaluation_budget(c));
    CHECK(saga_run(sphere, space, c, {false}).evaluations == heuristic_evaluation_budget(c));
}

TEST_CASE("same seed gives byte-identical traces") {
    const SearchSpace space = SearchSpace::from_scene(default_scene());
    const SphereObjective sphere = SphereObjective::for_space(space);
    HeuristicConfig c;
    c.generations = 40;
    c.seed = 12;
    CHECK(trace_csv(saga_run(sphere, space, c, {false})) == trace_csv(saga_run(sphere, space, c, {false})));
    CHECK(trace_csv(ga_run(sphere, space, c, {false})) == trace_csv(ga_run(sphere, space, c, {false})));
    HeuristicConfig other = c;
    other.seed = 13;
    CHECK(trace_csv(saga_run(sphere, space, c, {false})) != trace_csv(saga_run(sphere, space, other, {false})));
}

TEST_CASE("trace CSV round trip") {
    OptimizerTrace t;
    t.records.push_back({0, -std::numeric_limits<double>::infinity(), 0, 0, false, 0, {}, {}});
    t.records.push_back({1, 6.25, 1.25, 1.0, true, 3.5, {}, {}});
    const std::string csv = trace_csv(t);
    CHECK(csv.rfind("step,best_objective,phi_w,phi_d,feasible,elapsed_ms\n", 0) == 0);
    const auto path = std::filesystem::temp_directory_path() / "fenestra_trace_rt.csv";
    write_trace_csv(t, path);
    const OptimizerTrace back = read_trace_csv(path);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].best_objective == -std::numeric_limits<double>::infinity());
    CHECK(back.records[1].best_objective == 6.25);
    CHECK(back.records[1].feasible);
    CHECK(back.records[1].elapsed_ms == 3.5);
    std::filesystem::remove(path);
}

TEST_CASE("SAGA cooling schedule and injection") {
    const SearchSpace space = SearchSpace::from_scene(default_scene());
    const SphereObjective sphere = SphereObjective::for_space(space);
    HeuristicConfig c;
    c.replacement = Replacement::Metropolis;
    GeneticSearch s(sphere, space, c);
    s.initialize();
    CHECK(s.temperature() == doctest::Approx(100.0));
    for (int k = 0; k < 10; ++k) s.step();
    CHECK(s.temperature() == doctest::Approx(100.0 * std::pow(0.98, 10)));
    const double before = s.best().score.fitness;
    s.inject({sphere.center()});
    CHECK(s.best().score.fitness == 0.0);
    CHECK(s.best().score.fitness > before);
    CHECK(s.population().size() == 50);
}

TEST_CASE("simulator objective scores infeasible layouts softly") {
    const Evaluator ev(Scene::build(ScenarioConfig{}));
    const SimulatorObjective hard(ev, PenaltyMode::Hard);
    const Scored udw = hard(encode(udw_layout(ev.scene().room)));
    CHECK(udw.feasible);
    CHECK(udw.objective == doctest::Approx(6.0));
    CHECK(udw.fitness == doctest::Approx(6.0));
}
