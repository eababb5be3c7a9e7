// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when a
// criterion fails that is not listed in kDocumentedFailures (see README).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "fenestra/harness.hpp"
#include "fenestra/llm/loops.hpp"
#include "oracle.hpp"

using namespace fenestra;
namespace fs = std::filesystem;

namespace {

// Criterion 2's 10 degree offset lands on the second sidelobe of a 30-unit
// half-wavelength array when the offset lies along an array axis. Criterion
// 4's links share the user point, so their blockage is correlated. See README.
const std::set<int> kDocumentedFailures{2, 4};

struct Outcome {
    bool pass = false;
    std::string detail;
    bool explained = true;  // a failure matches its analysis in the README
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fenestra_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// 1. UDW identity for a spread of scenario files.
Outcome baseline_identity() {
    std::vector<ScenarioConfig> variants(6);
    variants[1].eta = 11;
    variants[2].n_windows = 3;
    variants[3].u_units = 100;
    variants[3].rho = 0.05;
    variants[4].beta_shape = {1.0, 3.0, 2.0, 5.0};
    variants[4].theta_d_deg = 40;
    variants[5].los_mode = LosMode::MonteCarlo;
    variants[5].mc_realizations = 500;
    double worst = 0, slowest = 0;
    bool ok = true;
    const fs::path dir = scratch("scenarios");
    fs::create_directories(dir);
    for (std::size_t k = 0; k < variants.size(); ++k) {
        const fs::path file = dir / ("scenario_" + std::to_string(k) + ".json");
        save_scenario(variants[k], file);
        const ScenarioConfig cfg = load_scenario(file);
        const auto t0 = std::chrono::steady_clock::now();
        const Evaluator ev(Scene::build(cfg), cfg.los_mode);
        const PerformanceReport r = ev.evaluate(udw_layout(ev.scene().room));
        const double dt = seconds_since(t0);
        if (cfg.los_mode == LosMode::Analytic) slowest = std::max(slowest, dt);
        worst = std::max({worst, std::abs(r.phi_w - 1), std::abs(r.phi_d - 1)});
        ok = ok && r.feasible && std::abs(r.phi_o - (1 + cfg.eta)) <= 1e-9 * (1 + cfg.eta);
    }
    fs::remove_all(dir);
    ok = ok && worst <= 1e-9 && slowest < 1.0;
    return {ok, fmt("6 scenario files, max |phi - 1| = %.2e, slowest analytic evaluate %.3f s", worst, slowest)};
}

// 2. Coherent sum at perfect steering and the 10 degree offset.
Outcome array_coherence() {
    ChannelParams p = ChannelParams::from_config(ScenarioConfig{});
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> el(0.0, deg2rad(80)), az(0, 2 * std::numbers::pi);
    double worst = 0;
    for (int side : {2, 10, 30}) {
        p.side = side;
        for (int k = 0; k < 20; ++k) {
            const LinkGeometry inc{1, el(rng), az(rng)}, dep{1, el(rng), az(rng)};
            const double mag = std::abs(array_factor_direct(inc, dep, dep, p));
            worst = std::max(worst, std::abs(mag - p.units()) / p.units());
        }
    }
    p.side = 30;
    // Broadside departure, steering tilted 10 degrees in the plane of one
    // array axis (the narrowest reading) and along the diagonal.
    const LinkGeometry inc{1, 0.3, 1.0}, broadside{1, 0.0, 0.0};
    const double axis = 1 - std::abs(array_factor_direct(inc, broadside, {1, deg2rad(10), 0.0}, p)) / 900;
    const double diag = 1 - std::abs(array_factor_direct(inc, broadside, {1, deg2rad(10), std::numbers::pi / 4}, p)) / 900;
    const bool ok = worst <= 1e-9 && axis >= 0.9;
    return {ok, fmt("max rel. error at U in {4,100,900}: %.1e; 10 deg offset reduces |AF| by %.1f%% along an axis, "
                    "%.1f%% on the diagonal (power: %.1f%%)",
                    worst, 100 * axis, 100 * diag, 100 * (1 - (1 - axis) * (1 - axis)))};
}

// 3. Boolean-model LoS against an independent Monte-Carlo oracle.
Outcome los_oracle() {
    bool ok = true;
    double worst_z = 0;
    std::uint64_t seed = 100;
    for (double rho : {0.01, 0.05})
        for (double d : {2.0, 10.0, 18.0}) {
            const oracle::LosEstimate mc = oracle::monte_carlo_los(rho, 0.2, d, 100000, seed++);
            const double z = std::abs(mc.p - los_probability(d, rho, 0.2)) / mc.standard_error;
            worst_z = std::max(worst_z, z);
            ok = ok && z <= 3;
        }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    double worst_sum = 0;
    for (int n = 1; n <= 4; ++n)
        for (int rep = 0; rep < 50; ++rep) {
            Eigen::VectorXd pl(n);
            for (int k = 0; k < n; ++k) pl(k) = u(rng);
            double s = 0;
            for (std::uint32_t m = 0; m < (1u << n); ++m) s += subset_probability(m, pl);
            worst_sum = std::max(worst_sum, std::abs(s - 1));
        }
    ok = ok && worst_sum <= 1e-12;
    return {ok, fmt("6 (rho, d) cases at 1e5 realisations, worst |z| = %.2f; subset sums within %.1e of 1", worst_z,
                    worst_sum)};
}

// 4. Expected rate: enumeration in analytic mode, convergence of the
// Monte-Carlo mode to the independence value.
Outcome rate_oracle() {
    ScenarioConfig cfg;
    const Scene scene = Scene::build(cfg);
    const ChannelParams cp = ChannelParams::from_config(cfg);
    WindowLayout l(2);
    l.x << 25.0, 35.0;
    l.elevation << 0.5, 0.7;
    l.azimuth << 5.2, 4.0;
    double worst = 0;
    for (Eigen::Index m = 0; m < scene.grid.size(); ++m) {
        const Eigen::Vector3d pt = scene.grid.point(m);
        Eigen::VectorXd pw(2), pl(2);
        for (int n = 0; n < 2; ++n) {
            pw(n) = received_power(cp, scene.bs, scene.room, l, n, pt);
            pl(n) = los_probability_single(scene.room, l, n, pt, cfg.rho, cfg.r_block);
        }
        const double brute = oracle::enumerate_expected_rate(pw, pl, cp.bandwidth_hz, cp.noise_w);
        worst = std::max(worst, std::abs(expected_rate(scene, l, pt, LosMode::Analytic) - brute) / brute);
    }
    bool ok = worst <= 1e-9;

    // Windows 10 m apart (50 R); denser field so blockage matters.
    ScenarioConfig dense = cfg;
    dense.rho = 0.05;
    const Scene ds = Scene::build(dense);
    const int n_real = 100000;
    const LosEnsemble ens(ds.room, dense.rho, dense.r_block, n_real, 7);
    // Both links end at the user point, so a blocker near it hides both
    // windows at once. The exact joint law uses the area of the union of the
    // two stadiums; the diagnostic checks the ensemble against it.
    double worst_z = 0, worst_joint_z = 0;
    bool joint_ok = true;
    for (const Eigen::Vector3d& pt : {Eigen::Vector3d(30, 35, 0.8), Eigen::Vector3d(24.5, 38.5, 0.8),
                                      Eigen::Vector3d(37.5, 31.5, 0.8)}) {
        const Eigen::VectorXd f = ens.subset_frequencies(ds.room, l, pt);
        Eigen::VectorXd pw(2);
        for (int n = 0; n < 2; ++n) pw(n) = received_power(cp, ds.bs, ds.room, l, n, pt);
        const Eigen::VectorXd r = pattern_rates(pw, cp.bandwidth_hz, cp.noise_w);
        const double mean = f.dot(r);
        const double var = f.dot(r.cwiseProduct(r)) - mean * mean;
        const double se = std::sqrt(std::max(var, 0.0) / n_real);
        const double z = std::abs(mean - expected_rate(ds, l, pt, LosMode::Analytic)) / se;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3;
        joint_ok = joint_ok && std::abs(expected_rate(ds, l, pt, LosMode::MonteCarlo, &ens) - mean) <= 1e-9 * mean;

        const Eigen::Vector2d w0(l.x(0), ds.room.facade_y()), w1(l.x(1), ds.room.facade_y()), u = pt.head<2>();
        const double both = std::exp(-dense.rho * oracle::stadium_union_area(w0, w1, u, dense.r_block, 2e-3));
        Eigen::Vector4d exact;
        exact(3) = both;
        exact(1) = los_probability_single(ds.room, l, 0, pt, dense.rho, dense.r_block) - both;
        exact(2) = los_probability_single(ds.room, l, 1, pt, dense.rho, dense.r_block) - both;
        exact(0) = 1 - exact(1) - exact(2) - both;
        const double jz = std::abs(mean - exact.dot(r)) / se;
        worst_joint_z = std::max(worst_joint_z, jz);
        joint_ok = joint_ok && jz <= 3;
    }
    Outcome out{ok && joint_ok,
                fmt("analytic vs enumeration over 200 points: max rel. error %.1e; Monte-Carlo (1e5 fields) vs "
                    "independence: worst |z| = %.2f; vs exact union-area joint law: worst |z| = %.2f",
                    worst, worst_z, worst_joint_z)};
    out.explained = worst <= 1e-9 && joint_ok;
    return out;
}

// 5. View factors against quadrature.
Outcome view_factor_quadrature() {
    const Scene scene = Scene::build(ScenarioConfig{});
    const RoomSpec& room = scene.room;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ux(20, 40), uy(30.1, 40), uz(0, 2.8), uw(room.wall_min(), room.wall_max());
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
        WindowLayout l(1);
        l.x(0) = uw(rng);
        const Eigen::Vector3d p(ux(rng), uy(rng), uz(rng));
        const double quad = oracle::horizontal_to_wall_quadrature(
            p, room.facade_y(), l.x(0) - room.window_width / 2, l.x(0) + room.window_width / 2,
            room.window_center_height - room.window_height / 2, room.window_center_height + room.window_height / 2);
        worst = std::max(worst, std::abs(window_view_factor(p, room, l, 0) - quad));
    }
    return {worst <= 1e-6, fmt("10 random point/window configurations, max |closed form - quadrature| = %.1e", worst)};
}

// 6. Toy-mode optimiser sanity.
Outcome toy_sanity() {
    const Scene scene = Scene::build(ScenarioConfig{});
    const SearchSpace space = SearchSpace::from_scene(scene);
    const SphereObjective sphere = SphereObjective::for_space(space);
    int ga_hits = 0, sa_hits = 0;
    double ga_mean = 0, sa_mean = 0, rs_mean = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        HeuristicConfig c;  // population 50, crossover 0.7, mutation 0.3, elite 2, cooling 0.98, T 100 -> 5
        c.generations = 1500;
        c.seed = seed;
        const double ga = ga_run(sphere, space, c, {false}).final_objective();
        const double sa = saga_run(sphere, space, c, {false}).final_objective();
        const double rs = random_search(sphere, space, heuristic_evaluation_budget(c), seed, {false}).final_objective();
        ga_hits += ga >= -1e-2;
        sa_hits += sa >= -1e-2;
        ga_mean += ga / 10;
        sa_mean += sa / 10;
        rs_mean += rs / 10;
    }
    const bool ok = ga_hits >= 9 && sa_hits >= 9 && rs_mean < ga_mean && rs_mean < sa_mean;
    return {ok, fmt("within 1e-2 of the optimum: GA %g/10, SAGA %g/10; mean final GA %.2e, SAGA %.2e", ga_hits, sa_hits,
                    ga_mean, sa_mean) +
                    fmt(", random %.2e", rs_mean)};
}

std::map<std::string, double> mean_by(const std::vector<RunRecord>& records,
                                      const std::function<double(const RunRecord&)>& value,
                                      const std::function<std::string(const RunRecord&)>& key) {
    std::map<std::string, double> sum, count;
    for (const RunRecord& r : records) {
        sum[key(r)] += value(r);
        count[key(r)] += 1;
    }
    for (auto& [k, v] : sum) v /= count[k];
    return sum;
}

// 7. GA, SAGA and random search on the reference scenario.
Outcome comparative_ordering() {
    ExperimentPlan p;
    p.methods = {Method::Random, Method::Ga, Method::Saga};
    p.repeats = 10;
    p.output = scratch("ordering");
    p.export_maps = false;
    p.threads = threads();
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<RunRecord> records = run_plan(p);
    const double minutes = seconds_since(t0) / 60;
    bool all_ok = true;
    for (const RunRecord& r : records) all_ok = all_ok && r.ok;
    const auto m = mean_by(records, [](const RunRecord& r) { return r.final_phi_o; },
                           [](const RunRecord& r) { return r.method; });
    fs::remove_all(p.output);
    const double ga = m.at("ga"), sa = m.at("saga"), rs = m.at("random");
    const bool ok = all_ok && sa >= ga && ga > rs && sa > 6.0;
    return {ok, fmt("mean final phi_o over 10 seeds: SAGA %.2f, GA %.2f, random %.2f (UDW 6); ", sa, ga, rs) +
                    fmt("%.1f min on %g thread(s)", minutes, threads())};
}

// 8. Daylight tendency of the greedy-stub LMWO across eta.
Outcome daylight_tendency() {
    ExperimentPlan p;
    p.methods = {Method::Lmwo};
    p.repeats = 5;
    p.sweep = SweepAxis{"eta", {1, 5, 11}};
    p.output = scratch("eta");
    p.export_maps = false;
    p.threads = threads();
    const std::vector<RunRecord> records = run_plan(p);
    bool all_ok = true;
    for (const RunRecord& r : records) all_ok = all_ok && r.ok;
    const auto ratio = mean_by(records, [](const RunRecord& r) { return r.final_phi_d / r.final_phi_w; },
                               [](const RunRecord& r) { return fmt("%g", r.axis_value); });
    fs::remove_all(p.output);
    const double r1 = ratio.at("1"), r5 = ratio.at("5"), r11 = ratio.at("11");
    return {all_ok && r1 <= r5 && r5 <= r11,
            fmt("mean phi_d/phi_w over stub seeds 1-5: eta=1 %.5f, eta=5 %.5f, eta=11 %.5f", r1, r5, r11)};
}

// 9. LLM loop contracts with scripted stubs.
Outcome llm_contracts() {
    using llm::ScriptedStubClient;
    const Evaluator ev(Scene::build(ScenarioConfig{}));
    const Scene& scene = ev.scene();
    const SearchSpace space = SearchSpace::from_scene(scene);
    std::vector<std::pair<double, std::string>> pool;
    std::mt19937_64 rng(77);
    for (int k = 0; k < 300; ++k) {
        const std::string text = llm::layout_json(decode(repair(uniform_sample(space, rng), space)));
        const PerformanceReport r = ev.evaluate(*llm::parse_solution(text, scene).layout);
        if (r.feasible) pool.emplace_back(r.phi_o, text);
    }
    std::sort(pool.begin(), pool.end());
    const std::string udw = llm::layout_json(udw_layout(scene.room));
    std::vector<std::string> failures;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond) failures.push_back(what);
    };

    {  // stall rule: UDW forever -> init + 5 steps
        ScriptedStubClient stub({{"any", udw, true}});
        const auto r = llm::lmwo_run(ev, stub, {}, {false});
        expect(r.trace.records.size() == 6, "stall-5");
    }
    {  // cap rule: ever-improving answers -> init + 10 steps
        std::vector<ScriptedStubClient::Entry> script{{"init", udw, false}};
        double last = 6.0;
        for (const auto& [phi, text] : pool)
            if (phi > last + 1e-6) {
                script.push_back({"feedback", text, false});
                last = phi;
            }
        expect(script.size() >= 12, "enough improving layouts");
        ScriptedStubClient stub(script);
        const auto r = llm::lmwo_run(ev, stub, {}, {false});
        expect(r.trace.records.size() == 11, "cap-10");
    }
    {  // threshold path: phi_o <= 5 rejected, retry accepted
        expect(pool.front().first <= 5.0, "a layout below the threshold exists");
        ScriptedStubClient stub({{"init", pool.front().second, false}, {"init", pool.back().second, false},
                                 {"feedback", udw, true}});
        const auto r = llm::lmwo_run(ev, stub, {}, {false});
        expect(r.exchanges.size() > 1 && r.exchanges[0].outcome == "below-threshold" && r.exchanges[1].outcome == "ok",
               "threshold reject/retry");
        expect(!r.init_below_threshold, "threshold accepted on retry");
    }
    {  // LHS injection jump at the update boundary
        const std::string init = R"({"algorithm":"ga","params":{"population":10},"population":[]})";
        llm::LhsConfig cfg;
        cfg.generations_per_update = 5;
        cfg.max_updates = 1;
        cfg.defaults.seed = 4;
        ScriptedStubClient probe({{"init", init, false}, {"feedback", R"({"population":[)" + udw + "]}", false}});
        const double unaided = llm::lhs_run(ev, probe, cfg, {false}).trace.records.at(5).best_objective;
        // A short SAGA run supplies a layout the unaided GA has not reached.
        HeuristicConfig sc;
        sc.generations = 60;
        const OptimizerTrace strong = saga_run(SimulatorObjective(ev, PenaltyMode::Soft), space, sc, {false});
        const std::string top = llm::layout_json(strong.final_record().best_layout);
        const double top_phi = ev.evaluate(*llm::parse_solution(top, scene).layout).phi_o;
        expect(top_phi > unaided, "injected individual pre-verified superior");
        ScriptedStubClient stub({{"init", init, false}, {"feedback", R"({"population":[)" + top + "]}", false}});
        const auto r = llm::lhs_run(ev, stub, cfg, {false});
        const auto& rec = r.trace.records;
        bool jump = rec.size() == 7 && rec[6].note == "llm-update" &&
                    std::abs(rec[6].best_objective - top_phi) <= 1e-9 * top_phi;
        for (std::size_t k = 0; jump && k < 6; ++k) jump = rec[k].best_objective < top_phi;
        expect(jump, "LHS jump at update");
    }
    std::string detail = "stall-5, cap-10, threshold retry and LHS injection jump checked with scripted stubs (no network)";
    for (const std::string& f : failures) detail += "; failed: " + f;
    return {failures.empty(), detail};
}

// 10. Byte-identical traces across repeated stub-mode sweeps.
Outcome reproducibility() {
    auto run = [](const fs::path& out) {
        ExperimentPlan p;
        p.methods = {Method::Random, Method::Ga, Method::Saga, Method::Lmwo, Method::Lhs};
        p.repeats = 2;
        p.sweep = SweepAxis{"eta", {1, 5, 11}};
        p.heuristic.population = 12;
        p.heuristic.generations = 10;
        p.lmwo.max_steps = 3;
        p.lhs.generations_per_update = 3;
        p.lhs.max_updates = 2;
        p.output = out;
        p.threads = 2;
        p.export_maps = false;
        run_plan(p);
    };
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    run(a);
    run(b);
    int compared = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        const std::string name = e.path().filename().string();
        if (name != "trace.csv" && name != "summary.csv" && name != "exchanges.jsonl") continue;
        const fs::path other = b / fs::relative(e.path(), a);
        std::ifstream ia(e.path(), std::ios::binary), ib(other, std::ios::binary);
        std::stringstream sa, sb;
        sa << ia.rdbuf();
        sb << ib.rdbuf();
        ++compared;
        differing += sa.str() != sb.str();
    }
    fs::remove_all(a);
    fs::remove_all(b);
    return {compared >= 30 && differing == 0,
            fmt("%g trace/summary/exchange files compared across two sweeps, %g differ", compared, differing)};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments pick criteria by number; none runs all ten.
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"baseline identity", baseline_identity},
        {"array-factor coherence", array_coherence},
        {"LoS oracle agreement", los_oracle},
        {"rate expectation oracle", rate_oracle},
        {"view-factor quadrature", view_factor_quadrature},
        {"optimiser sanity on toy mode", toy_sanity},
        {"comparative ordering", comparative_ordering},
        {"daylight-factor tendency", daylight_tendency},
        {"LLM-loop contracts", llm_contracts},
        {"reproducibility", reproducibility},
    };
    int unexpected = 0, passed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const bool documented = !o.pass && o.explained && kDocumentedFailures.count(id);
        std::printf("criterion %2d %s  %s: %s [%.1f s]%s\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    o.detail.c_str(), seconds_since(t0), documented ? " (documented)" : "");
        std::fflush(stdout);
        passed += o.pass;
        unexpected += !o.pass && !documented;
    }
    std::printf("%d/%zu criteria pass\n", passed, only.empty() ? criteria.size() : only.size());
    return unexpected == 0 ? 0 : 1;
}
