#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fenestra/harness.hpp"

using namespace fenestra;
namespace fs = std::filesystem;

namespace {

OptimizerTrace flat_trace(double final_value, int steps = 3) {
    OptimizerTrace t;
    for (int k = 0; k < steps; ++k) {
        TraceRecord r;
        r.step = k;
        r.best_objective = k + 1 == steps ? final_value : final_value - 1;
        r.phi_w = 2;
        r.phi_d = 1;
        r.feasible = true;
        t.records.push_back(r);
    }
    return t;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fenestra_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FENESTRA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("aggregate statistics") {
    std::vector<TraceSummaryInput> in{{"saga", "", 1, flat_trace(6)}, {"saga", "", 2, flat_trace(8)}};
    const std::vector<SummaryRow> rows = aggregate(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].runs == 2);
    CHECK(rows[0].mean == 7.0);
    CHECK(rows[0].median == 7.0);
    CHECK(rows[0].min == 6.0);
    CHECK(rows[0].max == 8.0);
    CHECK(rows[0].std == doctest::Approx(std::sqrt(2.0)));
    CHECK(rows[0].mean_ratio == doctest::Approx(0.5));

    std::vector<TraceSummaryInput> same{{"ga", "eta=1", 1, flat_trace(5)}, {"ga", "eta=1", 2, flat_trace(5)},
                                        {"ga", "eta=5", 1, flat_trace(9)}};
    const std::vector<SummaryRow> r2 = aggregate(same);
    REQUIRE(r2.size() == 2);
    CHECK(r2[0].cell == "eta=1");
    CHECK(r2[0].std == 0.0);
    CHECK(r2[1].runs == 1);
    CHECK(r2[1].std == 0.0);
    CHECK(steps_to_stall(flat_trace(5, 4)) == 3);
    CHECK_THROWS(aggregate({}));
    CHECK(summary_csv(rows).rfind("cell,method,runs,", 0) == 0);
}

TEST_CASE("sweep axes") {
    const ScenarioConfig base;
    CHECK(apply_axis(base, "eta", 11).eta == 11);
    CHECK(apply_axis(base, "windows", 3).n_windows == 3);
    CHECK(apply_axis(base, "ris_units", 100).u_units == 100);
    CHECK(apply_axis(base, "ris_units", 110).u_units == 100);
    CHECK(apply_axis(base, "ris_units", 115).u_units == 121);
    CHECK_THROWS_AS(apply_axis(base, "colour", 1), ConfigError);
    CHECK(axis_label("eta", 5) == "eta=5");
    CHECK(axis_label("eta", 0.5) == "eta=0.5");
}

TEST_CASE("plan identity ignores output location and threads") {
    ExperimentPlan a;
    ExperimentPlan b = a;
    b.output = "/elsewhere";
    b.threads = 8;
    CHECK(a.hash() == b.hash());
    b.first_seed = 2;
    CHECK(a.hash() != b.hash());
    a.repeats = 3;
    a.first_seed = 5;
    CHECK(a.seeds() == std::vector<std::uint64_t>{5, 6, 7});

    CHECK(LlmSource::parse("greedy").kind == "greedy");
    CHECK(LlmSource::parse("script:/tmp/x.json").script == "/tmp/x.json");
    CHECK_THROWS_AS(LlmSource::parse("oracle"), ConfigError);
    CHECK(method_from_string("SAGA") == Method::Saga);
    CHECK_THROWS_AS(method_from_string("pso"), ConfigError);

    ExperimentPlan toy;
    toy.toy = true;
    toy.methods = {Method::Lmwo};
    CHECK_THROWS_AS(toy.validate(), ConfigError);
}

TEST_CASE("run_plan writes the documented tree") {
    ExperimentPlan p;
    p.methods = {Method::Random, Method::Saga, Method::Lmwo};
    p.repeats = 2;
    p.heuristic.population = 10;
    p.heuristic.generations = 5;
    p.lmwo.max_steps = 2;
    p.output = scratch("plan");
    p.threads = 2;
    const std::vector<RunRecord> records = run_plan(p);
    REQUIRE(records.size() == 6);
    for (const RunRecord& r : records) {
        CHECK(r.ok);
        CHECK(r.plan_hash == p.hash());
        CHECK(fs::exists(p.output / r.run_dir / r.trace_path));
        CHECK(fs::exists(p.output / r.run_dir / r.report_path));
        CHECK(fs::exists(p.output / r.run_dir / "rate_map.csv"));
        CHECK(fs::exists(p.output / r.run_dir / "illuminance_heatmap.png"));
    }
    CHECK(fs::exists(p.output / "lmwo" / "seed_1" / "exchanges.jsonl"));
    for (const char* f : {"plan.json", "runs.jsonl", "summary.csv", "summary.txt", "convergence.png"})
        CHECK(fs::exists(p.output / f));
    const nlohmann::json report = nlohmann::json::parse(slurp(p.output / "saga" / "seed_2" / "report.json"));
    CHECK(report.contains("daylight_to_wireless_ratio"));

    // Re-exporting from the CSVs reproduces the summary.
    const fs::path again = scratch("plan_export");
    const ExportResult ex = export_results(p.output, again);
    CHECK(ex.rows.size() == 3);
    CHECK(slurp(again / "summary.csv") == slurp(p.output / "summary.csv"));

    const MapCsv m = read_map_csv(p.output / "saga" / "seed_1" / "rate_map.csv", "gamma_bps");
    CHECK(m.rows == 10);
    CHECK(m.cols == 20);
    CHECK(m.values.size() == 200);
    fs::remove_all(p.output);
    fs::remove_all(again);
}

TEST_CASE("failed runs are recorded, not thrown") {
    const fs::path script = fs::temp_directory_path() / "fenestra_empty_script.json";
    std::ofstream(script) << "[]";
    ExperimentPlan p;
    p.methods = {Method::Lmwo};
    p.repeats = 1;
    p.llm = LlmSource::parse("script:" + script.string());
    p.output = scratch("failing");
    const std::vector<RunRecord> records = run_plan(p);
    REQUIRE(records.size() == 1);
    CHECK_FALSE(records[0].ok);
    CHECK(fs::exists(p.output / records[0].run_dir / "error.txt"));
    fs::remove_all(p.output);
    fs::remove(script);
}

TEST_CASE("command-line exit codes") {
    const fs::path out = scratch("cli");
    CHECK(run_cli("baseline") == 0);
    CHECK(run_cli("frobnicate") != 0);
    CHECK(run_cli("optimize --method pso --out " + out.string()) == 2);
    CHECK(run_cli("sweep --axis colour --values 1 --out " + out.string()) == 2);
    const fs::path bad = fs::temp_directory_path() / "fenestra_bad_scenario.json";
    std::ofstream(bad) << R"({"eta": -1})";
    CHECK(run_cli("baseline --scenario " + bad.string()) == 2);
    const fs::path empty = fs::temp_directory_path() / "fenestra_cli_script.json";
    std::ofstream(empty) << "[]";
    CHECK(run_cli("optimize --method lmwo --repeats 1 --llm script:" + empty.string() + " --out " + out.string()) == 3);
    CHECK(run_cli("optimize --toy --method ga --repeats 1 --generations 5 --out " + out.string()) == 0);
    fs::remove_all(out);
    fs::remove(bad);
    fs::remove(empty);
}
