#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fenestra/heuristics.hpp"
#include "fenestra/llm/loops.hpp"
#include "fenestra/objective.hpp"
#include "fenestra/scenario.hpp"

namespace fenestra {

enum class Method { Random, Ga, Saga, Lmwo, Lhs };

std::string to_string(Method m);
Method method_from_string(const std::string& name);
bool is_llm_method(Method m);

/// Where LLM methods get their responses: the built-in greedy stub, a
/// scripted stub file, or a live endpoint configured from the environment.
struct LlmSource {
    std::string kind = "greedy";  // greedy | script | live
    std::filesystem::path script;
    std::string model;  // overrides FENESTRA_LLM_MODEL for live clients

    /// "greedy", "live" or "script:<path>".
    static LlmSource parse(const std::string& spec);
    std::string describe() const;
};

struct SweepAxis {
    std::string name;  // windows | ris_units | eta
    std::vector<double> values;
};

/// Scenario with one axis value applied. RIS units round to the nearest
/// perfect square so the board stays square.
ScenarioConfig apply_axis(ScenarioConfig config, const std::string& axis, double value);
/// Directory label of an axis value, e.g. "eta=5".
std::string axis_label(const std::string& axis, double value);

struct ExperimentPlan {
    ScenarioConfig scenario;
    std::vector<Method> methods{Method::Saga};
    int repeats = 10;
    std::uint64_t first_seed = 1;  // seeds are first_seed .. first_seed + repeats - 1
    std::optional<SweepAxis> sweep;
    std::filesystem::path output = "out";
    HeuristicConfig heuristic;
    llm::LmwoConfig lmwo;
    llm::LhsConfig lhs;
    LlmSource llm;
    bool toy = false;         // sphere objective instead of the simulator
    bool record_time = false;  // elapsed/latency columns stay 0 when off
    bool export_maps = true;
    int threads = 1;

    void validate() const;
    std::vector<std::uint64_t> seeds() const;
    nlohmann::json to_json() const;
    std::uint64_t hash() const;
};

struct RunRecord {
    std::uint64_t plan_hash = 0;
    std::string method;
    std::string axis;  // empty without a sweep
    double axis_value = 0.0;
    std::uint64_t seed = 0;
    std::string run_dir;  // relative to the plan output
    std::string trace_path;
    std::string report_path;
    double wall_ms = 0.0;
    bool ok = false;
    std::string error;
    double final_phi_o = 0.0;
    double final_phi_w = 0.0;
    double final_phi_d = 0.0;
    long evaluations = 0;
};

nlohmann::json record_to_json(const RunRecord& r);

/// Runs one (scenario, method, seed) cell into `run_dir`, which is created.
/// Errors are captured in the record rather than thrown.
RunRecord run_cell(const ExperimentPlan& plan, const Evaluator& evaluator, Method method, std::uint64_t seed,
                   const std::filesystem::path& run_dir);

/// Runs every cell on a bounded worker pool, writes runs.jsonl, then
/// exports the summary and plots from the written CSVs.
std::vector<RunRecord> run_plan(const ExperimentPlan& plan);

/// Final value of one trace plus grouping keys.
struct TraceSummaryInput {
    std::string method;
    std::string cell;  // axis label or empty
    std::uint64_t seed = 0;
    OptimizerTrace trace;
};

struct SummaryRow {
    std::string cell;
    std::string method;
    int runs = 0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single run
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    double mean_steps_to_stall = 0.0;
    double mean_phi_w = 0.0;
    double mean_phi_d = 0.0;
    double mean_ratio = 0.0;  // phi_d / phi_w of the final solutions
};

/// Step at which the best-so-far value last improved.
int steps_to_stall(const OptimizerTrace& trace);

/// One row per (cell, method), ordered by cell then method. Throws on empty
/// input.
std::vector<SummaryRow> aggregate(const std::vector<TraceSummaryInput>& traces);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_table(const std::vector<SummaryRow>& rows);

/// Collects <cell>/<method>/seed_<s>/trace.csv files below `root`.
std::vector<TraceSummaryInput> collect_traces(const std::filesystem::path& root);

struct ExportResult {
    std::vector<SummaryRow> rows;
    std::vector<std::filesystem::path> files;
};

/// Writes summary.csv, summary.txt, convergence plots per cell and heatmap
/// PNGs for every exported map CSV under `root` into `out`.
ExportResult export_results(const std::filesystem::path& root, const std::filesystem::path& out);

void write_rate_csv(const Scene& scene, const SumRateMap& map, const std::filesystem::path& path);
void write_light_csv(const Scene& scene, const IlluminanceMap& map, const std::filesystem::path& path);

/// Reads a map CSV back into (rows, cols, values of `column`).
struct MapCsv {
    int rows = 0;
    int cols = 0;
    Eigen::VectorXd values;
};
MapCsv read_map_csv(const std::filesystem::path& path, const std::string& column);

/// Writes report.json plus map CSVs and heatmap PNGs into `dir` and records
/// the paths in the report.
void export_report(const Scene& scene, PerformanceReport& report, const std::filesystem::path& dir,
                   const nlohmann::json& extra = {});

}  // namespace fenestra
