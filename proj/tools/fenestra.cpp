// Command-line front end: evaluate, baseline, optimize, sweep, export.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "fenestra/harness.hpp"
#include "fenestra/llm/parse.hpp"

namespace fs = std::filesystem;
using namespace fenestra;

namespace {

struct Common {
    std::string scenario;
    std::string los;
};

ScenarioConfig load_config(const Common& c) {
    ScenarioConfig s = c.scenario.empty() ? ScenarioConfig{} : load_scenario(c.scenario);
    if (!c.los.empty()) s.los_mode = los_mode_from_string(c.los);
    s.validate();
    return s;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

void print_report(const Scene& scene, PerformanceReport& report, const std::string& out_dir) {
    if (!out_dir.empty()) export_report(scene, report, out_dir);
    std::cout << report_to_json(report).dump(2) << "\n";
    if (report.rates) {
        std::cout << "\nsum rate\n" << report.rate_heatmap.grid << "\n\nilluminance\n" << report.light_heatmap.grid << "\n";
    }
}

struct PlanOptions {
    std::string methods = "saga";
    int repeats = 10;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string llm = "greedy";
    std::string model;
    std::string timing = "off";
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    int population = 50;
    int generations = 1500;
    int stagnation = 200;
    int stall = 5;
    int max_steps = 10;
    int init_retries = 5;
    int k = 100;
    int updates = 10;
    bool toy = false;
    bool no_maps = false;
};

void add_plan_options(CLI::App* cmd, PlanOptions& o, bool sweep) {
    cmd->add_option(sweep ? "--methods" : "--method", o.methods, "random, ga, saga, lmwo, lhs (comma separated)");
    cmd->add_option("--repeats", o.repeats, "runs per method; seeds are seed .. seed+repeats-1")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "first seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--llm", o.llm, "greedy | live | script:<file>");
    cmd->add_option("--model", o.model, "model name for --llm live");
    cmd->add_option("--timing", o.timing, "on records wall-clock columns; off keeps outputs byte-stable")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--threads", o.threads, "parallel runs")->check(CLI::PositiveNumber);
    cmd->add_option("--population", o.population, "GA/SAGA population");
    cmd->add_option("--generations", o.generations, "GA/SAGA generation budget");
    cmd->add_option("--stagnation", o.stagnation, "generations without improvement before stopping (0 disables)");
    cmd->add_option("--stall", o.stall, "LMWO stall window");
    cmd->add_option("--max-steps", o.max_steps, "LMWO optimisation steps");
    cmd->add_option("--init-retries", o.init_retries, "LLM initialisation retries");
    cmd->add_option("--k", o.k, "LHS generations between LLM updates");
    cmd->add_option("--updates", o.updates, "LHS LLM updates");
    cmd->add_flag("--toy", o.toy, "optimise the sphere test function instead of the simulator");
    cmd->add_flag("--no-maps", o.no_maps, "skip map CSV and heatmap export");
}

ExperimentPlan make_plan(const Common& c, const PlanOptions& o) {
    ExperimentPlan p;
    p.scenario = load_config(c);
    p.methods.clear();
    for (const std::string& m : split(o.methods)) p.methods.push_back(method_from_string(m));
    p.repeats = o.repeats;
    p.first_seed = o.seed;
    p.output = o.out;
    p.llm = LlmSource::parse(o.llm);
    p.llm.model = o.model;
    p.record_time = o.timing == "on";
    p.threads = o.threads;
    p.toy = o.toy;
    p.export_maps = !o.no_maps;
    p.heuristic.population = o.population;
    p.heuristic.generations = o.generations;
    p.heuristic.stagnation = o.stagnation;
    p.lmwo.init_threshold = p.scenario.t_i_init;
    p.lmwo.stall_window = o.stall;
    p.lmwo.max_steps = o.max_steps;
    p.lmwo.max_init_retries = o.init_retries;
    p.lhs.generations_per_update = o.k;
    p.lhs.max_updates = o.updates;
    p.lhs.max_init_retries = o.init_retries;
    return p;
}

int report_runs(const ExperimentPlan& plan, const std::vector<RunRecord>& records) {
    int failed = 0;
    for (const RunRecord& r : records)
        if (!r.ok) {
            ++failed;
            std::cerr << "run " << r.run_dir << " failed: " << r.error << "\n";
        }
    std::ifstream summary(plan.output / "summary.txt");
    if (summary) std::cout << summary.rdbuf();
    std::cout << records.size() - static_cast<std::size_t>(failed) << "/" << records.size() << " runs succeeded; output in "
              << plan.output.string() << "\n";
    return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Window placement and RIS beam steering simulator and optimisers"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--scenario", common.scenario, "scenario JSON (defaults when omitted)")->check(CLI::ExistingFile);
        cmd->add_option("--los", common.los, "analytic | monte-carlo (overrides the scenario)");
    };

    std::string layout_file, report_out;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a layout file");
    add_common(evaluate);
    evaluate->add_option("--layout", layout_file, "layout JSON {\"windows\":[{\"x\",\"theta_deg\",\"psi_deg\"}]}")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--out", report_out, "directory for report.json, map CSVs and heatmaps");

    CLI::App* baseline = app.add_subcommand("baseline", "report of the evenly spaced reference layout");
    add_common(baseline);
    baseline->add_option("--out", report_out, "directory for report.json, map CSVs and heatmaps");

    PlanOptions opt;
    CLI::App* optimize = app.add_subcommand("optimize", "run one or more methods over repeated seeds");
    add_common(optimize);
    add_plan_options(optimize, opt, false);

    std::string axis, values;
    CLI::App* sweep = app.add_subcommand("sweep", "repeat methods across values of one scenario axis");
    add_common(sweep);
    add_plan_options(sweep, opt, true);
    sweep->add_option("--axis", axis, "windows | ris_units | eta")->required();
    sweep->add_option("--values", values, "comma separated values")->required();

    std::string export_in, export_out;
    CLI::App* exporter = app.add_subcommand("export", "summaries, convergence plots and heatmaps from run directories");
    exporter->add_option("--in", export_in, "root of run directories")->required()->check(CLI::ExistingDirectory);
    exporter->add_option("--out", export_out, "destination (defaults to --in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*evaluate || *baseline) {
            const ScenarioConfig cfg = load_config(common);
            const Evaluator ev(Scene::build(cfg), cfg.los_mode);
            WindowLayout layout = udw_layout(ev.scene().room);
            if (*evaluate) {
                std::ifstream in(layout_file);
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(in);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ConfigError(layout_file + ": " + e.what());
                }
                const llm::ParseOutcome p = llm::layout_from_json(j, ev.scene(), false);
                if (!p.ok()) throw ConfigError(layout_file + ": " + p.message);
                layout = *p.layout;
            }
            PerformanceReport report = ev.evaluate(layout);
            print_report(ev.scene(), report, report_out);
            return 0;
        }
        if (*optimize || *sweep) {
            ExperimentPlan plan = make_plan(common, opt);
            if (*sweep) {
                SweepAxis a;
                a.name = axis;
                for (const std::string& v : split(values)) {
                    try {
                        a.values.push_back(std::stod(v));
                    } catch (const std::exception&) {
                        throw ConfigError("sweep value '" + v + "' is not a number");
                    }
                }
                plan.sweep = a;
            }
            return report_runs(plan, run_plan(plan));
        }
        if (*exporter) {
            const ExportResult r = export_results(export_in, export_out.empty() ? export_in : export_out);
            std::cout << summary_table(r.rows);
            for (const fs::path& f : r.files) std::cout << "wrote " << f.string() << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
