#include "fenestra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "fenestra/plot.hpp"

namespace fenestra {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Method m) {
    switch (m) {
        case Method::Random: return "random";
        case Method::Ga: return "ga";
        case Method::Saga: return "saga";
        case Method::Lmwo: return "lmwo";
        case Method::Lhs: return "lhs";
    }
    return "random";
}

Method method_from_string(const std::string& name) {
    std::string lower = name;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (Method m : {Method::Random, Method::Ga, Method::Saga, Method::Lmwo, Method::Lhs})
        if (to_string(m) == lower) return m;
    throw ConfigError("unknown method '" + name + "' (expected random, ga, saga, lmwo or lhs)");
}

bool is_llm_method(Method m) { return m == Method::Lmwo || m == Method::Lhs; }

LlmSource LlmSource::parse(const std::string& spec) {
    LlmSource s;
    if (spec == "greedy" || spec == "live") {
        s.kind = spec;
    } else if (spec.rfind("script:", 0) == 0 && spec.size() > 7) {
        s.kind = "script";
        s.script = spec.substr(7);
    } else {
        throw ConfigError("LLM source must be greedy, live or script:<file>, got '" + spec + "'");
    }
    return s;
}

std::string LlmSource::describe() const { return kind == "script" ? "script:" + script.string() : kind; }

ScenarioConfig apply_axis(ScenarioConfig c, const std::string& axis, double value) {
    if (axis == "windows") {
        if (value < 1 || value != std::floor(value)) throw ConfigError("window count must be a positive integer");
        c.n_windows = static_cast<int>(value);
    } else if (axis == "ris_units") {
        if (value < 1) throw ConfigError("RIS unit count must be positive");
        const double side = std::max(1.0, std::round(std::sqrt(value)));
        c.u_units = static_cast<int>(side * side);
    } else if (axis == "eta") {
        c.eta = value;
    } else {
        throw ConfigError("unknown sweep axis '" + axis + "' (expected windows, ris_units or eta)");
    }
    c.validate();
    return c;
}

std::string axis_label(const std::string& axis, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%g", axis.c_str(), value);
    return buf;
}

void ExperimentPlan::validate() const {
    scenario.validate();
    heuristic.validate();
    if (methods.empty()) throw ConfigError("plan needs at least one method");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (sweep) {
        if (sweep->values.empty()) throw ConfigError("sweep needs at least one value");
        for (double v : sweep->values) apply_axis(scenario, sweep->name, v);
    }
    if (toy)
        for (Method m : methods)
            if (is_llm_method(m)) throw ConfigError("toy mode supports random, ga and saga only");
    if (llm.kind == "script" && !fs::exists(llm.script))
        throw ConfigError("stub script not found: " + llm.script.string());
}

std::vector<std::uint64_t> ExperimentPlan::seeds() const {
    std::vector<std::uint64_t> s;
    for (int k = 0; k < repeats; ++k) s.push_back(first_seed + static_cast<std::uint64_t>(k));
    return s;
}

json ExperimentPlan::to_json() const {
    json m = json::array();
    for (Method x : methods) m.push_back(to_string(x));
    json j = {{"scenario", scenario},
              {"methods", m},
              {"repeats", repeats},
              {"first_seed", first_seed},
              {"heuristic", heuristic},
              {"lmwo",
               {{"init_threshold", lmwo.init_threshold},
                {"max_init_retries", lmwo.max_init_retries},
                {"stall_window", lmwo.stall_window},
                {"max_steps", lmwo.max_steps},
                {"history", lmwo.history}}},
              {"lhs",
               {{"generations_per_update", lhs.generations_per_update},
                {"max_updates", lhs.max_updates},
                {"max_init_retries", lhs.max_init_retries},
                {"pool", lhs.pool}}},
              {"llm", llm.describe()},
              {"toy", toy}};
    j["sweep"] = sweep ? json{{"axis", sweep->name}, {"values", sweep->values}} : json(nullptr);
    return j;
}

std::uint64_t ExperimentPlan::hash() const { return fnv1a64(to_json().dump()); }

json record_to_json(const RunRecord& r) {
    json j = {{"plan_hash", r.plan_hash},   {"method", r.method},         {"seed", r.seed},
              {"run_dir", r.run_dir},       {"trace", r.trace_path},      {"report", r.report_path},
              {"wall_ms", r.wall_ms},       {"ok", r.ok},                 {"error", r.error},
              {"evaluations", r.evaluations}};
    if (!r.axis.empty()) {
        j["axis"] = r.axis;
        j["axis_value"] = r.axis_value;
    }
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    j["final_phi_o"] = num(r.final_phi_o);
    j["final_phi_w"] = num(r.final_phi_w);
    j["final_phi_d"] = num(r.final_phi_d);
    return j;
}

namespace {

std::string fmt_g(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::unique_ptr<llm::ChatClient> make_client(const LlmSource& src, const Evaluator& ev, std::uint64_t seed) {
    if (src.kind == "greedy") return std::make_unique<llm::GreedyStubClient>(ev, seed);
    if (src.kind == "script")
        return std::make_unique<llm::ScriptedStubClient>(llm::ScriptedStubClient::load_script(src.script));
    llm::ClientSettings s = llm::ClientSettings::from_environment();
    if (!src.model.empty()) s.model = src.model;
    return std::make_unique<llm::HttpChatClient>(s);
}

}  // namespace

void write_rate_csv(const Scene& scene, const SumRateMap& map, const fs::path& path) {
    std::string out = "point_index,x,y,gamma_bps\n";
    for (Eigen::Index m = 0; m < scene.grid.size(); ++m)
        out += std::to_string(m) + ',' + fmt_g(scene.grid.points(0, m)) + ',' + fmt_g(scene.grid.points(1, m)) + ',' +
               fmt_g(map.gamma(m)) + '\n';
    write_text(path, out);
}

void write_light_csv(const Scene& scene, const IlluminanceMap& map, const fs::path& path) {
    std::string out = "point_index,x,y,I_total,I_sky_dir,I_sky_ind,I_sun_dir,I_sun_ind\n";
    for (Eigen::Index m = 0; m < scene.grid.size(); ++m)
        out += std::to_string(m) + ',' + fmt_g(scene.grid.points(0, m)) + ',' + fmt_g(scene.grid.points(1, m)) + ',' +
               fmt_g(map.total(m)) + ',' + fmt_g(map.sky_direct(m)) + ',' + fmt_g(map.sky_indirect(m)) + ',' +
               fmt_g(map.sun_direct(m)) + ',' + fmt_g(map.sun_indirect(m)) + '\n';
    write_text(path, out);
}

MapCsv read_map_csv(const fs::path& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) header.push_back(c);
    }
    const auto col = std::find(header.begin(), header.end(), column);
    if (col == header.end() || header.size() < 3) throw std::runtime_error(path.string() + ": no column " + column);
    const auto idx = static_cast<std::size_t>(col - header.begin());
    std::vector<double> values;
    std::set<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (f.size() != header.size()) throw std::runtime_error(path.string() + ": malformed row");
        xs.insert(std::stod(f[1]));
        ys.insert(std::stod(f[2]));
        values.push_back(std::stod(f[idx]));
    }
    MapCsv m;
    m.cols = static_cast<int>(xs.size());
    m.rows = static_cast<int>(ys.size());
    if (static_cast<std::size_t>(m.rows * m.cols) != values.size())
        throw std::runtime_error(path.string() + ": points do not form a lattice");
    m.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return m;
}

void export_report(const Scene& scene, PerformanceReport& report, const fs::path& dir, const json& extra) {
    fs::create_directories(dir);
    if (report.rates) {
        write_rate_csv(scene, *report.rates, dir / "rate_map.csv");
        write_png(render_heatmap_image(report.rates->gamma, scene.grid.rows, scene.grid.cols), dir / "rate_heatmap.png");
        report.rate_csv_path = "rate_map.csv";
        report.rate_image_path = "rate_heatmap.png";
    }
    if (report.light) {
        write_light_csv(scene, *report.light, dir / "illuminance_map.csv");
        write_png(render_heatmap_image(report.light->total, scene.grid.rows, scene.grid.cols),
                  dir / "illuminance_heatmap.png");
        report.light_csv_path = "illuminance_map.csv";
        report.light_image_path = "illuminance_heatmap.png";
    }
    json j = report_to_json(report);
    if (extra.is_object())
        for (const auto& [k, v] : extra.items()) j[k] = v;
    write_text(dir / "report.json", j.dump(2) + "\n");
}

RunRecord run_cell(const ExperimentPlan& plan, const Evaluator& ev, Method method, std::uint64_t seed,
                   const fs::path& run_dir) {
    RunRecord rec;
    rec.plan_hash = plan.hash();
    rec.method = to_string(method);
    rec.seed = seed;
    const Stopwatch wall(plan.record_time);
    const RunOptions opts{plan.record_time};
    try {
        fs::create_directories(run_dir);
        const Scene& scene = ev.scene();
        const SearchSpace space = SearchSpace::from_scene(scene);
        HeuristicConfig hc = plan.heuristic;
        hc.seed = seed;

        std::unique_ptr<Objective> objective;
        if (plan.toy)
            objective = std::make_unique<SphereObjective>(SphereObjective::for_space(space));
        else
            objective = std::make_unique<SimulatorObjective>(ev, PenaltyMode::Soft);

        OptimizerTrace trace;
        json extra = {{"method", rec.method}, {"seed", seed}};
        switch (method) {
            case Method::Random:
                trace = random_search(*objective, space, heuristic_evaluation_budget(hc), seed, opts);
                break;
            case Method::Ga: trace = ga_run(*objective, space, hc, opts); break;
            case Method::Saga: trace = saga_run(*objective, space, hc, opts); break;
            case Method::Lmwo:
            case Method::Lhs: {
                auto client = make_client(plan.llm, ev, seed);
                llm::LlmRunResult res;
                if (method == Method::Lmwo) {
                    llm::LmwoConfig cfg = plan.lmwo;
                    if (client->supports_images()) cfg.image_dir = run_dir / "feedback";
                    res = llm::lmwo_run(ev, *client, cfg, opts);
                } else {
                    llm::LhsConfig cfg = plan.lhs;
                    cfg.defaults = hc;
                    if (client->supports_images()) cfg.image_dir = run_dir / "feedback";
                    res = llm::lhs_run(ev, *client, cfg, opts);
                }
                llm::write_exchanges_jsonl(res.exchanges, run_dir / "exchanges.jsonl");
                trace = std::move(res.trace);
                extra["llm"] = client->describe();
                extra["notes"] = res.notes;
                extra["init_below_threshold"] = res.init_below_threshold;
                extra["aborted"] = res.aborted;
                if (res.aborted) {
                    rec.error = "LLM transport failure: " + res.error;
                    extra["error"] = res.error;
                }
                break;
            }
        }
        trace.seed = seed;
        write_trace_csv(trace, run_dir / "trace.csv");
        rec.trace_path = "trace.csv";
        rec.evaluations = trace.evaluations;
        extra["evaluations"] = trace.evaluations;
        extra["trace_steps"] = trace.records.size();
        if (!trace.records.empty()) {
            const TraceRecord& last = trace.final_record();
            rec.final_phi_o = last.best_objective;
            rec.final_phi_w = last.phi_w;
            rec.final_phi_d = last.phi_d;
            extra["steps_to_stall"] = steps_to_stall(trace);
        }

        if (plan.toy) {
            json j = extra;
            j["best_objective"] = std::isfinite(rec.final_phi_o) ? json(rec.final_phi_o) : json(nullptr);
            write_text(run_dir / "report.json", j.dump(2) + "\n");
        } else if (!trace.records.empty() && trace.final_record().feasible) {
            PerformanceReport report = ev.evaluate(trace.final_record().best_layout);
            extra["daylight_to_wireless_ratio"] = report.phi_d / report.phi_w;
            if (plan.export_maps) {
                export_report(scene, report, run_dir, extra);
            } else {
                json j = report_to_json(report);
                for (const auto& [k, v] : extra.items()) j[k] = v;
                write_text(run_dir / "report.json", j.dump(2) + "\n");
            }
        } else {
            extra["feasible"] = false;
            write_text(run_dir / "report.json", extra.dump(2) + "\n");
        }
        rec.report_path = "report.json";
        rec.ok = rec.error.empty();
        if (!rec.ok) write_text(run_dir / "error.txt", rec.error + "\n");
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        std::error_code ec;
        fs::create_directories(run_dir, ec);
        std::ofstream(run_dir / "error.txt") << e.what() << '\n';
    }
    rec.wall_ms = wall.elapsed_ms();
    return rec;
}

std::vector<RunRecord> run_plan(const ExperimentPlan& plan) {
    plan.validate();
    fs::create_directories(plan.output);
    write_text(plan.output / "plan.json", plan.to_json().dump(2) + "\n");

    struct CellScene {
        std::string label;
        double value = 0.0;
        std::shared_ptr<Evaluator> evaluator;
    };
    std::vector<CellScene> scenes;
    if (plan.sweep) {
        for (double v : plan.sweep->values) {
            const ScenarioConfig c = apply_axis(plan.scenario, plan.sweep->name, v);
            scenes.push_back({axis_label(plan.sweep->name, v), v,
                              std::make_shared<Evaluator>(Scene::build(c), c.los_mode)});
        }
    } else {
        scenes.push_back({"", 0.0, std::make_shared<Evaluator>(Scene::build(plan.scenario), plan.scenario.los_mode)});
    }

    struct Job {
        std::size_t scene;
        Method method;
        std::uint64_t seed;
        fs::path dir;
        std::string rel;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < scenes.size(); ++s)
        for (Method m : plan.methods)
            for (std::uint64_t seed : plan.seeds()) {
                fs::path rel = scenes[s].label.empty() ? fs::path() : fs::path(scenes[s].label);
                rel = rel / to_string(m) / ("seed_" + std::to_string(seed));
                jobs.push_back({s, m, seed, plan.output / rel, rel.generic_string()});
            }

    std::vector<RunRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const Job& j = jobs[i];
            RunRecord r = run_cell(plan, *scenes[j.scene].evaluator, j.method, j.seed, j.dir);
            r.run_dir = j.rel;
            if (plan.sweep) {
                r.axis = plan.sweep->name;
                r.axis_value = scenes[j.scene].value;
            }
            records[i] = std::move(r);
        }
    };
    const int n_threads = std::min<int>(plan.threads, static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::string lines;
    for (const RunRecord& r : records) lines += record_to_json(r).dump() + "\n";
    write_text(plan.output / "runs.jsonl", lines);
    if (std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return r.ok && !r.trace_path.empty(); }))
        export_results(plan.output, plan.output);
    return records;
}

int steps_to_stall(const OptimizerTrace& trace) {
    int step = trace.records.empty() ? 0 : trace.records.front().step;
    double best = -std::numeric_limits<double>::infinity();
    for (const TraceRecord& r : trace.records)
        if (r.best_objective > best) {
            best = r.best_objective;
            step = r.step;
        }
    return step;
}

std::vector<SummaryRow> aggregate(const std::vector<TraceSummaryInput>& traces) {
    if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
    std::map<std::pair<std::string, std::string>, std::vector<const TraceSummaryInput*>> groups;
    for (const TraceSummaryInput& t : traces) {
        if (t.trace.records.empty()) throw std::invalid_argument("aggregate: empty trace for " + t.method);
        groups[{t.cell, t.method}].push_back(&t);
    }
    std::vector<SummaryRow> rows;
    for (const auto& [key, members] : groups) {
        SummaryRow r;
        r.cell = key.first;
        r.method = key.second;
        r.runs = static_cast<int>(members.size());
        std::vector<double> finals;
        double stall = 0, w = 0, d = 0, ratio = 0;
        for (const TraceSummaryInput* t : members) {
            const TraceRecord& last = t->trace.final_record();
            finals.push_back(last.best_objective);
            stall += steps_to_stall(t->trace);
            w += last.phi_w;
            d += last.phi_d;
            ratio += last.phi_w != 0 ? last.phi_d / last.phi_w : 0.0;
        }
        const double n = static_cast<double>(finals.size());
        double sum = 0;
        for (double v : finals) sum += v;
        r.mean = sum / n;
        double ss = 0;
        for (double v : finals) ss += (v - r.mean) * (v - r.mean);
        r.std = finals.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        std::sort(finals.begin(), finals.end());
        r.min = finals.front();
        r.max = finals.back();
        const std::size_t h = finals.size() / 2;
        r.median = finals.size() % 2 ? finals[h] : 0.5 * (finals[h - 1] + finals[h]);
        r.mean_steps_to_stall = stall / n;
        r.mean_phi_w = w / n;
        r.mean_phi_d = d / n;
        r.mean_ratio = ratio / n;
        rows.push_back(r);
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "cell,method,runs,mean,std,min,max,median,mean_steps_to_stall,mean_phi_w,mean_phi_d,mean_ratio\n";
    for (const SummaryRow& r : rows)
        out += r.cell + ',' + r.method + ',' + std::to_string(r.runs) + ',' + fmt_g(r.mean) + ',' + fmt_g(r.std) + ',' +
               fmt_g(r.min) + ',' + fmt_g(r.max) + ',' + fmt_g(r.median) + ',' + fmt_g(r.mean_steps_to_stall) + ',' +
               fmt_g(r.mean_phi_w) + ',' + fmt_g(r.mean_phi_d) + ',' + fmt_g(r.mean_ratio) + '\n';
    return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-16s %-8s %4s %10s %9s %10s %10s %10s %8s %9s\n", "cell", "method", "n", "mean",
                  "std", "min", "max", "median", "stall", "phi_d/w");
    out += buf;
    for (const SummaryRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%-16s %-8s %4d %10.4f %9.4f %10.4f %10.4f %10.4f %8.1f %9.5f\n",
                      r.cell.empty() ? "-" : r.cell.c_str(), r.method.c_str(), r.runs, r.mean, r.std, r.min, r.max,
                      r.median, r.mean_steps_to_stall, r.mean_ratio);
        out += buf;
    }
    return out;
}

std::vector<TraceSummaryInput> collect_traces(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().filename() == "trace.csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<TraceSummaryInput> out;
    for (const fs::path& f : files) {
        std::vector<std::string> parts;
        for (const auto& p : fs::relative(f, root).parent_path()) parts.push_back(p.string());
        if (parts.size() < 2 || parts.back().rfind("seed_", 0) != 0) continue;
        TraceSummaryInput t;
        t.seed = std::stoull(parts.back().substr(5));
        t.method = parts[parts.size() - 2];
        for (std::size_t i = 0; i + 2 < parts.size(); ++i) t.cell += (i ? "/" : "") + parts[i];
        t.trace = read_trace_csv(f);
        t.trace.method = t.method;
        t.trace.seed = t.seed;
        if (!t.trace.records.empty()) out.push_back(std::move(t));
    }
    return out;
}

ExportResult export_results(const fs::path& root, const fs::path& out) {
    ExportResult res;
    const std::vector<TraceSummaryInput> traces = collect_traces(root);
    if (traces.empty()) throw std::runtime_error("no trace.csv files under " + root.string());
    fs::create_directories(out);
    res.rows = aggregate(traces);
    write_text(out / "summary.csv", summary_csv(res.rows));
    write_text(out / "summary.txt", summary_table(res.rows));
    res.files.push_back(out / "summary.csv");
    res.files.push_back(out / "summary.txt");

    // Mean best-so-far per method and step, shorter traces held at their final value.
    std::map<std::string, std::map<std::string, std::vector<const OptimizerTrace*>>> cells;
    for (const TraceSummaryInput& t : traces) cells[t.cell][t.method].push_back(&t.trace);
    for (const auto& [cell, methods] : cells) {
        std::vector<Series> series;
        for (const auto& [method, list] : methods) {
            int last_step = 0;
            for (const OptimizerTrace* t : list) last_step = std::max(last_step, t->records.back().step);
            Series s;
            s.label = method;
            std::vector<std::size_t> cursor(list.size(), 0);
            const int stride = std::max(1, last_step / 2000);
            for (int step = 0; step <= last_step; step += stride) {
                double sum = 0;
                for (std::size_t k = 0; k < list.size(); ++k) {
                    const auto& recs = list[k]->records;
                    while (cursor[k] + 1 < recs.size() && recs[cursor[k] + 1].step <= step) ++cursor[k];
                    sum += recs[cursor[k]].best_objective;
                }
                s.x.push_back(step);
                s.y.push_back(sum / static_cast<double>(list.size()));
            }
            series.push_back(std::move(s));
        }
        std::string name = "convergence";
        std::string title = "mean best objective";
        if (!cell.empty()) {
            std::string flat = cell;
            std::replace(flat.begin(), flat.end(), '/', '_');
            name += "_" + flat;
            title += " " + cell;
        }
        const fs::path png = out / (name + ".png");
        write_png(render_line_plot(series, title, "step", "phi_o"), png);
        res.files.push_back(png);
    }

    std::vector<fs::path> maps;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        const std::string n = entry.path().filename().string();
        if (entry.is_regular_file() && (n == "rate_map.csv" || n == "illuminance_map.csv")) maps.push_back(entry.path());
    }
    std::sort(maps.begin(), maps.end());
    for (const fs::path& m : maps) {
        const bool rate = m.filename() == "rate_map.csv";
        const MapCsv csv = read_map_csv(m, rate ? "gamma_bps" : "I_total");
        const fs::path png = m.parent_path() / (rate ? "rate_heatmap.png" : "illuminance_heatmap.png");
        write_png(render_heatmap_image(csv.values, csv.rows, csv.cols), png);
        res.files.push_back(png);
    }
    return res;
}

}  // namespace fenestra
