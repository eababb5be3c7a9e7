#include "fenestra/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fenestra/wireless.hpp"

namespace fenestra {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kSpacingTolerance = 1e-9;
}  // namespace

SearchSpace SearchSpace::from_scene(const Scene& scene) {
    const int n = scene.room.window_count;
    SearchSpace s;
    s.windows = n;
    s.d_min = scene.config.d_min;
    s.lower.resize(3 * n);
    s.upper.resize(3 * n);
    s.lower << Eigen::VectorXd::Constant(n, scene.room.wall_min()), Eigen::VectorXd::Zero(n),
        Eigen::VectorXd::Zero(n);
    s.upper << Eigen::VectorXd::Constant(n, scene.room.wall_max()),
        Eigen::VectorXd::Constant(n, scene.max_elevation()), Eigen::VectorXd::Constant(n, kTwoPi);
    return s;
}

SolutionVector encode(const WindowLayout& layout) {
    const int n = layout.size();
    SolutionVector v(3 * n);
    v << layout.x, layout.elevation, layout.azimuth;
    return v;
}

WindowLayout decode(const SolutionVector& v) {
    if (v.size() % 3 != 0) throw std::invalid_argument("solution vector length must be a multiple of 3");
    const int n = static_cast<int>(v.size() / 3);
    WindowLayout l(n);
    l.x = v.segment(0, n);
    l.elevation = v.segment(n, n);
    l.azimuth = v.segment(2 * n, n);
    return l;
}

SolutionVector repair(const SolutionVector& v, const SearchSpace& space) {
    const int n = space.windows;
    if (v.size() != 3 * n) throw std::invalid_argument("repair: solution vector has wrong length");
    const double lo = space.lower(0), hi = space.upper(0);
    if ((n - 1) * space.d_min > hi - lo + kSpacingTolerance)
        throw ConfigError("repair: windows cannot fit at the minimum spacing");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v(a) < v(b); });

    SolutionVector out(3 * n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out(k) = std::clamp(std::isfinite(v(src)) ? v(src) : lo, lo, hi);
        out(n + k) = std::clamp(std::isfinite(v(n + src)) ? v(n + src) : 0.0, 0.0, space.upper(n + k));
        out(2 * n + k) = std::isfinite(v(2 * n + src)) ? wrap_two_pi(v(2 * n + src)) : 0.0;
    }
    for (int k = 1; k < n; ++k)
        if (out(k) < out(k - 1) + space.d_min - kSpacingTolerance) out(k) = out(k - 1) + space.d_min;
    if (n > 0 && out(n - 1) > hi) {
        out(n - 1) = hi;
        for (int k = n - 2; k >= 0; --k)
            if (out(k) > out(k + 1) - space.d_min + kSpacingTolerance) out(k) = out(k + 1) - space.d_min;
    }
    return out;
}

std::string to_string(Replacement r) {
    switch (r) {
        case Replacement::Generational: return "generational";
        case Replacement::Strict: return "strict";
        case Replacement::Metropolis: return "metropolis";
    }
    return "generational";
}

Replacement replacement_from_string(const std::string& name) {
    if (name == "generational") return Replacement::Generational;
    if (name == "strict") return Replacement::Strict;
    if (name == "metropolis") return Replacement::Metropolis;
    throw ConfigError("unknown replacement policy '" + name + "'");
}

void HeuristicConfig::validate() const {
    auto req = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid heuristic config: ") + what);
    };
    req(population >= 2, "population must be >= 2");
    req(generations >= 0, "generations must be >= 0");
    req(crossover_prob >= 0 && crossover_prob <= 1, "crossover_prob must lie in [0,1]");
    req(mutation_prob >= 0 && mutation_prob <= 1, "mutation_prob must lie in [0,1]");
    req(elite >= 0 && elite < population, "elite must lie in [0, population)");
    req(t_high >= 0 && t_low >= 0, "temperatures must be >= 0");
    req(cooling > 0 && cooling < 1, "cooling must lie in (0,1)");
    req(tournament >= 1, "tournament must be >= 1");
    req(mutation_sigma > 0, "mutation_sigma must be > 0");
    req(stagnation >= 0, "stagnation must be >= 0");
}

std::vector<std::string> HeuristicConfig::clamp() {
    std::vector<std::string> notes;
    auto fix = [&notes](auto& field, auto lo, auto hi, const char* name) {
        using T = std::decay_t<decltype(field)>;
        const T before = field;
        field = std::clamp<T>(field, static_cast<T>(lo), static_cast<T>(hi));
        if (field != before) {
            std::ostringstream s;
            s << name << " " << before << " clamped to " << field;
            notes.push_back(s.str());
        }
    };
    fix(population, 2, 1000, "population");
    fix(generations, 0, 100000, "generations");
    fix(crossover_prob, 0.0, 1.0, "crossover_prob");
    fix(mutation_prob, 0.0, 1.0, "mutation_prob");
    fix(elite, 0, population - 1, "elite");
    fix(t_high, 0.0, 1e6, "t_high");
    fix(t_low, 0.0, 1e6, "t_low");
    fix(cooling, 1e-6, 1.0 - 1e-6, "cooling");
    fix(tournament, 1, population, "tournament");
    fix(mutation_sigma, 1e-6, 1.0, "mutation_sigma");
    fix(stagnation, 0, 100000, "stagnation");
    return notes;
}

void to_json(nlohmann::json& j, const HeuristicConfig& c) {
    j = {{"population", c.population},     {"generations", c.generations},
         {"crossover_prob", c.crossover_prob}, {"mutation_prob", c.mutation_prob},
         {"elite", c.elite},               {"t_high", c.t_high},
         {"t_low", c.t_low},               {"cooling", c.cooling},
         {"tournament", c.tournament},     {"mutation_sigma", c.mutation_sigma},
         {"stagnation", c.stagnation},     {"replacement", to_string(c.replacement)},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, HeuristicConfig& c) {
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("population", c.population);
    get("generations", c.generations);
    get("crossover_prob", c.crossover_prob);
    get("mutation_prob", c.mutation_prob);
    get("elite", c.elite);
    get("t_high", c.t_high);
    get("t_low", c.t_low);
    get("cooling", c.cooling);
    get("tournament", c.tournament);
    get("mutation_sigma", c.mutation_sigma);
    get("stagnation", c.stagnation);
    get("seed", c.seed);
    if (j.contains("replacement")) c.replacement = replacement_from_string(j.at("replacement").get<std::string>());
}

Scored SimulatorObjective::score(const PerformanceReport& r) const {
    const double t_min = evaluator_.scene().config.t_min_daylight;
    Scored s;
    s.fitness = r.fitness(mode_, t_min);
    s.feasible = r.feasible;
    s.objective = r.feasible ? r.phi_o : -std::numeric_limits<double>::infinity();
    s.phi_w = std::isfinite(r.phi_w) ? r.phi_w : 0.0;
    s.phi_d = std::isfinite(r.phi_d) ? r.phi_d : 0.0;
    return s;
}

Scored SimulatorObjective::operator()(const SolutionVector& v) const {
    return score(evaluator_.evaluate(decode(v)));
}

SphereObjective SphereObjective::for_space(const SearchSpace& space) {
    const int n = space.windows;
    SolutionVector c(3 * n);
    const double lo = space.lower(0), hi = space.upper(0);
    for (int k = 0; k < n; ++k) {
        c(k) = lo + (hi - lo) * (k + 1.0) / (n + 1.0);
        c(n + k) = 0.5 * space.upper(n + k);
        c(2 * n + k) = std::numbers::pi;
    }
    return SphereObjective(c, space.range());
}

Scored SphereObjective::operator()(const SolutionVector& v) const {
    const double d2 = ((v - center_).array() / scale_.array()).square().sum();
    Scored s;
    s.fitness = s.objective = -d2;
    s.feasible = true;
    return s;
}

const TraceRecord& OptimizerTrace::final_record() const {
    if (records.empty()) throw std::logic_error("empty optimizer trace");
    return records.back();
}

double OptimizerTrace::final_objective() const { return final_record().best_objective; }

namespace {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_num(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

}  // namespace

std::string trace_csv(const OptimizerTrace& trace) {
    std::string out = "step,best_objective,phi_w,phi_d,feasible,elapsed_ms\n";
    for (const TraceRecord& r : trace.records) {
        out += std::to_string(r.step) + ',' + fmt_num(r.best_objective) + ',' + fmt_num(r.phi_w) + ',' +
               fmt_num(r.phi_d) + ',' + (r.feasible ? "1" : "0") + ',' + fmt_num(r.elapsed_ms) + '\n';
    }
    return out;
}

void write_trace_csv(const OptimizerTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << trace_csv(trace);
}

OptimizerTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "step,best_objective,phi_w,phi_d,feasible,elapsed_ms")
        throw std::runtime_error(path.string() + ": unexpected trace header");
    OptimizerTrace t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 6) throw std::runtime_error(path.string() + ": malformed trace row");
        TraceRecord r;
        r.step = std::stoi(f[0]);
        r.best_objective = parse_num(f[1]);
        r.phi_w = parse_num(f[2]);
        r.phi_d = parse_num(f[3]);
        r.feasible = f[4] == "1";
        r.elapsed_ms = parse_num(f[5]);
        t.records.push_back(std::move(r));
    }
    return t;
}

double Stopwatch::elapsed_ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
}

TraceRecorder::TraceRecorder(std::string method, std::uint64_t seed, RunOptions options)
    : clock_(options.record_time) {
    trace_.method = std::move(method);
    trace_.seed = seed;
}

void TraceRecorder::observe(const SolutionVector& v, const Scored& s) {
    if (!s.feasible || !std::isfinite(s.objective)) return;
    if (!has_best_ || s.objective > best_.objective) {
        best_ = s;
        best_vector_ = v;
        has_best_ = true;
    }
}

void TraceRecorder::record(int step, std::string note) {
    TraceRecord r;
    r.step = step;
    r.elapsed_ms = clock_.elapsed_ms();
    r.note = std::move(note);
    if (has_best_) {
        r.best_objective = best_.objective;
        r.phi_w = best_.phi_w;
        r.phi_d = best_.phi_d;
        r.feasible = true;
        r.best_layout = decode(best_vector_);
    }
    trace_.records.push_back(std::move(r));
}

double metropolis_probability(double delta, double t) {
    if (delta >= 0) return 1.0;
    if (t <= 0) return 0.0;
    return std::exp(delta / t);
}

SolutionVector uniform_sample(const SearchSpace& space, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SolutionVector v(space.dimension());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = space.lower(i) + u(rng) * (space.upper(i) - space.lower(i));
    return v;
}

GeneticSearch::GeneticSearch(const Objective& objective, SearchSpace space, HeuristicConfig config)
    : objective_(objective),
      space_(std::move(space)),
      config_(config),
      rng_(config.seed),
      accept_rng_(config.seed ^ 0xA5A5A5A5DEADBEEFULL) {
    config_.validate();
}

Individual GeneticSearch::make(const SolutionVector& genes) {
    Individual ind{repair(genes, space_), {}};
    ind.score = objective_(ind.genes);
    ++evaluations_;
    fresh_.push_back(ind);
    return ind;
}

void GeneticSearch::sort_population() {
    std::stable_sort(population_.begin(), population_.end(),
                     [](const Individual& a, const Individual& b) { return a.score.fitness > b.score.fitness; });
}

void GeneticSearch::initialize(const std::vector<SolutionVector>& seeds) {
    population_.clear();
    for (const SolutionVector& s : seeds) {
        if (static_cast<int>(population_.size()) >= config_.population) break;
        population_.push_back(make(s));
    }
    while (static_cast<int>(population_.size()) < config_.population)
        population_.push_back(make(uniform_sample(space_, rng_)));
    sort_population();
    generation_ = 0;
    best_fitness_ = population_.front().score.fitness;
    last_improvement_ = 0;
}

const Individual& GeneticSearch::best() const {
    if (population_.empty()) throw std::logic_error("GeneticSearch: population not initialised");
    return population_.front();
}

std::size_t GeneticSearch::tournament() {
    std::uniform_int_distribution<std::size_t> pick(0, population_.size() - 1);
    std::size_t best = pick(rng_);
    for (int k = 1; k < config_.tournament; ++k) {
        const std::size_t c = pick(rng_);
        if (population_[c].score.fitness > population_[best].score.fitness) best = c;
    }
    return best;
}

SolutionVector GeneticSearch::mutate(SolutionVector v) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (u(rng_) < config_.mutation_prob)
            v(i) += g(rng_) * config_.mutation_sigma * (space_.upper(i) - space_.lower(i));
    return v;
}

std::pair<SolutionVector, SolutionVector> GeneticSearch::crossover(const SolutionVector& a,
                                                                   const SolutionVector& b) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SolutionVector c1 = a, c2 = b;
    if (u(rng_) < config_.crossover_prob) {
        for (Eigen::Index i = 0; i < a.size(); ++i)
            if (u(rng_) < 0.5) std::swap(c1(i), c2(i));
    }
    return {c1, c2};
}

double GeneticSearch::temperature() const {
    return config_.t_high * std::pow(config_.cooling, generation_);
}

bool GeneticSearch::accept(double child, double parent) {
    if (std::isnan(child)) return false;
    if (child >= parent) return true;
    if (config_.replacement != Replacement::Metropolis) return false;
    const double t = temperature();
    if (t < config_.t_low || t <= 0) return false;
    const double p = metropolis_probability(child - parent, t);
    return std::uniform_real_distribution<double>(0.0, 1.0)(accept_rng_) < p;
}

bool GeneticSearch::stagnated() const {
    return config_.stagnation > 0 && generation_ - last_improvement_ >= config_.stagnation;
}

bool GeneticSearch::step() {
    if (population_.empty()) initialize();
    if (stagnated()) return false;
    const int pop = config_.population;
    const int elite = config_.elite;

    if (config_.replacement == Replacement::Generational) {
        std::vector<Individual> next(population_.begin(), population_.begin() + elite);
        while (static_cast<int>(next.size()) < pop) {
            const std::size_t a = tournament(), b = tournament();
            auto [c1, c2] = crossover(population_[a].genes, population_[b].genes);
            next.push_back(make(mutate(std::move(c1))));
            if (static_cast<int>(next.size()) < pop) next.push_back(make(mutate(std::move(c2))));
        }
        population_ = std::move(next);
    } else {
        // Each non-elite individual breeds with a tournament mate; the child
        // competes with that parent for its slot.
        std::vector<Individual> next = population_;
        for (int i = elite; i < pop; ++i) {
            const std::size_t mate = tournament();
            SolutionVector child = crossover(population_[static_cast<std::size_t>(i)].genes,
                                             population_[mate].genes)
                                       .first;
            Individual c = make(mutate(std::move(child)));
            if (accept(c.score.fitness, population_[static_cast<std::size_t>(i)].score.fitness))
                next[static_cast<std::size_t>(i)] = std::move(c);
        }
        population_ = std::move(next);
    }
    sort_population();
    ++generation_;
    if (population_.front().score.fitness > best_fitness_ + 1e-12) {
        best_fitness_ = population_.front().score.fitness;
        last_improvement_ = generation_;
    }
    return true;
}

void GeneticSearch::inject(const std::vector<SolutionVector>& candidates) {
    if (population_.empty()) throw std::logic_error("GeneticSearch: inject before initialise");
    std::size_t slot = population_.size();
    for (const SolutionVector& c : candidates) {
        if (slot == 0) break;
        population_[--slot] = make(c);
    }
    sort_population();
    if (population_.front().score.fitness > best_fitness_ + 1e-12) {
        best_fitness_ = population_.front().score.fitness;
        last_improvement_ = generation_;
    }
}

std::vector<Individual> GeneticSearch::drain_evaluated() {
    std::vector<Individual> out;
    out.swap(fresh_);
    return out;
}

OptimizerTrace random_search(const Objective& objective, const SearchSpace& space, long budget,
                             std::uint64_t seed, RunOptions options) {
    if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
    TraceRecorder rec("random", seed, options);
    std::mt19937_64 rng(seed);
    for (long k = 0; k < budget; ++k) {
        const SolutionVector v = repair(uniform_sample(space, rng), space);
        rec.observe(v, objective(v));
        rec.count_evaluations(1);
        rec.record(static_cast<int>(k));
    }
    return rec.take();
}

namespace {

OptimizerTrace run_genetic(const char* method, const Objective& objective, const SearchSpace& space,
                           const HeuristicConfig& config, RunOptions options) {
    TraceRecorder rec(method, config.seed, options);
    GeneticSearch search(objective, space, config);
    auto absorb = [&] {
        for (const Individual& ind : search.drain_evaluated()) rec.observe(ind.genes, ind.score);
    };
    search.initialize();
    absorb();
    rec.record(0);
    for (int g = 0; g < config.generations; ++g) {
        if (!search.step()) break;
        absorb();
        rec.record(search.generation());
    }
    rec.count_evaluations(search.evaluations());
    return rec.take();
}

}  // namespace

OptimizerTrace ga_run(const Objective& objective, const SearchSpace& space, HeuristicConfig config,
                      RunOptions options) {
    if (config.replacement == Replacement::Metropolis) config.replacement = Replacement::Generational;
    return run_genetic(config.replacement == Replacement::Strict ? "ga-strict" : "ga", objective, space,
                       config, options);
}

OptimizerTrace saga_run(const Objective& objective, const SearchSpace& space, HeuristicConfig config,
                        RunOptions options) {
    config.replacement = Replacement::Metropolis;
    return run_genetic("saga", objective, space, config, options);
}

long heuristic_evaluation_budget(const HeuristicConfig& config) {
    return config.population + static_cast<long>(config.generations) * (config.population - config.elite);
}

}  // namespace fenestra
