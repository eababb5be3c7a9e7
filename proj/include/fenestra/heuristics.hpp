#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fenestra/objective.hpp"
#include "fenestra/scene.hpp"

namespace fenestra {

/// Flat genome [x_1..x_N, elevation_1..elevation_N, azimuth_1..azimuth_N].
using SolutionVector = Eigen::VectorXd;

/// Gene bounds plus the constraint data repair needs.
struct SearchSpace {
    int windows = 0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double d_min = 0.0;

    static SearchSpace from_scene(const Scene& scene);
    Eigen::Index dimension() const { return lower.size(); }
    Eigen::VectorXd range() const { return upper - lower; }
};

SolutionVector encode(const WindowLayout& layout);
WindowLayout decode(const SolutionVector& v);

/// Sorts windows by abscissa (angles travel with their window), then sweeps
/// left to right and right to left so every gap is at least d_min inside the
/// wall extent; elevations are clamped to the cone and azimuths wrapped.
/// Throws ConfigError when N windows cannot fit at spacing d_min.
SolutionVector repair(const SolutionVector& v, const SearchSpace& space);

enum class Replacement { Generational, Strict, Metropolis };

std::string to_string(Replacement r);
Replacement replacement_from_string(const std::string& name);

/// GA / SAGA knobs. Defaults are the reference run parameters.
struct HeuristicConfig {
    int population = 50;
    int generations = 1500;
    double crossover_prob = 0.7;
    double mutation_prob = 0.3;
    int elite = 2;
    double t_high = 100.0;
    double t_low = 5.0;
    double cooling = 0.98;
    int tournament = 2;
    double mutation_sigma = 0.05;  // fraction of each gene's range
    int stagnation = 200;          // generations without improvement before stopping; 0 disables
    Replacement replacement = Replacement::Generational;
    std::uint64_t seed = 1;

    /// Throws ConfigError when a value is out of range.
    void validate() const;
    /// Clamps every field into its valid range; returns notes for each change.
    std::vector<std::string> clamp();
};

void to_json(nlohmann::json& j, const HeuristicConfig& c);
void from_json(const nlohmann::json& j, HeuristicConfig& c);

/// One objective evaluation as seen by an optimiser.
struct Scored {
    double fitness = -std::numeric_limits<double>::infinity();    // drives selection
    double objective = -std::numeric_limits<double>::infinity();  // hard-mode score, -inf if infeasible
    double phi_w = 0.0;
    double phi_d = 0.0;
    bool feasible = false;
};

/// Black-box objective over solution vectors (maximised). Implementations
/// must be safe to call concurrently.
class Objective {
public:
    virtual ~Objective() = default;
    virtual Scored operator()(const SolutionVector& v) const = 0;
};

/// Scores layouts with the simulator under a penalty mode.
class SimulatorObjective final : public Objective {
public:
    SimulatorObjective(const Evaluator& evaluator, PenaltyMode mode) : evaluator_(evaluator), mode_(mode) {}
    Scored operator()(const SolutionVector& v) const override;
    Scored score(const PerformanceReport& report) const;
    const Evaluator& evaluator() const { return evaluator_; }

private:
    const Evaluator& evaluator_;
    PenaltyMode mode_;
};

/// Negative squared normalised distance to `center`; optimum 0. Lets the
/// optimisers be checked independently of the simulator.
class SphereObjective final : public Objective {
public:
    SphereObjective(SolutionVector center, Eigen::VectorXd scale)
        : center_(std::move(center)), scale_(std::move(scale)) {}
    static SphereObjective for_space(const SearchSpace& space);
    Scored operator()(const SolutionVector& v) const override;
    const SolutionVector& center() const { return center_; }

private:
    SolutionVector center_;
    Eigen::VectorXd scale_;
};

struct TraceRecord {
    int step = 0;
    double best_objective = -std::numeric_limits<double>::infinity();
    double phi_w = 0.0;
    double phi_d = 0.0;
    bool feasible = false;
    double elapsed_ms = 0.0;
    WindowLayout best_layout;
    std::string note;  // e.g. "llm-update" at LHS boundaries
};

struct OptimizerTrace {
    std::string method;
    std::uint64_t seed = 0;
    std::vector<TraceRecord> records;
    long evaluations = 0;

    const TraceRecord& final_record() const;
    double final_objective() const;
};

/// CSV header and rows: step,best_objective,phi_w,phi_d,feasible,elapsed_ms
void write_trace_csv(const OptimizerTrace& trace, const std::filesystem::path& path);
std::string trace_csv(const OptimizerTrace& trace);
OptimizerTrace read_trace_csv(const std::filesystem::path& path);

struct RunOptions {
    bool record_time = true;
};

/// Wall-clock milliseconds since construction, or always 0 when disabled.
class Stopwatch {
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const;

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

/// Keeps the best feasible solution seen and appends best-so-far records.
class TraceRecorder {
public:
    TraceRecorder(std::string method, std::uint64_t seed, RunOptions options);

    void observe(const SolutionVector& v, const Scored& s);
    void record(int step, std::string note = {});
    void count_evaluations(long n) { trace_.evaluations += n; }

    bool has_best() const { return has_best_; }
    double best_objective() const { return best_.objective; }
    const OptimizerTrace& trace() const { return trace_; }
    OptimizerTrace take() { return std::move(trace_); }

private:
    OptimizerTrace trace_;
    Stopwatch clock_;
    bool has_best_ = false;
    Scored best_;
    SolutionVector best_vector_;
};

struct Individual {
    SolutionVector genes;
    Scored score;
};

/// Generational genetic search with optional parent-replacement (strict or
/// Metropolis). Stateful so callers can interleave generations with
/// population injections.
class GeneticSearch {
public:
    GeneticSearch(const Objective& objective, SearchSpace space, HeuristicConfig config);

    /// Seeds the population from `seeds` (repaired), filling the rest with
    /// uniform samples, and evaluates it.
    void initialize(const std::vector<SolutionVector>& seeds = {});
    /// One generation; returns false once stagnation stops the search.
    bool step();
    /// Replaces the worst individuals with the repaired candidates.
    void inject(const std::vector<SolutionVector>& candidates);

    const std::vector<Individual>& population() const { return population_; }
    const Individual& best() const;
    int generation() const { return generation_; }
    long evaluations() const { return evaluations_; }
    bool stagnated() const;
    double temperature() const;
    /// Every individual evaluated since the last call (for trace bookkeeping).
    std::vector<Individual> drain_evaluated();

private:
    Individual make(const SolutionVector& genes);
    std::size_t tournament();
    SolutionVector mutate(SolutionVector v);
    std::pair<SolutionVector, SolutionVector> crossover(const SolutionVector& a, const SolutionVector& b);
    bool accept(double child, double parent);
    void sort_population();

    const Objective& objective_;
    SearchSpace space_;
    HeuristicConfig config_;
    std::mt19937_64 rng_;
    std::mt19937_64 accept_rng_;
    std::vector<Individual> population_;
    std::vector<Individual> fresh_;
    int generation_ = 0;
    long evaluations_ = 0;
    double best_fitness_ = -std::numeric_limits<double>::infinity();
    int last_improvement_ = 0;
};

/// Probability that a move worsening fitness by `delta` (< 0) is accepted at
/// temperature t; 1 for non-negative delta, 0 at t <= 0.
double metropolis_probability(double delta, double t);

SolutionVector uniform_sample(const SearchSpace& space, std::mt19937_64& rng);

OptimizerTrace random_search(const Objective& objective, const SearchSpace& space, long budget,
                             std::uint64_t seed, RunOptions options = {});

/// Generational GA (or its strict-replacement variant when
/// config.replacement == Strict).
OptimizerTrace ga_run(const Objective& objective, const SearchSpace& space, HeuristicConfig config,
                      RunOptions options = {});

/// GA whose offspring replace parents by Metropolis acceptance on the
/// cooling schedule, strict once the schedule drops below t_low.
OptimizerTrace saga_run(const Objective& objective, const SearchSpace& space, HeuristicConfig config,
                        RunOptions options = {});

/// Evaluation count of a full GA/SAGA run: initial population plus
/// (population - elite) per generation.
long heuristic_evaluation_budget(const HeuristicConfig& config);

}  // namespace fenestra
