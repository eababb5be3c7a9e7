#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fenestra/daylight.hpp"
#include "fenestra/heatmap.hpp"
#include "fenestra/scene.hpp"
#include "fenestra/wireless.hpp"

namespace fenestra {

/// How infeasible layouts are scored when an optimiser needs a number.
enum class PenaltyMode { Hard, Soft };

/// Counts of points where the ratio guards engaged.
struct GuardStats {
    int floored = 0;
    int capped = 0;
};

/// Weighted mean of per-point ratios current/baseline. The baseline is
/// floored and every ratio capped before weighting.
double weighted_improvement(const Eigen::VectorXd& current, const Eigen::VectorXd& baseline,
                            const Eigen::VectorXd& weights, double floor = 1e-9, double cap = 100.0,
                            GuardStats* stats = nullptr);

inline double wireless_improvement(const Eigen::VectorXd& rates, const Eigen::VectorXd& baseline,
                                   const Eigen::VectorXd& weights, double floor = 1e-9,
                                   double cap = 100.0, GuardStats* stats = nullptr) {
    return weighted_improvement(rates, baseline, weights, floor, cap, stats);
}

inline double daylight_improvement(const Eigen::VectorXd& lux, const Eigen::VectorXd& baseline,
                                   const Eigen::VectorXd& weights, double floor = 1e-9,
                                   double cap = 100.0, GuardStats* stats = nullptr) {
    return weighted_improvement(lux, baseline, weights, floor, cap, stats);
}

struct JointObjective {
    double value = 0.0;
    bool feasible = false;
};

JointObjective joint_objective(double phi_w, double phi_d, double eta, double t_min);

/// Score used for ranking under the given penalty mode. Hard mode maps an
/// infeasible layout to -inf; soft mode subtracts 10 per unit of daylight
/// shortfall.
double penalized_objective(double phi_w, double phi_d, double eta, double t_min, PenaltyMode mode);

/// UDW reference maps for one scenario.
struct BaselineCache {
    WindowLayout layout;
    SumRateMap rates;
    IlluminanceMap light;
    std::uint64_t scenario_hash = 0;

    static BaselineCache build(const Scene& scene, LosMode mode, const LosEnsemble* ensemble = nullptr);
};

struct PerformanceReport {
    WindowLayout layout;
    double phi_w = std::numeric_limits<double>::quiet_NaN();
    double phi_d = std::numeric_limits<double>::quiet_NaN();
    double phi_o = -std::numeric_limits<double>::infinity();
    double eta = 0.0;
    bool feasible = false;
    std::vector<LayoutViolation> layout_violations;
    std::vector<std::string> violations;  // human-readable, layout and daylight
    std::optional<SumRateMap> rates;
    std::optional<IlluminanceMap> light;
    GuardStats rate_guards;
    GuardStats light_guards;
    HeatmapText rate_heatmap;
    HeatmapText light_heatmap;
    // Filled when the maps are exported.
    std::string rate_csv_path;
    std::string light_csv_path;
    std::string rate_image_path;
    std::string light_image_path;

    /// Ranking score; soft mode is informative for daylight-infeasible layouts.
    double fitness(PenaltyMode mode, double t_min) const;
};

nlohmann::json report_to_json(const PerformanceReport& report);

/// Thread-safe evaluator bound to one scene and its baseline.
class Evaluator {
public:
    explicit Evaluator(Scene scene, LosMode mode = LosMode::Analytic);

    /// Full report. A layout violating the decision constraints is returned
    /// infeasible without simulating either map.
    PerformanceReport evaluate(const WindowLayout& layout) const;

    const Scene& scene() const { return *scene_; }
    const BaselineCache& baseline() const { return *baseline_; }
    LosMode mode() const { return mode_; }

private:
    std::shared_ptr<const Scene> scene_;
    LosMode mode_;
    std::shared_ptr<const LosEnsemble> ensemble_;
    std::shared_ptr<const BaselineCache> baseline_;
};

}  // namespace fenestra
