#include "fenestra/objective.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fenestra {

double weighted_improvement(const Eigen::VectorXd& current, const Eigen::VectorXd& baseline,
                            const Eigen::VectorXd& weights, double floor, double cap, GuardStats* stats) {
    if (current.size() != baseline.size() || current.size() != weights.size())
        throw std::invalid_argument("improvement: map, baseline and weights differ in length");
    if (current.size() == 0) throw std::invalid_argument("improvement: empty map");
    const Eigen::ArrayXd denom = baseline.array().max(floor);
    const Eigen::ArrayXd raw = current.array() / denom;
    const Eigen::ArrayXd ratio = raw.min(cap);
    if (stats) {
        stats->floored = static_cast<int>((baseline.array() < floor).count());
        stats->capped = static_cast<int>((raw > cap).count());
    }
    return (ratio * weights.array()).sum() / static_cast<double>(current.size());
}

JointObjective joint_objective(double phi_w, double phi_d, double eta, double t_min) {
    if (eta < 0) throw std::invalid_argument("joint_objective: eta must be >= 0");
    return {phi_w + eta * phi_d, phi_d >= t_min};
}

double penalized_objective(double phi_w, double phi_d, double eta, double t_min, PenaltyMode mode) {
    if (!std::isfinite(phi_w) || !std::isfinite(phi_d)) return -std::numeric_limits<double>::infinity();
    const JointObjective j = joint_objective(phi_w, phi_d, eta, t_min);
    if (j.feasible) return j.value;
    if (mode == PenaltyMode::Hard) return -std::numeric_limits<double>::infinity();
    return phi_w + eta * std::max(phi_d, 0.0) - 10.0 * (t_min - phi_d);
}

BaselineCache BaselineCache::build(const Scene& scene, LosMode mode, const LosEnsemble* ensemble) {
    BaselineCache b;
    b.layout = udw_layout(scene.room);
    b.rates = rate_map(scene, b.layout, mode, ensemble);
    b.light = illuminance_map(scene, b.layout);
    b.scenario_hash = scene.config.hash();
    return b;
}

double PerformanceReport::fitness(PenaltyMode mode, double t_min) const {
    if (!layout_violations.empty()) return -std::numeric_limits<double>::infinity();
    return penalized_objective(phi_w, phi_d, eta, t_min, mode);
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json report_to_json(const PerformanceReport& r) {
    nlohmann::json j;
    j["phi_w"] = finite_or_null(r.phi_w);
    j["phi_d"] = finite_or_null(r.phi_d);
    j["phi_o"] = finite_or_null(r.phi_o);
    j["eta"] = r.eta;
    j["feasible"] = r.feasible;
    j["violations"] = r.violations;
    nlohmann::json windows = nlohmann::json::array();
    for (int n = 0; n < r.layout.size(); ++n)
        windows.push_back({{"x", r.layout.x(n)},
                           {"theta_deg", rad2deg(r.layout.elevation(n))},
                           {"psi_deg", rad2deg(r.layout.azimuth(n))}});
    j["layout"] = {{"windows", windows}};
    j["guards"] = {{"rate_floored", r.rate_guards.floored},
                   {"rate_capped", r.rate_guards.capped},
                   {"light_floored", r.light_guards.floored},
                   {"light_capped", r.light_guards.capped}};
    nlohmann::json files = nlohmann::json::object();
    if (!r.rate_csv_path.empty()) files["rate_map_csv"] = r.rate_csv_path;
    if (!r.light_csv_path.empty()) files["illuminance_map_csv"] = r.light_csv_path;
    if (!r.rate_image_path.empty()) files["rate_heatmap_png"] = r.rate_image_path;
    if (!r.light_image_path.empty()) files["illuminance_heatmap_png"] = r.light_image_path;
    j["files"] = files;
    return j;
}

Evaluator::Evaluator(Scene scene, LosMode mode)
    : scene_(std::make_shared<const Scene>(std::move(scene))), mode_(mode) {
    if (mode_ == LosMode::MonteCarlo) {
        const ScenarioConfig& c = scene_->config;
        ensemble_ = std::make_shared<const LosEnsemble>(scene_->room, c.rho, c.r_block,
                                                        c.mc_realizations, c.mc_seed);
    }
    baseline_ = std::make_shared<const BaselineCache>(BaselineCache::build(*scene_, mode_, ensemble_.get()));
}

PerformanceReport Evaluator::evaluate(const WindowLayout& layout) const {
    const Scene& s = *scene_;
    const ScenarioConfig& c = s.config;
    PerformanceReport r;
    r.layout = layout;
    r.eta = c.eta;
    r.layout_violations = validate_layout(layout, s.room, c.d_min, s.max_elevation());
    for (const auto& v : r.layout_violations) r.violations.push_back(v.message);
    if (!r.layout_violations.empty()) return r;

    r.rates = rate_map(s, layout, mode_, ensemble_.get());
    r.light = illuminance_map(s, layout);
    r.phi_w = wireless_improvement(r.rates->gamma, baseline_->rates.gamma, s.weights.w, c.baseline_floor,
                                   c.ratio_cap, &r.rate_guards);
    r.phi_d = daylight_improvement(r.light->total, baseline_->light.total, s.weights.w, c.baseline_floor,
                                   c.ratio_cap, &r.light_guards);
    const JointObjective j = joint_objective(r.phi_w, r.phi_d, c.eta, c.t_min_daylight);
    r.feasible = j.feasible;
    if (j.feasible) {
        r.phi_o = j.value;
    } else {
        std::ostringstream msg;
        msg << "daylight improvement " << r.phi_d << " below T_min=" << c.t_min_daylight;
        r.violations.push_back(msg.str());
    }
    r.rate_heatmap = render_heatmap_text(r.rates->gamma, s.grid.rows, s.grid.cols);
    r.light_heatmap = render_heatmap_text(r.light->total, s.grid.rows, s.grid.cols);
    return r;
}

}  // namespace fenestra
