#include "fenestra/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fenestra {

std::string to_string(LosMode mode) {
    return mode == LosMode::Analytic ? "analytic" : "monte-carlo";
}

LosMode los_mode_from_string(const std::string& name) {
    if (name == "analytic" || name == "independence") return LosMode::Analytic;
    if (name == "monte-carlo" || name == "mc") return LosMode::MonteCarlo;
    throw ConfigError("unknown LoS mode '" + name + "'");
}

int ScenarioConfig::array_side() const {
    return static_cast<int>(std::lround(std::sqrt(static_cast<double>(u_units))));
}

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ConfigError("invalid scenario: " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
    require(lambda_m > 0, "lambda_m must be > 0");
    require(d_x > 0 && d_y > 0, "d_x, d_y must be > 0");
    require(n_t >= 1, "n_t must be >= 1");
    require(p_t >= 0, "p_t must be >= 0");
    require(u_units >= 1 && array_side() * array_side() == u_units,
            "u_units must be a perfect square");
    require(bandwidth_hz > 0, "bandwidth_hz must be > 0");
    require(std::isfinite(noise_dbm), "noise_dbm must be finite");
    require(l_r > 0 && w_r > 0 && h_r > 0, "room dimensions must be > 0");
    require(win_l > 0 && win_w > 0, "window size must be > 0");
    require(n_windows >= 1, "n_windows must be >= 1");
    require(n_windows * win_w <= l_r, "windows do not fit on the facade");
    require(window_center_height - win_l / 2 >= 0 && window_center_height + win_l / 2 <= h_r,
            "window rectangle leaves the wall vertically");
    // The base station sits at the planar origin, so y_b > 0 puts it in front of the facade.
    require(y_b > 0, "base station must be outside the room, in front of the facade (y_b > 0)");
    require(r_block > 0, "r_block must be > 0");
    require(rho >= 0, "rho must be >= 0");
    for (double f : {f_w, f_f, f_c}) require(f >= 0 && f <= 1, "reflectances must lie in [0,1]");
    require(glazing_beta >= 0 && glazing_beta <= 1, "glazing_beta must lie in [0,1]");
    require(e_dn >= 0 && e_sky >= 0, "sky illuminances must be >= 0");
    require(theta_d_deg >= 0 && theta_d_deg <= 180, "theta_d_deg must lie in [0,180]");
    for (double a : beta_shape) require(a > 0, "beta shape parameters must be > 0");
    require(grid_spacing > 0 && grid_spacing < std::min(w_r, l_r), "grid_spacing out of range");
    require(workplane_height >= 0 && workplane_height < h_r, "workplane_height out of range");
    require(eta >= 0, "eta must be >= 0");
    require(d_min >= 0, "d_min must be >= 0");
    require(theta_max_deg >= 0 && theta_max_deg < 90, "theta_max_deg must lie in [0,90)");
    require(ratio_cap > 0, "ratio_cap must be > 0");
    require(baseline_floor > 0, "baseline_floor must be > 0");
    require(mc_realizations >= 1, "mc_realizations must be >= 1");
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t ScenarioConfig::hash() const {
    nlohmann::json j = *this;
    return fnv1a64(j.dump());
}

#define FENESTRA_SCENARIO_FIELDS(X)                                                              \
    X(lambda_m) X(omega_db) X(n_t) X(p_t) X(d_x) X(d_y) X(u_units) X(bandwidth_hz) X(noise_dbm) \
    X(l_r) X(w_r) X(h_r) X(x_b) X(y_b) X(h_t) X(h_b) X(g) X(n_windows) X(win_l) X(win_w)        \
    X(window_center_height) X(r_block) X(rho) X(f_w) X(f_f) X(f_c) X(psi_d_deg) X(theta_d_deg)  \
    X(facade_azimuth_deg) X(e_dn) X(e_sky) X(glazing_beta) X(beta_shape) X(grid_spacing)        \
    X(workplane_height) X(eta) X(d_min) X(t_min_daylight) X(t_i_init) X(theta_max_deg)          \
    X(ratio_cap) X(baseline_floor) X(mc_realizations) X(mc_seed)

void to_json(nlohmann::json& j, const ScenarioConfig& s) {
    j = nlohmann::json::object();
#define X(name) j[#name] = s.name;
    FENESTRA_SCENARIO_FIELDS(X)
#undef X
    j["los_mode"] = to_string(s.los_mode);
}

void from_json(const nlohmann::json& j, ScenarioConfig& s) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    static const std::set<std::string> known = {
#define X(name) #name,
        FENESTRA_SCENARIO_FIELDS(X)
#undef X
        "los_mode", "comment"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) throw ConfigError("unknown scenario key '" + item.key() + "'");
    }
    try {
#define X(name) \
    if (j.contains(#name)) j.at(#name).get_to(s.name);
        FENESTRA_SCENARIO_FIELDS(X)
#undef X
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad scenario value: ") + e.what());
    }
    if (j.contains("los_mode")) s.los_mode = los_mode_from_string(j.at("los_mode").get<std::string>());
}

#undef FENESTRA_SCENARIO_FIELDS

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("scenario file " + path.string() + " is not valid JSON: " + e.what());
    }
    ScenarioConfig s = j.get<ScenarioConfig>();
    s.validate();
    return s;
}

void save_scenario(const ScenarioConfig& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write scenario file " + path.string());
    out << nlohmann::json(s).dump(2) << '\n';
}

}  // namespace fenestra
