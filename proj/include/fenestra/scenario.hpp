#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace fenestra {

/// Raised for malformed configuration or inputs that violate a documented
/// precondition.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LosMode { Analytic, MonteCarlo };

std::string to_string(LosMode mode);
LosMode los_mode_from_string(const std::string& name);

/// Every tunable of the outdoor-to-indoor window scenario. JSON keys match the
/// member names below; unknown keys are rejected so typos do not silently fall
/// back to defaults.
struct ScenarioConfig {
    // Carrier and RIS board.
    double lambda_m = 0.01;
    double omega_db = 5.0;
    int n_t = 32;
    double p_t = 1.0;
    double d_x = 0.005;
    double d_y = 0.005;
    int u_units = 900;
    double bandwidth_hz = 100e6;
    double noise_dbm = -94.0;

    // Room and facade. The facade is the near long wall y = y_b.
    double l_r = 20.0;
    double w_r = 10.0;
    double h_r = 3.0;
    double x_b = 20.0;
    double y_b = 30.0;
    double h_t = 10.0;
    double h_b = 30.0;  // building height, informational only
    double g = 8.0;     // listed alongside the scenario table without a definition; unused
    int n_windows = 2;
    double win_l = 1.2;  // vertical extent
    double win_w = 0.9;  // extent along the facade
    double window_center_height = 1.5;

    // Blockages.
    double r_block = 0.2;
    double rho = 0.01;

    // Daylight.
    double f_w = 0.6;
    double f_f = 0.4;
    double f_c = 0.7;
    double psi_d_deg = 220.0;
    double theta_d_deg = 86.0;
    double facade_azimuth_deg = 270.0;
    double e_dn = 5000.0;
    double e_sky = 8000.0;
    double glazing_beta = 0.70;

    // Users and sampling.
    std::array<double, 4> beta_shape{2.0, 2.0, 2.0, 2.0};
    double grid_spacing = 1.0;
    double workplane_height = 0.8;

    // Objective and constraints.
    double eta = 5.0;
    double d_min = 0.9;
    double t_min_daylight = 0.8;
    double t_i_init = 5.0;
    double theta_max_deg = 80.0;
    double ratio_cap = 100.0;
    double baseline_floor = 1e-9;

    // Blockage evaluation mode for rate maps.
    LosMode los_mode = LosMode::Analytic;
    int mc_realizations = 20000;
    std::uint64_t mc_seed = 1;

    /// Throws ConfigError on any violated invariant.
    void validate() const;

    /// Stable 64-bit digest of the canonical JSON form.
    std::uint64_t hash() const;

    int array_side() const;
};

void to_json(nlohmann::json& j, const ScenarioConfig& s);
void from_json(const nlohmann::json& j, ScenarioConfig& s);

ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& s, const std::filesystem::path& path);

/// FNV-1a over raw bytes.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace fenestra
