#pragma once

#include <Eigen/Dense>

#include "fenestra/scene.hpp"

namespace fenestra {

/// Parametric sky: a direct-normal sun beam plus a uniform diffuse sky.
struct DaylightParams {
    double sun_zenith_deg = 86.0;
    double sun_azimuth_deg = 220.0;      // compass, clockwise from north
    double facade_azimuth_deg = 270.0;   // compass bearing of the facade's outward normal
    double direct_normal_lux = 5000.0;
    double diffuse_horizontal_lux = 8000.0;
    double glazing_transmittance = 0.70;
    double wall_reflectance = 0.6;
    double floor_reflectance = 0.4;
    double ceiling_reflectance = 0.7;

    static DaylightParams from_config(const ScenarioConfig& s);
    double sun_elevation() const;  // rad
};

/// Unit vector travelling from the sun toward the scene, in the room frame
/// (x along the facade, y into the room, z up). The zenith angle is measured
/// from vertical.
Eigen::Vector3d sun_vector(double zenith_deg, double azimuth_deg, double facade_azimuth_deg = 270.0);

/// Direct-beam illuminance on the horizontal workplane at `point` (lux).
double direct_sun(const Eigen::Vector3d& point, const RoomSpec& room, const WindowLayout& layout,
                  const DaylightParams& params);

/// Horizontal-receiver view factor from `point` to window n's aperture.
double window_view_factor(const Eigen::Vector3d& point, const RoomSpec& room,
                          const WindowLayout& layout, int n);

double direct_sky(const Eigen::Vector3d& point, const RoomSpec& room, const WindowLayout& layout,
                  const DaylightParams& params);

/// Uniform interreflected illuminance truncated after two bounces, split into
/// the sky-borne and sun-borne shares of the admitted flux.
struct AmbientTerm {
    double sky = 0.0;
    double sun = 0.0;
    double total() const { return sky + sun; }
};

AmbientTerm indirect_two_bounce(const WindowLayout& layout, const DaylightParams& params,
                                const RoomSpec& room);

struct IlluminanceMap {
    Eigen::VectorXd total;
    Eigen::VectorXd sky_direct;
    Eigen::VectorXd sky_indirect;
    Eigen::VectorXd sun_direct;
    Eigen::VectorXd sun_indirect;
};

IlluminanceMap illuminance_map(const Scene& scene, const WindowLayout& layout);

}  // namespace fenestra
