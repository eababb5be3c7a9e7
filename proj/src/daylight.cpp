#include "fenestra/daylight.hpp"

#include <cmath>
#include <numbers>

#include "fenestra/view_factor.hpp"

namespace fenestra {

namespace {
const Eigen::Vector3d kOutwardNormal{0.0, -1.0, 0.0};
}

DaylightParams DaylightParams::from_config(const ScenarioConfig& s) {
    DaylightParams d;
    d.sun_zenith_deg = s.theta_d_deg;
    d.sun_azimuth_deg = s.psi_d_deg;
    d.facade_azimuth_deg = s.facade_azimuth_deg;
    d.direct_normal_lux = s.e_dn;
    d.diffuse_horizontal_lux = s.e_sky;
    d.glazing_transmittance = s.glazing_beta;
    d.wall_reflectance = s.f_w;
    d.floor_reflectance = s.f_f;
    d.ceiling_reflectance = s.f_c;
    return d;
}

double DaylightParams::sun_elevation() const { return deg2rad(90.0 - sun_zenith_deg); }

Eigen::Vector3d sun_vector(double zenith_deg, double azimuth_deg, double facade_azimuth_deg) {
    const double zen = deg2rad(zenith_deg);
    const double rel = deg2rad(azimuth_deg - facade_azimuth_deg);
    // Compass bearings increase clockwise seen from above; a quarter turn
    // clockwise from the outward normal (-y) is -x.
    const Eigen::Vector2d horizontal = std::cos(rel) * Eigen::Vector2d(0, -1) +
                                       std::sin(rel) * Eigen::Vector2d(-1, 0);
    const Eigen::Vector3d toward_sun(std::sin(zen) * horizontal.x(), std::sin(zen) * horizontal.y(),
                                     std::cos(zen));
    return -toward_sun;
}

double direct_sun(const Eigen::Vector3d& point, const RoomSpec& room, const WindowLayout& layout,
                  const DaylightParams& params) {
    const double elevation = params.sun_elevation();
    if (elevation <= 0 || params.glazing_transmittance <= 0 || params.direct_normal_lux <= 0) return 0.0;
    const Eigen::Vector3d toward =
        -sun_vector(params.sun_zenith_deg, params.sun_azimuth_deg, params.facade_azimuth_deg);
    if (toward.dot(kOutwardNormal) <= 0) return 0.0;  // sun behind the facade

    const double t = (room.facade_y() - point.y()) / toward.y();
    if (t <= 0) return 0.0;
    const Eigen::Vector3d hit = point + t * toward;
    const double half_w = room.window_width / 2, half_h = room.window_height / 2;
    if (std::abs(hit.z() - room.window_center_height) > half_h) return 0.0;
    for (int n = 0; n < layout.size(); ++n) {
        if (std::abs(hit.x() - layout.x(n)) <= half_w)
            return params.direct_normal_lux * std::sin(elevation) * params.glazing_transmittance;
    }
    return 0.0;
}

double window_view_factor(const Eigen::Vector3d& point, const RoomSpec& room,
                          const WindowLayout& layout, int n) {
    const double c = point.y() - room.facade_y();
    if (c <= 0) return 0.0;
    const double u0 = layout.x(n) - room.window_width / 2 - point.x();
    const double u1 = layout.x(n) + room.window_width / 2 - point.x();
    const double w0 = room.window_center_height - room.window_height / 2 - point.z();
    const double w1 = room.window_center_height + room.window_height / 2 - point.z();
    return vf::perpendicular<double>(u0, u1, w0, w1, c);
}

double direct_sky(const Eigen::Vector3d& point, const RoomSpec& room, const WindowLayout& layout,
                  const DaylightParams& params) {
    double vf_sum = 0.0;
    for (int n = 0; n < layout.size(); ++n) vf_sum += window_view_factor(point, room, layout, n);
    return params.diffuse_horizontal_lux * params.glazing_transmittance * vf_sum;
}

AmbientTerm indirect_two_bounce(const WindowLayout& layout, const DaylightParams& params,
                                const RoomSpec& room) {
    const double window_area = room.window_width * room.window_height;
    const double beta = params.glazing_transmittance;
    const Eigen::Vector3d toward =
        -sun_vector(params.sun_zenith_deg, params.sun_azimuth_deg, params.facade_azimuth_deg);
    const double cos_inc = toward.dot(kOutwardNormal);
    const bool sunlit = cos_inc > 0 && params.sun_elevation() > 0;

    const double n = layout.size();
    const double flux_sky = n * window_area * beta * params.diffuse_horizontal_lux / 2;
    const double flux_sun = sunlit ? n * window_area * beta * params.direct_normal_lux * cos_inc : 0.0;

    const double a_walls = 2 * (room.length + room.width) * room.height;
    const double a_floor = room.length * room.width;
    const double a_ceiling = a_floor;
    const double a_total = a_walls + a_floor + a_ceiling;
    const double f_mean = (params.wall_reflectance * a_walls + params.floor_reflectance * a_floor +
                           params.ceiling_reflectance * a_ceiling) /
                          a_total;
    const double bounce = (f_mean + f_mean * f_mean) / a_total;
    return {flux_sky * bounce, flux_sun * bounce};
}

IlluminanceMap illuminance_map(const Scene& scene, const WindowLayout& layout) {
    const DaylightParams params = DaylightParams::from_config(scene.config);
    const Eigen::Index m = scene.grid.size();
    IlluminanceMap map;
    map.sky_direct.resize(m);
    map.sun_direct.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Vector3d p = scene.grid.point(k);
        map.sky_direct(k) = direct_sky(p, scene.room, layout, params);
        map.sun_direct(k) = direct_sun(p, scene.room, layout, params);
    }
    const AmbientTerm ambient = indirect_two_bounce(layout, params, scene.room);
    map.sky_indirect = Eigen::VectorXd::Constant(m, ambient.sky);
    map.sun_indirect = Eigen::VectorXd::Constant(m, ambient.sun);
    map.total = map.sky_direct + map.sky_indirect + map.sun_direct + map.sun_indirect;
    return map;
}

}  // namespace fenestra
