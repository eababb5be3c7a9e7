#include "fenestra/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace fenestra {

namespace {
constexpr double kSpacingTolerance = 1e-9;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

RoomSpec RoomSpec::from_config(const ScenarioConfig& s) {
    RoomSpec r;
    r.length = s.l_r;
    r.width = s.w_r;
    r.height = s.h_r;
    r.origin = {s.x_b, s.y_b};
    r.window_count = s.n_windows;
    r.window_height = s.win_l;
    r.window_width = s.win_w;
    r.window_center_height = s.window_center_height;
    r.validate();
    return r;
}

void RoomSpec::validate() const {
    if (!(length > 0 && width > 0 && height > 0)) throw ConfigError("room dimensions must be positive");
    if (!(window_width > 0 && window_height > 0)) throw ConfigError("window size must be positive");
    if (window_count < 1) throw ConfigError("window count must be >= 1");
    if (window_count * window_width > length) throw ConfigError("windows do not fit on the facade");
    if (window_center_height - window_height / 2 < 0 ||
        window_center_height + window_height / 2 > height)
        throw ConfigError("window rectangle leaves the wall vertically");
}

bool RoomSpec::contains_footprint(const Eigen::Vector2d& p) const {
    return p.x() > origin.x() && p.x() < origin.x() + length && p.y() > origin.y() &&
           p.y() < origin.y() + width;
}

BaseStation BaseStation::from_config(const ScenarioConfig& s) {
    BaseStation b;
    b.height = s.h_t;
    b.antennas = s.n_t;
    b.power_w = s.p_t;
    return b;
}

std::string to_string(LayoutViolation::Kind kind) {
    switch (kind) {
        case LayoutViolation::Kind::Count: return "count";
        case LayoutViolation::Kind::Order: return "order";
        case LayoutViolation::Kind::Spacing: return "spacing";
        case LayoutViolation::Kind::WallBounds: return "wall_bounds";
        case LayoutViolation::Kind::SteeringCone: return "steering_cone";
    }
    return "unknown";
}

MeasurementGrid build_grid(const RoomSpec& room, double spacing, double workplane_height) {
    if (!(spacing > 0)) throw ConfigError("grid spacing must be positive");
    const int cols = static_cast<int>(std::floor(room.length / spacing + 1e-9));
    const int rows = static_cast<int>(std::floor(room.width / spacing + 1e-9));
    if (cols < 1 || rows < 1 || spacing >= std::min(room.length, room.width))
        throw ConfigError("grid spacing too large: no interior measurement point fits");

    // Centre the lattice; with an integral cell count this is a half-spacing inset.
    const double mx = (room.length - (cols - 1) * spacing) / 2;
    const double my = (room.width - (rows - 1) * spacing) / 2;

    MeasurementGrid g;
    g.rows = rows;
    g.cols = cols;
    g.spacing = spacing;
    g.origin = room.origin;
    g.extent = {room.length, room.width};
    g.points.resize(3, static_cast<Eigen::Index>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            g.points.col(r * cols + c) << room.origin.x() + mx + c * spacing,
                room.origin.y() + my + r * spacing, workplane_height;
        }
    }
    return g;
}

WeightMatrix user_weights(const MeasurementGrid& grid, const std::array<double, 4>& shape) {
    for (double a : shape)
        if (!(a > 0)) throw ConfigError("beta shape parameters must be positive");
    const Eigen::Index m = grid.size();
    if (m == 0) throw ConfigError("empty measurement grid");

    Eigen::ArrayXd depth = (grid.points.row(1).array() - grid.origin.y()) / grid.extent.y();
    Eigen::ArrayXd along = (grid.points.row(0).array() - grid.origin.x()) / grid.extent.x();

    // log-density up to a constant; normalisation makes the beta functions cancel.
    Eigen::ArrayXd logw = (shape[0] - 1) * depth.log() + (shape[1] - 1) * (1 - depth).log() +
                          (shape[2] - 1) * along.log() + (shape[3] - 1) * (1 - along).log();
    const Eigen::ArrayXd w = (logw - logw.maxCoeff()).exp();

    WeightMatrix out;
    out.shape = shape;
    out.w = (w * (static_cast<double>(m) / w.sum())).matrix();
    return out;
}

BlockageField sample_blockages(const RoomSpec& room, double density, double radius,
                               std::uint64_t seed, double margin) {
    if (density < 0) throw ConfigError("blockage density must be >= 0");
    if (!(radius > 0)) throw ConfigError("blockage radius must be positive");
    BlockageField f;
    f.density = density;
    f.radius = radius;
    f.seed = seed;
    const double lx = room.length + 2 * margin;
    const double ly = room.width + 2 * margin;
    std::mt19937_64 rng(seed);
    int count = 0;
    if (density > 0) count = std::poisson_distribution<int>(density * lx * ly)(rng);
    std::uniform_real_distribution<double> ux(room.origin.x() - margin, room.origin.x() - margin + lx);
    std::uniform_real_distribution<double> uy(room.origin.y() - margin, room.origin.y() - margin + ly);
    f.centers.resize(2, count);
    for (int k = 0; k < count; ++k) {
        f.centers(0, k) = ux(rng);
        f.centers(1, k) = uy(rng);
    }
    return f;
}

WindowLayout udw_layout(const RoomSpec& room) {
    const int n = room.window_count;
    WindowLayout l(n);
    const double pitch = room.length / n;
    for (int k = 0; k < n; ++k) l.x(k) = room.origin.x() + (k + 0.5) * pitch;
    return l;
}

std::vector<LayoutViolation> validate_layout(const WindowLayout& layout, const RoomSpec& room,
                                             double d_min, double max_elevation) {
    using Kind = LayoutViolation::Kind;
    std::vector<LayoutViolation> out;
    auto add = [&](Kind k, int a, int b, std::string msg) { out.push_back({k, a, b, std::move(msg)}); };

    const int n = layout.size();
    if (n != room.window_count || layout.elevation.size() != n || layout.azimuth.size() != n) {
        std::ostringstream s;
        s << "expected " << room.window_count << " windows, got " << n;
        add(Kind::Count, -1, -1, s.str());
        return out;
    }
    for (int k = 0; k < n; ++k) {
        const double x = layout.x(k);
        if (!std::isfinite(x) || x < room.wall_min() - kSpacingTolerance ||
            x > room.wall_max() + kSpacingTolerance) {
            std::ostringstream s;
            s << "window " << k + 1 << " centre x=" << x << " outside wall extent [" << room.wall_min()
              << ", " << room.wall_max() << "]";
            add(Kind::WallBounds, k, -1, s.str());
        }
    }
    for (int k = 0; k + 1 < n; ++k) {
        const double gap = layout.x(k + 1) - layout.x(k);
        if (gap < 0) {
            std::ostringstream s;
            s << "windows " << k + 1 << " and " << k + 2 << " are not sorted by x";
            add(Kind::Order, k, k + 1, s.str());
        } else if (gap < d_min - kSpacingTolerance) {
            std::ostringstream s;
            s << "windows " << k + 1 << " and " << k + 2 << " are " << gap
              << " m apart, below d_min=" << d_min;
            add(Kind::Spacing, k, k + 1, s.str());
        }
    }
    for (int k = 0; k < n; ++k) {
        const double el = layout.elevation(k);
        const double az = layout.azimuth(k);
        if (!std::isfinite(el) || el < 0 || el > max_elevation + 1e-12 || !std::isfinite(az) ||
            az < 0 || az >= 2 * std::numbers::pi) {
            std::ostringstream s;
            s << "window " << k + 1 << " steering (" << rad2deg(el) << " deg, " << rad2deg(az)
              << " deg) outside cone [0, " << rad2deg(max_elevation) << "] x [0, 360)";
            add(Kind::SteeringCone, k, -1, s.str());
        }
    }
    return out;
}

Scene Scene::build(const ScenarioConfig& config) {
    config.validate();
    Scene s;
    s.config = config;
    s.room = RoomSpec::from_config(config);
    s.bs = BaseStation::from_config(config);
    s.grid = build_grid(s.room, config.grid_spacing, config.workplane_height);
    s.weights = user_weights(s.grid, config.beta_shape);
    return s;
}

double Scene::max_elevation() const { return deg2rad(config.theta_max_deg); }

}  // namespace fenestra
