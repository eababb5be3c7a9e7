#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fenestra/scenario.hpp"

namespace fenestra {

/// Rectangular room whose near long wall (y = origin.y) carries the windows.
/// Lengths are metres. `length` runs along the facade (x), `width` is the depth (y).
struct RoomSpec {
    double length = 20.0;
    double width = 10.0;
    double height = 3.0;
    Eigen::Vector2d origin{20.0, 30.0};
    int window_count = 2;
    double window_height = 1.2;  // vertical extent L
    double window_width = 0.9;   // extent along the facade W
    double window_center_height = 1.5;

    static RoomSpec from_config(const ScenarioConfig& s);
    void validate() const;

    double facade_y() const { return origin.y(); }
    double wall_min() const { return origin.x() + window_width / 2; }
    double wall_max() const { return origin.x() + length - window_width / 2; }
    bool contains_footprint(const Eigen::Vector2d& p) const;
};

struct BaseStation {
    Eigen::Vector2d position{0.0, 0.0};
    double height = 10.0;
    int antennas = 32;
    double power_w = 1.0;

    static BaseStation from_config(const ScenarioConfig& s);
    Eigen::Vector3d location() const { return {position.x(), position.y(), height}; }
};

/// Regular lattice of measurement points. Row r runs along the facade at depth
/// index r (row 0 is nearest the windows); point index = r * cols + c.
struct MeasurementGrid {
    Eigen::Matrix3Xd points;
    int rows = 0;
    int cols = 0;
    double spacing = 0.0;
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();
    Eigen::Vector2d extent = Eigen::Vector2d::Zero();  // (length, width)

    Eigen::Index size() const { return points.cols(); }
    Eigen::Vector3d point(Eigen::Index m) const { return points.col(m); }
};

struct WeightMatrix {
    Eigen::VectorXd w;
    std::array<double, 4> shape{2.0, 2.0, 2.0, 2.0};
};

/// One realisation of the Poisson cylinder field, in plan projection.
struct BlockageField {
    double density = 0.0;
    double radius = 0.2;
    std::uint64_t seed = 0;
    Eigen::Matrix2Xd centers;

    Eigen::Index count() const { return centers.cols(); }
};

/// Decision variables: facade abscissas (m) and per-window steering elevation
/// and azimuth (rad, board frame).
struct WindowLayout {
    Eigen::VectorXd x;
    Eigen::VectorXd elevation;
    Eigen::VectorXd azimuth;

    WindowLayout() = default;
    explicit WindowLayout(int n)
        : x(Eigen::VectorXd::Zero(n)),
          elevation(Eigen::VectorXd::Zero(n)),
          azimuth(Eigen::VectorXd::Zero(n)) {}

    int size() const { return static_cast<int>(x.size()); }
    bool operator==(const WindowLayout& o) const {
        return x == o.x && elevation == o.elevation && azimuth == o.azimuth;
    }
};

struct LayoutViolation {
    enum class Kind { Count, Order, Spacing, WallBounds, SteeringCone };
    Kind kind;
    int first = -1;   // 0-based window index
    int second = -1;  // second index for pairwise constraints
    std::string message;
};

std::string to_string(LayoutViolation::Kind kind);

MeasurementGrid build_grid(const RoomSpec& room, double spacing, double workplane_height);

/// Product-of-beta user weights on the grid, normalised so they sum to M.
/// The first shape pair acts on normalised depth from the facade, the second
/// on normalised position along the facade.
WeightMatrix user_weights(const MeasurementGrid& grid, const std::array<double, 4>& shape);

/// Poisson field with intensity `density` over the room footprint grown by
/// `margin` on every side.
BlockageField sample_blockages(const RoomSpec& room, double density, double radius,
                               std::uint64_t seed, double margin = 0.0);

WindowLayout udw_layout(const RoomSpec& room);

/// Every violated constraint; empty means feasible.
std::vector<LayoutViolation> validate_layout(const WindowLayout& layout, const RoomSpec& room,
                                             double d_min, double max_elevation);

/// Immutable world built once per scenario and shared read-only.
struct Scene {
    ScenarioConfig config;
    RoomSpec room;
    BaseStation bs;
    MeasurementGrid grid;
    WeightMatrix weights;

    static Scene build(const ScenarioConfig& config);
    double max_elevation() const;
};

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace fenestra
