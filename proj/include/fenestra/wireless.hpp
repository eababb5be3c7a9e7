#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "fenestra/scene.hpp"

namespace fenestra {

/// Carrier, board and link-budget constants of the RIS model.
struct ChannelParams {
    double wavelength = 0.01;
    double pitch_x = 0.005;
    double pitch_y = 0.005;
    int side = 30;  // units per board edge, U = side^2
    double penetration_loss_db = 5.0;
    double bandwidth_hz = 100e6;
    double noise_w = 0.0;
    double tx_power_w = 1.0;
    int tx_antennas = 32;

    static ChannelParams from_config(const ScenarioConfig& s);

    int units() const { return side * side; }
    /// Amplitude transmission factor; its square is the linear power transmission.
    double amplitude() const { return std::pow(10.0, -penetration_loss_db / 20.0); }
    double wavenumber() const { return 2 * std::numbers::pi / wavelength; }
};

/// Distance plus board-frame direction. Elevation is measured from the board
/// normal on the relevant side, azimuth in the board plane from the facade axis.
struct LinkGeometry {
    double distance = 1.0;
    double elevation = 0.0;
    double azimuth = 0.0;
};

double wrap_two_pi(double angle);

template <typename Scalar>
Scalar wrap_two_pi_t(Scalar angle) {
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar r = std::fmod(angle, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

/// Phase of unit (i, j), both 1-based, as the difference between the
/// location-induced phase and the programmed field pattern; result in [0, 2pi).
template <typename Scalar>
Scalar array_phase(int i, int j, const LinkGeometry& incident, const LinkGeometry& depart,
                   const LinkGeometry& steer, const ChannelParams& params) {
    using std::cos;
    using std::sin;
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    const Scalar k = two_pi / Scalar(params.wavelength);
    const Scalar u = (Scalar(i) - Scalar(0.5)) * Scalar(params.pitch_x);
    const Scalar v = (Scalar(j) - Scalar(0.5)) * Scalar(params.pitch_y);
    auto lateral = [](const LinkGeometry& g) {
        const Scalar st = sin(Scalar(g.elevation));
        return std::pair<Scalar, Scalar>{st * cos(Scalar(g.azimuth)), st * sin(Scalar(g.azimuth))};
    };
    const auto [tx, ty] = lateral(incident);
    const auto [rx, ry] = lateral(depart);
    const auto [sx, sy] = lateral(steer);
    const Scalar phase_location = wrap_two_pi_t<Scalar>(-k * ((tx + rx) * u + (ty + ry) * v));
    const Scalar phase_pattern = wrap_two_pi_t<Scalar>(-k * ((tx + sx) * u + (ty + sy) * v));
    return wrap_two_pi_t<Scalar>(phase_location - phase_pattern);
}

/// Coherent unit sum  sum_ij exp(-j phi_ij)  evaluated term by term.
std::complex<double> array_factor_direct(const LinkGeometry& incident, const LinkGeometry& depart,
                                         const LinkGeometry& steer, const ChannelParams& params);

/// |sum_ij exp(-j phi_ij)| via the separable Dirichlet-kernel form. The
/// incident terms cancel in the phase difference, so only departure and
/// steering directions enter.
double array_gain(const LinkGeometry& depart, const LinkGeometry& steer, const ChannelParams& params);

Eigen::Vector3d window_center(const RoomSpec& room, const WindowLayout& layout, int n);

/// BS -> window n. Throws std::out_of_range for a bad index and
/// std::domain_error when the BS lies in or behind the wall plane.
LinkGeometry bs_window_geometry(const BaseStation& bs, const RoomSpec& room,
                                const WindowLayout& layout, int n);

/// Window n -> indoor point. Throws std::domain_error if the point is not in
/// front of the board.
LinkGeometry window_point_geometry(const RoomSpec& room, const WindowLayout& layout, int n,
                                   const Eigen::Vector3d& point);

inline LinkGeometry steering_of(const WindowLayout& layout, int n) {
    return {1.0, layout.elevation(n), layout.azimuth(n)};
}

/// Received power for given link geometry (W).
double received_power(const ChannelParams& params, const LinkGeometry& incident,
                      const LinkGeometry& depart, const LinkGeometry& steer);

double received_power(const ChannelParams& params, const BaseStation& bs, const RoomSpec& room,
                      const WindowLayout& layout, int n, const Eigen::Vector3d& point);

/// Boolean-model probability that a planar segment of length `planar_length`
/// misses every radius-R disk of an intensity-rho Poisson field.
double los_probability(double planar_length, double density, double radius);

double los_probability_single(const RoomSpec& room, const WindowLayout& layout, int n,
                              const Eigen::Vector3d& point, double density, double radius);

/// Probability that exactly the windows in `subset` (bit n set = window n LoS)
/// are unblocked, assuming independent links.
double subset_probability(std::uint32_t subset, const Eigen::VectorXd& link_probabilities);

/// True when the planar segment a-b passes within `radius` of any centre.
bool segment_blocked(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Matrix2Xd& centers,
                     double radius);

/// Shared Poisson realisations used by the Monte-Carlo LoS mode. Fields cover
/// the room grown by one radius so cylinders overlapping the room from any
/// side are represented, which is the support of the Boolean model.
class LosEnsemble {
public:
    LosEnsemble(const RoomSpec& room, double density, double radius, int realizations,
                std::uint64_t seed);

    /// Empirical frequency of every LoS pattern (index = subset mask) for the
    /// window->point links of `layout`.
    Eigen::VectorXd subset_frequencies(const RoomSpec& room, const WindowLayout& layout,
                                       const Eigen::Vector3d& point) const;

    int realizations() const { return static_cast<int>(fields_.size()); }
    double radius() const { return radius_; }

private:
    std::vector<BlockageField> fields_;
    double radius_;
};

/// Probabilities of every LoS pattern for the layout's links to `point`,
/// indexed by subset mask (entry 0 = all blocked).
Eigen::VectorXd pattern_probabilities(const Scene& scene, const WindowLayout& layout,
                                      const Eigen::Vector3d& point, LosMode mode,
                                      const LosEnsemble* ensemble = nullptr);

/// Shannon rate of every LoS pattern given per-window powers (bit/s).
Eigen::VectorXd pattern_rates(const Eigen::VectorXd& powers, double bandwidth_hz, double noise_w);

double expected_rate(const Scene& scene, const WindowLayout& layout, const Eigen::Vector3d& point,
                     LosMode mode, const LosEnsemble* ensemble = nullptr);

struct SumRateMap {
    Eigen::VectorXd gamma;  // bit/s per grid point
    std::uint64_t layout_hash = 0;
    LosMode mode = LosMode::Analytic;
};

std::uint64_t layout_hash(const WindowLayout& layout);

/// Expected rate at every grid point. Monte-Carlo mode builds its ensemble
/// from the scenario's mc_realizations and mc_seed unless one is supplied.
SumRateMap rate_map(const Scene& scene, const WindowLayout& layout, LosMode mode,
                    const LosEnsemble* ensemble = nullptr);

}  // namespace fenestra
