#include "fenestra/wireless.hpp"

#include <algorithm>
#include <optional>
#include <cstring>
#include <stdexcept>

namespace fenestra {

ChannelParams ChannelParams::from_config(const ScenarioConfig& s) {
    ChannelParams p;
    p.wavelength = s.lambda_m;
    p.pitch_x = s.d_x;
    p.pitch_y = s.d_y;
    p.side = s.array_side();
    p.penetration_loss_db = s.omega_db;
    p.bandwidth_hz = s.bandwidth_hz;
    p.noise_w = std::pow(10.0, (s.noise_dbm - 30.0) / 10.0);
    p.tx_power_w = s.p_t;
    p.tx_antennas = s.n_t;
    return p;
}

double wrap_two_pi(double angle) { return wrap_two_pi_t<double>(angle); }

std::complex<double> array_factor_direct(const LinkGeometry& incident, const LinkGeometry& depart,
                                         const LinkGeometry& steer, const ChannelParams& params) {
    std::complex<double> sum = 0.0;
    for (int i = 1; i <= params.side; ++i)
        for (int j = 1; j <= params.side; ++j)
            sum += std::polar(1.0, -array_phase<double>(i, j, incident, depart, steer, params));
    return sum;
}

namespace {

// |sum_{i=1..n} exp(j*alpha*(i - 1/2))|
double dirichlet_magnitude(int n, double alpha) {
    const double s = std::sin(alpha / 2);
    if (std::abs(s) < 1e-7) {
        std::complex<double> sum = 0.0;
        for (int i = 1; i <= n; ++i) sum += std::polar(1.0, alpha * (i - 0.5));
        return std::abs(sum);
    }
    return std::abs(std::sin(n * alpha / 2) / s);
}

}  // namespace

double array_gain(const LinkGeometry& depart, const LinkGeometry& steer, const ChannelParams& params) {
    const double k = params.wavenumber();
    const double sr = std::sin(depart.elevation), ss = std::sin(steer.elevation);
    const double du = sr * std::cos(depart.azimuth) - ss * std::cos(steer.azimuth);
    const double dv = sr * std::sin(depart.azimuth) - ss * std::sin(steer.azimuth);
    return dirichlet_magnitude(params.side, k * du * params.pitch_x) *
           dirichlet_magnitude(params.side, k * dv * params.pitch_y);
}

Eigen::Vector3d window_center(const RoomSpec& room, const WindowLayout& layout, int n) {
    if (n < 0 || n >= layout.size()) throw std::out_of_range("window index out of range");
    return {layout.x(n), room.facade_y(), room.window_center_height};
}

LinkGeometry bs_window_geometry(const BaseStation& bs, const RoomSpec& room,
                                const WindowLayout& layout, int n) {
    const Eigen::Vector3d d = bs.location() - window_center(room, layout, n);
    const double dist = d.norm();
    // Outward board normal is -y.
    const double normal = -d.y();
    if (dist <= 0 || normal <= 1e-12 * dist)
        throw std::domain_error("degenerate geometry: base station in or behind the wall plane");
    return {dist, std::acos(std::min(1.0, normal / dist)), wrap_two_pi(std::atan2(d.z(), d.x()))};
}

LinkGeometry window_point_geometry(const RoomSpec& room, const WindowLayout& layout, int n,
                                   const Eigen::Vector3d& point) {
    const Eigen::Vector3d e = point - window_center(room, layout, n);
    const double dist = e.norm();
    if (dist <= 0 || e.y() <= 1e-12 * dist)
        throw std::domain_error("degenerate geometry: point not in front of the board");
    return {dist, std::acos(std::min(1.0, e.y() / dist)), wrap_two_pi(std::atan2(e.z(), e.x()))};
}

double received_power(const ChannelParams& p, const LinkGeometry& incident, const LinkGeometry& depart,
                      const LinkGeometry& steer) {
    if (incident.distance <= 0 || depart.distance <= 0)
        throw std::domain_error("received_power: zero link distance");
    const double gain = array_gain(depart, steer, p);
    const double omega = p.amplitude();
    const double num = p.tx_power_w * p.tx_antennas * p.tx_antennas * p.pitch_x * p.pitch_x *
                       p.pitch_y * p.pitch_y * p.wavelength * p.wavelength *
                       std::cos(incident.elevation) * omega * omega * gain * gain;
    const double pi = std::numbers::pi;
    return num / (16 * pi * pi * incident.distance * incident.distance * depart.distance *
                  depart.distance);
}

double received_power(const ChannelParams& params, const BaseStation& bs, const RoomSpec& room,
                      const WindowLayout& layout, int n, const Eigen::Vector3d& point) {
    return received_power(params, bs_window_geometry(bs, room, layout, n),
                          window_point_geometry(room, layout, n, point), steering_of(layout, n));
}

double los_probability(double planar_length, double density, double radius) {
    return std::exp(-density * (2 * radius * planar_length + std::numbers::pi * radius * radius));
}

double los_probability_single(const RoomSpec& room, const WindowLayout& layout, int n,
                              const Eigen::Vector3d& point, double density, double radius) {
    const Eigen::Vector3d c = window_center(room, layout, n);
    // Both ends lie inside the closed room footprint, so the segment needs no clipping.
    const double d_xy = (point.head<2>() - c.head<2>()).norm();
    return los_probability(d_xy, density, radius);
}

double subset_probability(std::uint32_t subset, const Eigen::VectorXd& p) {
    double prob = 1.0;
    for (Eigen::Index n = 0; n < p.size(); ++n)
        prob *= (subset >> n) & 1U ? p(n) : 1.0 - p(n);
    return prob;
}

bool segment_blocked(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     const Eigen::Matrix2Xd& centers, double radius) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double r2 = radius * radius;
    for (Eigen::Index k = 0; k < centers.cols(); ++k) {
        const Eigen::Vector2d ac = centers.col(k) - a;
        const double t = len2 > 0 ? std::clamp(ac.dot(ab) / len2, 0.0, 1.0) : 0.0;
        if ((ac - t * ab).squaredNorm() < r2) return true;
    }
    return false;
}

LosEnsemble::LosEnsemble(const RoomSpec& room, double density, double radius, int realizations,
                         std::uint64_t seed)
    : radius_(radius) {
    if (realizations < 1) throw ConfigError("LosEnsemble needs at least one realisation");
    fields_.reserve(static_cast<std::size_t>(realizations));
    // Independent, reproducible substreams per realisation.
    for (int k = 0; k < realizations; ++k)
        fields_.push_back(sample_blockages(room, density, radius,
                                           seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k),
                                           radius));
}

Eigen::VectorXd LosEnsemble::subset_frequencies(const RoomSpec& room, const WindowLayout& layout,
                                                const Eigen::Vector3d& point) const {
    const int n = layout.size();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
    std::vector<Eigen::Vector2d> ends(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) ends[static_cast<std::size_t>(w)] = window_center(room, layout, w).head<2>();
    const Eigen::Vector2d p = point.head<2>();
    for (const BlockageField& f : fields_) {
        std::uint32_t mask = 0;
        for (int w = 0; w < n; ++w)
            if (!segment_blocked(ends[static_cast<std::size_t>(w)], p, f.centers, radius_))
                mask |= 1U << w;
        counts(mask) += 1.0;
    }
    return counts / static_cast<double>(fields_.size());
}

Eigen::VectorXd pattern_probabilities(const Scene& scene, const WindowLayout& layout,
                                      const Eigen::Vector3d& point, LosMode mode,
                                      const LosEnsemble* ensemble) {
    const int n = layout.size();
    if (mode == LosMode::MonteCarlo) {
        if (!ensemble) throw std::invalid_argument("Monte-Carlo LoS mode needs an ensemble");
        return ensemble->subset_frequencies(scene.room, layout, point);
    }
    Eigen::VectorXd p(n);
    for (int w = 0; w < n; ++w)
        p(w) = los_probability_single(scene.room, layout, w, point, scene.config.rho,
                                      scene.config.r_block);
    Eigen::VectorXd out(Eigen::Index{1} << n);
    for (std::uint32_t z = 0; z < (1U << n); ++z) out(z) = subset_probability(z, p);
    return out;
}

Eigen::VectorXd pattern_rates(const Eigen::VectorXd& powers, double bandwidth_hz, double noise_w) {
    const Eigen::Index n = powers.size();
    const Eigen::ArrayXd amp = powers.array().sqrt();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index{1} << n);
    for (std::uint32_t z = 1; z < (1U << n); ++z) {
        double s = 0;
        for (Eigen::Index w = 0; w < n; ++w)
            if ((z >> w) & 1U) s += amp(w);
        out(z) = bandwidth_hz * std::log2(1.0 + s * s / noise_w);
    }
    return out;
}

double expected_rate(const Scene& scene, const WindowLayout& layout, const Eigen::Vector3d& point,
                     LosMode mode, const LosEnsemble* ensemble) {
    const ChannelParams params = ChannelParams::from_config(scene.config);
    const int n = layout.size();
    Eigen::VectorXd powers(n);
    for (int w = 0; w < n; ++w) powers(w) = received_power(params, scene.bs, scene.room, layout, w, point);
    const Eigen::VectorXd probs = pattern_probabilities(scene, layout, point, mode, ensemble);
    const Eigen::VectorXd rates = pattern_rates(powers, params.bandwidth_hz, params.noise_w);
    return probs.dot(rates);  // entry 0 carries zero rate
}

std::uint64_t layout_hash(const WindowLayout& layout) {
    std::string bytes;
    auto append = [&](const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            char buf[sizeof(double)];
            const double d = v(i);
            std::memcpy(buf, &d, sizeof d);
            bytes.append(buf, sizeof buf);
        }
    };
    append(layout.x);
    append(layout.elevation);
    append(layout.azimuth);
    return fnv1a64(bytes);
}

SumRateMap rate_map(const Scene& scene, const WindowLayout& layout, LosMode mode,
                    const LosEnsemble* ensemble) {
    std::optional<LosEnsemble> owned;
    if (mode == LosMode::MonteCarlo && !ensemble) {
        owned.emplace(scene.room, scene.config.rho, scene.config.r_block, scene.config.mc_realizations,
                      scene.config.mc_seed);
        ensemble = &*owned;
    }
    const ChannelParams params = ChannelParams::from_config(scene.config);
    const int n = layout.size();
    std::vector<LinkGeometry> incident(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) incident[static_cast<std::size_t>(w)] = bs_window_geometry(scene.bs, scene.room, layout, w);

    SumRateMap out;
    out.mode = mode;
    out.layout_hash = layout_hash(layout);
    out.gamma.resize(scene.grid.size());
    Eigen::VectorXd powers(n);
    for (Eigen::Index m = 0; m < scene.grid.size(); ++m) {
        const Eigen::Vector3d pt = scene.grid.point(m);
        for (int w = 0; w < n; ++w)
            powers(w) = received_power(params, incident[static_cast<std::size_t>(w)],
                                       window_point_geometry(scene.room, layout, w, pt),
                                       steering_of(layout, w));
        const Eigen::VectorXd probs = pattern_probabilities(scene, layout, pt, mode, ensemble);
        out.gamma(m) = probs.dot(pattern_rates(powers, params.bandwidth_hz, params.noise_w));
    }
    return out;
}

}  // namespace fenestra
