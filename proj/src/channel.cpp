#include "airfl/channel.hpp"

#include <cmath>

namespace airfl {

UserGeometry place_users(int count, double cell_radius, double min_distance, Rng& rng) {
    if (count < 1) throw std::invalid_argument("invalid-geometry: count must be >= 1");
    if (!(min_distance > 0.0) || min_distance >= cell_radius) {
        throw std::invalid_argument("invalid-geometry: require 0 < min_distance < cell_radius");
    }
    UserGeometry geo;
    geo.cell_radius = cell_radius;
    geo.min_distance = min_distance;
    geo.positions.reserve(count);
    const double r2_lo = min_distance * min_distance;
    const double r2_hi = cell_radius * cell_radius;
    for (int i = 0; i < count; ++i) {
        const double r = std::sqrt(rng.uniform() * (r2_hi - r2_lo) + r2_lo);
        const double phi = rng.uniform() * 2.0 * M_PI;
        geo.positions.emplace_back(r * std::cos(phi), r * std::sin(phi));
    }
    return geo;
}

ChannelSet draw_channels(const UserGeometry& geometry, int antennas, double alpha,
                         Rng& rng, int round_index) {
    if (antennas < 1) throw std::invalid_argument("draw_channels: antennas must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("draw_channels: alpha must be > 0");
    ChannelSet cs;
    cs.round_index = round_index;
    cs.path_loss_exponent = alpha;
    cs.vectors.reserve(geometry.positions.size());
    for (const auto& p : geometry.positions) {
        const double d = p.norm();  // reference distance d0 = 1 m
        const double amp = std::sqrt(std::pow(d, -alpha));
        Eigen::VectorXcd h(antennas);
        for (int i = 0; i < antennas; ++i) h[i] = amp * rng.complex_gaussian(1.0);
        cs.vectors.push_back(std::move(h));
    }
    return cs;
}

}  // namespace airfl
