#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "airfl/rng.hpp"

namespace airfl {

struct UserGeometry {
    std::vector<Eigen::Vector2d> positions;  // meters, origin = parameter server
    double cell_radius = 0.0;
    double min_distance = 0.0;

    std::vector<double> distances() const {
        std::vector<double> d;
        d.reserve(positions.size());
        for (const auto& p : positions) d.push_back(p.norm());
        return d;
    }
};

struct ChannelSet {
    std::vector<Eigen::VectorXcd> vectors;  // one length-N vector per user
    int round_index = 0;
    double path_loss_exponent = 0.0;
};

// Users uniform over the annulus [min_distance, cell_radius]: radius drawn as
// r = sqrt(u*(R^2 - d_min^2) + d_min^2), angle uniform.
UserGeometry place_users(int count, double cell_radius, double min_distance, Rng& rng);

// h_k = sqrt((d_k/d0)^-alpha) * g_k with d0 = 1 m and g_k i.i.d. CN(0, 1) entries.
ChannelSet draw_channels(const UserGeometry& geometry, int antennas, double alpha,
                         Rng& rng, int round_index = 0);

inline double channel_gain(const Eigen::VectorXcd& h) {
    if (h.size() == 0) throw std::invalid_argument("channel_gain: empty vector");
    return h.norm();
}

}  // namespace airfl
