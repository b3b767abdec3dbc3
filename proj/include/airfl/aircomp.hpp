#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "airfl/rng.hpp"

namespace airfl {

// One round's analog aggregation link: receive beamformer, uniform-forcing
// transmit scalings, normalizing factor and power/noise levels.
struct AirCompLink {
    Eigen::VectorXcd beamformer;                // a, length N
    std::vector<std::complex<double>> scalings; // b_k, one per selected user
    double tau = 0.0;
    double noise_variance = 0.0;                // sigma^2
    double max_power = 0.0;                     // P0
    std::vector<double> phis;                   // phi_k, positive
};

struct AggregationResult {
    Eigen::VectorXd target;    // g_j = sum_k phi_k s_kj
    Eigen::VectorXd estimate;  // Re(a^H r_j / sqrt(tau))
    double closed_form_mse = 0.0;
    // Mean |ghat_j - g_j|^2 over coordinates with the complex estimate; this
    // is what the closed form predicts (both noise quadratures counted).
    double empirical_mse = 0.0;
};

inline double pre_process(double value, double user_weight) {
    if (!(user_weight > 0.0)) throw std::invalid_argument("pre_process: weight must be > 0");
    return user_weight * value;
}

inline double post_process(double sum, double total_weight) {
    if (!(total_weight > 0.0)) throw std::invalid_argument("invalid-weight: total_weight <= 0");
    return sum / total_weight;
}

// b_k = sqrt(tau) * phi_k * (a^H h_k)^H / |a^H h_k|^2, so that
// (1/sqrt(tau)) a^H h_k b_k = phi_k exactly.
std::complex<double> transmitter_scaling(const Eigen::VectorXcd& a,
                                         const Eigen::VectorXcd& h_k,
                                         double phi_k, double tau);

// tau = P0 * min_k |a^H h_k|^2 / phi_k^2
double normalizing_factor(const Eigen::VectorXcd& a,
                          const std::vector<Eigen::VectorXcd>& channels,
                          const std::vector<double>& phis, double max_power);

// (sigma^2/P0) * max_k phi_k^2 ||a||^2 / |a^H h_k|^2  ==  ||a||^2 sigma^2 / tau
double mse_closed_form(const Eigen::VectorXcd& a,
                       const std::vector<Eigen::VectorXcd>& channels,
                       const std::vector<double>& phis, double max_power,
                       double noise_variance);

AirCompLink build_link(const Eigen::VectorXcd& a,
                       const std::vector<Eigen::VectorXcd>& channels,
                       const std::vector<double>& phis, double max_power,
                       double noise_variance);

// Serializes the per-user symbol vectors over the link, one coordinate per
// time slot with fresh CN(0, sigma^2 I_N) noise, and forms the beamformed
// estimate.
// dim_hint fixes the coordinate count when no user transmits (pure noise).
AggregationResult synthesize_round(const AirCompLink& link,
                                   const std::vector<Eigen::VectorXcd>& channels,
                                   const std::vector<Eigen::VectorXd>& symbols,
                                   Rng& noise_rng, Eigen::Index dim_hint = 0);

}  // namespace airfl
