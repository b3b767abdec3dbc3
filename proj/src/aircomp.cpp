#include "airfl/aircomp.hpp"

#include <cmath>
#include <limits>

namespace airfl {

namespace {
constexpr double kDegenerateTol = 1e-12;

std::complex<double> effective_gain(const Eigen::VectorXcd& a, const Eigen::VectorXcd& h) {
    return a.dot(h);  // a^H h
}
}  // namespace

std::complex<double> transmitter_scaling(const Eigen::VectorXcd& a,
                                         const Eigen::VectorXcd& h_k,
                                         double phi_k, double tau) {
    const std::complex<double> c = effective_gain(a, h_k);
    const double mag2 = std::norm(c);
    if (std::sqrt(mag2) < kDegenerateTol) {
        throw std::runtime_error("degenerate-channel: |a^H h_k| below tolerance");
    }
    return std::sqrt(tau) * phi_k * std::conj(c) / mag2;
}

double normalizing_factor(const Eigen::VectorXcd& a,
                          const std::vector<Eigen::VectorXcd>& channels,
                          const std::vector<double>& phis, double max_power) {
    if (channels.empty() || channels.size() != phis.size()) {
        throw std::invalid_argument("normalizing_factor: channel/phi list mismatch");
    }
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const double mag2 = std::norm(effective_gain(a, channels[k]));
        if (std::sqrt(mag2) < kDegenerateTol) {
            throw std::runtime_error("degenerate-channel: |a^H h_k| below tolerance");
        }
        min_ratio = std::min(min_ratio, mag2 / (phis[k] * phis[k]));
    }
    return max_power * min_ratio;
}

double mse_closed_form(const Eigen::VectorXcd& a,
                       const std::vector<Eigen::VectorXcd>& channels,
                       const std::vector<double>& phis, double max_power,
                       double noise_variance) {
    const double tau = normalizing_factor(a, channels, phis, max_power);
    return a.squaredNorm() * noise_variance / tau;
}

AirCompLink build_link(const Eigen::VectorXcd& a,
                       const std::vector<Eigen::VectorXcd>& channels,
                       const std::vector<double>& phis, double max_power,
                       double noise_variance) {
    AirCompLink link;
    link.beamformer = a;
    link.phis = phis;
    link.max_power = max_power;
    link.noise_variance = noise_variance;
    link.tau = normalizing_factor(a, channels, phis, max_power);
    link.scalings.reserve(channels.size());
    for (std::size_t k = 0; k < channels.size(); ++k) {
        link.scalings.push_back(transmitter_scaling(a, channels[k], phis[k], link.tau));
    }
    return link;
}

AggregationResult synthesize_round(const AirCompLink& link,
                                   const std::vector<Eigen::VectorXcd>& channels,
                                   const std::vector<Eigen::VectorXd>& symbols,
                                   Rng& noise_rng, Eigen::Index dim_hint) {
    const std::size_t num_users = channels.size();
    if (symbols.size() != num_users || link.scalings.size() != num_users ||
        link.phis.size() != num_users) {
        throw std::invalid_argument("dimension-mismatch: users vs symbols/scalings");
    }
    const Eigen::Index dim = num_users ? symbols[0].size() : dim_hint;
    for (const auto& s : symbols) {
        if (s.size() != dim) throw std::invalid_argument("dimension-mismatch: symbol lengths");
    }
    const int antennas = static_cast<int>(link.beamformer.size());
    const double inv_sqrt_tau = 1.0 / std::sqrt(link.tau);

    // Precompute the effective per-user complex gains a^H h_k b_k / sqrt(tau).
    std::vector<std::complex<double>> gains(num_users);
    for (std::size_t k = 0; k < num_users; ++k) {
        gains[k] = inv_sqrt_tau * link.beamformer.dot(channels[k]) * link.scalings[k];
    }

    AggregationResult out;
    out.target = Eigen::VectorXd::Zero(dim);
    out.estimate = Eigen::VectorXd::Zero(dim);
    const Eigen::VectorXcd a_conj = link.beamformer.conjugate();

    double err_accum = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        std::complex<double> ghat(0.0, 0.0);
        for (std::size_t k = 0; k < num_users; ++k) {
            ghat += gains[k] * symbols[k][j];
            out.target[j] += link.phis[k] * symbols[k][j];
        }
        // a^H n / sqrt(tau), noise fresh per coordinate
        std::complex<double> noise(0.0, 0.0);
        for (int i = 0; i < antennas; ++i) {
            noise += a_conj[i] * noise_rng.complex_gaussian(link.noise_variance);
        }
        ghat += inv_sqrt_tau * noise;
        out.estimate[j] = ghat.real();
        err_accum += std::norm(ghat - std::complex<double>(out.target[j], 0.0));
    }
    out.empirical_mse = dim > 0 ? err_accum / static_cast<double>(dim) : 0.0;
    out.closed_form_mse = link.beamformer.squaredNorm() * link.noise_variance / link.tau;
    return out;
}

}  // namespace airfl
