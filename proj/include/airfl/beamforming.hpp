#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

namespace airfl {

// min ||a||^2  s.t.  |a^H h_k|^2 / phi_k^2 >= 1  for all k.
struct BeamformingInstance {
    std::vector<Eigen::VectorXcd> channels;
    std::vector<double> phis;

    void validate() const {
        if (channels.empty() || channels.size() != phis.size()) {
            throw std::invalid_argument("beamforming: channel/phi list mismatch");
        }
        for (std::size_t k = 0; k < channels.size(); ++k) {
            if (channels[k].size() == 0 || channels[k].norm() == 0.0) {
                throw std::invalid_argument("beamforming: zero channel");
            }
            if (!(phis[k] > 0.0)) throw std::invalid_argument("beamforming: phi must be > 0");
        }
    }
};

struct BeamformerSolution {
    Eigen::VectorXcd a;
    double objective = 0.0;  // ||a||^2
    int iterations = 0;
    bool converged = false;
    std::vector<double> constraint_margins;  // |a^H h_k|^2 / phi_k^2 - 1
    int limiting_constraint = -1;            // argmin margin (binds tau)
};

// Largest algebraic eigenvalue and unit eigenvector of a Hermitian matrix,
// by shifted power iteration with a deterministic start.
std::pair<double, Eigen::VectorXcd> hermitian_top_eigpair(const Eigen::MatrixXcd& matrix);

// Feasible starting point from the top eigenvector of S = sum_k h_k h_k^H / phi_k^2,
// scaled so every constraint holds.
Eigen::VectorXcd spectral_init(const BeamformingInstance& instance);

// Successive convex approximation from a feasible start: each round replaces
// |a^H h_k|^2 >= phi_k^2 with its affine under-approximation around the
// current iterate and solves the min-norm subproblem exactly (dual
// coordinate ascent over the K halfspaces).
BeamformerSolution sca_refine(const BeamformingInstance& instance,
                              const Eigen::VectorXcd& start, double tol, int max_iter);

BeamformerSolution solve_receiver(const BeamformingInstance& instance,
                                  double tol = 1e-6, int max_iter = 100);

std::vector<double> constraint_margins(const BeamformingInstance& instance,
                                       const Eigen::VectorXcd& a);

}  // namespace airfl
