#include "airfl/beamforming.hpp"

#include <algorithm>
#include <cmath>

namespace airfl {

namespace {

constexpr double kPerpTol = 1e-12;

// Real 2N representation of complex vectors; Re(p^H a) = vec(p) . vec(a).
Eigen::VectorXd to_real(const Eigen::VectorXcd& v) {
    Eigen::VectorXd r(2 * v.size());
    r.head(v.size()) = v.real();
    r.tail(v.size()) = v.imag();
    return r;
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& r) {
    const Eigen::Index n = r.size() / 2;
    Eigen::VectorXcd v(n);
    v.real() = r.head(n);
    v.imag() = r.tail(n);
    return v;
}

// min 1/2 ||x||^2 s.t. G x >= b. Solved exactly through the dual
// (x = G^T lambda, lambda >= 0) with Lawson-Hanson active-set iterations on
// max_{lambda >= 0} b^T lambda - 1/2 lambda^T G G^T lambda.
Eigen::VectorXd min_norm_subject_to_halfspaces(const std::vector<Eigen::VectorXd>& g,
                                               const std::vector<double>& b) {
    const int K = static_cast<int>(g.size());
    const Eigen::Index n = g[0].size();
    Eigen::MatrixXd gram(K, K);
    Eigen::VectorXd rhs(K);
    double scale = 1.0;
    for (int i = 0; i < K; ++i) {
        rhs[i] = b[i];
        scale = std::max(scale, std::abs(b[i]));
        for (int j = 0; j <= i; ++j) {
            gram(i, j) = gram(j, i) = g[i].dot(g[j]);
        }
    }
    const double tol = 1e-12 * scale;

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(K);
    std::vector<int> active;
    std::vector<bool> in_active(K, false);

    auto solve_active = [&](Eigen::VectorXd& z) {
        const int m = static_cast<int>(active.size());
        Eigen::MatrixXd q(m, m);
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) {
            r[i] = rhs[active[i]];
            for (int j = 0; j < m; ++j) q(i, j) = gram(active[i], active[j]);
        }
        z = q.ldlt().solve(r);
    };

    for (int outer = 0; outer < 4 * K + 16; ++outer) {
        // most violated primal constraint = largest dual gradient component
        const Eigen::VectorXd w = rhs - gram * lambda;
        int pick = -1;
        double worst = tol;
        for (int i = 0; i < K; ++i) {
            if (!in_active[i] && w[i] > worst) {
                worst = w[i];
                pick = i;
            }
        }
        if (pick < 0) break;
        active.push_back(pick);
        in_active[pick] = true;

        for (int inner = 0; inner < 4 * K + 16; ++inner) {
            Eigen::VectorXd z;
            solve_active(z);
            double step = 1.0;
            int drop = -1;
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (z[i] <= 0.0) {
                    const double li = lambda[active[i]];
                    const double s = li / std::max(li - z[i], 1e-300);
                    if (s < step) {
                        step = s;
                        drop = static_cast<int>(i);
                    }
                }
            }
            for (std::size_t i = 0; i < active.size(); ++i) {
                const int k = active[i];
                lambda[k] += step * (z[i] - lambda[k]);
            }
            if (drop < 0) break;
            lambda[active[drop]] = 0.0;
            in_active[active[drop]] = false;
            active.erase(active.begin() + drop);
            if (active.empty()) break;
        }
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < K; ++i) {
        if (lambda[i] != 0.0) x += lambda[i] * g[i];
    }
    return x;
}

}  // namespace

std::vector<double> constraint_margins(const BeamformingInstance& instance,
                                       const Eigen::VectorXcd& a) {
    std::vector<double> m;
    m.reserve(instance.channels.size());
    for (std::size_t k = 0; k < instance.channels.size(); ++k) {
        const double c2 = std::norm(a.dot(instance.channels[k]));
        m.push_back(c2 / (instance.phis[k] * instance.phis[k]) - 1.0);
    }
    return m;
}

std::pair<double, Eigen::VectorXcd> hermitian_top_eigpair(const Eigen::MatrixXcd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (n == 0 || matrix.cols() != n) {
        throw std::invalid_argument("hermitian_top_eigpair: matrix must be square");
    }
    const double herm_err = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    const double mat_scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if (herm_err > 1e-10 * mat_scale) {
        throw std::invalid_argument("non-hermitian-input");
    }
    // Shift so the largest algebraic eigenvalue is also largest in magnitude.
    const double shift = matrix.norm();  // Frobenius >= |lambda_min|
    const Eigen::MatrixXcd shifted =
        matrix + shift * Eigen::MatrixXcd::Identity(n, n);

    auto iterate = [&](Eigen::VectorXcd v) -> std::pair<bool, Eigen::VectorXcd> {
        v.normalize();
        for (int it = 0; it < 10000; ++it) {
            Eigen::VectorXcd w = shifted * v;
            const double wn = w.norm();
            if (wn == 0.0) return {false, v};
            v = w / wn;
            const double lam = std::real(v.dot(matrix * v));
            if ((matrix * v - lam * v).norm() <= 1e-8 * mat_scale) return {true, v};
        }
        return {false, v};
    };

    Eigen::VectorXcd start = Eigen::VectorXcd::Ones(n);
    auto [ok, v] = iterate(start);
    if (!ok) {
        // Restart from a perturbed deterministic vector (handles starts that
        // are nearly orthogonal to the dominant eigenvector).
        Eigen::VectorXcd alt = Eigen::VectorXcd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            alt[i] = std::complex<double>(1.0 + 0.13 * static_cast<double>(i),
                                          0.07 * static_cast<double>(i + 1));
        }
        std::tie(ok, v) = iterate(alt);
        if (!ok) throw std::runtime_error("no-convergence: power iteration stalled");
    }
    // Deterministic phase: make the largest-magnitude entry real positive.
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> ph = v[imax] / std::abs(v[imax]);
    v /= ph;
    const double lam = std::real(v.dot(matrix * v));
    return {lam, v};
}

Eigen::VectorXcd spectral_init(const BeamformingInstance& instance) {
    instance.validate();
    const Eigen::Index n = instance.channels[0].size();
    Eigen::MatrixXcd surrogate = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < instance.channels.size(); ++k) {
        surrogate += instance.channels[k] * instance.channels[k].adjoint() /
                     (instance.phis[k] * instance.phis[k]);
    }
    auto [lam, u] = hermitian_top_eigpair(surrogate);
    (void)lam;

    for (int attempt = 0; attempt < 8; ++attempt) {
        double scale = 0.0;
        bool perpendicular = false;
        for (std::size_t k = 0; k < instance.channels.size(); ++k) {
            const double c = std::abs(u.dot(instance.channels[k]));
            if (c < kPerpTol) {
                perpendicular = true;
                break;
            }
            scale = std::max(scale, instance.phis[k] / c);
        }
        if (!perpendicular) return u * scale;
        // Perturb toward the next power-iteration iterate and retry.
        Eigen::VectorXcd w = surrogate * u + 1e-6 * Eigen::VectorXcd::Ones(n);
        u = w.normalized();
    }
    throw std::runtime_error("infeasible-direction: channel perpendicular to eigvector");
}

BeamformerSolution sca_refine(const BeamformingInstance& instance,
                              const Eigen::VectorXcd& start, double tol, int max_iter) {
    instance.validate();
    const std::size_t K = instance.channels.size();
    {
        const auto m0 = constraint_margins(instance, start);
        for (double m : m0) {
            if (m < -1e-9) throw std::invalid_argument("sca_refine: start not feasible");
        }
    }
    Eigen::VectorXcd a = start;
    double obj = a.squaredNorm();
    BeamformerSolution sol;
    sol.converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        // Affine surrogate around a: 2 Re(c0^* c(a)) - |c0|^2 >= phi^2, with
        // c0 = h^H a. In real coordinates: vec(c0 h) . vec(a) >= (phi^2 + |c0|^2)/2.
        std::vector<Eigen::VectorXd> g(K);
        std::vector<double> b(K);
        for (std::size_t k = 0; k < K; ++k) {
            const std::complex<double> c0 = instance.channels[k].dot(a);  // h_k^H a
            // Re(conj(c0) h_k^H a) = Re(p^H a) with p = c0 * h_k.
            const Eigen::VectorXcd p = c0 * instance.channels[k];
            g[k] = to_real(p);
            b[k] = 0.5 * (instance.phis[k] * instance.phis[k] + std::norm(c0));
        }
        const Eigen::VectorXd x = min_norm_subject_to_halfspaces(g, b);
        Eigen::VectorXcd a_next = to_complex(x);
        // restore exact feasibility: the inner solve is accurate to roundoff,
        // but a hair of violation would compound across outer iterations
        double restore = 1.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double c = std::abs(instance.channels[k].dot(a_next));
            if (c < kPerpTol) {
                restore = -1.0;
                break;
            }
            restore = std::max(restore, instance.phis[k] / c);
        }
        if (restore < 0.0) break;
        a_next *= restore;
        const double obj_next = a_next.squaredNorm();
        if (obj_next > obj * (1.0 + 1e-12)) {
            // Surrogate set contains the current iterate, so this cannot
            // happen unless the inner solve failed; keep the best iterate.
            break;
        }
        const double rel = (obj - obj_next) / std::max(obj, 1e-30);
        a = a_next;
        obj = obj_next;
        if (rel < tol) {
            sol.converged = true;
            ++it;
            break;
        }
    }
    sol.a = a;
    sol.objective = obj;
    sol.iterations = it;
    sol.constraint_margins = constraint_margins(instance, a);
    sol.limiting_constraint = static_cast<int>(
        std::min_element(sol.constraint_margins.begin(), sol.constraint_margins.end()) -
        sol.constraint_margins.begin());
    return sol;
}

namespace {

// Scale a unit direction up until every constraint holds; empty on failure.
Eigen::VectorXcd feasible_along(const BeamformingInstance& instance,
                                const Eigen::VectorXcd& direction) {
    double scale = 0.0;
    for (std::size_t k = 0; k < instance.channels.size(); ++k) {
        const double c = std::abs(direction.dot(instance.channels[k]));
        if (c < kPerpTol) return {};
        scale = std::max(scale, instance.phis[k] / c);
    }
    return direction * scale;
}

}  // namespace

BeamformerSolution solve_receiver(const BeamformingInstance& instance,
                                  double tol, int max_iter) {
    // The SCA descent is monotone but only locally convergent, so refine from
    // several deterministic starts: the surrogate eigvector, the summed
    // channels (matched filter), and each individual channel direction.
    BeamformerSolution best = sca_refine(instance, spectral_init(instance), tol, max_iter);
    std::vector<Eigen::VectorXcd> directions;
    Eigen::VectorXcd mf = Eigen::VectorXcd::Zero(instance.channels[0].size());
    for (const auto& h : instance.channels) mf += h;
    if (mf.norm() > 0.0) directions.push_back(mf.normalized());
    for (const auto& h : instance.channels) directions.push_back(h.normalized());
    for (const auto& dir : directions) {
        const Eigen::VectorXcd start = feasible_along(instance, dir);
        if (start.size() == 0) continue;
        BeamformerSolution alt = sca_refine(instance, start, tol, max_iter);
        if (alt.objective < best.objective) best = alt;
    }
    return best;
}

}  // namespace airfl
