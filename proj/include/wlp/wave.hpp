#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wlp/error.hpp"
#include "wlp/spectral.hpp"

namespace wlp {

/// Cauchy data (u, u_t) at a given time on a spectral mesh.
struct WaveState {
    Eigen::VectorXd u;
    Eigen::VectorXd ut;
    double time = 0.0;

    static WaveState zero(const SpectralOperator& op) {
        const long n = static_cast<long>(op.size());
        return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0};
    }
    bool finite() const { return u.allFinite() && ut.allFinite(); }
};

inline void check_state(const WaveState& s, const SpectralOperator& op, const char* where) {
    if (static_cast<std::size_t>(s.u.size()) != op.size() || static_cast<std::size_t>(s.ut.size()) != op.size())
        throw std::invalid_argument(std::string(where) + ": state does not match the mesh");
}

/// E(s1, s2) = u1^T A u2 + ut1^T M ut2: the Dirichlet form of y^{-2}-weighted
/// gradients minus a quarter of the dμ pairing, plus the kinetic pairing.
inline double energy_form(const WaveState& s1, const WaveState& s2, const SpectralOperator& op) {
    check_state(s1, op, "energy_form");
    check_state(s2, op, "energy_form");
    return s1.u.dot(op.form() * s2.u) + (s1.ut.array() * op.mass().array() * s2.ut.array()).sum();
}

inline double energy(const WaveState& s, const SpectralOperator& op) { return energy_form(s, s, op); }

/// Quantity conserved exactly (up to rounding) by the velocity Verlet scheme:
/// E - (dt^2/4) (Au)^T M^{-1} (Au).
inline double discrete_energy(const WaveState& s, const SpectralOperator& op, double dt) {
    check_state(s, op, "discrete_energy");
    const Eigen::VectorXd Au = op.form() * s.u;
    return energy(s, op) - 0.25 * dt * dt * (Au.array().square() / op.mass().array()).sum();
}

/// Largest stable step allowed: 0.5 h / y_max with h = min(hx, hy).
inline double cfl_limit(const SpectralOperator& op) { return 0.5 * op.h() / op.a(); }

/// Leapfrog (velocity Verlet) for u_tt + L u = 0. Negative dt evolves backward.
inline WaveState step(WaveState s, const SpectralOperator& op, double dt, int nsteps) {
    check_state(s, op, "step");
    if (nsteps < 0) throw std::invalid_argument("step: negative step count");
    if (!std::isfinite(dt) || std::abs(dt) > cfl_limit(op) * (1.0 + 1e-12))
        throw DomainError("step: dt violates the CFL bound 0.5*h/y_max = " + std::to_string(cfl_limit(op)));
    const Eigen::VectorXd inv_m = op.mass().cwiseInverse();
    const auto& A = op.form();
    Eigen::VectorXd acc = -(A * s.u).cwiseProduct(inv_m);
    for (int k = 0; k < nsteps; ++k) {
        s.ut += 0.5 * dt * acc;
        s.u += dt * s.ut;
        acc = -(A * s.u).cwiseProduct(inv_m);
        s.ut += 0.5 * dt * acc;
    }
    s.time += dt * static_cast<double>(nsteps);
    return s;
}

/// Evolves by total time T with the fewest equal steps not exceeding dt_max.
inline WaveState evolve(const WaveState& s, const SpectralOperator& op, double T, double dt_max) {
    if (T == 0.0) return s;
    const int n = static_cast<int>(std::ceil(std::abs(T) / dt_max - 1e-9));
    return step(s, op, T / static_cast<double>(n), n);
}

enum class Direction { Incoming, Outgoing };

/// x-independent cusp data u = y^{1/2} f(log y) with f a C^∞ bump supported on [tau0, tau1].
struct CuspProfile {
    double tau0 = 0.4, tau1 = 1.0;
    Direction direction = Direction::Outgoing;
    double amplitude = 1.0;

    double f(double tau) const {
        if (!(tau > tau0 && tau < tau1)) return 0.0;
        const double r = (2.0 * tau - tau0 - tau1) / (tau1 - tau0);
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
    double fprime(double tau) const {
        if (!(tau > tau0 && tau < tau1)) return 0.0;
        const double r = (2.0 * tau - tau0 - tau1) / (tau1 - tau0);
        const double q = 1.0 - r * r;
        return f(tau) * (-2.0 * r / (q * q)) * (2.0 / (tau1 - tau0));
    }
};

/// u = y^{1/2} f(log y), u_t = ∓ c y^{1/2} f'(log y) (minus for Outgoing). The
/// factor c ≈ 1 balances kinetic and form energy on the mesh so that matched
/// incoming/outgoing data are exactly orthogonal in the energy form.
inline WaveState make_cusp_data(const CuspProfile& p, const SpectralOperator& op) {
    if (!(p.tau1 > p.tau0)) throw DomainError("make_cusp_data: empty support");
    const double lo = std::exp(p.tau0), hi = std::exp(p.tau1);
    if (lo < 1.0 + 2.0 * op.hy() || hi > op.a() - 2.0 * op.hy())
        throw DomainError("make_cusp_data: support leaks out of the cusp strip (need 1 + 2h <= y <= a - 2h)");
    WaveState s = WaveState::zero(op);
    if (p.amplitude == 0.0) return s;
    s.u = op.sample([&](double, double y) { return std::sqrt(y) * p.f(std::log(y)); });
    Eigen::VectorXd w = op.sample([&](double, double y) { return std::sqrt(y) * p.fprime(std::log(y)); });
    const double form = s.u.dot(op.form() * s.u);
    const double kin = (w.array().square() * op.mass().array()).sum();
    const double c = (form > 0.0 && kin > 0.0) ? std::sqrt(form / kin) : 1.0;
    s.ut = (p.direction == Direction::Outgoing ? -c : c) * w;
    return s;
}

/// Nonnegative energy per node: kinetic m_k ut_k^2 plus half of every incident
/// edge term w (u_p - u_q)^2 (the -1/4 shift is left out).
inline Eigen::VectorXd nodal_energy(const WaveState& s, const SpectralOperator& op) {
    check_state(s, op, "nodal_energy");
    Eigen::VectorXd e = s.ut.array().square() * op.mass().array();
    for (const auto& edge : op.edges()) {
        const long p = static_cast<long>(edge.p), q = static_cast<long>(edge.q);
        const double d = s.u[p] - s.u[q];
        e[p] += 0.5 * edge.w * d * d;
        e[q] += 0.5 * edge.w * d * d;
    }
    return e;
}

/// |E(out, in)| relative to the geometric mean of the two nonnegative energies.
inline double dpm_orthogonality(const WaveState& out_state, const WaveState& in_state, const SpectralOperator& op) {
    const double scale = std::sqrt(nodal_energy(out_state, op).sum() * nodal_energy(in_state, op).sum());
    if (!(scale > 0.0)) return 0.0;
    return std::abs(energy_form(out_state, in_state, op)) / scale;
}

/// Axis-aligned region of the mesh.
struct Region {
    double x_min = -std::numeric_limits<double>::infinity(), x_max = std::numeric_limits<double>::infinity();
    double y_min = -std::numeric_limits<double>::infinity(), y_max = std::numeric_limits<double>::infinity();
    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

inline double energy_in(const WaveState& s, const SpectralOperator& op, const Region& K) {
    const Eigen::VectorXd e = nodal_energy(s, op);
    double acc = 0.0;
    for (std::size_t k = 0; k < op.size(); ++k)
        if (K.contains(op.nodes()[k].x, op.nodes()[k].y)) acc += e[static_cast<long>(k)];
    return acc;
}

namespace detail {
/// Direction of travel in τ = log y for evolution by a signed time T.
inline double travel_sign(Direction d, double T) {
    const double s = d == Direction::Outgoing ? 1.0 : -1.0;
    return T >= 0.0 ? s : -s;
}

inline void check_translated_support(const CuspProfile& p, const SpectralOperator& op, double T) {
    const double shift = travel_sign(p.direction, T) * std::abs(T);
    const double lo = std::exp(p.tau0 + std::min(0.0, shift)), hi = std::exp(p.tau1 + std::max(0.0, shift));
    if (lo < 1.0 + 2.0 * op.hy() || hi > op.a() - 2.0 * op.hy())
        throw DomainError("wave: translated support exits the cusp strip; use a larger a or a shorter time");
}
}  // namespace detail

/// Energy fraction found below the support floor y = e^{tau0}, maximized over
/// `samples` equally spaced times in (0, T]. T is signed: Outgoing data are
/// admissible for T > 0 and Incoming data for T < 0.
inline double invariance_residual(const CuspProfile& p, const SpectralOperator& op, double T, int samples = 10) {
    if (samples < 1) throw std::invalid_argument("invariance_residual: need at least one sample time");
    detail::check_translated_support(p, op, T);
    WaveState s = make_cusp_data(p, op);
    const Region below{-1e300, 1e300, -1e300, std::exp(p.tau0)};
    const double dt_max = 0.5 * cfl_limit(op);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        s = evolve(s, op, T / samples, dt_max);
        const double total = nodal_energy(s, op).sum();
        if (total > 0.0) worst = std::max(worst, energy_in(s, op, below) / total);
    }
    return worst;
}

struct DecayCurve {
    std::vector<double> times;
    std::vector<double> energy_in_K;  // restricted energy at each time
    std::vector<double> total;        // nonnegative total energy at each time
    double final_ratio() const {
        if (energy_in_K.empty() || !(energy_in_K.front() > 0.0)) return 0.0;
        return energy_in_K.back() / energy_in_K.front();
    }
};

/// Restricted energy in K at `samples` + 1 equally spaced times in [0, T].
inline DecayCurve energy_curve(const WaveState& s0, const SpectralOperator& op, double T, const Region& K,
                               int samples = 20) {
    if (samples < 1) throw std::invalid_argument("energy_curve: need at least one sample time");
    DecayCurve c;
    WaveState s = s0;
    const double dt_max = 0.5 * cfl_limit(op);
    for (int k = 0; k <= samples; ++k) {
        if (k > 0) s = evolve(s, op, T / samples, dt_max);
        c.times.push_back(s0.time + T * k / samples);
        c.energy_in_K.push_back(energy_in(s, op, K));
        c.total.push_back(nodal_energy(s, op).sum());
    }
    return c;
}

/// Energy of cusp data restricted to K while the data travel in their admissible direction.
inline DecayCurve compact_escape(const CuspProfile& p, const SpectralOperator& op, double T, const Region& K,
                                 int samples = 20) {
    detail::check_translated_support(p, op, T);
    return energy_curve(make_cusp_data(p, op), op, T, K, samples);
}

}  // namespace wlp
