#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wlp/error.hpp"
#include "wlp/grid.hpp"

namespace wlp {

// Wirtinger convention: d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2.
enum class Wirtinger { Dz, Dzbar };

namespace detail {

struct StencilTap {
    std::size_t at;
    double weight;
};

/// Second-order first-derivative taps at position k of a line of n samples:
/// centered inside, one-sided three-point at either end.
inline std::array<StencilTap, 3> derivative_taps(std::size_t k, std::size_t n, double h) {
    const double s = 0.5 / h;
    if (k == 0) return {{{0, -3 * s}, {1, 4 * s}, {2, -s}}};
    if (k + 1 == n) return {{{n - 1, 3 * s}, {n - 2, -4 * s}, {n - 3, s}}};
    return {{{k - 1, -s}, {k + 1, s}, {k, 0.0}}};
}

}  // namespace detail

template <class T>
Field<T> partial_x(const Field<T>& f) {
    const Grid& g = f.grid();
    Field<T> out(g);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            T acc{};
            for (const auto& t : detail::derivative_taps(i, g.nx(), g.h())) acc += t.weight * f(t.at, j);
            out(i, j) = acc;
        }
    return out;
}

template <class T>
Field<T> partial_y(const Field<T>& f) {
    const Grid& g = f.grid();
    Field<T> out(g);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            T acc{};
            for (const auto& t : detail::derivative_taps(j, g.ny(), g.h())) acc += t.weight * f(i, t.at);
            out(i, j) = acc;
        }
    return out;
}

inline ComplexField wirtinger(const ComplexField& f, Wirtinger which) {
    const ComplexField fx = partial_x(f), fy = partial_y(f);
    const cplx sign = which == Wirtinger::Dz ? cplx(0, -1) : cplx(0, 1);
    ComplexField out(f.grid());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = 0.5 * (fx[k] + sign * fy[k]);
    return out;
}

struct SpinorPair {
    ComplexField psi;
    ComplexField phi;

    SpinorPair(ComplexField psi_, ComplexField phi_) : psi(std::move(psi_)), phi(std::move(phi_)) {
        require_same_grid(psi.grid(), phi.grid(), "SpinorPair");
    }
    const Grid& grid() const noexcept { return psi.grid(); }

    SpinorPair& operator*=(cplx s) {
        psi *= s;
        phi *= s;
        return *this;
    }
};

inline void require_real_potential(const ComplexField& U, const char* where) {
    for (const cplx& u : U.values())
        if (std::abs(u.imag()) > 1e-14 || !std::isfinite(u.real()))
            throw DomainError(std::string(where) + ": potential U must be real-valued");
}

struct DiracResidual {
    double psi_equation;  // max |psi_z - U phi|
    double phi_equation;  // max |phi_zbar + U psi|
    double max() const noexcept { return std::max(psi_equation, phi_equation); }
};

/// Interior max-norms of the two equations psi_z = U phi, phi_zbar = -U psi.
inline DiracResidual dirac_residual(const SpinorPair& sp, const ComplexField& U) {
    require_same_grid(sp.grid(), U.grid(), "dirac_residual");
    require_real_potential(U, "dirac_residual");
    const ComplexField psi_z = wirtinger(sp.psi, Wirtinger::Dz);
    const ComplexField phi_zb = wirtinger(sp.phi, Wirtinger::Dzbar);
    const Grid& g = sp.grid();
    DiracResidual r{0.0, 0.0};
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
        for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            r.psi_equation = std::max(r.psi_equation, std::abs(psi_z[k] - U[k] * sp.phi[k]));
            r.phi_equation = std::max(r.phi_equation, std::abs(phi_zb[k] + U[k] * sp.psi[k]));
        }
    return r;
}

enum class SpinorFamily { ZeroU_Antiholo, ZeroU_Holo, ConstU_Exponential };

struct FamilyParams {
    double u0 = 1.0;                // ConstU_Exponential potential
    cplx lambda{1.0, 0.0};          // ConstU_Exponential rate in z
    cplx amplitude{1.0, 0.0};       // ConstU_Exponential prefactor A
    std::vector<cplx> coeffs{1.0};  // polynomial coefficients, lowest degree first
};

struct ExactSolution {
    SpinorPair spinors;
    ComplexField potential;
};

namespace detail {
inline cplx polyval(const std::vector<cplx>& c, cplx z) {
    cplx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}
}  // namespace detail

/// Closed-form solutions of the Dirac system.
///
///  - ZeroU_Holo:         U = 0, phi = p(z), psi = 0.
///  - ZeroU_Antiholo:     U = 0, psi = conj(p(z)) (a polynomial in zbar), phi = 0.
///  - ConstU_Exponential: U = u0, psi = A e^{lambda z + mu zbar},
///                        phi = (A lambda / u0) e^{lambda z + mu zbar}, mu = -u0^2 / lambda.
///
/// Decoupled U = 0 pairs can be combined by adding the two ZeroU families.
inline ExactSolution exact_spinors(SpinorFamily family, const FamilyParams& p, const Grid& grid) {
    switch (family) {
        case SpinorFamily::ZeroU_Holo: {
            auto phi = ComplexField::sample(grid, [&](double x, double y) {
                return detail::polyval(p.coeffs, {x, y});
            });
            return {SpinorPair(ComplexField(grid), std::move(phi)), ComplexField(grid)};
        }
        case SpinorFamily::ZeroU_Antiholo: {
            std::vector<cplx> conj_coeffs;
            for (const cplx& c : p.coeffs) conj_coeffs.push_back(std::conj(c));
            auto psi = ComplexField::sample(grid, [&](double x, double y) {
                return detail::polyval(conj_coeffs, {x, -y});
            });
            return {SpinorPair(std::move(psi), ComplexField(grid)), ComplexField(grid)};
        }
        case SpinorFamily::ConstU_Exponential: {
            if (p.u0 == 0.0 || !std::isfinite(p.u0))
                throw DomainError("exact_spinors: exponential family needs nonzero real U0");
            if (p.lambda == cplx(0.0) || !std::isfinite(std::abs(p.lambda)))
                throw DomainError("exact_spinors: exponential family needs nonzero lambda");
            const cplx mu = -p.u0 * p.u0 / p.lambda;
            const cplx ratio = p.lambda / p.u0;
            ComplexField psi(grid), phi(grid);
            for (std::size_t j = 0; j < grid.ny(); ++j)
                for (std::size_t i = 0; i < grid.nx(); ++i) {
                    const cplx z = grid.z(i, j);
                    const cplx e = p.amplitude * std::exp(p.lambda * z + mu * std::conj(z));
                    psi(i, j) = e;
                    phi(i, j) = ratio * e;
                }
            return {SpinorPair(std::move(psi), std::move(phi)), ComplexField(grid, cplx(p.u0, 0.0))};
        }
    }
    throw std::invalid_argument("exact_spinors: unknown family");
}

struct DiracSolveOptions {
    double tol = 1e-8;
    int max_iterations = 10000;
};

/// Least-squares solve of the discrete Dirac system with psi and phi pinned
/// on the grid boundary.
///
/// Both equations are collocated at every node (one-sided stencils on the
/// edges), giving 2N complex equations for the 2(N - boundary) interior
/// unknowns; the overdetermined system is solved by CGLS with a diagonal
/// preconditioner.
inline SpinorPair solve_dirac(const ComplexField& U, const SpinorPair& boundary,
                              const DiracSolveOptions& opt = {}) {
    require_same_grid(U.grid(), boundary.grid(), "solve_dirac");
    require_real_potential(U, "solve_dirac");
    if (!boundary.psi.all_finite() || !boundary.phi.all_finite())
        throw DomainError("solve_dirac: boundary data must be finite");
    const Grid& g = U.grid();

    // Interior node numbering.
    std::vector<long> unknown(g.size(), -1);
    long n_int = 0;
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
        for (std::size_t i = 1; i + 1 < g.nx(); ++i) unknown[g.index(i, j)] = n_int++;

    using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(g.size() * 16);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<long>(2 * g.size()));

    // eq: 0 for psi equation, 1 for phi equation; var: 0 psi, 1 phi
    auto add = [&](long row, std::size_t node, int var, cplx coef) {
        if (coef == cplx(0.0)) return;
        const long u = unknown[node];
        if (u >= 0) {
            trips.emplace_back(row, u + var * n_int, coef);
        } else {
            const cplx v = var == 0 ? boundary.psi[node] : boundary.phi[node];
            rhs[row] -= coef * v;
        }
    };

    const cplx mi(0, -1), pi(0, 1);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            const long r_psi = static_cast<long>(2 * k), r_phi = r_psi + 1;
            for (const auto& t : detail::derivative_taps(i, g.nx(), g.h())) {
                add(r_psi, g.index(t.at, j), 0, 0.5 * t.weight);
                add(r_phi, g.index(t.at, j), 1, 0.5 * t.weight);
            }
            for (const auto& t : detail::derivative_taps(j, g.ny(), g.h())) {
                add(r_psi, g.index(i, t.at), 0, 0.5 * mi * t.weight);
                add(r_phi, g.index(i, t.at), 1, 0.5 * pi * t.weight);
            }
            add(r_psi, k, 1, -U[k]);
            add(r_phi, k, 0, U[k]);
        }

    SpMat A(static_cast<long>(2 * g.size()), 2 * n_int);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXcd sol = Eigen::VectorXcd::Zero(2 * n_int);
    if (rhs.norm() > 0.0) {
        Eigen::LeastSquaresConjugateGradient<SpMat> lscg;
        lscg.setMaxIterations(opt.max_iterations);
        lscg.setTolerance(opt.tol);
        lscg.compute(A);
        sol = lscg.solve(rhs);
        if (lscg.info() != Eigen::Success)
            throw ConvergenceError("solve_dirac: CGLS did not converge", lscg.error());
    }

    SpinorPair out = boundary;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (unknown[k] >= 0) {
            out.psi[k] = sol[unknown[k]];
            out.phi[k] = sol[unknown[k] + n_int];
        }
    return out;
}

}  // namespace wlp
