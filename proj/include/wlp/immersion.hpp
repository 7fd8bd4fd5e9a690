#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "wlp/csv.hpp"
#include "wlp/dirac.hpp"
#include "wlp/grid.hpp"

namespace wlp {

/// dz- and dzbar-components of a complex one-form P dz + Q dzbar.
struct OneForm {
    ComplexField dz;
    ComplexField dzbar;
};

struct ImmersionForms {
    OneForm plus;    // X1 + i X2
    OneForm minus;   // X1 - i X2
    OneForm height;  // X3
};

/// Integrands of the Weierstrass representation:
///   X1 + iX2 = i ∫ (conj(psi)^2 dz - conj(phi)^2 dzbar)
///   X1 - iX2 = i ∫ (phi^2 dz - psi^2 dzbar)
///   X3       = -∫ (conj(psi) phi dz + psi conj(phi) dzbar)
/// Each form is closed exactly when psi_z = U phi and phi_zbar = -U psi.
inline ImmersionForms one_forms(const SpinorPair& sp) {
    const Grid& g = sp.grid();
    ImmersionForms f{{ComplexField(g), ComplexField(g)},
                     {ComplexField(g), ComplexField(g)},
                     {ComplexField(g), ComplexField(g)}};
    const cplx I(0, 1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const cplx psi = sp.psi[k], phi = sp.phi[k];
        const cplx psib = std::conj(psi), phib = std::conj(phi);
        f.plus.dz[k] = I * psib * psib;
        f.plus.dzbar[k] = -I * phib * phib;
        f.minus.dz[k] = I * phi * phi;
        f.minus.dzbar[k] = -I * psi * psi;
        f.height.dz[k] = -psib * phi;
        f.height.dzbar[k] = -psi * phib;
    }
    return f;
}

/// Interior max of |d/dzbar P - d/dz Q|.
inline double closedness_residual(const OneForm& w) {
    const ComplexField a = wirtinger(w.dz, Wirtinger::Dzbar);
    const ComplexField b = wirtinger(w.dzbar, Wirtinger::Dz);
    const Grid& g = w.dz.grid();
    double r = 0.0;
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
        for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            r = std::max(r, std::abs(a[k] - b[k]));
        }
    return r;
}

/// Largest closedness defect over the three immersion forms. The potential
/// only enters through validation; closedness itself is U-independent.
inline double closedness_residual(const SpinorPair& sp, const ComplexField& U) {
    require_same_grid(sp.grid(), U.grid(), "closedness_residual");
    require_real_potential(U, "closedness_residual");
    const ImmersionForms f = one_forms(sp);
    return std::max({closedness_residual(f.plus), closedness_residual(f.minus),
                     closedness_residual(f.height)});
}

enum class PathStyle { XThenY, YThenX };
enum class Quadrature { Trapezoid, Lagrange8 };

struct PathSpec {
    std::size_t i0 = 0, j0 = 0;  // basepoint node; X(basepoint) = 0
    PathStyle style = PathStyle::XThenY;
    Quadrature quadrature = Quadrature::Lagrange8;
};

namespace detail {

/// Weights w[o][k] = ∫_o^{o+1} l_k(t) dt for the Lagrange basis on nodes 0..m-1.
inline std::vector<std::vector<double>> interval_weights(std::size_t m) {
    std::vector<std::vector<double>> w(m - 1, std::vector<double>(m));
    for (std::size_t k = 0; k < m; ++k) {
        // Coefficients of l_k, lowest degree first.
        std::vector<long double> poly{1.0L};
        long double denom = 1.0L;
        for (std::size_t l = 0; l < m; ++l) {
            if (l == k) continue;
            std::vector<long double> next(poly.size() + 1, 0.0L);
            for (std::size_t p = 0; p < poly.size(); ++p) {
                next[p + 1] += poly[p];
                next[p] -= poly[p] * static_cast<long double>(l);
            }
            poly = std::move(next);
            denom *= static_cast<long double>(k) - static_cast<long double>(l);
        }
        for (std::size_t o = 0; o + 1 < m; ++o) {
            long double acc = 0.0L;
            const long double a = static_cast<long double>(o), b = a + 1.0L;
            for (std::size_t p = 0; p < poly.size(); ++p) {
                const long double e = static_cast<long double>(p + 1);
                acc += poly[p] * (std::pow(b, e) - std::pow(a, e)) / e;
            }
            w[o][k] = static_cast<double>(acc / denom);
        }
    }
    return w;
}

inline const std::vector<std::vector<double>>& cached_weights(std::size_t m) {
    static const std::array<std::vector<std::vector<double>>, 9> table = [] {
        std::array<std::vector<std::vector<double>>, 9> t;
        for (std::size_t m = 2; m <= 8; ++m) t[m] = interval_weights(m);
        return t;
    }();
    return table[m];
}

/// Running integral I[k] = ∫_{0}^{k h} f along a line of samples.
inline std::vector<cplx> cumulative_integral(const std::vector<cplx>& f, double h, Quadrature q) {
    const std::size_t n = f.size();
    std::vector<cplx> out(n, 0.0);
    if (q == Quadrature::Trapezoid) {
        for (std::size_t k = 0; k + 1 < n; ++k) out[k + 1] = out[k] + 0.5 * h * (f[k] + f[k + 1]);
        return out;
    }
    const std::size_t m = std::min<std::size_t>(8, n);
    const auto& w = cached_weights(m);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        // Stencil of m nodes as centered on [k, k+1] as the line allows.
        const std::size_t half = m / 2 - 1;
        const std::size_t s = std::min(k > half ? k - half : 0, n - m);
        cplx acc = 0.0;
        const auto& wk = w[k - s];
        for (std::size_t p = 0; p < m; ++p) acc += wk[p] * f[s + p];
        out[k + 1] = out[k] + h * acc;
    }
    return out;
}

/// Integral of P dz + Q dzbar from node (0, 0) along rows and columns.
struct LineIntegrals {
    std::vector<std::vector<cplx>> rows;  // rows[j][i]: along y = y_j from x_0
    std::vector<std::vector<cplx>> cols;  // cols[i][j]: along x = x_i from y_0
};

inline LineIntegrals line_integrals(const OneForm& w, Quadrature q) {
    const Grid& g = w.dz.grid();
    const cplx I(0, 1);
    LineIntegrals L;
    L.rows.resize(g.ny());
    L.cols.resize(g.nx());
    std::vector<cplx> buf;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        buf.assign(g.nx(), 0.0);
        // dz = dzbar = dx
        for (std::size_t i = 0; i < g.nx(); ++i) buf[i] = w.dz(i, j) + w.dzbar(i, j);
        L.rows[j] = cumulative_integral(buf, g.h(), q);
    }
    for (std::size_t i = 0; i < g.nx(); ++i) {
        buf.assign(g.ny(), 0.0);
        // dz = i dy, dzbar = -i dy
        for (std::size_t j = 0; j < g.ny(); ++j) buf[j] = I * (w.dz(i, j) - w.dzbar(i, j));
        L.cols[i] = cumulative_integral(buf, g.h(), q);
    }
    return L;
}

inline ComplexField integrate_form(const OneForm& w, const PathSpec& path) {
    const Grid& g = w.dz.grid();
    const LineIntegrals L = line_integrals(w, path.quadrature);
    ComplexField out(g);
    const std::size_t i0 = path.i0, j0 = path.j0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            if (path.style == PathStyle::XThenY)
                out(i, j) = (L.rows[j0][i] - L.rows[j0][i0]) + (L.cols[i][j] - L.cols[i][j0]);
            else
                out(i, j) = (L.cols[i0][j] - L.cols[i0][j0]) + (L.rows[j][i] - L.rows[j][i0]);
        }
    return out;
}

}  // namespace detail

/// Sampled immersed surface: coordinates, conformal factor D and the
/// curvatures computed from the potential (valid where curvature_valid != 0).
struct SurfaceSample {
    Grid grid;
    RealField X1, X2, X3;
    RealField D, K, H;
    std::vector<char> curvature_valid;
    double imag_defect = 0.0;  // max |Im X| before it was discarded, relative
    double closedness = 0.0;   // closedness residual of the integrated forms

    explicit SurfaceSample(const Grid& g)
        : grid(g), X1(g), X2(g), X3(g), D(g), K(g), H(g), curvature_valid(g.size(), 0) {}

    /// Surface from explicitly sampled coordinates (no spinors involved).
    static SurfaceSample from_coordinates(RealField x1, RealField x2, RealField x3) {
        require_same_grid(x1.grid(), x2.grid(), "SurfaceSample");
        require_same_grid(x1.grid(), x3.grid(), "SurfaceSample");
        SurfaceSample s(x1.grid());
        s.X1 = std::move(x1);
        s.X2 = std::move(x2);
        s.X3 = std::move(x3);
        return s;
    }
};

/// Integrates the three immersion forms from the basepoint along a
/// grid-aligned path. Fails if the integrated coordinates are not real to
/// 1e-12 of their scale (they are real by construction of the forms).
inline SurfaceSample integrate_immersion(const SpinorPair& sp, const PathSpec& path = {}) {
    const Grid& g = sp.grid();
    if (path.i0 >= g.nx() || path.j0 >= g.ny())
        throw std::out_of_range("integrate_immersion: basepoint outside the grid");
    if (!sp.psi.all_finite() || !sp.phi.all_finite())
        throw DomainError("integrate_immersion: non-finite spinor samples");

    const ImmersionForms f = one_forms(sp);
    const ComplexField A = detail::integrate_form(f.plus, path);
    const ComplexField B = detail::integrate_form(f.minus, path);
    const ComplexField C = detail::integrate_form(f.height, path);

    SurfaceSample s(g);
    ComplexField x1(g), x2(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        x1[k] = 0.5 * (A[k] + B[k]);
        x2[k] = (A[k] - B[k]) / (2.0 * cplx(0, 1));
        s.D[k] = std::norm(sp.psi[k]) + std::norm(sp.phi[k]);
    }
    s.imag_defect = std::max({imaginary_defect(x1), imaginary_defect(x2), imaginary_defect(C)});
    if (s.imag_defect > 1e-12)
        throw DomainError("integrate_immersion: coordinates failed the reality check");
    s.X1 = real_part(x1);
    s.X2 = real_part(x2);
    s.X3 = real_part(C);
    s.closedness = std::max({closedness_residual(f.plus), closedness_residual(f.minus),
                             closedness_residual(f.height)});
    return s;
}

struct CurvatureFields {
    RealField D, K, H;
    std::vector<char> valid;
};

namespace detail {
/// Second derivative along a line: centered inside, one-sided second order at the ends.
inline double second_derivative(const double* f, std::size_t stride, std::size_t k, std::size_t n,
                                double h) {
    auto at = [&](std::size_t p) { return f[p * stride]; };
    const double h2 = h * h;
    if (k > 0 && k + 1 < n) return (at(k + 1) - 2 * at(k) + at(k - 1)) / h2;
    if (n < 4) {
        const std::size_t c = k == 0 ? 1 : n - 2;
        return (at(c + 1) - 2 * at(c) + at(c - 1)) / h2;
    }
    if (k == 0) return (2 * at(0) - 5 * at(1) + 4 * at(2) - at(3)) / h2;
    return (2 * at(n - 1) - 5 * at(n - 2) + 4 * at(n - 3) - at(n - 4)) / h2;
}
}  // namespace detail

/// D = |psi|^2 + |phi|^2, K = -(4/D^2) [log D]_{z zbar} = -Δ(log D) / D^2, H = 2U/D.
/// Nodes where D <= 1e-10 anywhere in the stencil are flagged invalid.
inline CurvatureFields curvatures(const SpinorPair& sp, const ComplexField& U) {
    require_same_grid(sp.grid(), U.grid(), "curvatures");
    require_real_potential(U, "curvatures");
    constexpr double eps_D = 1e-10;
    const Grid& g = sp.grid();
    CurvatureFields c{RealField(g), RealField(g), RealField(g), std::vector<char>(g.size(), 0)};
    std::vector<char> ok(g.size());
    RealField logD(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        c.D[k] = std::norm(sp.psi[k]) + std::norm(sp.phi[k]);
        ok[k] = c.D[k] > eps_D;
        logD[k] = ok[k] ? std::log(c.D[k]) : 0.0;
    }
    const std::size_t nx = g.nx(), ny = g.ny();
    auto window_ok = [&](std::size_t i, std::size_t j) {
        const std::size_t i_lo = i == 0 ? 0 : i - 1, i_hi = std::min(nx - 1, i == 0 ? 3 : i + 1);
        const std::size_t j_lo = j == 0 ? 0 : j - 1, j_hi = std::min(ny - 1, j == 0 ? 3 : j + 1);
        const std::size_t i_lo2 = i + 1 == nx && nx >= 4 ? nx - 4 : i_lo;
        const std::size_t j_lo2 = j + 1 == ny && ny >= 4 ? ny - 4 : j_lo;
        for (std::size_t q = j_lo2; q <= j_hi; ++q)
            if (!ok[g.index(i, q)]) return false;
        for (std::size_t p = i_lo2; p <= i_hi; ++p)
            if (!ok[g.index(p, j)]) return false;
        return true;
    };
    const double* base = logD.values().data();
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (!window_ok(i, j)) continue;
            const double lap = detail::second_derivative(base + j * nx, 1, i, nx, g.h()) +
                               detail::second_derivative(base + i, nx, j, ny, g.h());
            c.K[k] = -lap / (c.D[k] * c.D[k]);
            c.H[k] = 2.0 * U[k].real() / c.D[k];
            c.valid[k] = 1;
        }
    return c;
}

inline void attach_curvatures(SurfaceSample& s, const CurvatureFields& c) {
    require_same_grid(s.grid, c.D.grid(), "attach_curvatures");
    s.D = c.D;
    s.K = c.K;
    s.H = c.H;
    s.curvature_valid = c.valid;
}

/// Integrates the immersion and attaches the closed-form curvatures.
inline SurfaceSample build_surface(const SpinorPair& sp, const ComplexField& U, const PathSpec& path = {}) {
    SurfaceSample s = integrate_immersion(sp, path);
    attach_curvatures(s, curvatures(sp, U));
    return s;
}

/// First and second fundamental forms of the sampled embedding by centered
/// differences, with normal n = X_x × X_y / |X_x × X_y|.
struct FundamentalForms {
    RealField E, F, G, e, f, g, K, H;
    std::vector<char> valid;
};

inline FundamentalForms fd_fundamental_forms(const SurfaceSample& s) {
    const Grid& gr = s.grid;
    FundamentalForms ff{RealField(gr), RealField(gr), RealField(gr), RealField(gr),
                        RealField(gr), RealField(gr), RealField(gr), RealField(gr),
                        std::vector<char>(gr.size(), 0)};
    const double h = gr.h();
    using V3 = std::array<double, 3>;
    auto X = [&](std::size_t i, std::size_t j) -> V3 { return {s.X1(i, j), s.X2(i, j), s.X3(i, j)}; };
    auto dot = [](const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
    for (std::size_t j = 1; j + 1 < gr.ny(); ++j)
        for (std::size_t i = 1; i + 1 < gr.nx(); ++i) {
            const V3 c = X(i, j), xp = X(i + 1, j), xm = X(i - 1, j), yp = X(i, j + 1), ym = X(i, j - 1);
            const V3 pp = X(i + 1, j + 1), pm = X(i + 1, j - 1), mp = X(i - 1, j + 1), mm = X(i - 1, j - 1);
            V3 Xx, Xy, Xxx, Xyy, Xxy;
            for (int a = 0; a < 3; ++a) {
                Xx[a] = (xp[a] - xm[a]) / (2 * h);
                Xy[a] = (yp[a] - ym[a]) / (2 * h);
                Xxx[a] = (xp[a] - 2 * c[a] + xm[a]) / (h * h);
                Xyy[a] = (yp[a] - 2 * c[a] + ym[a]) / (h * h);
                Xxy[a] = (pp[a] - pm[a] - mp[a] + mm[a]) / (4 * h * h);
            }
            const V3 n{Xx[1] * Xy[2] - Xx[2] * Xy[1], Xx[2] * Xy[0] - Xx[0] * Xy[2],
                       Xx[0] * Xy[1] - Xx[1] * Xy[0]};
            const double nn = std::sqrt(dot(n, n));
            if (!(nn > 1e-10)) continue;
            const V3 nu{n[0] / nn, n[1] / nn, n[2] / nn};
            const std::size_t k = gr.index(i, j);
            const double E = dot(Xx, Xx), F = dot(Xx, Xy), G = dot(Xy, Xy);
            const double e = dot(Xxx, nu), f = dot(Xxy, nu), g = dot(Xyy, nu);
            const double det = E * G - F * F;
            ff.E[k] = E, ff.F[k] = F, ff.G[k] = G;
            ff.e[k] = e, ff.f[k] = f, ff.g[k] = g;
            ff.K[k] = (e * g - f * f) / det;
            ff.H[k] = (E * g - 2 * F * f + G * e) / (2 * det);
            ff.valid[k] = 1;
        }
    return ff;
}

/// max over valid interior nodes of (|E - G| + |F| + |E - D^2|) / D^2.
inline double conformality_residual(const SurfaceSample& s) {
    const FundamentalForms ff = fd_fundamental_forms(s);
    double r = 0.0;
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        if (!ff.valid[k]) continue;
        const double D2 = s.D[k] * s.D[k];
        if (!(D2 > 0.0)) continue;
        r = std::max(r, (std::abs(ff.E[k] - ff.G[k]) + std::abs(ff.F[k]) + std::abs(ff.E[k] - D2)) / D2);
    }
    return r;
}

struct CurvatureComparison {
    double max_K_error = 0.0;
    double max_H_error = 0.0;
    double orientation = 1.0;  // sign aligning H_fd with H
    double max() const noexcept { return std::max(max_K_error, max_H_error); }
};

/// Max deviations between the spinor-side curvatures and the finite-difference
/// ones over nodes valid for both, after aligning the normal orientation.
inline CurvatureComparison compare_curvatures(const SurfaceSample& s, const FundamentalForms& ff) {
    CurvatureComparison out;
    double dot = 0.0;
    for (std::size_t k = 0; k < s.grid.size(); ++k)
        if (ff.valid[k] && s.curvature_valid[k]) dot += s.H[k] * ff.H[k];
    out.orientation = dot < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        if (!ff.valid[k] || !s.curvature_valid[k]) continue;
        out.max_K_error = std::max(out.max_K_error, std::abs(s.K[k] - ff.K[k]));
        out.max_H_error = std::max(out.max_H_error, std::abs(s.H[k] - out.orientation * ff.H[k]));
    }
    return out;
}

/// ASCII OBJ ("v x y z", "f i j k" 1-based; two triangles per grid cell with
/// consistent winding) plus a sidecar CSV "i,j,x,y,K,H" for valid nodes.
inline void export_obj(const SurfaceSample& s, const std::string& obj_path, const std::string& csv_path) {
    const Grid& g = s.grid;
    if (g.size() == 0 || s.X1.size() != g.size())
        throw std::invalid_argument("export_obj: empty surface");
    {
        std::ofstream obj = open_output(obj_path);
        for (std::size_t k = 0; k < g.size(); ++k)
            obj << "v " << format_number(s.X1[k]) << ' ' << format_number(s.X2[k]) << ' '
                << format_number(s.X3[k]) << '\n';
        for (std::size_t j = 0; j + 1 < g.ny(); ++j)
            for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
                const std::size_t v00 = g.index(i, j) + 1, v10 = g.index(i + 1, j) + 1;
                const std::size_t v01 = g.index(i, j + 1) + 1, v11 = g.index(i + 1, j + 1) + 1;
                obj << "f " << v00 << ' ' << v10 << ' ' << v11 << '\n';
                obj << "f " << v00 << ' ' << v11 << ' ' << v01 << '\n';
            }
        if (!obj) throw std::runtime_error("export_obj: write failed for '" + obj_path + "'");
    }
    if (csv_path.empty()) return;
    std::ofstream csv = open_output(csv_path);
    CsvWriter w(csv);
    w.header({"i", "j", "x", "y", "K", "H"});
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            if (!s.curvature_valid[k]) continue;
            w.cell(i).cell(j).cell(g.x(i)).cell(g.y(j)).cell(s.K[k]).cell(s.H[k]);
            w.end_row();
        }
    if (!csv) throw std::runtime_error("export_obj: write failed for '" + csv_path + "'");
}

}  // namespace wlp
