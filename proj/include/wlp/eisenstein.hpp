#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "wlp/error.hpp"
#include "wlp/moebius.hpp"
#include "wlp/specfun.hpp"

namespace wlp {

struct EisensteinParams {
    cplx s{2.0, 0.0};
    int n_lat = 100;   // lattice method: largest c in the coprime sum
    int n_four = 64;   // Fourier method: largest frequency
    bool lattice_tail_correction = true;

    void validate() const {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw DomainError("EisensteinParams: non-finite s");
        if (n_lat < 1 || n_lat > 200) throw std::invalid_argument("EisensteinParams: n_lat must lie in [1, 200]");
        if (n_four < 1 || n_four > 64) throw std::invalid_argument("EisensteinParams: n_four must lie in [1, 64]");
    }
};

struct EisensteinValue {
    cplx value;
    double truncation = 0.0;  // size of the neglected part
};

namespace detail {

inline void check_scattering_poles(cplx s) {
    if (std::abs(s - 1.0) < 1e-6) throw DomainError("scattering_phi: pole at s = 1");
    const cplx t = s - 0.5;
    if (std::abs(t.imag()) < 1e-6 && t.real() < 1e-6 && std::abs(t.real() - std::round(t.real())) < 1e-6)
        throw DomainError("scattering_phi: pole where s - 1/2 is a nonpositive integer");
}

inline cplx phi_formula(cplx s) {
    const double sqrt_pi = std::sqrt(pi);
    const cplx num = sqrt_pi * detail::gamma_raw(s - 0.5) * zeta_continued(2.0 * s - 1.0).value;
    const cplx den = detail::gamma_raw(s) * zeta_continued(2.0 * s).value;
    if (!(std::abs(den) > 0.0) || !std::isfinite(std::abs(den)))
        throw DomainError("scattering_phi: denominator vanishes");
    return num / den;
}

/// Σ_{d | n} d^{w}
inline cplx divisor_sigma(int n, cplx w) {
    cplx acc = 0.0;
    for (int d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        acc += std::pow(static_cast<double>(d), w);
        const int e = n / d;
        if (e != d) acc += std::pow(static_cast<double>(e), w);
    }
    return acc;
}

inline int euler_phi(int n) {
    int result = n;
    for (int p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        while (n % p == 0) n /= p;
        result -= result / p;
    }
    if (n > 1) result -= result / n;
    return result;
}

inline int mobius(int n) {
    int sign = 1;
    for (int p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        n /= p;
        if (n % p == 0) return 0;
        sign = -sign;
    }
    return n > 1 ? -sign : sign;
}

/// Ramanujan sum c_c(n) = Σ_{d | gcd(c, n)} μ(c/d) d
inline int ramanujan_sum(int c, int n) {
    const int g = std::gcd(c, n);
    int acc = 0;
    for (int d = 1; d <= g; ++d)
        if (g % d == 0) acc += mobius(c / d) * d;
    return acc;
}

/// G(u) = Σ_{q in Z} ((u + q)^2 + y^2)^{-s} for u in [0, 1). Direct sum for
/// |q| <= Q; both tails through the binomial series in (y / (u+q))^2, whose
/// coefficients are Hurwitz zeta values.
inline cplx periodized_kernel(double u, double y, cplx s) {
    const int Q = 30 + static_cast<int>(std::ceil(3.0 * y));
    cplx acc = 0.0;
    const double y2 = y * y;
    for (int q = -Q; q <= Q; ++q) {
        const double t = u + static_cast<double>(q);
        acc += std::pow(t * t + y2, -s);
    }
    const double a_plus = static_cast<double>(Q) + 1.0 + u;
    const double a_minus = static_cast<double>(Q) + 1.0 - u;
    const double rho2 = y2 / (a_minus * a_minus);  // largest ratio in either tail
    cplx binom = 1.0;  // binom(-s, m)
    double ym = 1.0;   // y^{2m}
    for (int m = 0; m < 80; ++m) {
        const cplx sigma = 2.0 * s + 2.0 * static_cast<double>(m);
        const cplx tail = hurwitz_em(sigma, a_plus, em_direct_terms(sigma, a_plus)).value +
                          hurwitz_em(sigma, a_minus, em_direct_terms(sigma, a_minus)).value;
        const cplx term = binom * ym * tail;
        acc += term;
        // Remaining terms are bounded by a geometric series in rho2.
        if (m > 0 && std::abs(term) < 1e-18 * std::abs(acc) * (1.0 - rho2)) break;
        const double md = static_cast<double>(m);
        binom *= (-s - md) / (md + 1.0);
        ym *= y2;
    }
    return acc;
}

}  // namespace detail

/// Scattering coefficient √π Γ(s-1/2) ζ(2s-1) / (Γ(s) ζ(2s)) for Re s >= 1/2.
inline cplx scattering_phi(cplx s) {
    if (s.real() < 0.5 - 1e-14) throw DomainError("scattering_phi: requires Re s >= 1/2");
    detail::check_scattering_poles(s);
    return detail::phi_formula(s);
}

/// The same closed form evaluated anywhere off its poles, with ζ and Γ
/// continued by their reflection formulas (used for the 1 - s side).
inline cplx scattering_phi_continued(cplx s) {
    detail::check_scattering_poles(s);
    if (detail::near_nonpositive_integer(s, 1e-6)) throw DomainError("scattering_phi: Γ(s) pole");
    return detail::phi_formula(s);
}

/// Coefficient of cos(2πnx) in the Fourier expansion of E(z, s):
///   (4/ξ(2s)) n^{s-1/2} σ_{1-2s}(n) √y K_{s-1/2}(2πny),  ξ(2s) = π^{-s} Γ(s) ζ(2s).
inline cplx eisenstein_fourier_coefficient(int n, double y, cplx s) {
    if (n < 1) throw std::invalid_argument("eisenstein_fourier_coefficient: n must be positive");
    const cplx xi = std::pow(detail::pi, -s) * detail::gamma_raw(s) * zeta_continued(2.0 * s).value;
    const double nd = static_cast<double>(n);
    return 4.0 / xi * std::pow(nd, s - 0.5) * detail::divisor_sigma(n, 1.0 - 2.0 * s) * std::sqrt(y) *
           bessel_k(s - 0.5, 2.0 * detail::pi * nd * y).value;
}

/// E(z, s) from its Fourier expansion y^s + φ(s) y^{1-s} + Σ_n a_n(y) cos(2πnx).
/// Valid for y > 0.3; the truncation bound is the first omitted term.
inline EisensteinValue eisenstein_fourier(const UpperHalfPoint& z, const EisensteinParams& p) {
    p.validate();
    if (!(z.y() > 0.3))
        throw DomainError("eisenstein_fourier: requires Im z > 0.3; reduce to the fundamental domain first");
    const cplx s = p.s;
    const double y = z.y();
    cplx value = std::pow(y, s) + scattering_phi_continued(s) * std::pow(y, 1.0 - s);
    const cplx xi = std::pow(detail::pi, -s) * detail::gamma_raw(s) * zeta_continued(2.0 * s).value;
    const cplx pref = 4.0 / xi * std::sqrt(y);
    const cplx nu = s - 0.5;
    auto coefficient = [&](int n) {
        const double nd = static_cast<double>(n);
        return pref * std::pow(nd, nu) * detail::divisor_sigma(n, 1.0 - 2.0 * s) *
               bessel_k(nu, 2.0 * detail::pi * nd * y).value;
    };
    int n = 1;
    for (; n <= p.n_four; ++n) {
        const cplx a_n = coefficient(n);
        value += a_n * std::cos(2.0 * detail::pi * static_cast<double>(n) * z.x());
        if (n >= 3 && std::abs(a_n) < 1e-18 * std::max(1.0, std::abs(value))) {
            ++n;
            break;
        }
    }
    return {value, std::abs(coefficient(n))};
}

/// E(z, s) = Σ y^s / |cz + d|^{2s} over coprime (c, d), c >= 0 (c = 0 only with
/// d = 1), for Re s > 1. The sum over d is folded into a periodized kernel per
/// residue class r mod c; c runs up to n_lat. The c-tail is added mode by mode:
/// the x-mean through Σ φ(c) c^{-2s} = ζ(2s-1)/ζ(2s), the n-th mode through
/// Σ c_c(n) c^{-2s} = σ_{1-2s}(n)/ζ(2s). The truncation field carries its size.
inline EisensteinValue eisenstein_lattice(const UpperHalfPoint& z, const EisensteinParams& p) {
    p.validate();
    const cplx s = p.s;
    if (!(s.real() > 1.0))
        throw DomainError("eisenstein_lattice: requires Re s > 1; use eisenstein_fourier instead");
    const double x = z.x(), y = z.y();
    const cplx ys = std::pow(y, s);
    cplx sum = 0.0;
    cplx phi_partial = 0.0;  // Σ_{c<=N} φ(c) c^{-2s}
    for (int c = 1; c <= p.n_lat; ++c) {
        const double cd = static_cast<double>(c);
        cplx inner = 0.0;
        for (int r = 0; r < c; ++r) {
            if (std::gcd(r, c) != 1) continue;
            double u = x + static_cast<double>(r) / cd;
            u -= std::floor(u);
            inner += detail::periodized_kernel(u, y, s);
        }
        const cplx weight = std::pow(cd, -2.0 * s);
        sum += weight * inner;
        phi_partial += static_cast<double>(detail::euler_phi(c)) * weight;
    }
    const cplx mean_kernel = std::sqrt(detail::pi) * detail::gamma_raw(s - 0.5) / detail::gamma_raw(s) *
                             std::pow(y, 1.0 - 2.0 * s);
    const cplx phi_total = zeta_continued(2.0 * s - 1.0).value / zeta_continued(2.0 * s).value;
    cplx tail = ys * mean_kernel * (phi_total - phi_partial);
    const cplx zeta2s = zeta_continued(2.0 * s).value;
    const cplx kernel_scale = 2.0 * std::pow(detail::pi, s) * std::pow(y, 0.5 - s) / detail::gamma_raw(s);
    for (int n = 1; n <= 64; ++n) {
        const double nd = static_cast<double>(n);
        const double arg = 2.0 * detail::pi * nd * y;
        if (arg > 600.0) break;
        // Fourier coefficient of G at frequency ±n
        const cplx g_hat = kernel_scale * std::pow(nd, s - 0.5) * bessel_k(s - 0.5, arg).value;
        cplx partial = 0.0;
        for (int c = 1; c <= p.n_lat; ++c)
            partial += static_cast<double>(detail::ramanujan_sum(c, n)) * std::pow(static_cast<double>(c), -2.0 * s);
        const cplx mode = 2.0 * g_hat * std::cos(2.0 * detail::pi * nd * x) *
                          (detail::divisor_sigma(n, 1.0 - 2.0 * s) / zeta2s - partial);
        tail += ys * mode;
        if (std::abs(g_hat) < 1e-18 * std::abs(mean_kernel)) break;
    }
    cplx value = ys + ys * sum;
    if (p.lattice_tail_correction) value += tail;
    return {value, std::abs(tail)};
}

/// |E(z, 1/2 + ik) - φ(1/2 + ik) E(z, 1/2 - ik)| with z first reduced to the
/// fundamental domain; both sides by the Fourier method.
inline double functional_equation_residual(const UpperHalfPoint& z, double k, int n_four = 64) {
    if (!(std::abs(k) > 1e-12)) throw DomainError("functional_equation_residual: requires k != 0");
    const UpperHalfPoint w = reduce_to_fundamental_domain(z).point;
    EisensteinParams p;
    p.n_four = n_four;
    p.s = cplx(0.5, k);
    const cplx e_plus = eisenstein_fourier(w, p).value;
    p.s = cplx(0.5, -k);
    const cplx e_minus = eisenstein_fourier(w, p).value;
    return std::abs(e_plus - scattering_phi(cplx(0.5, k)) * e_minus);
}

/// E(z, s) at an arbitrary point: reduce, then expand.
inline EisensteinValue eisenstein(const UpperHalfPoint& z, const EisensteinParams& p) {
    return eisenstein_fourier(reduce_to_fundamental_domain(z).point, p);
}

}  // namespace wlp
