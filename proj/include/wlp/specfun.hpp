#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "wlp/error.hpp"

namespace wlp {

using cplx = std::complex<double>;

struct SpecialValue {
    cplx value;
    double error_estimate = 0.0;
};

namespace detail {

constexpr double pi = std::numbers::pi;

inline bool near_nonpositive_integer(cplx s, double tol) {
    if (std::abs(s.imag()) > tol || s.real() > tol) return false;
    return std::abs(s.real() - std::round(s.real())) <= tol;
}

/// log Γ(s) for Re s >= 1/2 (Lanczos, g = 7, 9 terms).
inline cplx log_gamma_right(cplx s) {
    static constexpr std::array<double, 9> c = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;
    const cplx z = s - 1.0;
    cplx x = c[0];
    for (int k = 1; k < 9; ++k) x += c[static_cast<std::size_t>(k)] / (z + static_cast<double>(k));
    const cplx t = z + g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx gamma_raw(cplx s) {
    if (s.real() >= 0.5) return std::exp(log_gamma_right(s));
    // Γ(s) Γ(1-s) = π / sin(πs)
    return pi / (std::sin(pi * s) * std::exp(log_gamma_right(1.0 - s)));
}

// B_2, B_4, ..., B_30
inline constexpr std::array<double, 15> bernoulli_even = {
    1.0 / 6,           -1.0 / 30,          1.0 / 42,          -1.0 / 30,
    5.0 / 66,          -691.0 / 2730,      7.0 / 6,           -3617.0 / 510,
    43867.0 / 798,     -174611.0 / 330,    854513.0 / 138,    -236364091.0 / 2730,
    8553103.0 / 6,     -23749461029.0 / 870, 8615841276005.0 / 14322};

/// Euler-Maclaurin tail Σ_{n>=0} (n + a)^{-s} with the sum split at a + N.
/// Returns the value and the size of the last correction term.
inline SpecialValue hurwitz_em(cplx s, double a, int n_direct) {
    cplx sum = 0.0;
    for (int n = 0; n < n_direct; ++n) sum += std::pow(static_cast<double>(n) + a, -s);
    const double A = a + static_cast<double>(n_direct);
    const cplx Ams = std::pow(A, -s);
    sum += A * Ams / (s - 1.0) + 0.5 * Ams;
    // term_k = B_2k/(2k)! * s(s+1)...(s+2k-2) * A^{-s-2k+1}
    cplx rising = s;  // s (s+1) ... (s+2k-2)
    cplx power = Ams / A;
    double fact = 2.0;  // (2k)!
    double last = 0.0;
    for (std::size_t k = 1; k <= bernoulli_even.size(); ++k) {
        const cplx term = bernoulli_even[k - 1] / fact * rising * power;
        sum += term;
        last = std::abs(term);
        const double kk = static_cast<double>(k);
        rising *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
        power /= A * A;
        fact *= (2.0 * kk + 1.0) * (2.0 * kk + 2.0);
    }
    return {sum, last + 1e-15 * std::abs(sum)};
}

/// Number of direct terms so that the Euler-Maclaurin ratio |s|/(2π(a+N)) stays small.
inline int em_direct_terms(cplx s, double a) {
    const double need = (std::abs(s) + 30.0) / (2.0 * pi * 0.25);
    return static_cast<int>(std::max(0.0, std::ceil(need - a)));
}

/// ζ(s) for Re s >= 0, s != 1.
inline SpecialValue zeta_em(cplx s) {
    const int N = static_cast<int>(std::ceil(std::abs(s))) + 15;
    const SpecialValue tail = hurwitz_em(s, 1.0, std::max(N, em_direct_terms(s, 1.0)));
    return tail;
}

}  // namespace detail

/// Complex Gamma function. Poles at 0, -1, -2, ... (within 1e-12) raise DomainError.
inline SpecialValue gamma(cplx s) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw DomainError("gamma: non-finite argument");
    if (detail::near_nonpositive_integer(s, 1e-12)) throw DomainError("gamma: pole at a nonpositive integer");
    const cplx v = detail::gamma_raw(s);
    return {v, 2e-15 * (1.0 + std::abs(s)) * std::abs(v)};
}

inline SpecialValue log_gamma(cplx s) {
    if (detail::near_nonpositive_integer(s, 1e-12)) throw DomainError("log_gamma: pole at a nonpositive integer");
    if (s.real() >= 0.5) return {detail::log_gamma_right(s), 2e-15 * (1.0 + std::abs(s))};
    const cplx v = std::log(detail::pi / std::sin(detail::pi * s)) - detail::log_gamma_right(1.0 - s);
    return {v, 2e-15 * (1.0 + std::abs(s))};
}

/// Riemann zeta on the whole plane except s = 1 (reflection for Re s < 0).
inline SpecialValue zeta_continued(cplx s) {
    if (std::abs(s - 1.0) < 1e-6) throw DomainError("zeta: pole at s = 1");
    if (s.real() >= 0.0) return detail::zeta_em(s);
    // ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)
    const SpecialValue z1 = detail::zeta_em(1.0 - s);
    const cplx f = std::pow(2.0, s) * std::pow(detail::pi, s - 1.0) * std::sin(detail::pi * s / 2.0) *
                   detail::gamma_raw(1.0 - s);
    return {f * z1.value, std::abs(f) * z1.error_estimate + 1e-15 * std::abs(f * z1.value)};
}

/// Riemann zeta for Re s > 0, s != 1: Euler-Maclaurin summation with
/// Bernoulli corrections through B_30.
inline SpecialValue zeta(cplx s) {
    if (!(s.real() > 0.0)) throw DomainError("zeta: requires Re s > 0");
    return zeta_continued(s);
}

/// Hurwitz zeta Σ_{n>=0} (n + a)^{-s}, a > 0, s != 1.
inline SpecialValue hurwitz_zeta(cplx s, double a) {
    if (!(a > 0.0)) throw DomainError("hurwitz_zeta: requires a > 0");
    if (std::abs(s - 1.0) < 1e-6) throw DomainError("hurwitz_zeta: pole at s = 1");
    return detail::hurwitz_em(s, a, detail::em_direct_terms(s, a));
}

/// Modified Bessel K_nu(x) for x > 0, |Re nu| <= 5, by composite Simpson on
///   K_nu(x) = e^{-x} ∫_0^T e^{-x (cosh t - 1)} cosh(nu t) dt,
/// truncated where the integrand bound falls below 1e-18. The error estimate
/// is the Richardson difference against the doubled step.
inline SpecialValue bessel_k(cplx nu, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_k: requires x > 0");
    if (!(std::abs(nu.real()) <= 5.0)) throw DomainError("bessel_k: requires |Re nu| <= 5");
    const double anu = std::abs(nu.real());
    // Truncation point: x(cosh T - 1) - |Re nu| T > log(1e18).
    const double budget = std::log(1e18);
    double T = 0.5;
    while (x * (std::cosh(T) - 1.0) - anu * T < budget) T *= 1.25;
    double h = std::min(1e-3, 0.1 / std::sqrt(x));
    if (std::abs(nu.imag()) > 0.0) h = std::min(h, 0.05 / std::abs(nu.imag()));
    std::size_t n = static_cast<std::size_t>(std::ceil(T / h));
    if (n % 4 != 0) n += 4 - n % 4;  // keeps both Simpson levels even
    h = T / static_cast<double>(n);

    const bool real_order = nu.imag() == 0.0;
    auto integrand = [&](double t) -> cplx {
        const double w = std::exp(-x * (std::cosh(t) - 1.0));
        if (real_order) return w * std::cosh(nu.real() * t);
        return w * std::cosh(nu * t);
    };
    cplx s_fine = integrand(0.0) + integrand(T), s_coarse = s_fine;
    for (std::size_t k = 1; k < n; ++k) {
        const cplx f = integrand(static_cast<double>(k) * h);
        s_fine += (k % 2 == 1 ? 4.0 : 2.0) * f;
        if (k % 2 == 0) s_coarse += ((k / 2) % 2 == 1 ? 4.0 : 2.0) * f;
    }
    const double ex = std::exp(-x);
    const cplx fine = ex * s_fine * (h / 3.0);
    const cplx coarse = ex * s_coarse * (2.0 * h / 3.0);
    const double err = std::abs(fine - coarse) / 15.0 + 1e-18 * ex + 1e-15 * std::abs(fine);
    return {fine, err};
}

}  // namespace wlp
