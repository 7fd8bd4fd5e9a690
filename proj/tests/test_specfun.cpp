#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wlp/specfun.hpp"

// Reference values below were computed with mpmath at 30 digits.

namespace {

using wlp::cplx;
constexpr double pi = std::numbers::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Gamma, ClassicalValues) {
    EXPECT_LT(rel(wlp::gamma(0.5).value, std::sqrt(pi)), 1e-13);
    EXPECT_LT(rel(wlp::gamma(5.0).value, 24.0), 1e-13);
    EXPECT_LT(rel(wlp::gamma(1.0).value, 1.0), 1e-14);
}

TEST(Gamma, Recurrence) {
    const cplx s(0.3, 2.0);
    EXPECT_LT(std::abs(wlp::gamma(s + 1.0).value / (s * wlp::gamma(s).value) - 1.0), 1e-12);
}

TEST(Gamma, ReferenceValues) {
    EXPECT_LT(rel(wlp::gamma(cplx(0.3, 2.0)).value, cplx(0.05746533756958803346, -0.074984912582646138176)), 1e-12);
    EXPECT_LT(rel(wlp::gamma(cplx(-2.5, 0.7)).value, cplx(-0.15981871636293293015, -0.15756654908151528378)), 1e-12);
    EXPECT_LT(rel(wlp::gamma(cplx(20.2, -3.0)).value, cplx(-156554180944307113.9, -79739361764076957.745)), 1e-12);
    EXPECT_LT(rel(wlp::log_gamma(cplx(30, 40)).value, cplx(49.232808494070298819, 143.83479582266482462)), 1e-13);
}

TEST(Gamma, Reflection) {
    for (cplx s : {cplx(0.3, 0.1), cplx(-1.7, 2.0), cplx(0.5, 5.0), cplx(2.2, -0.4)}) {
        const cplx v = wlp::gamma(s).value * wlp::gamma(1.0 - s).value * std::sin(pi * s) / pi;
        EXPECT_LT(std::abs(v - 1.0), 1e-10) << s;
    }
}

TEST(Gamma, PolesRejected) {
    EXPECT_THROW(wlp::gamma(0.0), wlp::DomainError);
    EXPECT_THROW(wlp::gamma(-3.0), wlp::DomainError);
    EXPECT_NO_THROW(wlp::gamma(cplx(-3.0, 1e-6)));
}

TEST(Zeta, ClassicalValues) {
    EXPECT_LT(rel(wlp::zeta(2.0).value, pi * pi / 6.0), 1e-14);
    EXPECT_LT(rel(wlp::zeta(4.0).value, std::pow(pi, 4) / 90.0), 1e-14);
}

TEST(Zeta, ThreeAgainstDirectSummation) {
    // Σ_{n<=10^6} n^{-3} plus its integral tail 1/(2N^2) - 1/(2N^2)·(1/N) + ...
    double s = 0.0;
    const int N = 1000000;
    for (int n = N; n >= 1; --n) s += 1.0 / (static_cast<double>(n) * n * n);
    const double Nd = N;
    s += 1.0 / (2.0 * Nd * Nd) - 1.0 / (2.0 * Nd * Nd * Nd);
    EXPECT_NEAR(wlp::zeta(3.0).value.real(), s, 1e-9);
    EXPECT_LT(rel(wlp::zeta(3.0).value, 1.2020569031595942854), 1e-14);
}

TEST(Zeta, ConjugateSymmetry) {
    const cplx s(0.5, 14.0);
    EXPECT_LT(std::abs(wlp::zeta(std::conj(s)).value - std::conj(wlp::zeta(s).value)), 1e-14);
}

TEST(Zeta, ReferenceValues) {
    EXPECT_LT(rel(wlp::zeta(cplx(0.5, 14.0)).value, cplx(0.022241142609993589246, -0.1032581232664500579)), 1e-10);
    EXPECT_LT(rel(wlp::zeta(cplx(1.5, 2.0)).value, cplx(0.7521818690342325726, -0.33397906099331399421)), 1e-10);
    EXPECT_LT(rel(wlp::zeta(cplx(0.75, 40.0)).value, cplx(0.82789547359127058885, -0.70704801798540988588)), 1e-10);
    EXPECT_LT(rel(wlp::zeta_continued(cplx(-1.5, 2.0)).value, cplx(0.12424726557777474701, -0.015707749528273202786)),
              1e-10);
}

TEST(Zeta, AccurateOnTheLineReOne) {
    // Where the alternating-series prefactor 1 - 2^{1-s} vanishes.
    const cplx s(1.0, 2.0 * pi / std::log(2.0));
    const cplx z = wlp::zeta(s).value;
    EXPECT_TRUE(std::isfinite(z.real()) && std::isfinite(z.imag()));
    // Compare against the Hurwitz value at a = 1 and a = 1/2 via ζ(s, 1/2) = (2^s - 1) ζ(s).
    EXPECT_LT(rel(wlp::hurwitz_zeta(s, 0.5).value, (std::pow(2.0, s) - 1.0) * z), 1e-11);
}

TEST(Zeta, DomainErrors) {
    EXPECT_THROW(wlp::zeta(1.0), wlp::DomainError);
    EXPECT_THROW(wlp::zeta(cplx(1.0 + 1e-7, 0.0)), wlp::DomainError);
    EXPECT_THROW(wlp::zeta(cplx(-0.5, 1.0)), wlp::DomainError);
}

TEST(HurwitzZeta, ReferenceValue) {
    EXPECT_LT(rel(wlp::hurwitz_zeta(2.5, 0.3).value, 21.069239202247724917), 1e-12);
    EXPECT_THROW(wlp::hurwitz_zeta(2.0, 0.0), wlp::DomainError);
}

TEST(BesselK, HalfOrderClosedForm) {
    EXPECT_LT(rel(wlp::bessel_k(0.5, 1.0).value, std::sqrt(pi / 2.0) * std::exp(-1.0)), 1e-9);
    EXPECT_LT(rel(wlp::bessel_k(0.5, 7.3).value, std::sqrt(pi / 14.6) * std::exp(-7.3)), 1e-9);
}

TEST(BesselK, OrderZeroSelfConvergence) {
    const auto k = wlp::bessel_k(0.0, 1.0);
    // Half-step Simpson on the same integral as an independent refinement.
    const double T = 6.0;
    const int n = 24000;
    const double h = T / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::exp(-std::cosh(i * h));
    }
    s *= h / 3.0;
    EXPECT_NEAR(k.value.real(), s, 1e-9 * s);
    EXPECT_LT(rel(k.value, 0.42102443824070833334), 1e-9);
    EXPECT_LE(k.error_estimate, 1e-9 * std::abs(k.value));
}

TEST(BesselK, ReferenceValues) {
    EXPECT_LT(rel(wlp::bessel_k(cplx(0.3, 2.0), 1.7).value, cplx(0.059411412391882006367, 0.019550556654528043352)),
              1e-9);
    EXPECT_LT(rel(wlp::bessel_k(4.5, 0.2).value, 183389.35497273285677), 1e-9);
    EXPECT_LT(rel(wlp::bessel_k(cplx(0, 1.5), 20.0).value, 5.4343371261171398882e-10), 1e-9);
}

TEST(BesselK, ImaginaryOrderIsReal) {
    const auto k = wlp::bessel_k(cplx(0.0, 2.0), 0.5);
    EXPECT_EQ(k.value.imag(), 0.0);
    EXPECT_LT(rel(k.value, 0.016502018949481442656), 1e-9);
}

TEST(BesselK, DerivativeIdentity) {
    // K_{ν-1}(x) + K_{ν+1}(x) = -2 dK_ν/dx
    for (cplx nu : {cplx(0.7, 0.0), cplx(0.5, 1.5), cplx(0.0, 3.0)}) {
        const double x = 1.3, d = 1e-4;
        const cplx deriv = (wlp::bessel_k(nu, x + d).value - wlp::bessel_k(nu, x - d).value) / (2 * d);
        const cplx lhs = wlp::bessel_k(nu - 1.0, x).value + wlp::bessel_k(nu + 1.0, x).value;
        EXPECT_LT(std::abs(lhs + 2.0 * deriv), 1e-6) << nu;
    }
}

TEST(BesselK, DomainErrors) {
    EXPECT_THROW(wlp::bessel_k(0.5, 0.0), wlp::DomainError);
    EXPECT_THROW(wlp::bessel_k(0.5, -1.0), wlp::DomainError);
    EXPECT_THROW(wlp::bessel_k(6.0, 1.0), wlp::DomainError);
}
