#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "wlp/eisenstein.hpp"
#include "wlp/spectral.hpp"

using namespace wlp;

namespace {

constexpr double pi = std::numbers::pi;

EisensteinParams at(cplx s) {
    EisensteinParams p;
    p.s = s;
    return p;
}

}  // namespace

TEST(Params, Validation) {
    EisensteinParams p;
    p.n_lat = 201;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.n_lat = 100;
    p.n_four = 65;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.n_four = 64;
    EXPECT_NO_THROW(p.validate());
}

TEST(ScatteringPhi, ValueAtTwo) {
    const double expected = pi / 2.0 * wlp::zeta(3.0).value.real() / wlp::zeta(4.0).value.real();
    EXPECT_NEAR(scattering_phi(2.0).real(), expected, 1e-14);
    EXPECT_NEAR(scattering_phi(2.0).real(), 1.7445680821312559524, 1e-13);  // mpmath
}

TEST(ScatteringPhi, UnitaryOnCriticalLine) {
    for (double t : {1.0, 2.5, 7.0}) EXPECT_NEAR(std::abs(scattering_phi(cplx(0.5, t))), 1.0, 1e-8) << t;
}

TEST(ScatteringPhi, FunctionalRelation) {
    for (cplx s : {cplx(0.75, 0.3), cplx(0.75, -0.3)})
        EXPECT_LT(std::abs(scattering_phi(s) * scattering_phi_continued(1.0 - s) - 1.0), 1e-8) << s;
}

TEST(ScatteringPhi, ConjugateSymmetry) {
    const cplx s(1.3, 4.0);
    EXPECT_LT(std::abs(scattering_phi(std::conj(s)) - std::conj(scattering_phi(s))), 1e-13);
}

TEST(ScatteringPhi, PolesAndDomain) {
    EXPECT_THROW(scattering_phi(1.0), DomainError);
    EXPECT_THROW(scattering_phi(cplx(1.0 + 5e-7, 0.0)), DomainError);
    EXPECT_THROW(scattering_phi(0.5), DomainError);
    EXPECT_THROW(scattering_phi_continued(-0.5), DomainError);
    EXPECT_THROW(scattering_phi(cplx(0.3, 1.0)), DomainError);
}

TEST(Lattice, ClosedFormAtI) {
    // Σ'_{(m,n)} (m^2+n^2)^{-2} = 4 ζ(2) G, so E(i, 2) = 2 ζ(2) G / ζ(4).
    EXPECT_NEAR(eisenstein_lattice({0.0, 1.0}, at(2.0)).value.real(), 2.7842015453307912222, 1e-8);
}

TEST(Lattice, PeriodicInX) {
    const cplx a = eisenstein_lattice({0.17, 1.3}, at(2.0)).value;
    const cplx b = eisenstein_lattice({1.17, 1.3}, at(2.0)).value;
    EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(a));
}

TEST(Lattice, LeadingTermDominatesHighInCusp) {
    const double y = 50.0;
    EXPECT_NEAR(eisenstein_lattice({0.0, y}, at(2.0)).value.real() / (y * y), 1.0, 1e-4);
}

TEST(Lattice, AgreesWithFourier) {
    const std::vector<UpperHalfPoint> pts = {{0.0, 1.0}, {0.3, 0.96}, {-0.45, 1.2}, {0.1, 2.0}, {0.5, 0.87}};
    for (cplx s : {cplx(2.0), cplx(1.5, 2.0), cplx(3.0, -1.0), cplx(1.2, 0.0)}) {
        double worst = 0.0;
        for (const auto& z : pts)
            worst = std::max(worst,
                             std::abs(eisenstein_lattice(z, at(s)).value - eisenstein_fourier(z, at(s)).value));
        EXPECT_LE(worst, 1e-6) << s;
    }
}

TEST(Lattice, TailEstimateReported) {
    EisensteinParams p = at(2.0);
    p.n_lat = 20;
    const EisensteinValue v = eisenstein_lattice({0.0, 1.0}, p);
    EXPECT_GT(v.truncation, 0.0);
    p.lattice_tail_correction = false;
    const EisensteinValue raw = eisenstein_lattice({0.0, 1.0}, p);
    EXPECT_NEAR(std::abs(v.value - raw.value), v.truncation, 1e-15);
}

TEST(Lattice, RawPartialSumApproachesFourier) {
    const UpperHalfPoint z(0.3, 0.96);
    const cplx ref = eisenstein_fourier(z, at(1.5)).value;
    EisensteinParams p = at(1.5);
    p.lattice_tail_correction = false;
    double prev = 1e300;
    for (int n : {25, 50, 100, 200}) {
        p.n_lat = n;
        const EisensteinValue v = eisenstein_lattice(z, p);
        const double err = std::abs(v.value - ref);
        EXPECT_LT(err, prev) << n;
        // The omitted tail accounts for the whole gap.
        EXPECT_NEAR(err, v.truncation, 1e-12 + 1e-6 * v.truncation) << n;
        prev = err;
    }
}

TEST(Lattice, RejectsNonConvergentRegion) {
    EXPECT_THROW(eisenstein_lattice({0.0, 1.0}, at(cplx(1.0, 3.0))), DomainError);
    EXPECT_THROW(eisenstein_lattice({0.0, 1.0}, at(0.75)), DomainError);
}

TEST(Fourier, AutomorphyAfterReduction) {
    const auto ball = group_ball(3);
    const std::vector<UpperHalfPoint> pts = {{0.1, 1.1}, {-0.3, 0.98}, {0.45, 1.7}};
    for (cplx s : {cplx(2.0), cplx(0.5, 3.0)}) {
        auto f = [&](const UpperHalfPoint& z) { return eisenstein(z, at(s)).value; };
        EXPECT_LE(automorphy_residual(f, ball, pts), 1e-8) << s;
    }
}

TEST(Fourier, InvarianceUnderInversionWithoutReduction) {
    // Both z and -1/z lie above Im = 0.3 here, so no reduction is applied.
    const UpperHalfPoint z(0.2, 1.1);
    const UpperHalfPoint w = apply(MoebiusMap::inversion(), z);
    ASSERT_GT(w.y(), 0.3);
    const cplx a = eisenstein_fourier(z, at(cplx(0.5, 2.0))).value, b = eisenstein_fourier(w, at(cplx(0.5, 2.0))).value;
    EXPECT_LT(std::abs(a - b), 1e-12);
}

TEST(Fourier, ConjugationSymmetry) {
    const UpperHalfPoint z(0.0, 1.4);
    for (double k : {1.0, 4.0}) {
        const cplx a = eisenstein_fourier(z, at(cplx(0.5, k))).value;
        const cplx b = eisenstein_fourier(z, at(cplx(0.5, -k))).value;
        EXPECT_TRUE(std::isfinite(std::abs(a)));
        EXPECT_LT(std::abs(b - std::conj(a)), 1e-13 * std::max(1.0, std::abs(a)));
    }
}

TEST(Fourier, TermDecayAtUnitHeight) {
    const cplx s(0.5, 2.0);
    for (int n = 3; n < 12; ++n) {
        const double r = std::abs(eisenstein_fourier_coefficient(n + 1, 1.0, s)) /
                         std::abs(eisenstein_fourier_coefficient(n, 1.0, s));
        // e^{-2π} times a divisor-count ratio
        EXPECT_LT(r, 3e-2) << n;
    }
}

TEST(Fourier, TruncationBoundIsFirstOmittedTerm) {
    EisensteinParams p = at(2.0);
    p.n_four = 4;
    const EisensteinValue v = eisenstein_fourier({0.0, 1.0}, p);
    EXPECT_NEAR(v.truncation, std::abs(eisenstein_fourier_coefficient(5, 1.0, 2.0)), 1e-30);
}

TEST(Fourier, LowPointRejected) {
    EXPECT_THROW(eisenstein_fourier({0.0, 0.2}, at(2.0)), DomainError);
    EXPECT_NO_THROW(eisenstein({0.0, 0.2}, at(2.0)));
}

TEST(FunctionalEquation, ResidualsSmall) {
    EXPECT_LE(functional_equation_residual({0.0, 2.0}, 1.0), 1e-6);
    EXPECT_LE(functional_equation_residual({0.3, 1.0}, 2.5), 1e-6);
}

TEST(FunctionalEquation, NegativeControlWithoutPhi) {
    const UpperHalfPoint z(0.0, 2.0);
    const cplx a = eisenstein_fourier(z, at(cplx(0.5, 1.0))).value;
    const cplx b = eisenstein_fourier(z, at(cplx(0.5, -1.0))).value;
    EXPECT_GE(std::abs(a - b), 1e-2);
    EXPECT_THROW(functional_equation_residual(z, 0.0), DomainError);
}

TEST(GeneralizedEigenfunction, DiscreteOperatorOnCuspStrip) {
    // L applied to sampled E(z, 1/2 + ik) on strip nodes is k^2 E up to O(h^2).
    const double k = 1.5;
    auto rel_err = [&](double h) {
        const SpectralOperator op({DomainKind::ModularStandard, 4.0}, h);
        const EisensteinParams p = at(cplx(0.5, k));
        // Coefficients depend on y only; cache them per mesh row.
        std::map<double, std::vector<cplx>> rows;
        const Eigen::VectorXd re = op.sample([&](double x, double y) {
            auto it = rows.find(y);
            if (it == rows.end()) {
                std::vector<cplx> c{std::pow(y, p.s) + scattering_phi(p.s) * std::pow(y, 1.0 - p.s)};
                for (int n = 1; n <= 12; ++n) c.push_back(eisenstein_fourier_coefficient(n, y, p.s));
                it = rows.emplace(y, std::move(c)).first;
            }
            cplx v = it->second[0];
            for (int n = 1; n <= 12; ++n) v += it->second[n] * std::cos(2 * pi * n * x);
            return v.real();
        });
        const Eigen::VectorXd Lre = op.apply(re);
        double err = 0.0, scale = 0.0;
        for (std::size_t q = 0; q < op.size(); ++q) {
            if (!op.in_cusp_strip(q) || op.nodes()[q].y < 1.2) continue;
            const long i = static_cast<long>(q);
            err = std::max(err, std::abs(Lre[i] - k * k * re[i]));
            scale = std::max(scale, std::abs(k * k * re[i]));
        }
        return err / scale;
    };
    const double e1 = rel_err(0.05), e2 = rel_err(0.025);
    EXPECT_LT(e2, 2e-3);
    EXPECT_GT(std::log2(e1 / e2), 1.7);
}
