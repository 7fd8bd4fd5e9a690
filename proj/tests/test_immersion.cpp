#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "wlp/immersion.hpp"

using namespace wlp;

namespace {

ExactSolution cylinder(std::size_t n = 128) {
    FamilyParams p;  // U0 = 1, lambda = 1: psi = phi = exp(2iy)
    return exact_spinors(SpinorFamily::ConstU_Exponential, p, Grid::square(0, 0, n, 1.0));
}

ExactSolution plane(std::size_t n = 33) {
    return exact_spinors(SpinorFamily::ZeroU_Holo, {}, Grid::square(0, 0, n, 1.0));
}

double interior_max(const RealField& f, const std::vector<char>& valid) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (valid[k]) m = std::max(m, std::abs(f[k]));
    return m;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("wlp_test_" + name);
}

}  // namespace

TEST(OneForms, PlaneHasNoHeightForm) {
    const auto ex = plane(9);
    const auto f = one_forms(ex.spinors);
    EXPECT_EQ(f.height.dz.max_abs(), 0.0);
    EXPECT_EQ(f.height.dzbar.max_abs(), 0.0);
}

TEST(OneForms, CylinderHeightComponents) {
    const auto f = one_forms(cylinder(16).spinors);
    for (std::size_t k = 0; k < f.height.dz.size(); ++k) {
        EXPECT_LT(std::abs(f.height.dz[k] + 1.0), 1e-14);
        EXPECT_LT(std::abs(f.height.dzbar[k] + 1.0), 1e-14);
    }
}

TEST(OneForms, MinusFormIsConjugateSwapOfPlusForm) {
    const Grid g = Grid::square(0, 0, 9, 1.0);
    SpinorPair sp(ComplexField::sample(g, [](double x, double y) { return cplx(std::sin(x + 2 * y), x * y - 0.3); }),
                  ComplexField::sample(g, [](double x, double y) { return cplx(1.0 + x, std::cos(3 * y)); }));
    const auto f = one_forms(sp);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_LT(std::abs(f.minus.dz[k] - std::conj(f.plus.dzbar[k])), 1e-15);
        EXPECT_LT(std::abs(f.minus.dzbar[k] - std::conj(f.plus.dz[k])), 1e-15);
        EXPECT_LT(std::abs(f.height.dz[k] - std::conj(f.height.dzbar[k])), 1e-15);
    }
}

TEST(Closedness, ExactFamilyIsClosed) {
    const auto ex = cylinder(128);
    EXPECT_LE(closedness_residual(ex.spinors, ex.potential), 1e-9);
}

TEST(Closedness, NonSolutionIsDetected) {
    const Grid g = Grid::square(0, 0, 33, 1.0);
    SpinorPair sp(ComplexField::sample(g, [](double x, double y) { return cplx(x, y); }), ComplexField(g));
    EXPECT_GE(closedness_residual(sp, ComplexField(g)), 0.5);
}

TEST(Closedness, ZeroSpinors) {
    const Grid g = Grid::square(0, 0, 9, 1.0);
    EXPECT_EQ(closedness_residual(SpinorPair(ComplexField(g), ComplexField(g)), ComplexField(g)), 0.0);
}

TEST(Closedness, BoundedByDiracResidual) {
    // The closedness defect of each form is a spinor-weighted combination of the two Dirac residuals.
    const Grid g = Grid::square(0, 0, 65, 1.0);
    const auto ex = cylinder(65);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = 0.05 * (trial + 1), w = 1.0 + trial;
        SpinorPair sp = ex.spinors;
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i) {
                sp.psi(i, j) += a * std::sin(w * g.x(i)) * std::cos(g.y(j));
                sp.phi(i, j) += cplx(0, a) * std::cos(w * g.y(j) + g.x(i));
            }
        const double scale = std::max(sp.psi.max_abs(), sp.phi.max_abs());
        EXPECT_LE(closedness_residual(sp, ex.potential), 10.0 * scale * dirac_residual(sp, ex.potential).max());
    }
}

TEST(Integrate, PlaneFromConstantPhi) {
    const auto ex = plane();
    const SurfaceSample s = integrate_immersion(ex.spinors);
    const Grid& g = s.grid;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            EXPECT_NEAR(s.X1(i, j), -g.y(j), 1e-13);
            EXPECT_NEAR(s.X2(i, j), -g.x(i), 1e-13);
            EXPECT_NEAR(s.X3(i, j), 0.0, 1e-13);
        }
}

TEST(Integrate, CylinderClosedForm) {
    const auto ex = cylinder(128);
    const SurfaceSample s = integrate_immersion(ex.spinors);
    const Grid& g = s.grid;
    double radius_err = 0.0, coord_err = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double x = g.x(i), y = g.y(j);
            // X1 + iX2 = (i/2)(1 - e^{-4iy}), centered at (0, 1/2).
            coord_err = std::max({coord_err, std::abs(s.X1(i, j) + 0.5 * std::sin(4 * y)),
                                  std::abs(s.X2(i, j) - 0.5 * (1.0 - std::cos(4 * y))),
                                  std::abs(s.X3(i, j) + 2 * x)});
            radius_err = std::max(radius_err,
                                  std::abs(std::hypot(s.X1(i, j), s.X2(i, j) - 0.5) - 0.5));
        }
    EXPECT_LT(coord_err, 1e-8);
    EXPECT_LT(radius_err, 1e-8);
    EXPECT_LT(s.imag_defect, 1e-12);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(s.D[k], 2.0, 1e-14);
}

TEST(Integrate, ZeroSpinorsGiveZeroSurface) {
    const Grid g = Grid::square(0, 0, 9, 1.0);
    const SurfaceSample s = integrate_immersion(SpinorPair(ComplexField(g), ComplexField(g)));
    EXPECT_EQ(s.X1.max_abs() + s.X2.max_abs() + s.X3.max_abs(), 0.0);
}

TEST(Integrate, PathIndependenceForSolutions) {
    FamilyParams p;
    p.u0 = 0.7;
    p.lambda = cplx(1.2, 0.4);
    const auto ex = exact_spinors(SpinorFamily::ConstU_Exponential, p, Grid::square(0, 0, 97, 1.0));
    PathSpec xy{10, 20, PathStyle::XThenY}, yx{10, 20, PathStyle::YThenX};
    const SurfaceSample a = integrate_immersion(ex.spinors, xy), b = integrate_immersion(ex.spinors, yx);
    double d = 0.0;
    for (std::size_t k = 0; k < a.grid.size(); ++k)
        d = std::max({d, std::abs(a.X1[k] - b.X1[k]), std::abs(a.X2[k] - b.X2[k]), std::abs(a.X3[k] - b.X3[k])});
    EXPECT_LT(d, 1e-8);
    EXPECT_EQ(a.X1(10, 20), 0.0);
}

TEST(Integrate, TrapezoidIsSecondOrder) {
    auto err = [](std::size_t n) {
        const auto ex = cylinder(n);
        PathSpec path;
        path.quadrature = Quadrature::Trapezoid;
        const SurfaceSample s = integrate_immersion(ex.spinors, path);
        double e = 0.0;
        for (std::size_t j = 0; j < s.grid.ny(); ++j)
            e = std::max(e, std::abs(s.X1(0, j) + 0.5 * std::sin(4 * s.grid.y(j))));
        return e;
    };
    EXPECT_NEAR(std::log2(err(33) / err(65)), 2.0, 0.1);
}

TEST(Integrate, BasepointOutsideGridRejected) {
    const auto ex = plane(9);
    EXPECT_THROW(integrate_immersion(ex.spinors, PathSpec{9, 0}), std::out_of_range);
}

TEST(Curvatures, PlaneIsFlatAndMinimal) {
    const auto ex = plane();
    const auto c = curvatures(ex.spinors, ex.potential);
    EXPECT_EQ(interior_max(c.K, c.valid), 0.0);
    EXPECT_EQ(interior_max(c.H, c.valid), 0.0);
}

TEST(Curvatures, CylinderValues) {
    const auto ex = cylinder(64);
    const auto c = curvatures(ex.spinors, ex.potential);
    for (std::size_t k = 0; k < c.D.size(); ++k) {
        ASSERT_TRUE(c.valid[k]);
        EXPECT_NEAR(c.D[k], 2.0, 1e-14);
        EXPECT_NEAR(c.K[k], 0.0, 1e-9);
        EXPECT_NEAR(c.H[k], 1.0, 1e-14);
    }
}

TEST(Curvatures, ScalingKeepsKD2) {
    const Grid g = Grid::square(0, 0, 33, 1.0);
    SpinorPair sp(ComplexField::sample(g, [](double x, double y) { return cplx(1.0 + 0.3 * x * y, std::sin(y)); }),
                  ComplexField::sample(g, [](double x, double y) { return cplx(0.5 * std::cos(x), 1.0 + y * y); }));
    const ComplexField U(g, 0.8);
    const auto c1 = curvatures(sp, U);
    const double t = 1.7;
    sp *= t;
    const auto c2 = curvatures(sp, U);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(c2.D[k], t * t * c1.D[k], 1e-12 * c2.D[k]);
        EXPECT_NEAR(c2.H[k] * t * t, c1.H[k], 1e-12);
        EXPECT_NEAR(c2.K[k] * c2.D[k] * c2.D[k], c1.K[k] * c1.D[k] * c1.D[k], 1e-8);
    }
}

TEST(Curvatures, DegenerateMetricNodesFlagged) {
    const Grid g = Grid::square(-0.5, -0.5, 11, 1.0);  // node (5, 5) is the origin
    SpinorPair sp(ComplexField(g), ComplexField::sample(g, [](double x, double y) { return cplx(x, y); }));
    const auto c = curvatures(sp, ComplexField(g));
    EXPECT_FALSE(c.valid[g.index(5, 5)]);
    EXPECT_FALSE(c.valid[g.index(4, 5)]);
    EXPECT_TRUE(c.valid[g.index(1, 1)]);
}

TEST(FundamentalForms, PlaneAndConformality) {
    const SurfaceSample s = integrate_immersion(plane().spinors);
    const auto ff = fd_fundamental_forms(s);
    EXPECT_LT(interior_max(ff.K, ff.valid), 1e-10);
    EXPECT_LT(interior_max(ff.H, ff.valid), 1e-10);
    EXPECT_LE(conformality_residual(s), 1e-10);
}

TEST(FundamentalForms, CylinderApproximatelyReproduced) {
    const auto ex = cylinder(128);
    const SurfaceSample s = build_surface(ex.spinors, ex.potential);
    const auto ff = fd_fundamental_forms(s);
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        if (!ff.valid[k]) continue;
        EXPECT_NEAR(ff.K[k], 0.0, 2e-2);
        EXPECT_NEAR(std::abs(ff.H[k]), 1.0, 2e-2);
    }
    EXPECT_LE(conformality_residual(s), 2e-2);
    EXPECT_LE(compare_curvatures(s, ff).max(), 2e-2);
}

TEST(FundamentalForms, ParaboloidAtOrigin) {
    const Grid g = Grid::square(-0.01, -0.01, 21, 0.02);
    const auto x1 = RealField::sample(g, [](double x, double) { return x; });
    const auto x2 = RealField::sample(g, [](double, double y) { return y; });
    const auto x3 = RealField::sample(g, [](double x, double y) { return x * x + y * y; });
    const SurfaceSample s = SurfaceSample::from_coordinates(x1, x2, x3);
    const auto ff = fd_fundamental_forms(s);
    const std::size_t k = g.index(10, 10);
    ASSERT_TRUE(ff.valid[k]);
    EXPECT_NEAR(ff.K[k], 4.0, 1e-3);
    EXPECT_NEAR(ff.H[k], 2.0, 1e-3);
}

TEST(FundamentalForms, CrossCheckConvergesUnderRefinement) {
    FamilyParams p;
    p.u0 = 1.0;
    p.lambda = cplx(1.0, 0.5);
    auto err = [&](std::size_t n) {
        const auto ex = exact_spinors(SpinorFamily::ConstU_Exponential, p, Grid::square(0, 0, n, 1.0));
        const SurfaceSample s = build_surface(ex.spinors, ex.potential);
        return compare_curvatures(s, fd_fundamental_forms(s)).max();
    };
    EXPECT_GE(std::log2(err(65) / err(129)), 1.5);
}

TEST(Conformality, NonSolutionReportedWithoutThrowing) {
    const Grid g = Grid::square(0, 0, 33, 1.0);
    SpinorPair sp(ComplexField::sample(g, [](double x, double y) { return cplx(1.0 + x, y); }),
                  ComplexField::sample(g, [](double x, double) { return cplx(0.5, x); }));
    const SurfaceSample s = integrate_immersion(sp);
    double r = -1.0;
    EXPECT_NO_THROW(r = conformality_residual(s));
    EXPECT_TRUE(std::isfinite(r));
}

TEST(Reality, ImaginaryDefectTinyForArbitrarySpinors) {
    const Grid g = Grid::square(0, 0, 41, 1.0);
    SpinorPair sp(ComplexField::sample(g, [](double x, double y) { return cplx(std::exp(x) * y, -x * x); }),
                  ComplexField::sample(g, [](double x, double y) { return cplx(std::cos(5 * y), x - y); }));
    EXPECT_LE(integrate_immersion(sp).imag_defect, 1e-12);
}

TEST(ExportObj, CountsAndManifoldWinding) {
    const auto ex = cylinder(12);
    const SurfaceSample s = build_surface(ex.spinors, ex.potential);
    const auto obj = temp_path("cyl.obj"), csv = temp_path("cyl.csv");
    export_obj(s, obj.string(), csv.string());
    std::ifstream in(obj);
    std::string tag;
    std::size_t nv = 0;
    std::vector<std::array<std::size_t, 3>> faces;
    for (std::string line; std::getline(in, line);) {
        std::istringstream ls(line);
        ls >> tag;
        if (tag == "v") ++nv;
        if (tag == "f") {
            std::array<std::size_t, 3> f{};
            ls >> f[0] >> f[1] >> f[2];
            faces.push_back(f);
        }
    }
    EXPECT_EQ(nv, 144u);
    EXPECT_EQ(faces.size(), 2u * 11 * 11);
    // Every directed edge appears at most once; every shared edge is traversed once each way.
    std::map<std::pair<std::size_t, std::size_t>, int> directed;
    for (const auto& f : faces)
        for (int e = 0; e < 3; ++e) ++directed[{f[e], f[(e + 1) % 3]}];
    for (const auto& [edge, count] : directed) {
        EXPECT_EQ(count, 1);
        EXPECT_LE(edge.first, nv);
    }
    std::ifstream c(csv);
    std::string header;
    std::getline(c, header);
    EXPECT_EQ(header, "i,j,x,y,K,H");
    std::filesystem::remove(obj);
    std::filesystem::remove(csv);
}

TEST(ExportObj, SmallPlaneGrid) {
    const auto ex = exact_spinors(SpinorFamily::ZeroU_Holo, {}, Grid::square(0, 0, 3, 1.0));
    const SurfaceSample s = integrate_immersion(ex.spinors);
    const auto obj = temp_path("plane.obj");
    export_obj(s, obj.string(), "");
    std::ifstream in(obj);
    int nv = 0, nf = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("v ", 0) == 0) ++nv;
        if (line.rfind("f ", 0) == 0) ++nf;
    }
    EXPECT_EQ(nv, 9);
    EXPECT_EQ(nf, 8);
    std::filesystem::remove(obj);
}

TEST(ExportObj, UnwritablePathSurfacesError) {
    const SurfaceSample s = integrate_immersion(plane(5).spinors);
    EXPECT_THROW(export_obj(s, "/nonexistent_dir_wlp/x.obj", ""), std::runtime_error);
}
