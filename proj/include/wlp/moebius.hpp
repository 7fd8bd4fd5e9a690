#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wlp/error.hpp"

namespace wlp {

using cplx = std::complex<double>;

/// Point z = x + iy of the upper half-plane (y > 0 strictly).
class UpperHalfPoint {
public:
    UpperHalfPoint(double x, double y) : x_(x), y_(y) {
        if (!std::isfinite(x) || !std::isfinite(y))
            throw DomainError("UpperHalfPoint: non-finite coordinate");
        if (!(y > 0.0)) throw DomainError("UpperHalfPoint: Im z must be positive");
    }
    explicit UpperHalfPoint(cplx z) : UpperHalfPoint(z.real(), z.imag()) {}

    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }
    cplx z() const noexcept { return {x_, y_}; }

private:
    double x_, y_;
};

/// Element g = (a b; c d) of SL(2,R) acting by z -> (az+b)/(cz+d).
///
/// The stored matrix is kept as given (so products respect the SL(2,R)
/// sign needed by the spinor multipliers); canonical() picks the
/// representative with c > 0, or c = 0 and d > 0, for comparisons in PSL(2,R).
class MoebiusMap {
public:
    static constexpr double det_tolerance = 1e-12;

    MoebiusMap(double a, double b, double c, double d)
        : a_(a + 0.0), b_(b + 0.0), c_(c + 0.0), d_(d + 0.0) {
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d))
            throw DomainError("MoebiusMap: non-finite entry");
        if (std::abs(a * d - b * c - 1.0) > det_tolerance)
            throw DomainError("MoebiusMap: determinant differs from 1");
    }

    static MoebiusMap identity() { return {1, 0, 0, 1}; }
    static MoebiusMap translation(double n = 1.0) { return {1, n, 0, 1}; }
    static MoebiusMap inversion() { return {0, -1, 1, 0}; }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }
    double d() const noexcept { return d_; }

    MoebiusMap canonical() const {
        const bool flip = c_ < 0.0 || (c_ == 0.0 && d_ < 0.0);
        return flip ? MoebiusMap(-a_, -b_, -c_, -d_) : *this;
    }

    bool is_integral() const noexcept {
        return a_ == std::round(a_) && b_ == std::round(b_) && c_ == std::round(c_) &&
               d_ == std::round(d_);
    }

    /// Exact equality of the canonical representatives.
    bool same_element(const MoebiusMap& o) const {
        const MoebiusMap p = canonical(), q = o.canonical();
        return p.a_ == q.a_ && p.b_ == q.b_ && p.c_ == q.c_ && p.d_ == q.d_;
    }

    /// cz + d, the automorphy factor.
    cplx factor(cplx z) const noexcept { return c_ * z + d_; }

    std::string str() const {
        std::ostringstream os;
        os << '(' << a_ << ',' << b_ << ';' << c_ << ',' << d_ << ')';
        return os.str();
    }

private:
    double a_, b_, c_, d_;
};

/// (az+b)/(cz+d). Im of the image is computed as y/|cz+d|^2 so it stays positive.
inline UpperHalfPoint apply(const MoebiusMap& m, const UpperHalfPoint& z) {
    const cplx w = z.z();
    const cplx den = m.factor(w);
    const double n2 = std::norm(den);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw DomainError("apply: degenerate denominator");
    const cplx num = m.a() * w + m.b();
    const double x = (num * std::conj(den)).real() / n2;
    const double y = z.y() / n2;
    if (!std::isfinite(x) || !(y > 0.0)) throw DomainError("apply: image left the upper half-plane");
    return {x, y};
}

/// Matrix product m1*m2 (apply m2 first). Non-integral products are rescaled
/// by 1/sqrt(det) to keep the determinant at 1.
inline MoebiusMap compose(const MoebiusMap& m1, const MoebiusMap& m2) {
    double a = m1.a() * m2.a() + m1.b() * m2.c();
    double b = m1.a() * m2.b() + m1.b() * m2.d();
    double c = m1.c() * m2.a() + m1.d() * m2.c();
    double d = m1.c() * m2.b() + m1.d() * m2.d();
    if (!(m1.is_integral() && m2.is_integral())) {
        const double det = a * d - b * c;
        if (!(det > 0.0)) throw DomainError("compose: product lost unit determinant");
        const double s = 1.0 / std::sqrt(det);
        a *= s, b *= s, c *= s, d *= s;
    }
    return {a, b, c, d};
}

inline MoebiusMap inverse(const MoebiusMap& m) { return {m.d(), -m.b(), -m.c(), m.a()}; }

struct Reduction {
    UpperHalfPoint point;
    MoebiusMap gamma;  // integral, apply(gamma, z) == point
};

/// Maps z into the closure of {|Re z| <= 1/2, |z| >= 1} by alternating
/// translations and the inversion z -> -1/z. Points on the boundary are sent
/// to the representative with Re >= 0 on the arc and Re = +1/2 on the sides.
inline Reduction reduce_to_fundamental_domain(const UpperHalfPoint& z0) {
    constexpr int max_iterations = 100000;
    constexpr double edge_tol = 1e-12;
    double x = z0.x(), y = z0.y();
    // Integer entries, tracked exactly as doubles.
    double a = 1, b = 0, c = 0, d = 1;
    for (int it = 0; it < max_iterations; ++it) {
        const double n = std::floor(x + 0.5 - edge_tol);
        if (n != 0.0) {
            x -= n;
            // T^{-n} * g
            a -= n * c;
            b -= n * d;
        }
        const double r2 = x * x + y * y;
        if (r2 < 1.0 - edge_tol || (r2 < 1.0 + edge_tol && x < -edge_tol)) {
            x = -x / r2;
            y = y / r2;
            // S * g
            const double na = -c, nb = -d, nc = a, nd = b;
            a = na, b = nb, c = nc, d = nd;
            continue;
        }
        if (n == 0.0) return {UpperHalfPoint(x, y), MoebiusMap(a, b, c, d).canonical()};
    }
    throw DomainError("reduce_to_fundamental_domain: iteration cap exceeded");
}

namespace detail {
using IntKey = std::array<std::int64_t, 4>;
inline IntKey key_of(const MoebiusMap& m) {
    const MoebiusMap c = m.canonical();
    return {static_cast<std::int64_t>(c.a()), static_cast<std::int64_t>(c.b()),
            static_cast<std::int64_t>(c.c()), static_cast<std::int64_t>(c.d())};
}
}  // namespace detail

/// Distinct elements of PSL(2,Z) reachable by reduced words of length <= n in
/// {T, T^-1, S}, in breadth-first order. Entries are canonical representatives.
inline std::vector<MoebiusMap> group_ball(int max_word_length) {
    if (max_word_length < 0) throw std::invalid_argument("group_ball: negative word length");
    if (max_word_length > 12) throw ResourceError("group_ball: word length capped at 12");

    enum Gen : int { None = -1, T = 0, Tinv = 1, S = 2 };
    const std::array<MoebiusMap, 3> gens = {MoebiusMap::translation(1), MoebiusMap::translation(-1),
                                            MoebiusMap::inversion()};
    auto cancels = [](int last, int next) {
        return (last == T && next == Tinv) || (last == Tinv && next == T) || (last == S && next == S);
    };

    struct Word {
        MoebiusMap m;
        int last;
    };
    std::vector<MoebiusMap> out{MoebiusMap::identity()};
    std::set<detail::IntKey> seen{detail::key_of(MoebiusMap::identity())};
    std::vector<Word> frontier{{MoebiusMap::identity(), None}};
    for (int len = 1; len <= max_word_length; ++len) {
        std::vector<Word> next;
        next.reserve(frontier.size() * 2);
        for (const Word& w : frontier) {
            for (int g = 0; g < 3; ++g) {
                if (cancels(w.last, g)) continue;
                MoebiusMap m = compose(w.m, gens[static_cast<std::size_t>(g)]);
                next.push_back({m, g});
                if (seen.insert(detail::key_of(m)).second) out.push_back(m.canonical());
            }
        }
        frontier = std::move(next);
    }
    return out;
}

enum class TransformKind { PsiSpinor, PhiSpinor, Density, Potential };

/// Multiplier relating a quantity at gamma(z) to its value at z:
/// psi -> (c z̄ + d), phi -> (cz + d), D and U -> |cz + d|^2.
inline cplx transform_factor(const MoebiusMap& g, TransformKind kind, const UpperHalfPoint& z) {
    const cplx w = z.z();
    switch (kind) {
        case TransformKind::PsiSpinor: return g.c() * std::conj(w) + g.d();
        case TransformKind::PhiSpinor: return g.c() * w + g.d();
        case TransformKind::Density:
        case TransformKind::Potential: return std::norm(g.factor(w));
    }
    return 1.0;
}

inline cplx gamma_transform(const MoebiusMap& g, TransformKind kind, const UpperHalfPoint& z,
                            cplx value) {
    if ((kind == TransformKind::Density || kind == TransformKind::Potential) &&
        std::abs(value.imag()) > 1e-14 * std::max(1.0, std::abs(value.real())))
        throw DomainError("gamma_transform: density and potential values must be real");
    return transform_factor(g, kind, z) * value;
}

/// max over gamma, z of |f(gamma z) - f(z)|. f may return a real or complex
/// value; OutOfDomainError from f is rethrown with the offending sample.
template <class F>
double automorphy_residual(F&& f, std::span<const MoebiusMap> gammas,
                           std::span<const UpperHalfPoint> samples) {
    double worst = 0.0;
    for (const UpperHalfPoint& z : samples) {
        const auto fz = f(z);
        for (const MoebiusMap& g : gammas) {
            const UpperHalfPoint gz = apply(g, z);
            try {
                worst = std::max(worst, static_cast<double>(std::abs(f(gz) - fz)));
            } catch (const OutOfDomainError& e) {
                std::ostringstream os;
                os << "automorphy_residual: image of (" << z.x() << ", " << z.y() << ") under "
                   << g.str() << " left the sampled region: " << e.what();
                throw OutOfDomainError(os.str());
            }
        }
    }
    return worst;
}

}  // namespace wlp
