#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "wlp/error.hpp"

namespace wlp {

using cplx = std::complex<double>;

/// Uniform rectangular grid in the z = x + iy plane.
///
/// Node (i, j) sits at x = x0 + i*h, y = y0 + j*h. Samples are stored with x
/// varying fastest: index(i, j) = j*nx + i.
class Grid {
public:
    Grid(double x0, double y0, std::size_t nx, std::size_t ny, double h)
        : x0_(x0), y0_(y0), nx_(nx), ny_(ny), h_(h) {
        if (nx < 3 || ny < 3)
            throw std::invalid_argument("Grid: nx and ny must be at least 3");
        if (!(h > 0.0) || !std::isfinite(h))
            throw std::invalid_argument("Grid: spacing h must be positive and finite");
        if (!std::isfinite(x0) || !std::isfinite(y0))
            throw std::invalid_argument("Grid: origin must be finite");
    }

    /// Grid of n x n nodes spanning [x0, x0+len] x [y0, y0+len].
    static Grid square(double x0, double y0, std::size_t n, double len) {
        return Grid(x0, y0, n, n, len / static_cast<double>(n - 1));
    }

    double x0() const noexcept { return x0_; }
    double y0() const noexcept { return y0_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return nx_ * ny_; }

    double x(std::size_t i) const noexcept { return x0_ + static_cast<double>(i) * h_; }
    double y(std::size_t j) const noexcept { return y0_ + static_cast<double>(j) * h_; }
    cplx z(std::size_t i, std::size_t j) const noexcept { return {x(i), y(j)}; }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }

    bool interior(std::size_t i, std::size_t j) const noexcept {
        return i > 0 && j > 0 && i + 1 < nx_ && j + 1 < ny_;
    }
    bool boundary(std::size_t i, std::size_t j) const noexcept { return !interior(i, j); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double x0_, y0_;
    std::size_t nx_, ny_;
    double h_;
};

/// Samples of a scalar field on a Grid.
template <class T>
class Field {
public:
    using value_type = T;

    explicit Field(const Grid& g, T fill = T{}) : grid_(g), data_(g.size(), fill) {}

    Field(const Grid& g, std::vector<T> samples) : grid_(g), data_(std::move(samples)) {
        if (data_.size() != grid_.size())
            throw std::invalid_argument("Field: sample count does not match grid");
    }

    /// Samples f(x, y) at every node.
    template <class F>
    static Field sample(const Grid& g, F&& f) {
        Field out(g);
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i)
                out(i, j) = f(g.x(i), g.y(j));
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[grid_.index(i, j)]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[grid_.index(i, j)]; }
    T& operator[](std::size_t k) { return data_[k]; }
    const T& operator[](std::size_t k) const { return data_[k]; }

    const std::vector<T>& values() const noexcept { return data_; }
    std::vector<T>& values() noexcept { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](const T& v) {
            if constexpr (std::is_same_v<T, cplx>)
                return std::isfinite(v.real()) && std::isfinite(v.imag());
            else
                return std::isfinite(v);
        });
    }

    double max_abs() const {
        double m = 0.0;
        for (const T& v : data_) m = std::max(m, static_cast<double>(std::abs(v)));
        return m;
    }

    Field& operator*=(T s) {
        for (T& v : data_) v *= s;
        return *this;
    }
    friend Field operator*(T s, Field f) { return f *= s; }

private:
    Grid grid_;
    std::vector<T> data_;
};

using ComplexField = Field<cplx>;
using RealField = Field<double>;

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

/// Max |Im| over a complex field relative to max(1, max|value|).
inline double imaginary_defect(const ComplexField& f) {
    double m = 0.0;
    for (const cplx& v : f.values()) m = std::max(m, std::abs(v.imag()));
    return m / std::max(1.0, f.max_abs());
}

/// Bilinear interpolation of a sampled field; points outside the grid
/// rectangle raise OutOfDomainError.
template <class T>
T interpolate(const Field<T>& f, double x, double y) {
    const Grid& g = f.grid();
    const double u = (x - g.x0()) / g.h(), v = (y - g.y0()) / g.h();
    const double umax = static_cast<double>(g.nx() - 1), vmax = static_cast<double>(g.ny() - 1);
    if (!(u >= 0.0 && u <= umax && v >= 0.0 && v <= vmax))
        throw OutOfDomainError("interpolate: point outside the sampled rectangle");
    const auto i = std::min(static_cast<std::size_t>(u), g.nx() - 2);
    const auto j = std::min(static_cast<std::size_t>(v), g.ny() - 2);
    const double s = u - static_cast<double>(i), t = v - static_cast<double>(j);
    return (1 - s) * (1 - t) * f(i, j) + s * (1 - t) * f(i + 1, j) + (1 - s) * t * f(i, j + 1) +
           s * t * f(i + 1, j + 1);
}

inline RealField real_part(const ComplexField& f) {
    RealField out(f.grid());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k].real();
    return out;
}

inline ComplexField to_complex(const RealField& f) {
    ComplexField out(f.grid());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k];
    return out;
}

}  // namespace wlp
