#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wlp/error.hpp"

namespace wlp {

enum class DomainKind { ModularStandard };

/// Truncated fundamental domain {|Re z| <= X, |z| >= 1, y <= a}.
struct FundamentalDomainSpec {
    DomainKind kind = DomainKind::ModularStandard;
    double a = 4.0;          // cusp truncation height
    double X = 0.5;          // strip half-width
    double Y = 0.8660254037844386;  // floor: lowest point of the domain, sqrt(3)/2

    void validate() const {
        if (!(a > 1.0) || !(a <= 20.0)) throw DomainError("FundamentalDomainSpec: a must lie in (1, 20]");
        if (X != 0.5) throw DomainError("FundamentalDomainSpec: ModularStandard has X = 1/2");
    }
};

enum class NodeTag : std::uint8_t { Interior, FloorArc, SideLeft, SideRight, CuspTruncation };

struct MeshNode {
    std::size_t i, j;  // column (x) and row (downward from y = a)
    double x, y;
    NodeTag tag;
};

/// Discretization of L = -y^2 Δ - 1/4 on the truncated domain.
///
/// Tensor grid x_i = -1/2 + i hx (i < nx, periodic in x), y_j = a - j hy,
/// nodes below the unit arc dropped. The quadratic form
///   v^T A v = Σ_edges w_e (v_p - v_q)^2 - (1/4) Σ_k m_k v_k^2
/// uses edge weights hy/hx (x-edges) and hx/hy (y-edges), lumped masses
/// m_k = hx hy / y_k^2, and half cells on the truncation row (Neumann there and
/// on the arc). L = M^{-1} A is symmetric in the mass inner product.
class SpectralOperator {
public:
    using SpMat = Eigen::SparseMatrix<double>;

    SpectralOperator(const FundamentalDomainSpec& spec, double h) : spec_(spec) {
        spec.validate();
        if (!(h > 0.0) || !(h <= 0.1)) throw DomainError("assemble: h must lie in (0, 0.1]");
        nx_ = static_cast<std::size_t>(std::lround(1.0 / h));
        hx_ = 1.0 / static_cast<double>(nx_);
        hy_ = h;
        build_mesh();
        assemble();
    }

    const FundamentalDomainSpec& spec() const noexcept { return spec_; }
    double a() const noexcept { return spec_.a; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }
    double h() const noexcept { return std::min(hx_, hy_); }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t rows() const noexcept { return row_start_.size() - 1; }
    std::size_t size() const noexcept { return nodes_.size(); }

    const std::vector<MeshNode>& nodes() const noexcept { return nodes_; }
    /// Node index of (i, j), or -1 if that grid point was dropped.
    long node_at(std::size_t i, std::size_t j) const {
        if (j >= rows() || i >= nx_) return -1;
        return lookup_[j * nx_ + i];
    }

    /// A = K - M/4 (symmetric), K the edge Laplacian, M the lumped mass.
    const SpMat& form() const noexcept { return A_; }
    const SpMat& stiffness() const noexcept { return K_; }
    const Eigen::VectorXd& mass() const noexcept { return m_; }

    struct Edge {
        std::size_t p, q;
        double w;
    };
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// L v = M^{-1} A v
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        check_size(v, "apply");
        return (A_ * v).cwiseQuotient(m_);
    }

    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
        check_size(u, "inner");
        check_size(v, "inner");
        return (u.array() * v.array() * m_.array()).sum();
    }
    double norm(const Eigen::VectorXd& v) const { return std::sqrt(inner(v, v)); }

    /// max |A_ij - A_ji|
    double symmetry_defect() const {
        const SpMat d = SpMat(A_.transpose()) - A_;
        double r = 0.0;
        for (int k = 0; k < d.outerSize(); ++k)
            for (SpMat::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }

    template <class F>
    Eigen::VectorXd sample(F&& f) const {
        Eigen::VectorXd v(static_cast<long>(size()));
        for (std::size_t k = 0; k < size(); ++k) v[static_cast<long>(k)] = f(nodes_[k].x, nodes_[k].y);
        return v;
    }

    void check_size(const Eigen::VectorXd& v, const char* where) const {
        if (static_cast<std::size_t>(v.size()) != size())
            throw std::invalid_argument(std::string(where) + ": vector does not match the mesh");
    }

    /// Nodes whose full five-point stencil is present and which lie strictly
    /// between the arc region (y > 1) and the truncation row.
    bool in_cusp_strip(std::size_t k) const {
        const MeshNode& n = nodes_[k];
        if (n.tag != NodeTag::Interior && n.tag != NodeTag::SideLeft && n.tag != NodeTag::SideRight) return false;
        return n.y > 1.0 && n.y < spec_.a && node_at(n.i, n.j + 1) >= 0;
    }

private:
    void build_mesh() {
        const double a = spec_.a;
        row_start_.push_back(0);
        for (std::size_t j = 0;; ++j) {
            const double y = a - static_cast<double>(j) * hy_;
            if (!(y > 0.0)) break;
            std::size_t kept = 0;
            for (std::size_t i = 0; i < nx_; ++i) {
                const double x = -0.5 + static_cast<double>(i) * hx_;
                if (x * x + y * y < 1.0) {
                    lookup_.push_back(-1);
                    continue;
                }
                lookup_.push_back(static_cast<long>(nodes_.size()));
                nodes_.push_back({i, j, x, y, NodeTag::Interior});
                ++kept;
            }
            if (kept == 0) {
                lookup_.resize(lookup_.size() - nx_);
                break;
            }
            row_start_.push_back(nodes_.size());
        }
        std::size_t arc = 0;
        for (MeshNode& n : nodes_) {
            if (n.j == 0)
                n.tag = NodeTag::CuspTruncation;
            else if (node_at(n.i, n.j + 1) < 0)
                n.tag = NodeTag::FloorArc;
            else if (n.i == 0)
                n.tag = NodeTag::SideLeft;  // x = +1/2 is the same column
            if (n.tag == NodeTag::FloorArc) ++arc;
        }
        if (arc < 8) throw DomainError("assemble: mesh too coarse to represent the arc (< 8 nodes)");
    }

    void assemble() {
        const std::size_t n = size();
        m_.resize(static_cast<long>(n));
        for (std::size_t k = 0; k < n; ++k) {
            const MeshNode& nd = nodes_[k];
            double m = hx_ * hy_ / (nd.y * nd.y);
            if (nd.tag == NodeTag::CuspTruncation) m *= 0.5;
            m_[static_cast<long>(k)] = m;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const MeshNode& nd = nodes_[k];
            // x-edge to the right neighbour (periodic)
            const long r = node_at((nd.i + 1) % nx_, nd.j);
            if (r >= 0) {
                double w = hy_ / hx_;
                if (nd.j == 0) w *= 0.5;
                edges_.push_back({k, static_cast<std::size_t>(r), w});
            }
            // y-edge to the node below
            const long b = node_at(nd.i, nd.j + 1);
            if (b >= 0) edges_.push_back({k, static_cast<std::size_t>(b), hx_ / hy_});
        }
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(4 * edges_.size());
        for (const Edge& e : edges_) {
            const long p = static_cast<long>(e.p), q = static_cast<long>(e.q);
            t.emplace_back(p, p, e.w);
            t.emplace_back(q, q, e.w);
            t.emplace_back(p, q, -e.w);
            t.emplace_back(q, p, -e.w);
        }
        K_.resize(static_cast<long>(n), static_cast<long>(n));
        K_.setFromTriplets(t.begin(), t.end());
        for (std::size_t k = 0; k < n; ++k)
            t.emplace_back(static_cast<long>(k), static_cast<long>(k), -0.25 * m_[static_cast<long>(k)]);
        A_.resize(static_cast<long>(n), static_cast<long>(n));
        A_.setFromTriplets(t.begin(), t.end());
    }

    FundamentalDomainSpec spec_;
    std::size_t nx_ = 0;
    double hx_ = 0, hy_ = 0;
    std::vector<MeshNode> nodes_;
    std::vector<long> lookup_;
    std::vector<std::size_t> row_start_;
    std::vector<Edge> edges_;
    SpMat K_, A_;
    Eigen::VectorXd m_;
};

inline SpectralOperator assemble(const FundamentalDomainSpec& spec, double h) { return {spec, h}; }

enum class SpectrumClass { UnitRepresentation, AdditionalSeries, BasicSeries, ContinuumArtifact };

inline const char* to_string(SpectrumClass c) {
    switch (c) {
        case SpectrumClass::UnitRepresentation: return "UnitRepresentation";
        case SpectrumClass::AdditionalSeries: return "AdditionalSeries";
        case SpectrumClass::BasicSeries: return "BasicSeries";
        case SpectrumClass::ContinuumArtifact: return "ContinuumArtifact";
    }
    return "?";
}

struct SpectralResult {
    std::vector<double> eigenvalues;       // ascending
    Eigen::MatrixXd eigenvectors;          // columns, mass-orthonormal
    std::vector<double> residuals;         // ‖Lv - λv‖_dμ
    std::vector<SpectrumClass> classification;
    // Mesh data needed by classify.
    Eigen::VectorXd mass;
    Eigen::VectorXd node_y;
    double a = 0.0;
};

struct EigenOptions {
    double sigma = -0.5;       // shift below the form's lower bound -1/4
    double tol = 1e-8;         // on ‖Lv - λv‖_dμ for unit v
    std::uint64_t seed = 1;
    int max_restarts = 6;
};

namespace detail {

/// Lanczos with full reorthogonalization on C = (B - σ)^{-1}, B = M^{-1/2} A M^{-1/2}.
/// Returns Ritz vectors of B (Euclidean-orthonormal) and values.
struct RitzPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

template <class Solve>
RitzPairs shift_invert_lanczos(Solve&& solve, long n, long m, double sigma, std::uint64_t seed) {
    m = std::min(m, n);
    Eigen::MatrixXd V(n, m + 1), W(n, m);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd q(n);
    for (long k = 0; k < n; ++k) q[k] = uni(rng);
    V.col(0) = q.normalized();
    long steps = m;
    for (long j = 0; j < m; ++j) {
        W.col(j) = solve(V.col(j));
        Eigen::VectorXd w = W.col(j);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        const double beta = w.norm();
        if (beta < 1e-13 * W.col(j).norm()) {
            steps = j + 1;
            break;
        }
        V.col(j + 1) = w / beta;
    }
    // Rayleigh-Ritz on the Krylov basis.
    Eigen::MatrixXd H = V.leftCols(steps).transpose() * W.leftCols(steps);
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    RitzPairs out;
    out.values.resize(steps);
    out.vectors = V.leftCols(steps) * es.eigenvectors();
    for (long j = 0; j < steps; ++j) out.values[j] = sigma + 1.0 / es.eigenvalues()[j];
    return out;
}

}  // namespace detail

/// Lowest `count` eigenpairs of L (count <= 32) by shift-invert Lanczos on the
/// mass-symmetrized operator, with the Krylov space enlarged until every
/// reported pair meets the residual contract.
inline SpectralResult lowest_eigenpairs(const SpectralOperator& op, int count, const EigenOptions& opt = {}) {
    if (count < 1 || count > 32) throw std::invalid_argument("lowest_eigenpairs: count must lie in [1, 32]");
    const long n = static_cast<long>(op.size());
    if (count > n) throw std::invalid_argument("lowest_eigenpairs: count exceeds mesh size");
    const Eigen::VectorXd& m = op.mass();
    const Eigen::VectorXd msq = m.cwiseSqrt();
    const Eigen::VectorXd minv_sq = msq.cwiseInverse();

    // B - σ I = D (A - σ M) D with D = M^{-1/2}; factor A - σ M once.
    using SpMat = SpectralOperator::SpMat;
    SpMat shifted = op.form();
    for (long k = 0; k < n; ++k) shifted.coeffRef(k, k) -= opt.sigma * m[k];
    Eigen::SimplicialLDLT<SpMat> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("lowest_eigenpairs: factorization failed");
    auto solve = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const Eigen::VectorXd r = ldlt.solve(x.cwiseProduct(msq));
        return r.cwiseProduct(msq);
    };
    auto apply_B = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return (op.form() * x.cwiseProduct(minv_sq)).cwiseProduct(minv_sq);
    };

    long krylov = std::max<long>(2L * count + 40, 80);
    double worst = 0.0;
    for (int attempt = 0; attempt <= opt.max_restarts; ++attempt) {
        detail::RitzPairs rp = detail::shift_invert_lanczos(solve, n, krylov, opt.sigma, opt.seed);
        // Largest θ ↔ lowest λ; sort ascending λ.
        std::vector<long> order(static_cast<std::size_t>(rp.values.size()));
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<long>(k);
        std::sort(order.begin(), order.end(), [&](long p, long q) { return rp.values[p] < rp.values[q]; });
        SpectralResult res;
        res.mass = m;
        res.a = op.a();
        res.node_y.resize(n);
        for (long k = 0; k < n; ++k) res.node_y[k] = op.nodes()[static_cast<std::size_t>(k)].y;
        res.eigenvectors.resize(n, count);
        worst = 0.0;
        for (int c = 0; c < count && c < static_cast<int>(order.size()); ++c) {
            Eigen::VectorXd x = rp.vectors.col(order[static_cast<std::size_t>(c)]);
            x.normalize();
            const double lam = x.dot(apply_B(x));
            const double r = (apply_B(x) - lam * x).norm();
            worst = std::max(worst, r);
            Eigen::VectorXd v = x.cwiseProduct(minv_sq);
            // Deterministic sign: largest-magnitude entry positive.
            long imax = 0;
            v.cwiseAbs().maxCoeff(&imax);
            if (v[imax] < 0) v = -v;
            res.eigenvalues.push_back(lam);
            res.residuals.push_back(r);
            res.eigenvectors.col(c) = v;
        }
        if (static_cast<int>(res.eigenvalues.size()) == count && worst <= opt.tol) {
            res.classification.assign(static_cast<std::size_t>(count), SpectrumClass::BasicSeries);
            return res;
        }
        if (krylov >= n) break;
        krylov = std::min(2 * krylov, n);
    }
    throw ConvergenceError("lowest_eigenpairs: residual contract not met", worst);
}

struct ClassifyOptions {
    double unit_tol = 5e-3;
    double cusp_mass_fraction = 0.8;
};

/// Label each pair: λ ≈ -1/4 unit representation, λ in (-1/4, 0) additional
/// series, λ >= 0 basic series unless > 80% of the dμ-mass sits above y = a/2.
inline void classify(SpectralResult& r, const ClassifyOptions& opt = {}) {
    r.classification.resize(r.eigenvalues.size());
    for (std::size_t c = 0; c < r.eigenvalues.size(); ++c) {
        const double lam = r.eigenvalues[c];
        SpectrumClass k;
        if (std::abs(lam + 0.25) <= opt.unit_tol || lam < -0.25)
            k = SpectrumClass::UnitRepresentation;
        else if (lam < 0.0)
            k = SpectrumClass::AdditionalSeries;
        else {
            k = SpectrumClass::BasicSeries;
            if (r.eigenvectors.cols() > static_cast<long>(c) && r.mass.size() == r.eigenvectors.rows()) {
                const Eigen::VectorXd v = r.eigenvectors.col(static_cast<long>(c));
                double total = 0.0, cusp = 0.0;
                for (long k2 = 0; k2 < v.size(); ++k2) {
                    const double w = r.mass[k2] * v[k2] * v[k2];
                    total += w;
                    if (r.node_y[k2] > 0.5 * r.a) cusp += w;
                }
                if (total > 0.0 && cusp > opt.cusp_mass_fraction * total) k = SpectrumClass::ContinuumArtifact;
            }
        }
        r.classification[c] = k;
    }
}

struct CuspStripCheck {
    double relative_error;  // max |Lu - k^2 u| / max |k^2 u| over strip nodes
    std::size_t nodes;
};

/// Applies L to Re and Im of y^{1/2 + ik} and compares with k^2 times the
/// samples on the cusp strip 1 < y < a (full stencils only).
inline CuspStripCheck cusp_strip_check(const SpectralOperator& op, double k) {
    const Eigen::VectorXd re = op.sample([&](double, double y) {
        return std::sqrt(y) * std::cos(k * std::log(y));
    });
    const Eigen::VectorXd im = op.sample([&](double, double y) {
        return std::sqrt(y) * std::sin(k * std::log(y));
    });
    const Eigen::VectorXd Lre = op.apply(re), Lim = op.apply(im);
    double err = 0.0, scale = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < op.size(); ++p) {
        if (!op.in_cusp_strip(p)) continue;
        const long q = static_cast<long>(p);
        const double dr = Lre[q] - k * k * re[q], di = Lim[q] - k * k * im[q];
        err = std::max(err, std::hypot(dr, di));
        scale = std::max(scale, k * k * std::hypot(re[q], im[q]));
        ++count;
    }
    if (count == 0) throw DomainError("cusp_strip_check: no strip nodes");
    return {scale > 0.0 ? err / scale : err, count};
}

}  // namespace wlp
