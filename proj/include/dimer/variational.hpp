#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "core.hpp"
#include "frozen_boundary.hpp"
#include "geom.hpp"
#include "surface_tension.hpp"

namespace dimer {

// ----------------------------------------------------------------------------
// Polygonal domains with piecewise-affine boundary data
// ----------------------------------------------------------------------------

/// Simple counterclockwise polygon; h0 is affine on every side and takes
/// `values[j]` at vertex j. `labels` holds the corner attached to each vertex
/// for natural boundary data (empty otherwise).
struct PolygonalDomain {
    std::vector<Complex> vertices;
    std::vector<double> values;
    std::vector<int> labels;

    [[nodiscard]] std::size_t size() const noexcept { return vertices.size(); }
    [[nodiscard]] Complex vertex(std::ptrdiff_t j) const noexcept {
        const auto d = static_cast<std::ptrdiff_t>(vertices.size());
        return vertices[static_cast<std::size_t>(((j % d) + d) % d)];
    }
    [[nodiscard]] double value(std::ptrdiff_t j) const noexcept {
        const auto d = static_cast<std::ptrdiff_t>(values.size());
        return values[static_cast<std::size_t>(((j % d) + d) % d)];
    }

    [[nodiscard]] double area() const noexcept {
        double a = 0.0;
        for (std::size_t j = 0; j < size(); ++j) a += cross(vertex(static_cast<std::ptrdiff_t>(j)), vertex(static_cast<std::ptrdiff_t>(j) + 1));
        return 0.5 * a;
    }

    [[nodiscard]] bool contains(Complex z) const noexcept {
        bool in = false;
        for (std::size_t k = 0; k < size(); ++k) {
            const Complex a = vertex(static_cast<std::ptrdiff_t>(k)), b = vertex(static_cast<std::ptrdiff_t>(k) + 1);
            if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
                const double x = a.real() + (z.imag() - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
                if (z.real() < x) in = !in;
            }
        }
        return in;
    }

    /// Distance to the boundary together with the closest side and its parameter.
    [[nodiscard]] double boundary_distance(Complex z, std::size_t* side = nullptr, double* param = nullptr) const noexcept {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < size(); ++k) {
            const Complex a = vertex(static_cast<std::ptrdiff_t>(k)), e = vertex(static_cast<std::ptrdiff_t>(k) + 1) - a;
            const double s = std::clamp(dot(z - a, e) / std::norm(e), 0.0, 1.0);
            const double d = std::abs(z - a - s * e);
            if (d < best) {
                best = d;
                if (side) *side = k;
                if (param) *param = s;
            }
        }
        return best;
    }

    [[nodiscard]] double boundary_value(std::size_t side, double s) const noexcept {
        return (1.0 - s) * value(static_cast<std::ptrdiff_t>(side)) + s * value(static_cast<std::ptrdiff_t>(side) + 1);
    }
};

inline void validate_polygon(const std::vector<Complex>& v) {
    if (v.size() < 3) throw Error(ErrorKind::input, "domain needs at least 3 vertices");
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (!is_finite(v[j])) throw Error(ErrorKind::input, "domain vertex is not finite");
        if (std::abs(v[(j + 1) % v.size()] - v[j]) < 1e-14) throw Error(ErrorKind::input, "domain has repeated vertices");
    }
    double a = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) a += cross(v[j], v[(j + 1) % v.size()]);
    if (!(a > 0.0)) throw Error(ErrorKind::input, "domain vertices must be counterclockwise");
    if (detail::polygon_self_intersects(v)) throw Error(ErrorKind::input, "domain polygon is not simple");
}

[[nodiscard]] inline PolygonalDomain make_domain(std::vector<Complex> vertices, std::vector<double> values) {
    validate_polygon(vertices);
    if (values.size() != vertices.size()) throw Error(ErrorKind::input, "one boundary value per vertex required");
    return {std::move(vertices), std::move(values), {}};
}

/// h0(z) = <p, z> + c on the boundary.
[[nodiscard]] inline PolygonalDomain affine_domain(std::vector<Complex> vertices, Complex p, double c = 0.0) {
    std::vector<double> vals;
    for (const auto& z : vertices) vals.push_back(dot(p, z) + c);
    return make_domain(std::move(vertices), std::move(vals));
}

namespace detail {

inline bool orthogonal(Complex a, Complex b) noexcept {
    return std::abs(dot(a, b)) <= 1e-9 * std::max(1.0, std::abs(a) * std::abs(b));
}

/// The two sides at vertex j are orthogonal to the two edges of N at corner l,
/// in one of the two admissible orders.
inline bool natural_at(const GradientPolygon& n, const std::vector<Complex>& v, std::size_t j, int l) {
    const std::size_t d = v.size();
    const Complex zin = v[j] - v[(j + d - 1) % d], zout = v[(j + 1) % d] - v[j];
    const Complex p = n.corner(l), pm = n.corner(l - 1), pp = n.corner(l + 1);
    const bool nd1 = orthogonal(zin, p - pm) && orthogonal(zout, pp - p);
    const bool nd3 = orthogonal(zin, pp - p) && orthogonal(zout, p - pm);
    return nd1 || nd3;
}

}  // namespace detail

/// Natural boundary data: h0 is affine with gradient p_{labels[j]} on both
/// sides at vertex j, starting from h0(z_0) = start_value.
[[nodiscard]] inline PolygonalDomain build_natural_boundary(const GradientPolygon& n, std::vector<Complex> vertices,
                                                            std::vector<int> labels, double start_value = 0.0) {
    validate_polygon(vertices);
    const std::size_t d = vertices.size();
    if (labels.size() != d) throw Error(ErrorKind::input, "one corner label per vertex required");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= n.size()) throw Error(ErrorKind::input, "corner label out of range");
    for (std::size_t j = 0; j < d; ++j)
        if (!detail::natural_at(n, vertices, j, labels[j]))
            throw Error(ErrorKind::validation, "orthogonality violated at vertex " + std::to_string(j));
    for (std::size_t j = 0; j < d; ++j) {
        const Complex side = vertices[(j + 1) % d] - vertices[j];
        if (!detail::orthogonal(side, n.corner(labels[(j + 1) % d]) - n.corner(labels[j])))
            throw Error(ErrorKind::validation, "orthogonality violated at vertex " + std::to_string((j + 1) % d) +
                                                   " (corners of adjacent vertices disagree on the shared side)");
    }
    std::vector<double> vals(d);
    vals[0] = start_value;
    double scale = 0.0;
    for (std::size_t j = 0; j + 1 < d; ++j) {
        const double inc = dot(n.corner(labels[j]), vertices[j + 1] - vertices[j]);
        vals[j + 1] = vals[j] + inc;
        scale += std::abs(inc);
    }
    const double close = vals[d - 1] + dot(n.corner(labels[d - 1]), vertices[0] - vertices[d - 1]) - start_value;
    if (std::abs(close) > 1e-9 * std::max(1.0, scale)) throw Error(ErrorKind::validation, "loop closure of boundary values fails");
    return {std::move(vertices), std::move(vals), std::move(labels)};
}

/// First admissible corner assignment (depth-first over vertices) making the
/// domain natural with closing boundary data.
[[nodiscard]] inline std::vector<int> natural_labels(const GradientPolygon& n, const std::vector<Complex>& vertices) {
    validate_polygon(vertices);
    const std::size_t d = vertices.size();
    std::vector<int> lab(d, -1);
    auto closes = [&]() {
        double s = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double inc = dot(n.corner(lab[j]), vertices[(j + 1) % d] - vertices[j]);
            s += inc;
            scale += std::abs(inc);
        }
        return std::abs(s) <= 1e-9 * std::max(1.0, scale);
    };
    auto rec = [&](auto&& self, std::size_t j) -> bool {
        if (j == d) {
            return detail::orthogonal(vertices[0] - vertices[d - 1], n.corner(lab[0]) - n.corner(lab[d - 1])) && closes();
        }
        for (int l = 0; l < static_cast<int>(n.size()); ++l) {
            if (!detail::natural_at(n, vertices, j, l)) continue;
            if (j > 0 && !detail::orthogonal(vertices[j] - vertices[j - 1], n.corner(l) - n.corner(lab[j - 1]))) continue;
            lab[j] = l;
            if (self(self, j + 1)) return true;
        }
        lab[j] = -1;
        return false;
    };
    if (!rec(rec, 0)) throw Error(ErrorKind::validation, "domain is not natural for the gradient polygon");
    return lab;
}

// ----------------------------------------------------------------------------
// McShane extensions
// ----------------------------------------------------------------------------

namespace detail {

/// Extremum over the boundary of h_N(+-(z - w)) + h0(w). Along a side the
/// objective is convex (upper) or concave (lower) and piecewise affine, so it is
/// enough to test the endpoints and the kinks where the active corner changes.
inline double mcshane(const PolygonalDomain& d, const GradientPolygon& n, Complex z, bool upper) {
    double best = upper ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    auto consider = [&](std::size_t side, double s) {
        const Complex a = d.vertex(static_cast<std::ptrdiff_t>(side));
        const Complex w = a + s * (d.vertex(static_cast<std::ptrdiff_t>(side) + 1) - a);
        const double hv = d.boundary_value(side, s);
        if (upper) best = std::min(best, n.support(z - w) + hv);
        else best = std::max(best, -n.support(w - z) + hv);
    };
    const std::size_t k = n.size();
    for (std::size_t side = 0; side < d.size(); ++side) {
        const Complex a = d.vertex(static_cast<std::ptrdiff_t>(side));
        const Complex e = d.vertex(static_cast<std::ptrdiff_t>(side) + 1) - a;
        consider(side, 0.0);
        consider(side, 1.0);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) {
                const Complex dp = n.corner(p) - n.corner(q);
                const double den = dot(dp, e);
                if (std::abs(den) < 1e-300) continue;
                const double s = dot(dp, z - a) / den;
                if (s > 0.0 && s < 1.0) consider(side, s);
            }
    }
    return best;
}

}  // namespace detail

[[nodiscard]] inline double mcshane_upper(const PolygonalDomain& d, const GradientPolygon& n, Complex z) {
    return detail::mcshane(d, n, z, true);
}
[[nodiscard]] inline double mcshane_lower(const PolygonalDomain& d, const GradientPolygon& n, Complex z) {
    return detail::mcshane(d, n, z, false);
}

// ----------------------------------------------------------------------------
// Grid, mesh and problem
// ----------------------------------------------------------------------------

/// Node (i, j) sits at rot * ((i0 + i) h, (j0 + j) h); nx x ny cells, each split
/// along its (1, 1) diagonal.
struct GridFrame {
    Complex rot{1.0, 0.0};
    double spacing = 1.0 / 64.0;
    int i0 = 0, j0 = 0, nx = 0, ny = 0;

    [[nodiscard]] Complex node(int i, int j) const noexcept {
        return rot * Complex((i0 + i) * spacing, (j0 + j) * spacing);
    }
    [[nodiscard]] std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx + 1) + static_cast<std::size_t>(i);
    }
    [[nodiscard]] std::size_t nodes() const noexcept {
        return static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1);
    }
};

[[nodiscard]] inline GridFrame fit_grid(const PolygonalDomain& d, double spacing, double rotation = 0.0) {
    if (!(spacing > 0.0)) throw Error(ErrorKind::input, "grid spacing must be positive");
    GridFrame g;
    g.rot = std::polar(1.0, rotation);
    g.spacing = spacing;
    double amin = std::numeric_limits<double>::infinity(), bmin = amin, amax = -amin, bmax = -amin;
    for (const auto& z : d.vertices) {
        const Complex f = std::conj(g.rot) * z / spacing;
        amin = std::min(amin, f.real());
        amax = std::max(amax, f.real());
        bmin = std::min(bmin, f.imag());
        bmax = std::max(bmax, f.imag());
    }
    g.i0 = static_cast<int>(std::floor(amin + 1e-9));
    g.j0 = static_cast<int>(std::floor(bmin + 1e-9));
    g.nx = static_cast<int>(std::ceil(amax - 1e-9)) - g.i0;
    g.ny = static_cast<int>(std::ceil(bmax - 1e-9)) - g.j0;
    if (static_cast<double>(g.nx) * g.ny > 4e7) throw Error(ErrorKind::input, "grid too large");
    return g;
}

struct DiscreteEnergyProblem {
    PolygonalDomain domain;
    GradientPolygon polygon;
    std::shared_ptr<const SurfaceTension> sigma;
    double spacing = 1.0 / 64.0;
    double rotation = 0.0;  // angle of the grid frame
    double eps = 1e-3;      // sigma is evaluated on (1 - eps) N
    double curvature = 0.0; // of the quadratic continuation outside (1 - eps) N; 0 picks one from sigma

    void validate() const {
        if (!sigma) throw Error(ErrorKind::input, "problem has no surface tension");
        if (!(spacing > 0.0)) throw Error(ErrorKind::input, "grid spacing must be positive");
        if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::input, "shrink eps must lie in (0, 0.5)");
        if (!(curvature >= 0.0)) throw Error(ErrorKind::input, "continuation curvature must be non-negative");
        validate_polygon(domain.vertices);
        if (domain.values.size() != domain.size()) throw Error(ErrorKind::input, "one boundary value per vertex required");
    }
};

enum NodeState : std::uint8_t { node_outside = 0, node_fixed = 1, node_free = 2 };

struct MeshTriangle {
    std::array<std::uint32_t, 3> v{};
    std::array<Complex, 3> basis{};  // gradients of the barycentric coordinates
    double area = 0.0;
};

struct Mesh {
    GridFrame grid;
    std::vector<Complex> points;
    std::vector<std::uint8_t> state;
    std::vector<MeshTriangle> tris;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint8_t>>> node_tris;  // (triangle, local vertex)
};

/// Triangles whose centroid lies in the domain are active. A node is free when
/// it lies strictly inside and all six incident triangles are active.
[[nodiscard]] inline Mesh build_mesh(const DiscreteEnergyProblem& p) {
    Mesh mesh;
    mesh.grid = fit_grid(p.domain, p.spacing, p.rotation);
    const GridFrame& g = mesh.grid;
    mesh.points.resize(g.nodes());
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) mesh.points[g.index(i, j)] = g.node(i, j);
    mesh.state.assign(g.nodes(), node_outside);
    mesh.node_tris.assign(g.nodes(), {});
    std::vector<int> incident(g.nodes(), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::uint32_t a = static_cast<std::uint32_t>(g.index(i, j)), b = static_cast<std::uint32_t>(g.index(i + 1, j)),
                                c = static_cast<std::uint32_t>(g.index(i + 1, j + 1)), d = static_cast<std::uint32_t>(g.index(i, j + 1));
            for (const auto& tri : {std::array<std::uint32_t, 3>{a, b, c}, std::array<std::uint32_t, 3>{a, c, d}}) {
                const Complex z0 = mesh.points[tri[0]], z1 = mesh.points[tri[1]], z2 = mesh.points[tri[2]];
                if (!p.domain.contains((z0 + z1 + z2) / 3.0)) continue;
                MeshTriangle t;
                t.v = tri;
                t.area = 0.5 * cross(z1 - z0, z2 - z0);
                const Complex I(0.0, 1.0);
                t.basis = {I * (z2 - z1) / (2.0 * t.area), I * (z0 - z2) / (2.0 * t.area), I * (z1 - z0) / (2.0 * t.area)};
                const auto idx = static_cast<std::uint32_t>(mesh.tris.size());
                for (std::uint8_t k = 0; k < 3; ++k) {
                    mesh.node_tris[tri[k]].push_back({idx, k});
                    ++incident[tri[k]];
                }
                mesh.tris.push_back(t);
            }
        }
    const double tol = 1e-9 * p.spacing;
    for (std::size_t k = 0; k < g.nodes(); ++k) {
        if (incident[k] == 0) continue;
        const Complex z = mesh.points[k];
        const bool interior = p.domain.contains(z) && p.domain.boundary_distance(z) > tol;
        mesh.state[k] = (interior && incident[k] == 6) ? node_free : node_fixed;
    }
    return mesh;
}

struct Obstacles {
    std::vector<double> m, M;
};

/// Lower and upper McShane extensions at every mesh node in use.
[[nodiscard]] inline Obstacles mcshane_obstacles(const DiscreteEnergyProblem& p, const Mesh& mesh, unsigned threads = 1) {
    const std::size_t n = mesh.points.size();
    Obstacles o;
    o.m.assign(n, std::nan(""));
    o.M.assign(n, std::nan(""));
    parallel_for(n, threads, [&](std::size_t k) {
        if (mesh.state[k] == node_outside) return;
        o.m[k] = mcshane_lower(p.domain, p.polygon, mesh.points[k]);
        o.M[k] = mcshane_upper(p.domain, p.polygon, mesh.points[k]);
    });
    for (std::size_t k = 0; k < n; ++k) {
        if (mesh.state[k] == node_outside) continue;
        const Complex z = mesh.points[k];
        const bool inside = p.domain.contains(z) || p.domain.boundary_distance(z) <= 1e-9 * p.spacing;
        if (inside && o.m[k] > o.M[k] + 1e-9)
            throw Error(ErrorKind::validation, "infeasible boundary data: lower obstacle exceeds upper obstacle at (" +
                                                   std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
    }
    return o;
}

// ----------------------------------------------------------------------------
// Minimization
// ----------------------------------------------------------------------------

struct MinimizeOptions {
    int max_iters = 400;            // outer cycles
    double tol = 1e-10;             // relative energy decrease per cycle
    std::vector<double> seed_field; // optional initial node values
    unsigned threads = 1;
    int levels = -1;                // coarse correction levels (-1: all)
    bool nested = true;             // seed from the solution at twice the spacing
    bool newton = true;             // projected Newton step per cycle instead of coarse corrections
};

struct MinimizeResult {
    Mesh mesh;
    Obstacles obstacles;
    std::vector<double> h;
    std::vector<Complex> tri_grad;
    std::vector<double> energy_trace;
    bool converged = false;
    int iterations = 0;
    std::string status;
};

namespace detail {

class Solver {
public:
    Solver(const DiscreteEnergyProblem& p, Mesh& mesh, const Obstacles& obs, std::vector<double>& h)
        : p_(p), mesh_(mesh), obs_(obs), h_(h), hints_(mesh.tris.size(), Complex(0.0, 0.0)), grad_(mesh.tris.size()) {
        for (std::size_t t = 0; t < mesh_.tris.size(); ++t) grad_[t] = tri_gradient(t);
        const Complex c = p_.polygon.centroid();
        for (std::size_t j = 0; j < p_.polygon.size(); ++j) shrunk_.push_back(c + (1.0 - p_.eps) * (p_.polygon.corner(static_cast<std::ptrdiff_t>(j)) - c));
        curvature_ = p_.curvature > 0.0 ? p_.curvature : auto_curvature();
    }

    /// Ten times the largest Hessian norm of sigma on the boundary of (1 - eps) N.
    [[nodiscard]] double auto_curvature() const {
        double best = 1.0;
        Complex hint{0.0, 0.0};
        for (std::size_t j = 0; j < shrunk_.size(); ++j)
            for (int i = 0; i <= 64; ++i) {
                const Complex a = shrunk_[j], b = shrunk_[(j + 1) % shrunk_.size()];
                const auto hs = p_.sigma->hessian(a + (i / 64.0) * (b - a), &hint);
                best = std::max(best, std::sqrt(hs[0] * hs[0] + 2.0 * hs[1] * hs[1] + hs[2] * hs[2]));
            }
        return 10.0 * best;
    }
    [[nodiscard]] double curvature() const noexcept { return curvature_; }

    /// sigma on (1 - eps) N, continued outside by its tangent plane at the
    /// projection plus a quadratic in the distance, which keeps it C^1.
    [[nodiscard]] double density(Complex g, Complex* hint) const {
        const Complex q = p_.polygon.project(g, p_.eps);
        if (q == g) return p_.sigma->sigma(q, hint);
        const Complex r = g - q;
        return p_.sigma->sigma(q, hint) + dot(p_.sigma->grad(q, hint), r) + 0.5 * curvature_ * std::norm(r);
    }

    [[nodiscard]] Complex tri_gradient(std::size_t t) const {
        const auto& tr = mesh_.tris[t];
        return h_[tr.v[0]] * tr.basis[0] + h_[tr.v[1]] * tr.basis[1] + h_[tr.v[2]] * tr.basis[2];
    }
    [[nodiscard]] const std::vector<Complex>& gradients() const noexcept { return grad_; }

    [[nodiscard]] double energy(unsigned threads) {
        std::vector<double> e(mesh_.tris.size());
        parallel_for(mesh_.tris.size(), threads, [&](std::size_t t) {
            e[t] = mesh_.tris[t].area * density(grad_[t], &hints_[t]);
        });
        double s = 0.0;
        for (double v : e) s += v;
        return s;
    }

    /// Gradient and Hessian of the density. Outside (1 - eps) N the third
    /// derivative of sigma along the normal offset is dropped from the Hessian.
    void derivs(Complex g, Complex* hint, Complex& gs, std::array<double, 3>& hs) const {
        const Complex q = p_.polygon.project(g, p_.eps);
        p_.sigma->grad_hessian(q, hint, gs, hs);
        if (q == g) return;
        const Complex r = g - q;
        Complex e{0.0, 0.0};  // edge tangent, zero when q is a corner
        for (std::size_t j = 0; j < shrunk_.size(); ++j) {
            const Complex a = shrunk_[j], b = shrunk_[(j + 1) % shrunk_.size()];
            const double u = dot(q - a, b - a) / std::norm(b - a);
            if (u > 1e-12 && u < 1.0 - 1e-12 && std::abs(cross(b - a, q - a)) <= 1e-12 * std::norm(b - a)) {
                e = (b - a) / std::abs(b - a);
                break;
            }
        }
        const double mu = curvature_;
        if (e == Complex(0.0, 0.0)) {
            gs += mu * r;
            hs = {mu, 0.0, mu};
            return;
        }
        const double sdist = std::abs(r);
        const Complex n = r / sdist;
        auto quad = [&](Complex x, Complex y) {
            return hs[0] * x.real() * y.real() + hs[1] * (x.real() * y.imag() + x.imag() * y.real()) + hs[2] * x.imag() * y.imag();
        };
        const double htt = quad(e, e), htn = quad(e, n);
        gs = e * (dot(gs, e) + sdist * htn) + n * (dot(gs, n) + mu * sdist);
        // [[htt, htn], [htn, mu]] in the (e, n) frame
        hs = {htt * e.real() * e.real() + 2.0 * htn * e.real() * n.real() + mu * n.real() * n.real(),
              htt * e.real() * e.imag() + htn * (e.real() * n.imag() + e.imag() * n.real()) + mu * n.real() * n.imag(),
              htt * e.imag() * e.imag() + 2.0 * htn * e.imag() * n.imag() + mu * n.imag() * n.imag()};
    }

    /// One projected Newton step over the movable nodes: nodes held at an
    /// obstacle by the energy gradient are frozen, the Newton step on the rest
    /// is clipped to the obstacle box and followed by an exact line search.
    /// Returns false when no descent step was found.
    bool newton_step(const std::vector<char>& movable, unsigned threads) {
        const std::size_t nt = mesh_.tris.size(), n = h_.size();
        std::vector<Complex> gs(nt);
        std::vector<std::array<double, 3>> hs(nt);
        parallel_for(nt, threads, [&](std::size_t t) {
            Complex hint = hints_[t];
            derivs(grad_[t], &hint, gs[t], hs[t]);
        });
        std::vector<double> grad(n, 0.0);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t i = 0; i < 3; ++i) grad[mesh_.tris[t].v[i]] += mesh_.tris[t].area * dot(gs[t], mesh_.tris[t].basis[i]);
        std::vector<int> col(n, -1);
        int nf = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (!movable[k]) continue;
            const double tol = 1e-12 * (1.0 + std::abs(h_[k]));
            if (h_[k] - obs_.m[k] <= tol && grad[k] > 0.0) continue;
            if (obs_.M[k] - h_[k] <= tol && grad[k] < 0.0) continue;
            col[k] = nf++;
        }
        if (nf == 0) return false;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(nt * 9);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(nf);
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& tr = mesh_.tris[t];
            for (std::size_t i = 0; i < 3; ++i) {
                const int ci = col[tr.v[i]];
                if (ci < 0) continue;
                const Complex bi = tr.basis[i];
                const Complex hb(hs[t][0] * bi.real() + hs[t][1] * bi.imag(), hs[t][1] * bi.real() + hs[t][2] * bi.imag());
                for (std::size_t j = 0; j < 3; ++j) {
                    const int cj = col[tr.v[j]];
                    if (cj < 0) continue;
                    const double v = tr.area * dot(hb, tr.basis[j]);
                    trip.emplace_back(ci, cj, v);
                    if (ci == cj) diag[ci] += v;
                }
            }
        }
        const double shift = 1e-10 * std::max(1e-300, diag.maxCoeff());
        for (int i = 0; i < nf; ++i) trip.emplace_back(i, i, shift);
        Eigen::SparseMatrix<double> hm(nf, nf);
        hm.setFromTriplets(trip.begin(), trip.end());
        Eigen::VectorXd rhs(nf);
        for (std::size_t k = 0; k < n; ++k)
            if (col[k] >= 0) rhs[col[k]] = -grad[k];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(hm);
        if (ldlt.info() != Eigen::Success) return false;
        const Eigen::VectorXd step = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) return false;
        std::vector<std::pair<std::uint32_t, double>> nodes;
        std::vector<double> w(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (col[k] < 0) continue;
            const double target = std::clamp(h_[k] + step[col[k]], obs_.m[k], obs_.M[k]);
            w[k] = target - h_[k];
            if (w[k] != 0.0) nodes.push_back({static_cast<std::uint32_t>(k), w[k]});
        }
        std::vector<std::pair<std::uint32_t, Complex>> tris;
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& tr = mesh_.tris[t];
            const Complex d = w[tr.v[0]] * tr.basis[0] + w[tr.v[1]] * tr.basis[1] + w[tr.v[2]] * tr.basis[2];
            if (d != Complex(0.0, 0.0)) tris.push_back({static_cast<std::uint32_t>(t), d});
        }
        if (nodes.empty() || tris.empty()) return false;
        return line_min(nodes, tris, 60) != 0.0;
    }

    /// Exact line minimization of the energy along a nodal direction.
    double line_min(const std::vector<std::pair<std::uint32_t, double>>& nodes,
                    const std::vector<std::pair<std::uint32_t, Complex>>& tris, int max_evals = 100) {
        if (nodes.empty() || tris.empty()) return 0.0;
        double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        for (const auto& [k, w] : nodes) {
            const double a = (obs_.m[k] - h_[k]) / w, b = (obs_.M[k] - h_[k]) / w;
            lo = std::max(lo, std::min(a, b));
            hi = std::min(hi, std::max(a, b));
        }
        double dmax = 0.0;
        for (const auto& [t, d] : tris) dmax = std::max(dmax, std::abs(d));
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
        if (!(hi - lo > 0.0) || dmax == 0.0) return 0.0;
        const double ttol = 1e-12 / dmax;

        auto eval = [&](double t, double& d1, double& d2) {
            d1 = 0.0;
            d2 = 0.0;
            for (const auto& [tri, d] : tris) {
                Complex gs;
                std::array<double, 3> hs;
                derivs(grad_[tri] + t * d, &hints_[tri], gs, hs);
                const double a = mesh_.tris[tri].area;
                d1 += a * dot(gs, d);
                d2 += a * (hs[0] * d.real() * d.real() + 2.0 * hs[1] * d.real() * d.imag() + hs[2] * d.imag() * d.imag());
            }
        };
        double f, fp;
        eval(0.0, f, fp);
        if (f == 0.0) return 0.0;
        // Safeguarded Newton on the derivative. The bracket end on the descent
        // side always has energy at most f(0) by convexity and is returned.
        const bool right = f < 0.0;
        double a = right ? 0.0 : lo, b = right ? hi : 0.0;
        double t = 0.0, dx_old = b - a;
        bool far_checked = false;
        const double ftol = 1e-14 * std::abs(f);
        for (int it = 0; it < max_evals && b - a > ttol; ++it) {
            double next = fp > 0.0 ? t - f / fp : std::nan("");
            const bool newton_ok = next > a && next < b && std::abs(2.0 * f) <= std::abs(dx_old * fp);
            if (!newton_ok && !far_checked) {
                far_checked = true;
                next = right ? b : a;
            } else if (!newton_ok) {
                next = 0.5 * (a + b);
            }
            dx_old = next - t;
            t = next;
            eval(t, f, fp);
            if (std::abs(f) <= ftol) {
                a = b = t;
                break;
            }
            if (f < 0.0) a = t;
            else b = t;
        }
        t = right ? a : b;
        if (t == 0.0) return 0.0;
        for (const auto& [k, w] : nodes) h_[k] = std::clamp(h_[k] + t * w, obs_.m[k], obs_.M[k]);
        for (const auto& [tri, d] : tris) grad_[tri] = tri_gradient(tri);
        return t;
    }

    void refresh_gradients() {
        for (std::size_t t = 0; t < grad_.size(); ++t) grad_[t] = tri_gradient(t);
    }

private:
    const DiscreteEnergyProblem& p_;
    Mesh& mesh_;
    const Obstacles& obs_;
    std::vector<double>& h_;
    std::vector<Complex> hints_;
    std::vector<Complex> grad_;
    std::vector<Complex> shrunk_;  // corners of (1 - eps) N
    double curvature_ = 0.0;
};

/// P1 hat of a coarse node at offset (u, w) in coarse cell units, for the
/// (1, 1) diagonal split.
inline double coarse_hat(double u, double w) noexcept {
    double v;
    if (u >= 0.0 && w >= 0.0) v = 1.0 - std::max(u, w);
    else if (u <= 0.0 && w <= 0.0) v = 1.0 + std::min(u, w);
    else if (u >= 0.0) v = 1.0 - (u - w);
    else v = 1.0 - (w - u);
    return std::max(v, 0.0);
}

}  // namespace detail

struct MinimizeResult;
[[nodiscard]] inline MinimizeResult minimize(const DiscreteEnergyProblem& p, const MinimizeOptions& opt);

namespace detail {

/// Solve at spacing 2*Delta and interpolate linearly onto the fine nodes.
/// Coarse nodes are the fine nodes with even global indices.
inline std::vector<double> nested_seed(const DiscreteEnergyProblem& p, const MinimizeOptions& opt, const Mesh& mesh,
                                       const Obstacles& obs) {
    DiscreteEnergyProblem cp = p;
    cp.spacing = 2.0 * p.spacing;
    const MinimizeResult coarse = minimize(cp, opt);
    const GridFrame& cg = coarse.mesh.grid;
    const GridFrame& g = mesh.grid;
    auto value = [&](int gi, int gj, double& out) {
        const int i = gi / 2 - cg.i0, j = gj / 2 - cg.j0;
        if (i < 0 || j < 0 || i > cg.nx || j > cg.ny) return false;
        const std::size_t k = cg.index(i, j);
        if (coarse.mesh.state[k] == node_outside) return false;
        out = coarse.h[k];
        return true;
    };
    std::vector<double> seed(mesh.points.size(), 0.0);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (mesh.state[k] == node_outside) continue;
            seed[k] = 0.5 * (obs.m[k] + obs.M[k]);
            const int gi = g.i0 + i, gj = g.j0 + j;
            // the odd neighbours pair up along the (1, 1) diagonal split
            const int di = gi & 1, dj = gj & 1;
            double a = 0.0, b = 0.0;
            if (value(gi - di, gj - dj, a) && value(gi + di, gj + dj, b)) seed[k] = 0.5 * (a + b);
        }
    return seed;
}

}  // namespace detail

/// Nonlinear Gauss-Seidel with exact line minimization: nodal sweeps in four
/// colours followed by truncated coarse-hat corrections on nested grids. Each
/// cycle keeps the energy non-increasing (a cycle that would raise it is
/// undone and the iteration stops).
[[nodiscard]] inline MinimizeResult minimize(const DiscreteEnergyProblem& p, const MinimizeOptions& opt = {}) {
    p.validate();
    MinimizeResult res;
    res.mesh = build_mesh(p);
    Mesh& mesh = res.mesh;
    const GridFrame& g = mesh.grid;
    const unsigned threads = std::max(1u, opt.threads);
    res.obstacles = mcshane_obstacles(p, mesh, threads);
    const Obstacles& obs = res.obstacles;
    const std::size_t n = mesh.points.size();

    std::vector<double>& h = res.h;
    h.assign(n, 0.0);
    if (!opt.seed_field.empty() && opt.seed_field.size() != n) throw Error(ErrorKind::input, "seed field size mismatch");
    std::vector<double> seed = opt.seed_field;
    if (seed.empty() && opt.nested && std::min(g.nx, g.ny) >= 32) seed = detail::nested_seed(p, opt, mesh, obs);
    for (std::size_t k = 0; k < n; ++k) {
        if (mesh.state[k] == node_outside) continue;
        if (mesh.state[k] == node_fixed) h[k] = obs.M[k];
        else h[k] = std::clamp(seed.empty() ? 0.5 * (obs.m[k] + obs.M[k]) : seed[k], obs.m[k], obs.M[k]);
    }

    detail::Solver solver(p, mesh, obs, h);
    auto is_free = [&](std::size_t k) {
        return mesh.state[k] == node_free && obs.M[k] - obs.m[k] > 1e-12 * (1.0 + std::abs(obs.M[k]));
    };

    // fine colour classes
    std::array<std::vector<std::uint32_t>, 4> colour;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (is_free(k)) colour[static_cast<std::size_t>((i & 1) + 2 * (j & 1))].push_back(static_cast<std::uint32_t>(k));
        }
    std::size_t free_count = 0;
    for (const auto& c : colour) free_count += c.size();
    std::vector<char> movable(n, 0);
    for (std::size_t k = 0; k < n; ++k) movable[k] = is_free(k) ? 1 : 0;

    int max_level = 0;
    while ((2 << max_level) <= std::min(g.nx, g.ny)) ++max_level;
    if (opt.levels >= 0) max_level = std::min(max_level, opt.levels);

    auto fine_sweep = [&]() {
        for (const auto& cls : colour)
            parallel_for(cls.size(), threads, [&](std::size_t q) {
                const std::uint32_t k = cls[q];
                std::vector<std::pair<std::uint32_t, double>> nodes{{k, 1.0}};
                std::vector<std::pair<std::uint32_t, Complex>> tris;
                for (const auto& [t, loc] : mesh.node_tris[k]) tris.push_back({t, mesh.tris[t].basis[loc]});
                solver.line_min(nodes, tris);
            });
    };

    auto coarse_sweep = [&](int level) {
        const int s = 1 << level;
        const int I0 = (g.i0 >= 0 ? g.i0 / s : -((-g.i0 + s - 1) / s)), J0 = (g.j0 >= 0 ? g.j0 / s : -((-g.j0 + s - 1) / s));
        const int I1 = (g.i0 + g.nx) / s + 1, J1 = (g.j0 + g.ny) / s + 1;
        for (int cls = 0; cls < 4; ++cls) {
            std::vector<std::pair<int, int>> centres;
            for (int J = J0; J <= J1; ++J)
                for (int I = I0; I <= I1; ++I)
                    if (((I & 1) + 2 * (J & 1)) == cls) centres.push_back({I, J});
            parallel_for(centres.size(), threads, [&](std::size_t q) {
                const auto [I, J] = centres[q];
                std::vector<std::pair<std::uint32_t, double>> nodes;
                const int ci = I * s - g.i0, cj = J * s - g.j0;  // centre in local node indices
                for (int j = std::max(0, cj - s + 1); j <= std::min(g.ny, cj + s - 1); ++j)
                    for (int i = std::max(0, ci - s + 1); i <= std::min(g.nx, ci + s - 1); ++i) {
                        const std::size_t k = g.index(i, j);
                        if (!is_free(k)) continue;
                        const double tol = 1e-12 * (1.0 + std::abs(h[k]));
                        if (h[k] - obs.m[k] <= tol || obs.M[k] - h[k] <= tol) continue;  // truncation
                        const double w = detail::coarse_hat(static_cast<double>(i - ci) / s, static_cast<double>(j - cj) / s);
                        if (w > 0.0) nodes.push_back({static_cast<std::uint32_t>(k), w});
                    }
                if (nodes.empty()) return;
                std::vector<std::uint32_t> tlist;
                for (const auto& [k, w] : nodes)
                    for (const auto& [t, loc] : mesh.node_tris[k]) tlist.push_back(t);
                std::sort(tlist.begin(), tlist.end());
                tlist.erase(std::unique(tlist.begin(), tlist.end()), tlist.end());
                std::unordered_map<std::uint32_t, double> weight;
                for (const auto& [k, w] : nodes) weight[k] = w;
                std::vector<std::pair<std::uint32_t, Complex>> tris;
                for (auto t : tlist) {
                    Complex d{0.0, 0.0};
                    for (int v = 0; v < 3; ++v) {
                        auto it = weight.find(mesh.tris[t].v[static_cast<std::size_t>(v)]);
                        if (it != weight.end()) d += it->second * mesh.tris[t].basis[static_cast<std::size_t>(v)];
                    }
                    if (d != Complex(0.0, 0.0)) tris.push_back({t, d});
                }
                solver.line_min(nodes, tris, 4);
            });
        }
    };

    double e = solver.energy(threads);
    res.energy_trace.push_back(e);
    if (free_count == 0) {
        res.converged = true;
        res.status = "no free nodes";
        res.tri_grad = solver.gradients();
        return res;
    }
    std::vector<double> saved;
    for (int it = 0; it < opt.max_iters; ++it) {
        saved = h;
        if (opt.newton) {
            solver.newton_step(movable, threads);
            fine_sweep();
        } else {
            fine_sweep();
            for (int level = max_level; level >= 1; --level) coarse_sweep(level);
            fine_sweep();
        }
        const double en = solver.energy(threads);
        res.iterations = it + 1;
        if (en > e) {
            h = saved;
            solver.refresh_gradients();
            // a rise at rounding level means the iteration has converged
            res.converged = en - e <= 1e-13 * std::max(1.0, std::abs(e));
            res.status = res.converged ? "converged" : "stalled: further sweeps would raise the energy";
            break;
        }
        res.energy_trace.push_back(en);
        const double dec = e - en;
        e = en;
        if (dec <= opt.tol * std::max(1e-300, std::abs(en))) {
            res.converged = true;
            res.status = "converged";
            break;
        }
    }
    if (!res.converged) res.status = "iteration limit reached";
    res.tri_grad = solver.gradients();
    return res;
}

// ----------------------------------------------------------------------------
// Liquid region extraction
// ----------------------------------------------------------------------------

struct LiquidRegion {
    std::vector<int> label;              // per triangle: -1 liquid, else nearest corner
    std::vector<double> corner_distance; // per triangle distance of the gradient to that corner
    int components = 0;
    int euler_characteristic = 0;
    double area = 0.0;
    std::vector<double> component_areas;
    std::vector<std::pair<Complex, Complex>> boundary;  // edges between liquid and non-liquid
};

/// Liquid triangles have gradients at distance > threshold from the boundary of N.
[[nodiscard]] inline LiquidRegion extract_liquid_region(const Mesh& mesh, const std::vector<Complex>& tri_grad,
                                                        const GradientPolygon& n, double threshold) {
    LiquidRegion r;
    const std::size_t nt = mesh.tris.size();
    r.label.assign(nt, -1);
    r.corner_distance.assign(nt, 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
        const Complex gr = tri_grad[t];
        if (-n.signed_distance(gr) > threshold) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n.size(); ++c) {
            const double d = std::abs(gr - n.corner(static_cast<std::ptrdiff_t>(c)));
            if (d < best) {
                best = d;
                r.label[t] = static_cast<int>(c);
            }
        }
        r.corner_distance[t] = best;
    }
    // edges keyed by node pairs
    std::unordered_map<std::uint64_t, std::array<int, 2>> edges;
    auto key = [](std::uint32_t a, std::uint32_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    for (std::size_t t = 0; t < nt; ++t)
        for (int e = 0; e < 3; ++e) {
            auto& slot = edges.try_emplace(key(mesh.tris[t].v[static_cast<std::size_t>(e)], mesh.tris[t].v[static_cast<std::size_t>((e + 1) % 3)]),
                                           std::array<int, 2>{-1, -1})
                             .first->second;
            (slot[0] < 0 ? slot[0] : slot[1]) = static_cast<int>(t);
        }
    std::vector<int> parent(nt);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    std::size_t liquid_edges = 0;
    std::vector<char> vused(mesh.points.size(), 0);
    std::vector<std::pair<std::uint64_t, std::array<int, 2>>> sorted(edges.begin(), edges.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [k, s] : sorted) {
        const bool l0 = s[0] >= 0 && r.label[static_cast<std::size_t>(s[0])] < 0;
        const bool l1 = s[1] >= 0 && r.label[static_cast<std::size_t>(s[1])] < 0;
        if (l0 || l1) ++liquid_edges;
        if (l0 && l1) parent[static_cast<std::size_t>(find(s[0]))] = find(s[1]);
        if (l0 != l1) {
            const auto a = static_cast<std::size_t>(k >> 32), b = static_cast<std::size_t>(k & 0xffffffffULL);
            r.boundary.push_back({mesh.points[a], mesh.points[b]});
        }
    }
    std::size_t faces = 0;
    std::unordered_map<int, std::size_t> comp;
    for (std::size_t t = 0; t < nt; ++t) {
        if (r.label[t] >= 0) continue;
        ++faces;
        r.area += mesh.tris[t].area;
        for (auto v : mesh.tris[t].v) vused[v] = 1;
        const int root = find(static_cast<int>(t));
        auto [it, fresh] = comp.try_emplace(root, r.component_areas.size());
        if (fresh) r.component_areas.push_back(0.0);
        r.component_areas[it->second] += mesh.tris[t].area;
    }
    std::size_t verts = 0;
    for (char c : vused) verts += static_cast<std::size_t>(c);
    r.components = static_cast<int>(r.component_areas.size());
    r.euler_characteristic = static_cast<int>(verts) - static_cast<int>(liquid_edges) + static_cast<int>(faces);
    return r;
}

/// Symmetric Hausdorff distance between the liquid boundary edges and a circle.
[[nodiscard]] inline double hausdorff_to_circle(const std::vector<std::pair<Complex, Complex>>& edges, Complex centre,
                                                double radius, int samples = 2048) {
    if (edges.empty()) return std::numeric_limits<double>::infinity();
    double d1 = 0.0;
    for (const auto& [a, b] : edges)
        for (double s : {0.0, 0.5, 1.0}) d1 = std::max(d1, std::abs(std::abs(a + s * (b - a) - centre) - radius));
    double d2 = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Complex c = centre + std::polar(radius, two_pi * k / samples);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : edges) {
            const Complex e = b - a;
            const double s = std::clamp(dot(c - a, e) / std::norm(e), 0.0, 1.0);
            best = std::min(best, std::abs(c - a - s * e));
        }
        d2 = std::max(d2, best);
    }
    return std::max(d1, d2);
}

/// Minimum distance from the liquid triangles' vertices to each side of the domain.
[[nodiscard]] inline std::vector<double> side_gaps(const Mesh& mesh, const LiquidRegion& r, const PolygonalDomain& d) {
    std::vector<double> gap(d.size(), std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        if (r.label[t] >= 0) continue;
        for (auto v : mesh.tris[t].v) {
            const Complex z = mesh.points[v];
            for (std::size_t k = 0; k < d.size(); ++k) {
                const Complex a = d.vertex(static_cast<std::ptrdiff_t>(k)), e = d.vertex(static_cast<std::ptrdiff_t>(k) + 1) - a;
                const double s = std::clamp(dot(z - a, e) / std::norm(e), 0.0, 1.0);
                gap[k] = std::min(gap[k], std::abs(z - a - s * e));
            }
        }
    }
    return gap;
}

// ----------------------------------------------------------------------------
// Standard configurations
// ----------------------------------------------------------------------------

/// Aztec diamond |x| + |y| <= sqrt(2) with the natural domino boundary data;
/// its inscribed circle is the unit circle.
[[nodiscard]] inline PolygonalDomain aztec_domain() {
    const double r = std::sqrt(2.0);
    return build_natural_boundary(domino_polygon(), {{r, 0.0}, {0.0, r}, {-r, 0.0}, {0.0, -r}}, {2, 1, 0, 3});
}

/// Hexagon natural for N = hull{0, 1, i} with the cyclic corner labels 0, i, 1.
[[nodiscard]] inline PolygonalDomain lozenge_hexagon(double a = 0.5) {
    return build_natural_boundary(lozenge_polygon(), {{0.0, 0.0}, {a, 0.0}, {2 * a, a}, {2 * a, 2 * a}, {a, 2 * a}, {0.0, a}},
                                  {0, 2, 1, 0, 2, 1});
}

/// Equilateral triangle N = hull{0, e^{i pi/3}, e^{2 i pi/3}} used for the
/// regular-hexagon construction.
[[nodiscard]] inline GradientPolygon equilateral_polygon() {
    const double h = std::sqrt(3.0) / 2.0;
    return GradientPolygon({{0.0, 0.0}, {0.5, h}, {-0.5, h}});
}

/// Regular hexagon with natural data for the equilateral N, and the cut domain
/// whose boundary data is the upper obstacle of the hexagon restricted to it.
struct CutHexagon {
    PolygonalDomain hexagon;
    PolygonalDomain cut;
};

[[nodiscard]] inline CutHexagon cut_hexagon() {
    const GradientPolygon n = equilateral_polygon();
    const double h = std::sqrt(3.0) / 2.0;
    std::vector<Complex> hex{{0.0, 0.0}, {h, -0.5}, {2 * h, 0.0}, {2 * h, 1.0}, {h, 1.5}, {0.0, 1.0}};
    CutHexagon c;
    c.hexagon = build_natural_boundary(n, hex, natural_labels(n, hex));
    std::vector<Complex> cut{{h, -0.5}, {2 * h, 0.0}, {2 * h, 1.0}, {h, 1.5}, {0.0, 1.0}, {h, 0.5}};
    const auto labels = natural_labels(n, cut);
    c.cut = build_natural_boundary(n, cut, labels, mcshane_upper(c.hexagon, n, cut[0]));
    for (std::size_t j = 0; j < cut.size(); ++j)
        if (std::abs(c.cut.values[j] - mcshane_upper(c.hexagon, n, cut[j])) > 1e-12)
            throw Error(ErrorKind::validation, "cut boundary data differs from the hexagon obstacle");
    return c;
}

}  // namespace dimer
