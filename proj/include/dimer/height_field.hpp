#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "frozen_boundary.hpp"
#include "geom.hpp"
#include "quadrature.hpp"
#include "surface_tension.hpp"

namespace dimer {

// ----------------------------------------------------------------------------
// Inversion of the teleomorphic map
// ----------------------------------------------------------------------------

namespace detail {

inline std::optional<Complex> newton_g(const FrozenBoundaryModel& m, Complex target, Complex z, double tol, double& best_r,
                                       Complex& best_z) {
    if (std::abs(z) >= 1.0) z = Complex(0.0, 0.0);
    GValue v = teleomorphic_g_derivs(m, z);
    Complex r = target - v.g;
    for (int it = 0; it < 100; ++it) {
        if (std::abs(r) < best_r) {
            best_r = std::abs(r);
            best_z = z;
        }
        if (std::abs(r) < tol) return z;
        const double det = std::norm(v.g_z) - std::norm(v.g_zbar);
        if (!(det > 0.0)) return std::nullopt;
        Complex dz = (std::conj(v.g_z) * r - v.g_zbar * std::conj(r)) / det;
        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            Complex zn = z + dz;
            if (std::abs(zn) >= 1.0) zn = zn / std::abs(zn) * std::max(0.0, 2.0 - std::abs(zn));  // fold back inside
            if (std::abs(zn) < 1.0) {
                const GValue vn = teleomorphic_g_derivs(m, zn);
                const Complex rn = target - vn.g;
                if (std::abs(rn) < std::abs(r)) {
                    z = zn;
                    v = vn;
                    r = rn;
                    moved = true;
                    break;
                }
            }
            dz *= 0.5;
        }
        if (!moved) break;
    }
    if (std::abs(r) < best_r) {
        best_r = std::abs(r);
        best_z = z;
    }
    if (std::abs(r) < tol) return z;
    return std::nullopt;
}

}  // namespace detail

/// z in the disc with g(z) = target, by damped Newton on the Wirtinger
/// linearization; falls back to a coarse polar grid search for the seed.
[[nodiscard]] inline Complex invert_g(const FrozenBoundaryModel& m, Complex target, Complex seed = {0.0, 0.0},
                                      double tol = 1e-12) {
    double best_r = std::numeric_limits<double>::infinity();
    Complex best_z{0.0, 0.0};
    if (auto z = detail::newton_g(m, target, seed, tol, best_r, best_z)) return *z;
    // coarse grid search for a better seed
    Complex grid_best{0.0, 0.0};
    double grid_r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 48; ++i) {
        const double rad = 1.0 - std::pow(1.0 - (i + 0.5) / 48.0, 2.0);
        for (int j = 0; j < 96; ++j) {
            const Complex z = std::polar(rad, two_pi * j / 96.0);
            const double r = std::abs(teleomorphic_g(m, z) - target);
            if (r < grid_r) {
                grid_r = r;
                grid_best = z;
            }
        }
    }
    if (auto z = detail::newton_g(m, target, grid_best, tol, best_r, best_z)) return *z;
    if (std::abs(best_z) > 1.0 - 1e-6) throw Error(ErrorKind::domain, "invert_g: target outside the liquid region");
    throw Error(ErrorKind::convergence, "invert_g did not converge");
}

// ----------------------------------------------------------------------------
// f and the height gradient
// ----------------------------------------------------------------------------

/// b with b^2 = B (every zero of B must have even multiplicity).
[[nodiscard]] inline BlaschkeProduct blaschke_square_root(const BlaschkeProduct& b) {
    std::vector<Complex> left(b.zeros()), half;
    while (!left.empty()) {
        const Complex a = left.back();
        left.pop_back();
        auto it = std::find_if(left.begin(), left.end(), [&](Complex c) { return std::abs(c - a) < 1e-12; });
        if (it == left.end()) throw Error(ErrorKind::input, "domino structure needs B with even zero multiplicities");
        left.erase(it);
        half.push_back(a);
    }
    return BlaschkeProduct(half, std::sqrt(b.unimodular()));
}

/// Evaluates the solution F of F_zbar = mu(F) F_z on the liquid region:
/// B o g^{-1} for the lozenge coefficient mu(z) = z and b o g^{-1} with b^2 = B
/// for the domino coefficient mu(z) = z^2.
class FEvaluator {
public:
    FEvaluator(FrozenBoundaryModel m, const StructureCoefficient& mu) : m_(std::move(m)), tag_(mu.tag) {
        if (tag_ == ModelTag::domino) root_ = blaschke_square_root(m_.B);
        else if (tag_ != ModelTag::lozenge) throw Error(ErrorKind::input, "eval_f supports the lozenge and domino coefficients");
    }

    [[nodiscard]] const FrozenBoundaryModel& model() const noexcept { return m_; }
    [[nodiscard]] ModelTag tag() const noexcept { return tag_; }

    /// F(z); `seed` carries the preimage g^{-1}(z) between nearby calls.
    [[nodiscard]] Complex operator()(Complex z, Complex* seed = nullptr) const {
        const Complex w = invert_g(m_, z, seed ? *seed : Complex(0.0, 0.0));
        if (seed) *seed = w;
        return from_preimage(w);
    }
    [[nodiscard]] Complex from_preimage(Complex w) const { return tag_ == ModelTag::domino ? root_(w) : m_.B(w); }

private:
    FrozenBoundaryModel m_;
    ModelTag tag_;
    BlaschkeProduct root_;
};

[[nodiscard]] inline Complex eval_f(const FrozenBoundaryModel& m, Complex z, const StructureCoefficient& mu = StructureCoefficient::lozenge()) {
    return FEvaluator(m, mu)(z);
}

/// Closed form of g^{-1} for the Aztec model (B = z^2, gamma = 2z).
[[nodiscard]] inline Complex aztec_f(Complex z) {
    const double r2 = std::norm(z);
    if (r2 >= 1.0) throw Error(ErrorKind::domain, "aztec_f needs |z| < 1");
    if (r2 < 1e-8) return 0.5 * z * (1.0 + 0.25 * r2);  // series of (1 - sqrt(1 - r2)) / r2
    return z / r2 * (1.0 - std::sqrt(1.0 - r2));
}

/// Northbound domino density of the Aztec diamond in coordinates where the
/// arctic circle is the unit circle.
[[nodiscard]] inline double aztec_density(double x, double y) {
    const double r2 = x * x + y * y;
    if (r2 >= 1.0) return y > 1.0 / std::sqrt(2.0) ? 1.0 : 0.0;
    return 0.5 + std::atan((std::sqrt(2.0) * y - 1.0) / std::sqrt(1.0 - r2)) / pi;
}

struct ArcAssignment {
    ArcPartition arcs;
    GradientPolygon polygon;

    [[nodiscard]] Complex gradient(Complex f) const { return arcs.weighted_sum(polygon, f); }
};

/// Lozenge heights on N = hull{0, 1, i}: arcs (0, pi) -> 0, (pi, 3pi/2) -> i,
/// (3pi/2, 2pi) -> 1 for F = B o g^{-1}.
[[nodiscard]] inline ArcAssignment lozenge_assignment() {
    return {ArcPartition({0.0, pi, 1.5 * pi}, {0, 2, 1}), lozenge_polygon()};
}

/// Domino heights on N = hull{1, i, -1, -i}: quarter arcs starting at pi/4
/// carrying i, 1, -i, -1 (north, west, south, east frozen regions).
[[nodiscard]] inline ArcAssignment aztec_assignment() {
    return {ArcPartition({0.25 * pi, 0.75 * pi, 1.25 * pi, 1.75 * pi}, {1, 0, 3, 2}), domino_polygon()};
}

[[nodiscard]] inline Complex grad_h(const FEvaluator& f, const ArcAssignment& a, Complex z, Complex* seed = nullptr) {
    return a.gradient(f(z, seed));
}

// ----------------------------------------------------------------------------
// Sampled boundary curve: inside test and distance queries
// ----------------------------------------------------------------------------

class SampledCurve {
public:
    SampledCurve() = default;
    explicit SampledCurve(std::vector<Complex> pts) : p_(std::move(pts)) {
        xmin_ = ymin_ = std::numeric_limits<double>::infinity();
        double xmax = -xmin_, ymax = -ymin_;
        for (const auto& z : p_) {
            xmin_ = std::min(xmin_, z.real());
            ymin_ = std::min(ymin_, z.imag());
            xmax = std::max(xmax, z.real());
            ymax = std::max(ymax, z.imag());
        }
        g_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p_.size()))));
        w_ = std::max((xmax - xmin_), (ymax - ymin_)) / g_ + 1e-12;
        cells_.assign(static_cast<std::size_t>(g_ * g_), {});
        for (std::size_t e = 0; e < p_.size(); ++e) {
            const Complex a = p_[e], b = p_[(e + 1) % p_.size()];
            const int i0 = cell(std::min(a.real(), b.real()) - xmin_), i1 = cell(std::max(a.real(), b.real()) - xmin_);
            const int j0 = cell(std::min(a.imag(), b.imag()) - ymin_), j1 = cell(std::max(a.imag(), b.imag()) - ymin_);
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j) cells_[static_cast<std::size_t>(i * g_ + j)].push_back(e);
        }
    }

    [[nodiscard]] const std::vector<Complex>& points() const noexcept { return p_; }

    [[nodiscard]] bool contains(Complex z) const {
        bool in = false;
        const std::size_t n = p_.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Complex a = p_[k], b = p_[(k + 1) % n];
            if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
                const double x = a.real() + (z.imag() - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
                if (z.real() < x) in = !in;
            }
        }
        return in;
    }

    /// Distance to the curve and the index of the closest segment.
    [[nodiscard]] std::pair<double, std::size_t> distance(Complex z) const {
        double best = std::numeric_limits<double>::infinity();
        std::size_t seg = 0;
        const int ci = cell(z.real() - xmin_), cj = cell(z.imag() - ymin_);
        for (int ring = 0; ring <= g_; ++ring) {
            for (int i = ci - ring; i <= ci + ring; ++i)
                for (int j = cj - ring; j <= cj + ring; ++j) {
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
                    if (i < 0 || j < 0 || i >= g_ || j >= g_) continue;
                    for (std::size_t e : cells_[static_cast<std::size_t>(i * g_ + j)]) {
                        const double d = segment_distance(z, e);
                        if (d < best) {
                            best = d;
                            seg = e;
                        }
                    }
                }
            // cells at ring r+1 are at least r * w away from the query cell
            if (best < ring * w_) break;
        }
        if (!std::isfinite(best))
            for (std::size_t e = 0; e < p_.size(); ++e) {
                const double d = segment_distance(z, e);
                if (d < best) {
                    best = d;
                    seg = e;
                }
            }
        return {best, seg};
    }

private:
    int cell(double x) const { return std::clamp(static_cast<int>(x / w_), 0, g_ - 1); }
    double segment_distance(Complex z, std::size_t e) const {
        const Complex a = p_[e], b = p_[(e + 1) % p_.size()];
        const Complex d = b - a;
        const double n2 = std::norm(d);
        const double t = n2 > 0.0 ? std::clamp(dot(z - a, d) / n2, 0.0, 1.0) : 0.0;
        return std::abs(z - (a + t * d));
    }

    std::vector<Complex> p_;
    std::vector<std::vector<std::size_t>> cells_;
    double xmin_ = 0.0, ymin_ = 0.0, w_ = 1.0;
    int g_ = 1;
};

[[nodiscard]] inline SampledCurve sample_boundary(const FrozenBoundaryModel& m, int samples = 4096) {
    std::vector<Complex> p(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) p[static_cast<std::size_t>(k)] = boundary_param(m, std::polar(1.0, two_pi * k / samples));
    return SampledCurve(std::move(p));
}

// ----------------------------------------------------------------------------
// HeightField
// ----------------------------------------------------------------------------

/// Mask codes: 0 outside, 1 liquid, 2 + j frozen with corner j.
enum : int { mask_outside = 0, mask_liquid = 1, mask_frozen = 2 };

struct GridSpec {
    double x0 = -1.0, y0 = -1.0;  // lower-left node
    double spacing = 1.0 / 64.0;
    int nx = 129, ny = 129;
    double frozen_band = 0.0;  // outside points within this distance of the boundary get the frozen extension
};

struct HeightField {
    GridSpec grid;
    std::vector<int> mask;
    std::vector<double> h;
    std::vector<Complex> grad;
    double max_curl = 0.0;           // over all liquid plaquettes
    double max_interior_curl = 0.0;  // plaquettes at least 0.1 away from the boundary

    [[nodiscard]] std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) + static_cast<std::size_t>(i);
    }
    [[nodiscard]] Complex point(int i, int j) const noexcept {
        return {grid.x0 + i * grid.spacing, grid.y0 + j * grid.spacing};
    }
};

/// Grid reconstruction of h: per-point F and grad h, trapezoid integration along
/// a breadth-first spanning tree of liquid grid edges from the point nearest to
/// g(0), plaquette curl residuals, and the affine frozen extension.
[[nodiscard]] inline HeightField integrate_h(const FEvaluator& f, const ArcAssignment& a, const GridSpec& spec,
                                             unsigned threads = 1) {
    if (!(spec.spacing > 0.0) || spec.nx < 2 || spec.ny < 2) throw Error(ErrorKind::input, "integrate_h: invalid grid");
    const FrozenBoundaryModel& m = f.model();
    const SampledCurve curve = sample_boundary(m);
    HeightField hf;
    hf.grid = spec;
    const std::size_t n = static_cast<std::size_t>(spec.nx) * static_cast<std::size_t>(spec.ny);
    hf.mask.assign(n, mask_outside);
    hf.h.assign(n, 0.0);
    hf.grad.assign(n, Complex(0.0, 0.0));
    std::vector<double> bdist(n, 0.0);
    std::vector<std::size_t> bseg(n, 0);

    // rows are independent; within a row the preimage of the previous point seeds the next
    parallel_for(static_cast<std::size_t>(spec.ny), threads, [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        bool have_seed = false;
        Complex seed{0.0, 0.0};
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = hf.index(i, j);
            const Complex z = hf.point(i, j);
            const auto [d, seg] = curve.distance(z);
            bdist[k] = d;
            bseg[k] = seg;
            if (!curve.contains(z)) {
                have_seed = false;
                continue;
            }
            try {
                Complex s = have_seed ? seed : Complex(0.0, 0.0);
                const Complex fz = f(z, &s);
                seed = s;
                have_seed = true;
                hf.grad[k] = a.gradient(fz);
                hf.mask[k] = mask_liquid;
            } catch (const Error&) {
                have_seed = false;  // too close to the boundary to resolve; treated as frozen below
            }
        }
    });

    // anchor: liquid point closest to g(0)
    const Complex c = teleomorphic_g(m, {0.0, 0.0});
    std::size_t anchor = n;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = hf.index(i, j);
            if (hf.mask[k] != mask_liquid) continue;
            const double d = std::abs(hf.point(i, j) - c);
            if (d < best) {
                best = d;
                anchor = k;
            }
        }
    if (anchor == n) throw Error(ErrorKind::validation, "integrate_h: no liquid grid point");

    std::vector<char> done(n, 0);
    std::deque<std::size_t> queue{anchor};
    done[anchor] = 1;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        const int i = static_cast<int>(k % static_cast<std::size_t>(spec.nx));
        const int j = static_cast<int>(k / static_cast<std::size_t>(spec.nx));
        for (int e = 0; e < 4; ++e) {
            const int i2 = i + di[e], j2 = j + dj[e];
            if (i2 < 0 || j2 < 0 || i2 >= spec.nx || j2 >= spec.ny) continue;
            const std::size_t k2 = hf.index(i2, j2);
            if (done[k2] || hf.mask[k2] != mask_liquid) continue;
            const Complex step = hf.point(i2, j2) - hf.point(i, j);
            hf.h[k2] = hf.h[k] + dot(0.5 * (hf.grad[k] + hf.grad[k2]), step);
            done[k2] = 1;
            queue.push_back(k2);
        }
    }
    // liquid points not connected to the anchor are dropped
    for (std::size_t k = 0; k < n; ++k)
        if (hf.mask[k] == mask_liquid && !done[k]) hf.mask[k] = mask_outside;

    // plaquette curl
    for (int j = 0; j + 1 < spec.ny; ++j)
        for (int i = 0; i + 1 < spec.nx; ++i) {
            const std::size_t k00 = hf.index(i, j), k10 = hf.index(i + 1, j), k11 = hf.index(i + 1, j + 1),
                              k01 = hf.index(i, j + 1);
            if (hf.mask[k00] != mask_liquid || hf.mask[k10] != mask_liquid || hf.mask[k11] != mask_liquid ||
                hf.mask[k01] != mask_liquid)
                continue;
            const double s = spec.spacing;
            const double circ = 0.5 * s *
                                ((hf.grad[k00] + hf.grad[k10]).real() + (hf.grad[k10] + hf.grad[k11]).imag() -
                                 (hf.grad[k11] + hf.grad[k01]).real() - (hf.grad[k01] + hf.grad[k00]).imag());
            hf.max_curl = std::max(hf.max_curl, std::abs(circ));
            const double dmin = std::min({bdist[k00], bdist[k10], bdist[k11], bdist[k01]});
            if (dmin > 0.1) hf.max_interior_curl = std::max(hf.max_interior_curl, std::abs(circ));
        }

    // frozen extension: affine with the corner of the nearest boundary arc
    const std::size_t samples = curve.points().size();
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = hf.index(i, j);
            if (hf.mask[k] == mask_liquid) continue;
            const Complex z = hf.point(i, j);
            const bool inside = curve.contains(z);
            if (!inside && !(bdist[k] <= spec.frozen_band)) continue;
            const std::size_t seg = bseg[k];
            const Complex zb = curve.points()[seg];
            const Complex w = std::polar(1.0, two_pi * static_cast<double>(seg) / static_cast<double>(samples));
            const double ang = std::arg(f.from_preimage(w));
            const int label = a.arcs.labels()[a.arcs.arc_of(ang)];
            const Complex p = a.polygon.corner(label);
            // nearest liquid neighbour within a few cells supplies the height level
            std::size_t nb = n;
            double nd = std::numeric_limits<double>::infinity();
            const int reach = 3 + static_cast<int>(spec.frozen_band / spec.spacing);
            for (int jj = std::max(0, j - reach); jj <= std::min(spec.ny - 1, j + reach); ++jj)
                for (int ii = std::max(0, i - reach); ii <= std::min(spec.nx - 1, i + reach); ++ii) {
                    const std::size_t kk = hf.index(ii, jj);
                    if (hf.mask[kk] != mask_liquid) continue;
                    const double d = std::abs(hf.point(ii, jj) - zb);
                    if (d < nd) {
                        nd = d;
                        nb = kk;
                    }
                }
            if (nb == n) continue;
            const Complex pa = hf.point(static_cast<int>(nb % static_cast<std::size_t>(spec.nx)),
                                        static_cast<int>(nb / static_cast<std::size_t>(spec.nx)));
            const double hb = hf.h[nb] + dot(0.5 * (hf.grad[nb] + p), zb - pa);
            hf.h[k] = hb + dot(p, z - zb);
            hf.grad[k] = p;
            hf.mask[k] = mask_frozen + label;
        }
    return hf;
}

/// int_0^delta <grad h(z0 + s n) - p0, n> ds for a boundary preimage w0 = e^{i t0};
/// n is the inward unit normal at z0 = R(w0) and p0 the frozen corner there.
[[nodiscard]] inline double height_excess_along_normal(const FEvaluator& f, const ArcAssignment& a, double t0, double delta) {
    const FrozenBoundaryModel& m = f.model();
    const Complex w0 = std::polar(1.0, t0);
    const Complex z0 = boundary_param(m, w0);
    // inward normal: tangent rotated towards g(0.99 w0)
    const Complex tangent = Complex(0.0, 1.0) * w0 * boundary_param_deriv(m, w0);
    Complex nrm = Complex(0.0, 1.0) * tangent / std::abs(tangent);
    if (dot(nrm, teleomorphic_g(m, 0.99 * w0) - z0) < 0.0) nrm = -nrm;
    const Complex p0 = a.polygon.corner(a.arcs.labels()[a.arcs.arc_of(std::arg(f.from_preimage(w0)))]);
    // radial flattening g(w0 (1 - rho)) - z0 ~ c rho^2 gives the seed scale
    const double c2 = std::abs(teleomorphic_g(m, 0.99 * w0) - z0) / 1e-4;
    auto integrand = [&](double u) {
        const double s = u * u;
        // below 1e-8 the inversion is limited by cancellation in 1 - |B|^2; the neglected part is O(1e-12)
        if (s < 1e-8) return 0.0;
        const double rho = std::min(0.5, std::sqrt(s / c2));
        Complex seed = w0 * (1.0 - rho);
        const Complex g = a.gradient(f(z0 + s * nrm, &seed));
        return 2.0 * u * dot(g - p0, nrm);
    };
    return integrate(integrand, 0.0, std::sqrt(delta), 1e-9 * std::pow(delta, 1.5), 20);
}

/// Least-squares slope of log y against log x.
[[nodiscard]] inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace dimer
