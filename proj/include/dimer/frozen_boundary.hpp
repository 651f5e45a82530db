#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "geom.hpp"

namespace dimer {

/// The holomorphic factor gamma, a rational function whose denominator is
/// built from the Blaschke zeros.
using HolomorphicFactor = Rational;

struct Cusp {
    double angle = 0.0;  // preimage angle on the unit circle
    Complex preimage{1.0, 0.0};
    Complex point{0.0, 0.0};  // R(preimage)
};

/// Frozen-boundary data: Blaschke product B and holomorphic factor gamma.
struct FrozenBoundaryModel {
    BlaschkeProduct B;
    HolomorphicFactor gamma;
    std::vector<Cusp> cusps;  // filled by find_cusps when requested

    [[nodiscard]] int degree() const noexcept { return B.degree(); }
};

// ----------------------------------------------------------------------------
// Construction of gamma
// ----------------------------------------------------------------------------

namespace detail {

inline Polynomial denominator_from_zeros(const BlaschkeProduct& b) {
    Polynomial d(std::vector<Complex>{Complex(1.0, 0.0)});
    for (const auto& a : b.zeros())
        if (a != Complex(0.0, 0.0)) d = d * Polynomial(std::vector<Complex>{Complex(1.0, 0.0), -std::conj(a)});
    return d;
}

}  // namespace detail

/// gamma = alpha * [(z - z0)(1 - conj(z0) z)] * prod (z - e^{i theta}) / D(z).
/// alpha is projected onto the line of values compatible with the
/// self-reflection gamma(z) = B(z) conj(gamma(1/conj z)).
[[nodiscard]] inline HolomorphicFactor gamma_from_circle_zeros(const BlaschkeProduct& b, const std::vector<double>& circle_zeros,
                                                               Complex alpha, std::optional<Complex> interior_zero = std::nullopt) {
    const int d = b.degree();
    const int expected = interior_zero ? d - 2 : d;
    if (static_cast<int>(circle_zeros.size()) != expected)
        throw Error(ErrorKind::input, "gamma_from_circle_zeros: expected " + std::to_string(expected) + " circle zeros, got " +
                                          std::to_string(circle_zeros.size()));
    if (interior_zero && std::abs(*interior_zero) >= 1.0)
        throw Error(ErrorKind::input, "gamma_from_circle_zeros: interior zero must lie in the open disc");
    Polynomial num(std::vector<Complex>{Complex(1.0, 0.0)});
    if (interior_zero) {
        const Complex z0 = *interior_zero;
        num = num * Polynomial(std::vector<Complex>{-z0, Complex(1.0, 0.0)});
        num = num * Polynomial(std::vector<Complex>{Complex(1.0, 0.0), -std::conj(z0)});
    }
    for (double t : circle_zeros) num = num * Polynomial(std::vector<Complex>{-std::polar(1.0, t), Complex(1.0, 0.0)});
    const Polynomial den = detail::denominator_from_zeros(b);
    const Rational unit(num, den);
    // alpha / conj(alpha) must equal B conj(g1) / g1 on the circle
    Complex c{1.0, 0.0};
    for (int k = 0; k < 64; ++k) {
        const Complex z = std::polar(1.0, 0.37 + two_pi * k / 64.0);
        const Complex g1 = unit(z);
        if (std::abs(g1) > 1e-3) {
            c = b(z) * std::conj(g1) / g1;
            break;
        }
    }
    const Complex dir = std::polar(1.0, 0.5 * std::arg(c));
    const double t = (alpha * std::conj(dir)).real();
    if (std::abs(t) < 1e-300) throw Error(ErrorKind::input, "gamma_from_circle_zeros: alpha projects to zero");
    return {num * (t * dir), den};
}

// ----------------------------------------------------------------------------
// Kernel, teleomorphic map and boundary parametrization
// ----------------------------------------------------------------------------

/// Phi(z, w) = (gamma(z) B(w) - gamma(w) B(z)) / (B(w) - B(z)).
[[nodiscard]] inline Complex phi_kernel(const FrozenBoundaryModel& m, Complex z, Complex w) {
    const Complex bz = m.B(z), bw = m.B(w);
    const Complex den = bw - bz;
    if (std::abs(den) < 1e-14 * (1.0 + std::abs(bz))) {
        if (std::abs(z - w) < 1e-14) throw Error(ErrorKind::pole, "phi_kernel on the diagonal: use boundary_param");
        throw Error(ErrorKind::pole, "phi_kernel: B(z) = B(w)");
    }
    return (m.gamma(z) * bw - m.gamma(w) * bz) / den;
}

/// Taylor jet of R = gamma - B gamma'/B' at z; orders 0..2 are valid.
[[nodiscard]] inline Jet boundary_jet(const FrozenBoundaryModel& m, Complex z) {
    const Jet b = m.B.jet(z);
    if (std::abs(b.c[1]) < 1e-14) throw Error(ErrorKind::pole, "boundary_param at a critical point of B");
    const Jet g = m.gamma.jet(z);
    return g - (b * g.derivative()) / b.derivative();
}

[[nodiscard]] inline Complex boundary_param(const FrozenBoundaryModel& m, Complex z) { return boundary_jet(m, z).value(); }
[[nodiscard]] inline Complex boundary_param_deriv(const FrozenBoundaryModel& m, Complex z) {
    return boundary_jet(m, z).deriv(1);
}

struct GValue {
    Complex g, g_z, g_zbar;
};

/// g and its Wirtinger derivatives for |z| < 1.
[[nodiscard]] inline GValue teleomorphic_g_derivs(const FrozenBoundaryModel& m, Complex z) {
    const Jet b = m.B.jet(z);
    const Jet c = m.gamma.jet(z);
    const Complex B = b.c[0], Bp = b.c[1], G = c.c[0], Gp = c.c[1];
    const double q = 1.0 - std::norm(B);
    if (!(q > 0.0)) throw Error(ErrorKind::domain, "teleomorphic_g_derivs needs |B(z)| < 1");
    GValue v;
    v.g = (G - B * std::conj(G)) / q;
    v.g_z = (Gp - Bp * std::conj(G) + v.g * Bp * std::conj(B)) / q;
    v.g_zbar = (-B * std::conj(Gp) + v.g * B * std::conj(Bp)) / q;
    return v;
}

/// g(z) = (gamma - B conj(gamma)) / (1 - |B|^2), extended by g(1/conj z) = g(z)
/// and equal to R on the unit circle.
[[nodiscard]] inline Complex teleomorphic_g(const FrozenBoundaryModel& m, Complex z) {
    const double r = std::abs(z);
    if (std::abs(r - 1.0) < 1e-8) return boundary_param(m, z / r);
    if (r > 1.0) z = reflect(z);
    const Complex B = m.B(z);
    const Complex G = m.gamma(z);
    const double q = 1.0 - std::norm(B);
    if (q <= 0.0) return boundary_param(m, z / std::abs(z));
    return (G - B * std::conj(G)) / q;
}

// ----------------------------------------------------------------------------
// Cusps
// ----------------------------------------------------------------------------

namespace detail {

// A = z R'(z) / sqrt(B(z)) with the root chosen nearest to `branch`.
inline double tangent_sign_function(const FrozenBoundaryModel& m, double t, Complex& branch) {
    const Complex z = std::polar(1.0, t);
    Complex s = std::sqrt(m.B(z));
    if (std::abs(s - branch) > std::abs(s + branch)) s = -s;
    branch = s;
    return (z * boundary_param_deriv(m, z) / s).real();
}

}  // namespace detail

/// Roots of R' on the unit circle: sign changes of A on 4096 samples, refined by
/// bisection to 1e-12 in angle; each root checked to be simple (|R''| > 1e-8).
/// Does not check the count.
[[nodiscard]] inline std::vector<Cusp> scan_cusps(const FrozenBoundaryModel& m, int samples = 4096) {
    const double t0 = 0.123456789 * two_pi / samples;
    std::vector<double> ts(samples + 1), as(samples + 1);
    std::vector<Complex> br(samples + 1);
    Complex branch = std::sqrt(m.B(std::polar(1.0, t0)));
    for (int k = 0; k <= samples; ++k) {
        ts[k] = t0 + two_pi * k / samples;
        as[k] = detail::tangent_sign_function(m, ts[k], branch);
        br[k] = branch;
    }
    std::vector<Cusp> out;
    for (int k = 0; k < samples; ++k) {
        if ((as[k] > 0.0) == (as[k + 1] > 0.0)) continue;
        double lo = ts[k], hi = ts[k + 1];
        const bool lo_pos = as[k] > 0.0;
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            Complex b = br[k];
            const double a = detail::tangent_sign_function(m, mid, b);
            if ((a > 0.0) == lo_pos) lo = mid;
            else hi = mid;
        }
        const double t = wrap_angle(0.5 * (lo + hi));
        const Complex z = std::polar(1.0, t);
        const Jet j = boundary_jet(m, z);
        if (std::abs(j.deriv(2)) <= 1e-8) throw Error(ErrorKind::validation, "find_cusps: non-simple critical point of R");
        out.push_back({t, z, j.value()});
    }
    std::sort(out.begin(), out.end(), [](const Cusp& a, const Cusp& b) { return a.angle < b.angle; });
    return out;
}

/// All cusps; exactly d - 2 are required in the simply connected case.
[[nodiscard]] inline std::vector<Cusp> find_cusps(const FrozenBoundaryModel& m) {
    std::vector<Cusp> c = scan_cusps(m);
    if (static_cast<int>(c.size()) != m.degree() - 2)
        throw Error(ErrorKind::validation, "find_cusps: found " + std::to_string(c.size()) + " cusps, expected " +
                                               std::to_string(m.degree() - 2));
    return c;
}

/// max |B(z) + (i z R'(z) / |R'(z)|)^2| over circle samples away from cusps.
[[nodiscard]] inline double tangent_identity_check(const FrozenBoundaryModel& m, int samples = 2048, double exclude = 1e-3) {
    const std::vector<Cusp> cusps = scan_cusps(m);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = two_pi * k / samples;
        bool near = false;
        for (const auto& c : cusps) {
            const double dt = std::abs(std::remainder(t - c.angle, two_pi));
            if (dt < exclude) near = true;
        }
        if (near) continue;
        const Complex z = std::polar(1.0, t);
        const Complex rp = boundary_param_deriv(m, z);
        const Complex tau = Complex(0.0, 1.0) * z * rp / std::abs(rp);
        worst = std::max(worst, std::abs(m.B(z) + tau * tau));
    }
    return worst;
}

// ----------------------------------------------------------------------------
// Characterization checks
// ----------------------------------------------------------------------------

namespace detail {

inline bool segments_cross(Complex a, Complex b, Complex c, Complex d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

// True if the closed polygon has two crossing non-adjacent edges.
inline bool polygon_self_intersects(const std::vector<Complex>& p) {
    const std::size_t n = p.size();
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& z : p) {
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
    }
    const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
    const double w = (xmax - xmin) / g + 1e-300, h = (ymax - ymin) / g + 1e-300;
    std::unordered_map<long long, std::vector<std::size_t>> cells;
    auto key = [&](int i, int j) { return static_cast<long long>(i) * 1000003LL + j; };
    for (std::size_t e = 0; e < n; ++e) {
        const Complex a = p[e], b = p[(e + 1) % n];
        const int i0 = std::clamp(static_cast<int>((std::min(a.real(), b.real()) - xmin) / w), 0, g - 1);
        const int i1 = std::clamp(static_cast<int>((std::max(a.real(), b.real()) - xmin) / w), 0, g - 1);
        const int j0 = std::clamp(static_cast<int>((std::min(a.imag(), b.imag()) - ymin) / h), 0, g - 1);
        const int j1 = std::clamp(static_cast<int>((std::max(a.imag(), b.imag()) - ymin) / h), 0, g - 1);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) cells[key(i, j)].push_back(e);
    }
    for (const auto& [k, list] : cells)
        for (std::size_t x = 0; x < list.size(); ++x)
            for (std::size_t y = x + 1; y < list.size(); ++y) {
                const std::size_t e = list[x], f = list[y];
                const std::size_t diff = e > f ? e - f : f - e;
                if (diff <= 1 || diff == n - 1) continue;
                if (segments_cross(p[e], p[(e + 1) % n], p[f], p[(f + 1) % n])) return true;
            }
    return false;
}

inline int winding_number(const std::vector<Complex>& p, Complex c) {
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) total += std::arg((p[(k + 1) % p.size()] - c) / (p[k] - c));
    return static_cast<int>(std::lround(total / two_pi));
}

}  // namespace detail

struct CharacterizationReport {
    bool univalent = false;       // condition i
    bool tangential_double_point = false;
    Complex tacnode{0.0, 0.0};
    int winding = 0;
    double reflect_residual = 0.0;  // condition ii
    bool self_reflective = false;
    bool pole_free = false;         // condition iii
    int min_pole_winding = 0;
    double pole_ratio = 0.0;

    [[nodiscard]] bool pass() const noexcept { return univalent && self_reflective && pole_free; }
};

/// Smallest |R(e^{is}) - R(e^{it})| over pairs far apart in angle; refined locally.
/// Returns (distance, s, t).
[[nodiscard]] inline std::array<double, 3> closest_boundary_approach(const FrozenBoundaryModel& m, int samples = 4096) {
    std::vector<Complex> p(samples);
    for (int k = 0; k < samples; ++k) p[k] = boundary_param(m, std::polar(1.0, two_pi * k / samples));
    const int gap = samples / 64;
    double best = 1e300;
    int bi = 0, bj = 0;
    // coarse search on every 4th sample, refined below
    for (int i = 0; i < samples; i += 4)
        for (int j = i + gap; j < samples; j += 4) {
            if (samples - (j - i) < gap) continue;
            const double d = std::norm(p[i] - p[j]);
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    auto dist = [&](double s, double t) { return std::abs(boundary_param(m, std::polar(1.0, s)) - boundary_param(m, std::polar(1.0, t))); };
    double s = two_pi * bi / samples, t = two_pi * bj / samples;
    double step = 8.0 * two_pi / samples;
    double cur = dist(s, t);
    while (step > 1e-14) {
        bool moved = false;
        for (const auto& [ds, dt] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}}) {
            // stay far apart in angle so that cusps are not mistaken for double points
            if (std::abs(std::remainder(s + ds * step - t - dt * step, two_pi)) < 0.5 * two_pi * gap / samples) continue;
            const double v = dist(s + ds * step, t + dt * step);
            if (v < cur) {
                cur = v;
                s += ds * step;
                t += dt * step;
                moved = true;
                break;
            }
        }
        if (!moved) step *= 0.5;
    }
    return {cur, s, t};
}

[[nodiscard]] inline CharacterizationReport check_characterization(const FrozenBoundaryModel& m, int samples = 2048) {
    CharacterizationReport rep;
    const Complex center = teleomorphic_g(m, {0.0, 0.0});

    // (i) univalence on circles close to the unit circle, plus the circle itself
    bool simple = true;
    int wmin = 1, wmax = 1;
    for (double eps : {1e-2, 1e-3, 0.0}) {
        std::vector<Complex> p(static_cast<std::size_t>(samples) * 2);
        for (std::size_t k = 0; k < p.size(); ++k)
            p[k] = boundary_param(m, std::polar(1.0 - eps, two_pi * static_cast<double>(k) / static_cast<double>(p.size())));
        if (detail::polygon_self_intersects(p)) simple = false;
        if (eps > 0.0) {
            const int w = detail::winding_number(p, center);
            wmin = std::min(wmin, w);
            wmax = std::max(wmax, w);
        }
    }
    rep.winding = wmin == wmax ? wmin : 0;
    if (simple && m.degree() >= 3) {
        const auto [d, s, t] = closest_boundary_approach(m);
        if (d < 1e-8 && std::abs(std::remainder(s - t, two_pi)) > 1e-4) {
            rep.tangential_double_point = true;
            rep.tacnode = boundary_param(m, std::polar(1.0, s));
        }
    }
    rep.univalent = simple && rep.winding == 1 && !rep.tangential_double_point;

    // (ii) R'(z) = (B(z)/z^2) conj(R'(1/conj z)) on the circle
    double res = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Complex z = std::polar(1.0, two_pi * (k + 0.5) / samples);
        const Complex rp = boundary_param_deriv(m, z);
        const Complex rq = boundary_param_deriv(m, reflect(z));
        res = std::max(res, std::abs(rp - m.B(z) / (z * z) * std::conj(rq)));
    }
    rep.reflect_residual = res;
    rep.self_reflective = res < 1e-10;

    // (iii) B'(z) conj(R(1/conj z)) has no poles in the disc: argument principle on
    // small circles around every candidate pole
    std::vector<Complex> cand{Complex(0.0, 0.0)};
    for (const auto& a : m.B.zeros()) cand.push_back(a);
    for (const auto& c : m.B.interior_critical_points()) cand.push_back(c);
    auto F = [&](Complex z) { return m.B.deriv(z) * std::conj(boundary_param(m, reflect(z))); };
    int wmin3 = 0;
    double ratio = 0.0;
    bool finite = true;
    for (const auto& c : cand) {
        double prev_max = -1.0;
        for (double rho : {1e-2, 1e-3, 1e-4}) {
            const double r = std::min(rho, 0.5 * (1.0 - std::abs(c)));
            double total = 0.0, fmax = 0.0;
            const int n = 256;
            Complex prev = F(c + r);
            for (int k = 1; k <= n; ++k) {
                const Complex cur = F(c + std::polar(r, two_pi * k / n));
                if (!is_finite(cur) || !is_finite(prev)) finite = false;
                total += std::arg(cur / prev);
                fmax = std::max(fmax, std::abs(cur));
                prev = cur;
            }
            wmin3 = std::min(wmin3, static_cast<int>(std::lround(total / two_pi)));
            if (prev_max > 0.0) ratio = std::max(ratio, fmax / prev_max);
            prev_max = fmax;
        }
    }
    rep.min_pole_winding = wmin3;
    rep.pole_ratio = ratio;
    rep.pole_free = finite && wmin3 >= 0;
    return rep;
}

// ----------------------------------------------------------------------------
// Polynomial models
// ----------------------------------------------------------------------------

struct UnivalentPolynomialModel {
    std::vector<Complex> p;      // a_0 .. a_{d-1}
    std::vector<Complex> gamma;  // coefficients of gamma
    FrozenBoundaryModel model;
};

namespace detail {

inline UnivalentPolynomialModel polynomial_model_from_gamma(int d, const Polynomial& gamma) {
    UnivalentPolynomialModel u;
    u.gamma = gamma.coeffs();
    u.gamma.resize(static_cast<std::size_t>(d), Complex(0.0, 0.0));
    u.p.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) u.p[k] = u.gamma[k] * (1.0 - static_cast<double>(k) / d);
    u.model.B = BlaschkeProduct::power(d);
    u.model.gamma = Rational(Polynomial(u.gamma), Polynomial(std::vector<Complex>{Complex(1.0, 0.0)}));
    return u;
}

}  // namespace detail

/// gamma = (d/(d-1)) (z + z^{d-1}) with B = z^d; the boundary is an epicycloid
/// with d - 2 cusps. For d = 2 the two terms coincide and gamma = 2z is used,
/// whose boundary is the unit circle.
[[nodiscard]] inline UnivalentPolynomialModel canonical_epicycloid(int d) {
    if (d < 2) throw Error(ErrorKind::input, "canonical model needs d >= 2");
    std::vector<Complex> g(static_cast<std::size_t>(d), Complex(0.0, 0.0));
    const double s = static_cast<double>(d) / (d - 1);
    if (d == 2) {
        g[1] = 2.0;
    } else {
        g[1] = s;
        g[static_cast<std::size_t>(d - 1)] = s;
    }
    return detail::polynomial_model_from_gamma(d, Polynomial(g));
}

/// gamma = alpha z prod (z - e^{i theta_k}) over d - 2 unit-circle zeros of
/// gamma, with alpha = (d/(d-1)) e^{i psi} chosen so that conj(a_1) = (d-1) a_{d-1}.
[[nodiscard]] inline UnivalentPolynomialModel make_univalent_polynomial_model(int d, const std::vector<double>& angles,
                                                                              bool verify = true) {
    if (d < 2) throw Error(ErrorKind::input, "polynomial model needs d >= 2");
    if (static_cast<int>(angles.size()) != d - 2)
        throw Error(ErrorKind::input, "polynomial model needs d - 2 angles");
    for (std::size_t i = 0; i < angles.size(); ++i)
        for (std::size_t j = i + 1; j < angles.size(); ++j)
            if (std::abs(std::remainder(angles[i] - angles[j], two_pi)) < 1e-12)
                throw Error(ErrorKind::input, "polynomial model angles must be distinct");
    double s = 0.0;
    for (double t : angles) s += t;
    double psi = std::remainder(0.5 * (pi * (d - 2) - s), pi);  // (-pi/2, pi/2]
    if (psi <= -0.5 * pi) psi += pi;
    Polynomial g(std::vector<Complex>{Complex(0.0, 0.0), std::polar(static_cast<double>(d) / (d - 1), psi)});
    for (double t : angles) g = g * Polynomial(std::vector<Complex>{-std::polar(1.0, t), Complex(1.0, 0.0)});
    UnivalentPolynomialModel u = detail::polynomial_model_from_gamma(d, g);
    if (verify) {
        const CharacterizationReport rep = check_characterization(u.model);
        if (!rep.univalent)
            throw Error(ErrorKind::validation, rep.tangential_double_point
                                                   ? "non-univalent configuration: tangential double point"
                                                   : "non-univalent configuration: self-intersecting boundary");
    }
    return u;
}

}  // namespace dimer
