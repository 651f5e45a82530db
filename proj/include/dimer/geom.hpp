#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core.hpp"

namespace dimer {

// ----------------------------------------------------------------------------
// GradientPolygon: the convex constraint set N for height gradients
// ----------------------------------------------------------------------------

class GradientPolygon {
public:
    GradientPolygon() = default;

    /// Corners in counterclockwise order; throws on a non strictly convex input.
    explicit GradientPolygon(std::vector<Complex> corners) : corners_(std::move(corners)) {
        const std::size_t k = corners_.size();
        if (k < 3) throw Error(ErrorKind::input, "gradient polygon needs at least 3 corners");
        for (const auto& c : corners_)
            if (!is_finite(c)) throw Error(ErrorKind::input, "gradient polygon corner is not finite");
        for (std::size_t j = 0; j < k; ++j) {
            const Complex e0 = corner(j + 1) - corner(j);
            const Complex e1 = corner(j + 2) - corner(j + 1);
            if (std::abs(e0) < 1e-14) throw Error(ErrorKind::input, "gradient polygon has repeated corners");
            if (cross(e0, e1) <= 0.0)
                throw Error(ErrorKind::input, "gradient polygon corners are not strictly convex and counterclockwise");
        }
        double a = 0.0;
        Complex c{0.0, 0.0};
        for (std::size_t j = 0; j < k; ++j) {
            const double w = cross(corner(j), corner(j + 1));
            a += w;
            c += w * (corner(j) + corner(j + 1));
        }
        area_ = 0.5 * a;
        centroid_ = c / (3.0 * a);
    }

    [[nodiscard]] std::size_t size() const noexcept { return corners_.size(); }
    [[nodiscard]] const std::vector<Complex>& corners() const noexcept { return corners_; }
    /// Cyclic corner access.
    [[nodiscard]] Complex corner(std::ptrdiff_t j) const noexcept {
        const auto k = static_cast<std::ptrdiff_t>(corners_.size());
        return corners_[static_cast<std::size_t>(((j % k) + k) % k)];
    }
    [[nodiscard]] Complex centroid() const noexcept { return centroid_; }
    [[nodiscard]] double area() const noexcept { return area_; }

    /// Unit outward normal of the edge from corner j to corner j+1.
    [[nodiscard]] Complex edge_normal(std::ptrdiff_t j) const noexcept {
        const Complex e = corner(j + 1) - corner(j);
        return Complex(e.imag(), -e.real()) / std::abs(e);
    }

    [[nodiscard]] bool contains_origin_interior() const noexcept { return signed_distance({0.0, 0.0}) < 0.0; }

    /// h_N(z) = max_j <p_j, z>.
    [[nodiscard]] double support(Complex z) const noexcept {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : corners_) best = std::max(best, dot(p, z));
        return best;
    }

    /// Negative inside (minus the distance to the boundary), positive outside
    /// (the Euclidean distance to N).
    [[nodiscard]] double signed_distance(Complex p) const noexcept {
        double s = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < size(); ++j) s = std::max(s, dot(p - corner(j), edge_normal(j)));
        if (s <= 0.0) return s;
        return std::abs(p - project(p, 0.0));
    }

    [[nodiscard]] bool contains(Complex p, double tol = 0.0) const noexcept { return signed_distance(p) <= tol; }

    /// Euclidean projection onto (1 - shrink) N, scaled about the centroid.
    [[nodiscard]] Complex project(Complex p, double shrink) const noexcept {
        const double s = 1.0 - shrink;
        const std::size_t k = size();
        bool inside = true;
        for (std::size_t j = 0; j < k; ++j) {
            const Complex a = centroid_ + s * (corner(j) - centroid_);
            if (dot(p - a, edge_normal(j)) > 0.0) {
                inside = false;
                break;
            }
        }
        if (inside) return p;
        Complex best = p;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            const Complex a = centroid_ + s * (corner(j) - centroid_);
            const Complex b = centroid_ + s * (corner(j + 1) - centroid_);
            const Complex e = b - a;
            const double t = std::clamp(dot(p - a, e) / std::norm(e), 0.0, 1.0);
            const Complex q = a + t * e;
            const double d = std::norm(p - q);
            if (d < best_d) {
                best_d = d;
                best = q;
            }
        }
        return best;
    }

private:
    std::vector<Complex> corners_;
    Complex centroid_{0.0, 0.0};
    double area_ = 0.0;
};

[[nodiscard]] inline GradientPolygon lozenge_polygon() { return GradientPolygon({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}); }
[[nodiscard]] inline GradientPolygon domino_polygon() {
    return GradientPolygon({{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}});
}

// ----------------------------------------------------------------------------
// Harmonic measure of a circular arc in the unit disc
// ----------------------------------------------------------------------------

/// omega(zeta; arc from angle a counterclockwise to angle b), 0 < b - a <= 2pi.
/// Closed form: (angle subtended at zeta) / pi - (b - a) / (2 pi).
[[nodiscard]] inline double harmonic_measure(Complex zeta, double a, double b) {
    if (std::abs(zeta) >= 1.0 - 1e-14) throw Error(ErrorKind::domain, "harmonic measure needs |zeta| < 1");
    const double len = b - a;
    if (len >= two_pi) return 1.0;
    const Complex e1 = std::polar(1.0, a);
    const Complex e2 = std::polar(1.0, b);
    double theta = std::arg((e2 - zeta) / (e1 - zeta));
    if (theta < 0.0) theta += two_pi;
    return theta / pi - len / two_pi;
}

/// Same, with the arc given by its unit-modulus endpoints (counterclockwise eta1 -> eta2).
[[nodiscard]] inline double harmonic_measure(Complex zeta, Complex eta1, Complex eta2) {
    const double a = std::arg(eta1);
    double len = wrap_angle(std::arg(eta2) - a);
    if (len == 0.0) len = two_pi;
    return harmonic_measure(zeta, a, a + len);
}

// ----------------------------------------------------------------------------
// ArcPartition: arcs of the unit circle carrying corner labels
// ----------------------------------------------------------------------------

/// Arc k runs counterclockwise from angles[k] to angles[k+1] (the last one
/// wraps to angles[0] + 2pi) and carries the corner index labels[k].
class ArcPartition {
public:
    ArcPartition() = default;
    ArcPartition(std::vector<double> angles, std::vector<int> labels)
        : angles_(std::move(angles)), labels_(std::move(labels)) {
        if (angles_.size() < 2) throw Error(ErrorKind::input, "arc partition needs at least 2 arcs");
        if (labels_.size() != angles_.size()) throw Error(ErrorKind::input, "arc partition: one label per arc required");
        for (double a : angles_)
            if (!std::isfinite(a)) throw Error(ErrorKind::input, "arc partition: non-finite angle");
        for (std::size_t k = 0; k + 1 < angles_.size(); ++k)
            if (!(angles_[k + 1] > angles_[k])) throw Error(ErrorKind::input, "arc partition: angles must increase");
        if (!(angles_.back() < angles_.front() + two_pi))
            throw Error(ErrorKind::input, "arc partition: angles must span less than a full turn");
    }

    /// m equal arcs starting at `start`, labelled 0..m-1.
    [[nodiscard]] static ArcPartition equal(std::size_t m, double start = 0.0) {
        std::vector<double> a(m);
        std::vector<int> l(m);
        for (std::size_t k = 0; k < m; ++k) {
            a[k] = start + two_pi * static_cast<double>(k) / static_cast<double>(m);
            l[k] = static_cast<int>(k);
        }
        return ArcPartition(std::move(a), std::move(l));
    }

    [[nodiscard]] std::size_t size() const noexcept { return angles_.size(); }
    [[nodiscard]] const std::vector<double>& angles() const noexcept { return angles_; }
    [[nodiscard]] const std::vector<int>& labels() const noexcept { return labels_; }
    [[nodiscard]] double start(std::size_t k) const noexcept { return angles_[k]; }
    [[nodiscard]] double end(std::size_t k) const noexcept {
        return k + 1 < angles_.size() ? angles_[k + 1] : angles_[0] + two_pi;
    }
    [[nodiscard]] double length(std::size_t k) const noexcept { return end(k) - start(k); }
    [[nodiscard]] Complex endpoint(std::size_t k) const noexcept { return std::polar(1.0, angles_[k]); }

    [[nodiscard]] double measure(std::size_t k, Complex zeta) const { return harmonic_measure(zeta, start(k), end(k)); }

    /// Index of the arc containing angle t.
    [[nodiscard]] std::size_t arc_of(double t) const noexcept {
        const double u = angles_[0] + wrap_angle(t - angles_[0]);
        for (std::size_t k = 0; k + 1 < size(); ++k)
            if (u < angles_[k + 1]) return k;
        return size() - 1;
    }

    /// Sum_k p_{label k} omega(zeta; I_k).
    [[nodiscard]] Complex weighted_sum(const GradientPolygon& n, Complex zeta) const {
        Complex s{0.0, 0.0};
        for (std::size_t k = 0; k < size(); ++k) s += n.corner(labels_[k]) * measure(k, zeta);
        return s;
    }

    void validate_against(const GradientPolygon& n) const {
        std::vector<bool> seen(n.size(), false);
        for (int l : labels_) {
            if (l < 0 || static_cast<std::size_t>(l) >= n.size())
                throw Error(ErrorKind::input, "arc label is not a corner index");
            seen[static_cast<std::size_t>(l)] = true;
        }
        for (bool s : seen)
            if (!s) throw Error(ErrorKind::input, "arc labels must cover every corner");
    }

private:
    std::vector<double> angles_;
    std::vector<int> labels_;
};

// ----------------------------------------------------------------------------
// Polynomials and rational functions with truncated Taylor expansions
// ----------------------------------------------------------------------------

/// Truncated power series c0 + c1 h + ... + c3 h^3 about a point.
struct Jet {
    static constexpr int order = 4;
    Complex c[order] = {};

    [[nodiscard]] Complex value() const noexcept { return c[0]; }
    /// k-th derivative at the expansion point.
    [[nodiscard]] Complex deriv(int k) const noexcept {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }
    [[nodiscard]] static Jet constant(Complex v) noexcept {
        Jet j;
        j.c[0] = v;
        return j;
    }
    /// Derivative series (the top coefficient becomes unknown and is set to 0).
    [[nodiscard]] Jet derivative() const noexcept {
        Jet j;
        for (int k = 0; k + 1 < order; ++k) j.c[k] = c[k + 1] * static_cast<double>(k + 1);
        return j;
    }
};

[[nodiscard]] inline Jet operator+(const Jet& a, const Jet& b) noexcept {
    Jet r;
    for (int k = 0; k < Jet::order; ++k) r.c[k] = a.c[k] + b.c[k];
    return r;
}
[[nodiscard]] inline Jet operator-(const Jet& a, const Jet& b) noexcept {
    Jet r;
    for (int k = 0; k < Jet::order; ++k) r.c[k] = a.c[k] - b.c[k];
    return r;
}
[[nodiscard]] inline Jet operator*(const Jet& a, const Jet& b) noexcept {
    Jet r;
    for (int i = 0; i < Jet::order; ++i)
        for (int j = 0; i + j < Jet::order; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}
[[nodiscard]] inline Jet operator*(Complex s, const Jet& a) noexcept {
    Jet r;
    for (int k = 0; k < Jet::order; ++k) r.c[k] = s * a.c[k];
    return r;
}
[[nodiscard]] inline Jet operator/(const Jet& a, const Jet& b) {
    if (b.c[0] == Complex(0.0, 0.0)) throw Error(ErrorKind::pole, "division by a vanishing series");
    Jet r;
    for (int k = 0; k < Jet::order; ++k) {
        Complex s = a.c[k];
        for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
        r.c[k] = s / b.c[0];
    }
    return r;
}

class Polynomial {
public:
    Polynomial() = default;
    /// Coefficients in ascending order.
    explicit Polynomial(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.push_back({0.0, 0.0});
    }

    [[nodiscard]] const std::vector<Complex>& coeffs() const noexcept { return c_; }
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }

    [[nodiscard]] Complex operator()(Complex z) const noexcept {
        Complex s{0.0, 0.0};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * z + *it;
        return s;
    }

    /// Taylor coefficients about z (Horner shifts).
    [[nodiscard]] Jet jet(Complex z) const noexcept {
        Jet j;
        std::vector<Complex> b(c_);
        const int n = static_cast<int>(b.size());
        for (int k = 0; k < Jet::order && k < n; ++k) {
            for (int i = n - 2; i >= k; --i) b[i] += z * b[i + 1];
            j.c[k] = b[k];
        }
        return j;
    }

    [[nodiscard]] Polynomial operator*(const Polynomial& o) const {
        std::vector<Complex> r(c_.size() + o.c_.size() - 1, {0.0, 0.0});
        for (std::size_t i = 0; i < c_.size(); ++i)
            for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
        return Polynomial(std::move(r));
    }
    [[nodiscard]] Polynomial operator*(Complex s) const {
        std::vector<Complex> r(c_);
        for (auto& v : r) v *= s;
        return Polynomial(std::move(r));
    }
    [[nodiscard]] Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial(std::vector<Complex>{Complex(0.0, 0.0)});
        std::vector<Complex> r(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) r[k - 1] = c_[k] * static_cast<double>(k);
        return Polynomial(std::move(r));
    }

private:
    std::vector<Complex> c_{{0.0, 0.0}};
};

class Rational {
public:
    Rational() = default;
    Rational(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {}

    [[nodiscard]] const Polynomial& numerator() const noexcept { return num_; }
    [[nodiscard]] const Polynomial& denominator() const noexcept { return den_; }

    [[nodiscard]] Complex operator()(Complex z) const {
        const Complex d = den_(z);
        if (std::abs(d) < 1e-300) throw Error(ErrorKind::pole, "rational function evaluated at a pole");
        return num_(z) / d;
    }
    [[nodiscard]] Jet jet(Complex z) const { return num_.jet(z) / den_.jet(z); }

private:
    Polynomial num_{std::vector<Complex>{{0.0, 0.0}}};
    Polynomial den_{std::vector<Complex>{{1.0, 0.0}}};
};

// ----------------------------------------------------------------------------
// Finite Blaschke products
// ----------------------------------------------------------------------------

class BlaschkeProduct {
public:
    BlaschkeProduct() = default;
    BlaschkeProduct(std::vector<Complex> zeros, Complex unimodular = {1.0, 0.0})
        : zeros_(std::move(zeros)), eta_(unimodular) {
        if (zeros_.empty()) throw Error(ErrorKind::input, "Blaschke product needs at least one zero");
        for (const auto& a : zeros_)
            if (!is_finite(a) || std::abs(a) >= 1.0)
                throw Error(ErrorKind::input, "Blaschke zeros must lie in the open unit disc");
        if (!is_finite(eta_) || std::abs(std::abs(eta_) - 1.0) > 1e-12)
            throw Error(ErrorKind::input, "Blaschke unimodular factor must have modulus 1");
    }

    /// z^d.
    [[nodiscard]] static BlaschkeProduct power(int d) {
        return BlaschkeProduct(std::vector<Complex>(static_cast<std::size_t>(d), Complex(0.0, 0.0)));
    }

    [[nodiscard]] const std::vector<Complex>& zeros() const noexcept { return zeros_; }
    [[nodiscard]] Complex unimodular() const noexcept { return eta_; }
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(zeros_.size()); }

    [[nodiscard]] Complex operator()(Complex z) const {
        Complex p = eta_;
        for (const auto& a : zeros_) {
            const Complex d = 1.0 - std::conj(a) * z;
            if (std::abs(d) < 1e-300) throw Error(ErrorKind::pole, "Blaschke product evaluated at a pole");
            p *= (z - a) / d;
        }
        return p;
    }

    /// Value and first three derivatives through the product rule on factor jets.
    [[nodiscard]] Jet jet(Complex z) const {
        Jet p = Jet::constant(eta_);
        for (const auto& a : zeros_) {
            const Complex ab = std::conj(a);
            const Complex d = 1.0 - ab * z;
            if (std::abs(d) < 1e-300) throw Error(ErrorKind::pole, "Blaschke product evaluated at a pole");
            // (z - a)/(1 - conj(a) z) expanded about z in powers of h
            Jet f;
            const Complex q = ab / d;
            const Complex base = (z - a) / d;
            const Complex slope = (1.0 - std::norm(a)) / d;
            f.c[0] = base;
            Complex qk = 1.0;
            for (int k = 1; k < Jet::order; ++k) {
                f.c[k] = slope * qk / d;
                qk *= q;
            }
            p = p * f;
        }
        return p;
    }

    [[nodiscard]] Complex deriv(Complex z) const { return jet(z).deriv(1); }

    /// Numerator eta * prod (z - a) and denominator prod (1 - conj(a) z).
    [[nodiscard]] Rational as_rational() const {
        Polynomial n(std::vector<Complex>{eta_});
        Polynomial d(std::vector<Complex>{Complex(1.0, 0.0)});
        for (const auto& a : zeros_) {
            n = n * Polynomial({-a, {1.0, 0.0}});
            d = d * Polynomial({{1.0, 0.0}, -std::conj(a)});
        }
        return {n, d};
    }

    /// Critical points of B inside the disc: roots of the numerator of B'
    /// that lie in |z| < 1, found by Durand-Kerner on the polynomial N'D - ND'.
    [[nodiscard]] std::vector<Complex> interior_critical_points() const;

private:
    std::vector<Complex> zeros_{{0.0, 0.0}};
    Complex eta_{1.0, 0.0};
};

/// All roots of a polynomial by the Durand-Kerner (Weierstrass) iteration.
[[nodiscard]] inline std::vector<Complex> polynomial_roots(const Polynomial& p) {
    std::vector<Complex> c = p.coeffs();
    while (c.size() > 1 && std::abs(c.back()) < 1e-300) c.pop_back();
    const int n = static_cast<int>(c.size()) - 1;
    if (n <= 0) return {};
    const Complex lead = c.back();
    for (auto& v : c) v /= lead;
    double radius = 0.0;
    for (int k = 0; k < n; ++k) radius = std::max(radius, std::abs(c[k]));
    radius = 1.0 + radius;
    std::vector<Complex> r(n);
    for (int k = 0; k < n; ++k) r[k] = std::polar(0.5 * radius, 0.4 + two_pi * k / n);
    const Polynomial monic(c);
    for (int it = 0; it < 2000; ++it) {
        double change = 0.0;
        for (int k = 0; k < n; ++k) {
            Complex den{1.0, 0.0};
            for (int j = 0; j < n; ++j)
                if (j != k) den *= (r[k] - r[j]);
            if (std::abs(den) < 1e-300) den = {1e-300, 0.0};
            const Complex step = monic(r[k]) / den;
            r[k] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-15) break;
    }
    // polish with Newton on the original polynomial
    const Polynomial dp = monic.derivative();
    for (auto& z : r)
        for (int it = 0; it < 3; ++it) {
            const Complex d = dp(z);
            if (std::abs(d) < 1e-300) break;
            z -= monic(z) / d;
        }
    return r;
}

inline std::vector<Complex> BlaschkeProduct::interior_critical_points() const {
    const Rational b = as_rational();
    const Polynomial& n = b.numerator();
    const Polynomial& d = b.denominator();
    const Polynomial nd = n.derivative() * d;
    const Polynomial dn = n * d.derivative();
    std::vector<Complex> w(std::max(nd.coeffs().size(), dn.coeffs().size()), {0.0, 0.0});
    for (std::size_t k = 0; k < nd.coeffs().size(); ++k) w[k] += nd.coeffs()[k];
    for (std::size_t k = 0; k < dn.coeffs().size(); ++k) w[k] -= dn.coeffs()[k];
    // multiple roots come back as small clusters; their mean is accurate
    std::vector<Complex> roots = polynomial_roots(Polynomial(w));
    std::vector<Complex> out;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        Complex s = roots[i];
        int cnt = 1;
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (!used[j] && std::abs(roots[j] - roots[i]) < 0.02) {
                used[j] = true;
                s += roots[j];
                ++cnt;
            }
        const Complex z = s / static_cast<double>(cnt);
        if (std::abs(z) < 1.0 - 1e-12) out.push_back(z);
    }
    return out;
}

}  // namespace dimer
