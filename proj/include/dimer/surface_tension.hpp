#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "geom.hpp"
#include "quadrature.hpp"

namespace dimer {

// ----------------------------------------------------------------------------
// Lobachevsky function L(theta) = -int_0^theta log|2 sin x| dx
// ----------------------------------------------------------------------------

namespace detail {

// L on [0, pi/2]; the log singularity at 0 is integrated in closed form.
inline double lobachevsky_half(double r) {
    if (r <= 0.0) return 0.0;
    const double singular = r * std::log(2.0 * r) - r;  // int_0^r log(2x) dx
    auto smooth = [](double x) { return x < 1e-8 ? -x * x / 6.0 : std::log(std::sin(x) / x); };
    return -(singular + integrate(smooth, 0.0, r, 1e-15));
}

}  // namespace detail

/// Adaptive-quadrature evaluation; odd and pi-periodic.
[[nodiscard]] inline double lobachevsky(double theta) {
    if (!std::isfinite(theta)) throw Error(ErrorKind::domain, "lobachevsky: non-finite argument");
    double r = theta - pi * std::floor(theta / pi);  // [0, pi)
    if (r <= 0.5 * pi) return detail::lobachevsky_half(r);
    return -detail::lobachevsky_half(pi - r);
}

namespace detail {

// Coefficients |B_2k| / (2k (2k+1)!) = 2 zeta(2k) / ((2 pi)^2k 2k (2k+1)).
inline const std::array<double, 40>& clausen_coeffs() {
    static const std::array<double, 40> c = [] {
        std::array<double, 40> out{};
        for (int k = 1; k <= 40; ++k) {
            const int s = 2 * k;
            double zeta = 0.0;
            if (k == 1) {
                zeta = pi * pi / 6.0;
            } else {
                const int n_terms = 200;
                for (int n = n_terms; n >= 1; --n) zeta += std::pow(static_cast<double>(n), -s);
                zeta += std::pow(static_cast<double>(n_terms), 1 - s) / (s - 1) - 0.5 * std::pow(n_terms, -s);
            }
            out[k - 1] = 2.0 * zeta / (std::pow(two_pi, s) * s * (s + 1));
        }
        return out;
    }();
    return c;
}

}  // namespace detail

/// Clausen function Cl2(t) = -int_0^t log|2 sin(x/2)| dx by its power series.
[[nodiscard]] inline double clausen2(double t) {
    double r = t - two_pi * std::floor(t / two_pi);  // [0, 2pi)
    double sign = 1.0;
    if (r > pi) {
        r = two_pi - r;
        sign = -1.0;
    }
    if (r == 0.0) return 0.0;
    const auto& c = detail::clausen_coeffs();
    const double r2 = r * r;
    double term = r * r2;
    double sum = r - r * std::log(r);
    for (double ck : c) {
        const double add = ck * term;
        sum += add;
        if (std::abs(add) < 1e-18) break;
        term *= r2;
    }
    return sign * sum;
}

/// Series route: L(theta) = Cl2(2 theta) / 2. Used on hot paths.
[[nodiscard]] inline double lobachevsky_series(double theta) { return 0.5 * clausen2(2.0 * theta); }

// ----------------------------------------------------------------------------
// Surface tension interface used by the optimizer
// ----------------------------------------------------------------------------

/// Evaluator of sigma and grad sigma on the interior of N. The optional hint
/// carries model-specific warm-start data between nearby evaluations.
class SurfaceTension {
public:
    virtual ~SurfaceTension() = default;
    [[nodiscard]] virtual const GradientPolygon& polygon() const = 0;
    [[nodiscard]] virtual double sigma(Complex p, Complex* hint = nullptr) const = 0;
    [[nodiscard]] virtual Complex grad(Complex p, Complex* hint = nullptr) const = 0;
    /// Hessian [[a, b], [b, c]] at p.
    [[nodiscard]] virtual std::array<double, 3> hessian(Complex p, Complex* hint = nullptr) const = 0;
    /// Gradient and Hessian together (one preimage solve for harmonic models).
    virtual void grad_hessian(Complex p, Complex* hint, Complex& g, std::array<double, 3>& h) const {
        g = grad(p, hint);
        h = hessian(p, hint);
    }
};

// ----------------------------------------------------------------------------
// Lozenge surface tension on N = hull{0, 1, i}
// ----------------------------------------------------------------------------

[[nodiscard]] inline double lozenge_sigma(double s, double t) {
    const double tol = 1e-14;
    if (!(s >= -tol && t >= -tol && s + t <= 1.0 + tol))
        throw Error(ErrorKind::domain, "lozenge sigma: point outside the triangle");
    s = std::max(s, 0.0);
    t = std::max(t, 0.0);
    const double u = std::max(1.0 - s - t, 0.0);
    return -(lobachevsky_series(pi * s) + lobachevsky_series(pi * t) + lobachevsky_series(pi * u)) / (pi * pi);
}

[[nodiscard]] inline Complex lozenge_grad_sigma(double s, double t) {
    if (!(s > 0.0 && t > 0.0 && s + t < 1.0)) throw Error(ErrorKind::singularity, "boundary singularity");
    const double su = std::sin(pi * (s + t));
    return Complex(std::log(std::sin(pi * s) / su), std::log(std::sin(pi * t) / su)) / pi;
}

/// Analytic Hessian [[a, b], [b, c]].
[[nodiscard]] inline std::array<double, 3> lozenge_hessian(double s, double t) {
    if (!(s > 0.0 && t > 0.0 && s + t < 1.0)) throw Error(ErrorKind::singularity, "boundary singularity");
    auto cot = [](double x) { return std::cos(x) / std::sin(x); };
    const double cu = cot(pi * (s + t));
    return {cot(pi * s) - cu, -cu, cot(pi * t) - cu};
}

class LozengeSurfaceTension final : public SurfaceTension {
public:
    LozengeSurfaceTension() : n_(lozenge_polygon()) {}
    [[nodiscard]] const GradientPolygon& polygon() const override { return n_; }
    [[nodiscard]] double sigma(Complex p, Complex* = nullptr) const override { return lozenge_sigma(p.real(), p.imag()); }
    [[nodiscard]] Complex grad(Complex p, Complex* = nullptr) const override {
        return lozenge_grad_sigma(p.real(), p.imag());
    }
    [[nodiscard]] std::array<double, 3> hessian(Complex p, Complex* = nullptr) const override {
        return lozenge_hessian(p.real(), p.imag());
    }

private:
    GradientPolygon n_;
};

// ----------------------------------------------------------------------------
// Structure coefficient mu_sigma
// ----------------------------------------------------------------------------

enum class ModelTag { lozenge, domino, custom };

struct StructureCoefficient {
    ModelTag tag = ModelTag::lozenge;
    std::function<Complex(Complex)> mu = [](Complex z) { return z; };
    int gas_points = 0;  // degree bookkeeping only

    [[nodiscard]] static StructureCoefficient lozenge() { return {ModelTag::lozenge, [](Complex z) { return z; }, 0}; }
    [[nodiscard]] static StructureCoefficient domino() {
        return {ModelTag::domino, [](Complex z) { return z * z; }, 0};
    }
};

// ----------------------------------------------------------------------------
// Harmonic-coordinate surface tension
// ----------------------------------------------------------------------------

/// sigma represented through the harmonic homeomorphism
///   U(zeta) = sum_k p_{label k} omega(zeta; I_k)
/// and the log-sum
///   grad sigma(U(zeta)) = (1/pi) sum_k i (p_before - p_after) log(1/|zeta - eta_k|) + c0,
/// where p_before / p_after label the arcs ending / starting at eta_k.
class HarmonicSurfaceTension final : public SurfaceTension {
public:
    HarmonicSurfaceTension() = default;

    /// `corner_values` are the boundary values sigma(p_j) used to fix the additive
    /// constant (zero if empty).
    HarmonicSurfaceTension(GradientPolygon n, ArcPartition arcs, Complex c0, std::vector<double> corner_values = {})
        : n_(std::move(n)), arcs_(std::move(arcs)), c0_(c0) {
        arcs_.validate_against(n_);
        const std::size_t m = arcs_.size();
        for (std::size_t k = 0; k < m; ++k) {
            const int before = arcs_.labels()[(k + m - 1) % m];
            const int after = arcs_.labels()[k];
            if (before == after) throw Error(ErrorKind::input, "adjacent arcs must carry different corners");
            eta_.push_back(arcs_.endpoint(k));
            arc_corner_.push_back(n_.corner(arcs_.labels()[k]));
            u_shift_ += arc_corner_.back() * ((arcs_.end(k) - arcs_.start(k)) / two_pi);
            jump_.push_back(Complex(0.0, 1.0) * (n_.corner(before) - n_.corner(after)) / pi);
        }
        if (!corner_values.empty() && corner_values.size() != n_.size())
            throw Error(ErrorKind::input, "one boundary value per corner required");
        corner_values_ = corner_values.empty() ? std::vector<double>(n_.size(), 0.0) : std::move(corner_values);
        anchor_point_ = U(Complex(0.0, 0.0));
        anchor_value_ = compute_anchor();
    }

    /// Rebuild with an explicitly given anchor (deserialization).
    HarmonicSurfaceTension(GradientPolygon n, ArcPartition arcs, Complex c0, Complex anchor_point, double anchor_value)
        : HarmonicSurfaceTension(std::move(n), std::move(arcs), c0) {
        if (std::abs(anchor_point - anchor_point_) > 1e-9)
            throw Error(ErrorKind::input, "sigma anchor must sit at the image of the disc centre");
        anchor_value_ = anchor_value;
    }

    [[nodiscard]] const GradientPolygon& polygon() const override { return n_; }
    [[nodiscard]] const ArcPartition& arcs() const noexcept { return arcs_; }
    [[nodiscard]] Complex c0() const noexcept { return c0_; }
    [[nodiscard]] Complex anchor_point() const noexcept { return anchor_point_; }
    [[nodiscard]] double anchor_value() const noexcept { return anchor_value_; }
    [[nodiscard]] const std::vector<double>& corner_values() const noexcept { return corner_values_; }

    [[nodiscard]] Complex U(Complex zeta) const {
        if (std::abs(zeta) >= 1.0) throw Error(ErrorKind::domain, "harmonic U needs |zeta| < 1");
        // angle subtended by arc k is the increment of arg(eta - zeta) between its endpoints
        const std::size_t m = eta_.size();
        Complex s = -u_shift_;
        const double first = std::atan2(eta_[0].imag() - zeta.imag(), eta_[0].real() - zeta.real());
        double prev = first;
        for (std::size_t k = 0; k < m; ++k) {
            const double next = k + 1 < m ? std::atan2(eta_[k + 1].imag() - zeta.imag(), eta_[k + 1].real() - zeta.real()) : first;
            double theta = next - prev;
            if (theta < 0.0) theta += two_pi;
            s += arc_corner_[k] * (theta / pi);
            prev = next;
        }
        return s;
    }

    /// grad sigma at the point U(zeta).
    [[nodiscard]] Complex grad_at_zeta(Complex zeta) const {
        if (std::abs(zeta) >= 1.0) throw Error(ErrorKind::domain, "harmonic gradient needs |zeta| < 1");
        Complex v = c0_;
        for (std::size_t k = 0; k < eta_.size(); ++k) {
            const double d = std::abs(zeta - eta_[k]);
            if (d == 0.0) throw Error(ErrorKind::singularity, "boundary singularity");
            v -= jump_[k] * std::log(d);
        }
        return v;
    }

    /// Derivative of U in direction v (a real-linear map).
    [[nodiscard]] Complex dU(Complex zeta, Complex v) const {
        Complex ua, ub;
        jacobian(zeta, ua, ub);
        return ua * v.real() + ub * v.imag();
    }

    /// Both columns of DU at zeta.
    void jacobian(Complex zeta, Complex& ua, Complex& ub) const {
        const std::size_t m = eta_.size();
        ua = ub = Complex(0.0, 0.0);
        const Complex w0 = reciprocal(zeta - eta_[0]);
        Complex w1 = w0;
        for (std::size_t k = 0; k < m; ++k) {
            const Complex w2 = k + 1 < m ? reciprocal(zeta - eta_[k + 1]) : w0;
            const Complex h = w2 - w1;
            ua += arc_corner_[k] * (h.imag() / pi);
            ub += arc_corner_[k] * (h.real() / pi);
            w1 = w2;
        }
    }

    /// Preimage zeta with U(zeta) = q: damped Newton from `seed`, falling back
    /// to continuation along the segment from U(0) to q.
    [[nodiscard]] Complex inverse(Complex q, Complex seed = {0.0, 0.0}) const {
        if (!(n_.signed_distance(q) < 0.0)) throw Error(ErrorKind::singularity, "boundary singularity");
        Complex z = std::abs(seed) < 1.0 ? seed : Complex(0.0, 0.0);
        if (newton_inverse(q, z, 200)) return z;
        z = Complex(0.0, 0.0);
        double s = 0.0, ds = 0.25;
        while (s < 1.0) {
            const double st = std::min(1.0, s + ds);
            Complex zt = z;
            if (newton_inverse(anchor_point_ + st * (q - anchor_point_), zt, 30)) {
                s = st;
                z = zt;
                ds *= 2.0;
            } else {
                ds *= 0.5;
                if (ds < 1e-14) break;
            }
        }
        if (s >= 1.0) return z;
        throw Error(ErrorKind::convergence, "harmonic inverse did not converge");
    }

    /// sigma(U(zeta)) by integrating <grad sigma, dU> along the ray from 0.
    [[nodiscard]] double sigma_at_zeta(Complex zeta) const {
        if (std::abs(zeta) >= 1.0) throw Error(ErrorKind::domain, "harmonic sigma needs |zeta| < 1");
        if (zeta == Complex(0.0, 0.0)) return anchor_value_;
        auto f = [&](double t) { return dot(grad_at_zeta(t * zeta), dU(t * zeta, zeta)); };
        return anchor_value_ + integrate(f, 0.0, 1.0, 1e-14);
    }

    [[nodiscard]] double sigma(Complex p, Complex* hint = nullptr) const override {
        const Complex z = inverse(p, hint ? *hint : Complex(0.0, 0.0));
        if (hint) *hint = z;
        return sigma_at_zeta(z);
    }
    [[nodiscard]] Complex grad(Complex p, Complex* hint = nullptr) const override {
        const Complex z = inverse(p, hint ? *hint : Complex(0.0, 0.0));
        if (hint) *hint = z;
        return grad_at_zeta(z);
    }

    [[nodiscard]] std::array<double, 3> hessian(Complex p, Complex* hint = nullptr) const override {
        const Complex z = inverse(p, hint ? *hint : Complex(0.0, 0.0));
        if (hint) *hint = z;
        return hessian_at_zeta(z);
    }

    void grad_hessian(Complex p, Complex* hint, Complex& g, std::array<double, 3>& h) const override {
        const Complex z = inverse(p, hint ? *hint : Complex(0.0, 0.0));
        if (hint) *hint = z;
        g = grad_at_zeta(z);
        h = hessian_at_zeta(z);
    }

    /// D^2 sigma at U(zeta) = DV (DU)^{-1}, symmetrized.
    [[nodiscard]] std::array<double, 3> hessian_at_zeta(Complex zeta) const {
        Complex ua, ub;
        jacobian(zeta, ua, ub);
        Complex va{0.0, 0.0}, vb{0.0, 0.0};
        for (std::size_t k = 0; k < eta_.size(); ++k) {
            const Complex w = reciprocal(zeta - eta_[k]);
            va -= jump_[k] * w.real();
            vb -= jump_[k] * (Complex(0.0, 1.0) * w).real();
        }
        // H * [ua ub] = [va vb]
        const double det = ua.real() * ub.imag() - ub.real() * ua.imag();
        if (det == 0.0 || !std::isfinite(det)) throw Error(ErrorKind::singularity, "boundary singularity");
        const double i00 = ub.imag() / det, i01 = -ub.real() / det, i10 = -ua.imag() / det, i11 = ua.real() / det;
        const double h00 = va.real() * i00 + vb.real() * i10, h01 = va.real() * i01 + vb.real() * i11;
        const double h10 = va.imag() * i00 + vb.imag() * i10, h11 = va.imag() * i01 + vb.imag() * i11;
        return {h00, 0.5 * (h01 + h10), h11};
    }

    /// Gradient in the tangential limit at the arc endpoint eta_k (the singular
    /// term is orthogonal to the adjacent side of N and is dropped).
    [[nodiscard]] Complex endpoint_gradient(std::size_t k) const {
        Complex v = c0_;
        for (std::size_t j = 0; j < eta_.size(); ++j)
            if (j != k) v -= jump_[j] * std::log(std::abs(eta_[k] - eta_[j]));
        return v;
    }

private:
    bool newton_inverse(Complex q, Complex& z, int max_iter) const {
        Complex r = U(z) - q;
        const double tol = 1e-28 * (1.0 + std::norm(q));
        for (int it = 0; it < max_iter; ++it) {
            if (std::norm(r) < tol) return true;
            Complex a, b;
            jacobian(z, a, b);
            const double det = a.real() * b.imag() - a.imag() * b.real();
            if (det == 0.0 || !std::isfinite(det)) return false;
            // solve [a b] [dx dy]^T = -r
            const double dx = (-r.real() * b.imag() + r.imag() * b.real()) / det;
            const double dy = (-a.real() * r.imag() + a.imag() * r.real()) / det;
            Complex step(dx, dy);
            bool moved = false;
            for (int half = 0; half < 60; ++half) {
                const Complex zn = z + step;
                if (std::norm(zn) < 1.0) {
                    const Complex rn = U(zn) - q;
                    if (std::norm(rn) < std::norm(r)) {
                        z = zn;
                        r = rn;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        return std::abs(r) < 1e-11 * (1.0 + std::abs(q));
    }

    double compute_anchor() const {
        // sigma(p_label0) = value at the corner, reached along the ray to the middle of arc 0
        const Complex e = std::polar(1.0, 0.5 * (arcs_.start(0) + arcs_.end(0)));
        auto f = [&](double t) { return dot(grad_at_zeta(t * e), dU(t * e, e)); };
        const double rise = integrate(f, 0.0, 1.0 - 1e-15, 1e-14);
        return corner_values_[static_cast<std::size_t>(arcs_.labels()[0])] - rise;
    }

    GradientPolygon n_;
    ArcPartition arcs_;
    Complex c0_{0.0, 0.0};
    std::vector<Complex> eta_;
    std::vector<Complex> arc_corner_;  // corner carried by arc k
    Complex u_shift_{0.0, 0.0};
    std::vector<Complex> jump_;
    std::vector<double> corner_values_;
    Complex anchor_point_{0.0, 0.0};
    double anchor_value_ = 0.0;
};

// ----------------------------------------------------------------------------
// Arc calibration
// ----------------------------------------------------------------------------

struct CalibrationResult {
    HarmonicSurfaceTension model;
    double residual = 0.0;
    int iterations = 0;
};

/// Equal arcs with labels following the corners counterclockwise and c0 = 0.
/// Exact for polygons whose symmetry group acts transitively on the corners
/// with symmetric boundary data (the lozenge triangle, the domino square).
[[nodiscard]] inline HarmonicSurfaceTension calibrate_symmetric(const GradientPolygon& n, double start = 0.0) {
    return HarmonicSurfaceTension(n, ArcPartition::equal(n.size(), start), {0.0, 0.0});
}

/// Least-squares fit of arc endpoints and c0 to corner values of sigma.
/// Equations: the tangential increments <grad sigma(eta_k), p_k - p_{k-1}> =
/// L_k - L_{k-1} at each endpoint, plus the gauge U(0) = centroid(N) and a fixed
/// first endpoint (removing the Mobius freedom of the disc).
[[nodiscard]] inline CalibrationResult calibrate_arcs(const GradientPolygon& n, const std::vector<double>& corner_values,
                                                      std::vector<double> initial_angles = {}, double tol = 1e-10) {
    const std::size_t m = n.size();
    if (corner_values.size() != m) throw Error(ErrorKind::input, "calibrate_arcs: one value per corner required");
    if (initial_angles.empty()) initial_angles = ArcPartition::equal(m).angles();
    if (initial_angles.size() != m) throw Error(ErrorKind::input, "calibrate_arcs: one angle per corner required");
    std::vector<int> labels(m);
    for (std::size_t k = 0; k < m; ++k) labels[k] = static_cast<int>(k);

    const double a0 = initial_angles[0];
    // unknowns: gaps g_1..g_{m-1} in log form (keeps arcs ordered), c0.x, c0.y
    const int nu = static_cast<int>(m) + 1;
    Eigen::VectorXd x(nu);
    for (std::size_t k = 1; k < m; ++k) x(static_cast<int>(k) - 1) = std::log(initial_angles[k] - initial_angles[k - 1]);
    x(nu - 2) = 0.0;
    x(nu - 1) = 0.0;

    auto unpack = [&](const Eigen::VectorXd& v) {
        std::vector<double> ang(m);
        ang[0] = a0;
        for (std::size_t k = 1; k < m; ++k) ang[k] = ang[k - 1] + std::exp(v(static_cast<int>(k) - 1));
        return ang;
    };
    auto residuals = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r) -> bool {
        const std::vector<double> ang = unpack(v);
        if (!(ang.back() < a0 + two_pi)) return false;
        const Complex c0(v(nu - 2), v(nu - 1));
        r.resize(static_cast<int>(m) + 2);
        ArcPartition arcs(ang, labels);
        // assemble the endpoint gradients directly (no anchor integration needed)
        std::vector<Complex> eta(m), jump(m);
        for (std::size_t k = 0; k < m; ++k) {
            eta[k] = arcs.endpoint(k);
            jump[k] = Complex(0.0, 1.0) * (n.corner(static_cast<std::ptrdiff_t>(k) - 1) - n.corner(k)) / pi;
        }
        for (std::size_t k = 0; k < m; ++k) {
            Complex g = c0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != k) g -= jump[j] * std::log(std::abs(eta[k] - eta[j]));
            const Complex side = n.corner(k) - n.corner(static_cast<std::ptrdiff_t>(k) - 1);
            r(static_cast<int>(k)) =
                dot(g, side) - (corner_values[k] - corner_values[(k + m - 1) % m]);
        }
        const Complex u0 = arcs.weighted_sum(n, {0.0, 0.0}) - n.centroid();
        r(static_cast<int>(m)) = u0.real();
        r(static_cast<int>(m) + 1) = u0.imag();
        return true;
    };

    Eigen::VectorXd r;
    if (!residuals(x, r)) throw Error(ErrorKind::input, "calibrate_arcs: invalid initial arcs");
    double lambda = 1e-3;
    int it = 0;
    for (; it < 200 && r.norm() > tol; ++it) {
        Eigen::MatrixXd jac(r.size(), nu);
        for (int c = 0; c < nu; ++c) {
            Eigen::VectorXd xp = x, xm = x, rp, rm;
            const double h = 1e-7;
            xp(c) += h;
            xm(c) -= h;
            if (!residuals(xp, rp) || !residuals(xm, rm)) throw Error(ErrorKind::convergence, "calibrate_arcs left the admissible set");
            jac.col(c) = (rp - rm) / (2.0 * h);
        }
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd a = jac.transpose() * jac;
            a.diagonal() *= (1.0 + lambda);
            a.diagonal().array() += 1e-14;
            const Eigen::VectorXd step = a.ldlt().solve(-jac.transpose() * r);
            Eigen::VectorXd xn = x + step, rn;
            if (residuals(xn, rn) && rn.norm() < r.norm()) {
                x = xn;
                r = rn;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    const double res = r.norm();
    if (!(res <= std::max(tol, 1e-8)))
        throw Error(ErrorKind::convergence, "calibrate_arcs did not converge, residual " + std::to_string(res));
    const Complex c0(x(nu - 2), x(nu - 1));
    return {HarmonicSurfaceTension(n, ArcPartition(unpack(x), labels), c0, corner_values), res, it};
}

}  // namespace dimer
