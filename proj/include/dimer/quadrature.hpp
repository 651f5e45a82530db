#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "core.hpp"

namespace dimer {

// ----------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) on a finite interval
// ----------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * gk15_wk[7];
    double g = fc * gk15_wg[3];
    for (int i = 0; i < 7; ++i) {
        const double x = h * gk15_x[i];
        const double s = f(c - x) + f(c + x);
        k += gk15_wk[i] * s;
        if (i % 2 == 1) g += gk15_wg[i / 2] * s;
    }
    return {k * h, std::abs((k - g) * h)};
}

template <class F>
double gk_adapt(F& f, double a, double b, double tol, int depth) {
    auto [val, err] = gk15(f, a, b);
    if (err <= tol || depth <= 0 || std::abs(b - a) < 1e-15) return val;
    const double m = 0.5 * (a + b);
    return gk_adapt(f, a, m, 0.5 * tol, depth - 1) + gk_adapt(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integral of f over [a, b] with absolute tolerance `tol`. Interior
/// integrable singularities should be placed at interval endpoints.
template <class F>
[[nodiscard]] double integrate(F&& f, double a, double b, double tol = 1e-12, int max_depth = 50) {
    if (a == b) return 0.0;
    return detail::gk_adapt(f, a, b, tol, max_depth);
}

// ----------------------------------------------------------------------------
// Gauss-Legendre rule on [-1, 1]
// ----------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

[[nodiscard]] inline GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

}  // namespace dimer
