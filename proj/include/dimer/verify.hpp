#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aztec.hpp"
#include "core.hpp"
#include "frozen_boundary.hpp"
#include "geom.hpp"
#include "height_field.hpp"
#include "io.hpp"
#include "surface_tension.hpp"
#include "variational.hpp"

namespace dimer::verify {

using json = nlohmann::json;

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double budget = 0.0;  // allowed wall time in seconds
    json metrics = json::object();
    std::string summary;
};

struct VerifyOptions {
    unsigned threads = 1;
    std::uint64_t seed = 20240601;
    std::vector<int> only;  // empty: all criteria
};

namespace detail {

inline double slope_vs(const std::vector<double>& x, const std::vector<double>& y) { return loglog_slope(x, y); }

/// n logarithmically spaced values in [a, b].
inline std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = a * std::pow(b / a, static_cast<double>(k) / (n - 1));
    return v;
}

/// Uniform point of the disc of radius r.
inline Complex disc_point(std::mt19937_64& rng, double r) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(r * std::sqrt(u(rng)), two_pi * u(rng));
}

/// Wirtinger derivatives (d/dz, d/dzbar) by central differences.
template <class F>
std::pair<Complex, Complex> wirtinger(F&& f, Complex z, double h) {
    const Complex fx = (f(z + h) - f(z - h)) / (2.0 * h);
    const Complex fy = (f(z + Complex(0.0, h)) - f(z - Complex(0.0, h))) / (2.0 * h);
    return {0.5 * (fx - Complex(0.0, 1.0) * fy), 0.5 * (fx + Complex(0.0, 1.0) * fy)};
}

inline CriterionResult timed(int id, const std::string& name, double budget, const std::function<void(CriterionResult&)>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    bool checks = false;
    try {
        body(r);
        checks = r.pass;
    } catch (const std::exception& e) {
        r.summary = std::string("exception: ") + e.what();
        checks = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // wall time stays out of the metrics so that reports are reproducible
    r.metrics["budget_seconds"] = budget;
    r.pass = checks && r.seconds < budget;
    if (checks && !r.pass) r.summary += " (over the time budget)";
    return r;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// 1. Lozenge gradient: closed form and finite differences
// ----------------------------------------------------------------------------

inline CriterionResult lozenge_gradient(const VerifyOptions&) {
    return detail::timed(1, "lozenge gradient closed form", 1.0, [](CriterionResult& r) {
        const Complex g = lozenge_grad_sigma(0.5, 0.25);
        const double closed = std::abs(g - Complex(std::log(2.0) / (2.0 * pi), 0.0));
        // 50 x 50 interior sample with a 0.05 margin in every barycentric coordinate
        double fd = 0.0;
        const double h = 1e-5;
        int count = 0;
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j) {
                const double s = 0.05 + 0.9 * (i + 0.5) / 50.0, t = 0.05 + 0.9 * (j + 0.5) / 50.0;
                if (1.0 - s - t < 0.05) continue;
                const Complex num((lozenge_sigma(s + h, t) - lozenge_sigma(s - h, t)) / (2.0 * h),
                                  (lozenge_sigma(s, t + h) - lozenge_sigma(s, t - h)) / (2.0 * h));
                fd = std::max(fd, std::abs(num - lozenge_grad_sigma(s, t)));
                ++count;
            }
        r.metrics = {{"closed_form_error", closed}, {"fd_max_error", fd}, {"fd_points", count}};
        r.pass = closed < 1e-12 && fd < 1e-5;
        r.summary = "closed form error " + io::num(closed) + ", max FD error " + io::num(fd) + " on " + std::to_string(count) + " points";
    });
}

// ----------------------------------------------------------------------------
// 2. Hessian determinant of the lozenge surface tension
// ----------------------------------------------------------------------------

inline CriterionResult hessian_determinant(const VerifyOptions& opt) {
    return detail::timed(2, "lozenge Hessian determinant", 5.0, [&](CriterionResult& r) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const GradientPolygon n = lozenge_polygon();
        double lo = 1e300, hi = -1e300;
        bool posdef = true;
        int count = 0;
        const double h = 1e-5;
        while (count < 100) {
            const Complex p(u(rng), u(rng));
            if (n.signed_distance(p) > -0.1) continue;
            // differentiate the closed-form gradient numerically
            const Complex gx = (lozenge_grad_sigma(p.real() + h, p.imag()) - lozenge_grad_sigma(p.real() - h, p.imag())) / (2.0 * h);
            const Complex gy = (lozenge_grad_sigma(p.real(), p.imag() + h) - lozenge_grad_sigma(p.real(), p.imag() - h)) / (2.0 * h);
            const double a = gx.real(), b = 0.5 * (gx.imag() + gy.real()), c = gy.imag();
            const double det = a * c - b * b;
            posdef = posdef && a > 0.0 && det > 0.0;
            lo = std::min(lo, det);
            hi = std::max(hi, det);
            ++count;
        }
        r.metrics = {{"points", count}, {"det_min", lo}, {"det_max", hi}, {"positive_definite", posdef}};
        r.pass = posdef && lo >= 0.98 && hi <= 1.02;
        r.summary = "det range [" + io::num(lo) + ", " + io::num(hi) + "] at 100 points";
    });
}

// ----------------------------------------------------------------------------
// 3. Aztec kernel identity
// ----------------------------------------------------------------------------

inline CriterionResult aztec_kernel(const VerifyOptions& opt) {
    return detail::timed(3, "Aztec kernel identity", 1.0, [&](CriterionResult& r) {
        const FrozenBoundaryModel m = canonical_epicycloid(2).model;
        std::mt19937_64 rng(opt.seed + 3);
        double phi_err = 0.0, g_err = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Complex z = detail::disc_point(rng, 0.99), w = detail::disc_point(rng, 0.99);
            const Complex ref = 2.0 * z * w / (z + w);
            phi_err = std::max(phi_err, std::abs(phi_kernel(m, z, w) - ref) / std::max(1.0, std::abs(ref)));
            const Complex gz = 2.0 * z / (1.0 + std::norm(z));
            g_err = std::max(g_err, std::abs(teleomorphic_g(m, z) - gz));
        }
        r.metrics = {{"pairs", 1000}, {"phi_max_error", phi_err}, {"g_max_error", g_err}};
        r.pass = phi_err < 1e-12 && g_err < 1e-12;
        r.summary = "Phi error " + io::num(phi_err) + ", g error " + io::num(g_err);
    });
}

// ----------------------------------------------------------------------------
// 4. Cusp census
// ----------------------------------------------------------------------------

inline CriterionResult cusp_census(const VerifyOptions&) {
    return detail::timed(4, "cusp census", 5.0, [](CriterionResult& r) {
        bool ok = true;
        json counts = json::object();
        double cardioid_err = 1e300;
        for (int d = 2; d <= 8; ++d) {
            const auto cusps = scan_cusps(canonical_epicycloid(d).model);
            counts[std::to_string(d)] = cusps.size();
            ok = ok && static_cast<int>(cusps.size()) == d - 2;
            if (d == 3 && cusps.size() == 1) cardioid_err = std::abs(cusps[0].point - Complex(-0.5, 0.0));
        }
        r.metrics = {{"cusps_by_degree", counts}, {"cardioid_cusp_error", cardioid_err}};
        r.pass = ok && cardioid_err < 1e-10;
        r.summary = std::string(ok ? "d - 2 simple cusps for d = 2..8" : "cusp count mismatch") + ", cardioid cusp error " +
                    io::num(cardioid_err);
    });
}

// ----------------------------------------------------------------------------
// 5. Tangent identity f = -tau^2
// ----------------------------------------------------------------------------

inline CriterionResult tangent_identity(const VerifyOptions&) {
    return detail::timed(5, "tangent identity", 5.0, [](CriterionResult& r) {
        double worst = 0.0;
        for (int d : {3, 5}) {
            const double res = tangent_identity_check(canonical_epicycloid(d).model, 2048, 1e-3);
            r.metrics["residual_d" + std::to_string(d)] = res;
            worst = std::max(worst, res);
        }
        r.pass = worst < 1e-8;
        r.summary = "max residual " + io::num(worst);
    });
}

// ----------------------------------------------------------------------------
// 6. Characterization conditions
// ----------------------------------------------------------------------------

inline CriterionResult characterization(const VerifyOptions&) {
    return detail::timed(6, "self-reflectivity and characterization", 5.0, [](CriterionResult& r) {
        bool ok = true;
        double worst = 0.0;
        json per = json::object();
        for (int d = 2; d <= 8; ++d) {
            const CharacterizationReport rep = check_characterization(canonical_epicycloid(d).model);
            per[std::to_string(d)] = io::characterization_to_json(rep);
            ok = ok && rep.pass();
            worst = std::max(worst, rep.reflect_residual);
        }
        FrozenBoundaryModel broken;
        broken.B = BlaschkeProduct::power(2);
        broken.gamma = Rational(Polynomial({0.0, 0.0, 0.0, 1.0}), Polynomial({1.0}));
        const CharacterizationReport bad = check_characterization(broken);
        r.metrics = {{"canonical", per}, {"max_reflect_residual", worst}, {"broken_reflect_residual", bad.reflect_residual},
                     {"broken_condition_ii", bad.self_reflective}};
        r.pass = ok && worst < 1e-10 && !bad.self_reflective;
        r.summary = "canonical d = 2..8 " + std::string(ok ? "pass" : "fail") + " (max residual " + io::num(worst) +
                    "); gamma = z^3 residual " + io::num(bad.reflect_residual) + (bad.self_reflective ? " passes ii" : " fails ii");
    });
}

// ----------------------------------------------------------------------------
// 7. Aztec density along three independent routes
// ----------------------------------------------------------------------------

inline CriterionResult density_cross_check(const VerifyOptions& opt) {
    return detail::timed(7, "Aztec density cross-check", 300.0, [&](CriterionResult& r) {
        // analytic formula against the harmonic measure of the north arc at F = b o g^{-1}
        const FEvaluator f(canonical_epicycloid(2).model, StructureCoefficient::domino());
        std::mt19937_64 rng(opt.seed + 7);
        double hm_err = 0.0;
        for (int k = 0; k < 500; ++k) {
            const Complex z = detail::disc_point(rng, 0.98);
            const double om = harmonic_measure(f(z), 0.25 * pi, 0.75 * pi);
            hm_err = std::max(hm_err, std::abs(om - aztec_density(z.real(), z.imag())));
        }
        // empirical frequencies; interior bins lie entirely inside the diamond
        EmpiricalField ef = empirical_density(64, 200, opt.seed, 4, opt.threads);
        io::fill_analytic_mean(ef);
        double mae = 0.0;
        int bins = 0;
        for (std::size_t k = 0; k < ef.north.size(); ++k) {
            if (ef.cells[k] != ef.bin * ef.bin) continue;
            mae += std::abs(ef.north[k] - ef.analytic_mean[k]);
            ++bins;
        }
        mae /= std::max(bins, 1);
        const double centre = ef.north[ef.index(ef.bins / 2, ef.bins / 2)];
        r.metrics = {{"harmonic_measure_max_error", hm_err}, {"empirical_mae", mae}, {"interior_bins", bins},
                     {"n", 64}, {"samples", 200}, {"centre_bin_frequency", centre}};
        r.pass = hm_err < 1e-8 && mae < 0.05;
        r.summary = "analytic vs harmonic measure " + io::num(hm_err) + ", empirical MAE " + io::num(mae) + " over " +
                    std::to_string(bins) + " bins";
    });
}

// ----------------------------------------------------------------------------
// 8. Boundary exponents
// ----------------------------------------------------------------------------

inline CriterionResult boundary_exponents(const VerifyOptions&) {
    return detail::timed(8, "boundary exponent fits", 30.0, [](CriterionResult& r) {
        const FrozenBoundaryModel m = canonical_epicycloid(3).model;  // cusp preimage at angle pi
        const std::vector<double> rho = detail::logspace(1e-3, 1e-1, 12);
        // radial flattening at 20 points of the smooth arc
        double smin = 1e300, smax = -1e300;
        for (int k = 0; k < 20; ++k) {
            const double t = pi + 0.5 + (two_pi - 1.0) * k / 19.0;
            const Complex z0 = std::polar(1.0, t);
            const Complex g0 = teleomorphic_g(m, z0);
            std::vector<double> y;
            for (double p : rho) y.push_back(std::abs(teleomorphic_g(m, (1.0 - p) * z0) - g0));
            const double s = detail::slope_vs(rho, y);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        // cusp compression off the inward normal, for every cusp of d = 3, 4, 5
        double cmin = 1e300, cmax = -1e300, nmin = 1e300, nmax = -1e300;
        for (int d : {3, 4, 5}) {
            const FrozenBoundaryModel md = canonical_epicycloid(d).model;
            for (const Cusp& c : scan_cusps(md)) {
                const Complex z0 = c.preimage, g0 = teleomorphic_g(md, z0);
                for (double dir : {-pi / 6.0, 0.0, pi / 6.0}) {
                    const Complex v = -z0 * std::polar(1.0, dir);
                    std::vector<double> y;
                    for (double p : rho) y.push_back(std::abs(teleomorphic_g(md, z0 + p * v) - g0));
                    const double s = detail::slope_vs(rho, y);
                    if (dir == 0.0) {
                        nmin = std::min(nmin, s);
                        nmax = std::max(nmax, s);
                    } else {
                        cmin = std::min(cmin, s);
                        cmax = std::max(cmax, s);
                    }
                }
            }
        }
        // Pokrovsky-Talapov exponent on the cardioid lozenge height at a smooth frozen
        // point; at angle pi/6 the value B = i sits in the middle of the arc of corner 0
        const FEvaluator f(m, StructureCoefficient::lozenge());
        const ArcAssignment a = lozenge_assignment();
        const std::vector<double> delta = detail::logspace(1e-4, 1e-2, 9);
        std::vector<double> ex;
        for (double dl : delta) ex.push_back(std::abs(height_excess_along_normal(f, a, pi / 6.0, dl)));
        const double pt = detail::slope_vs(delta, ex);
        r.metrics = {{"radial_slope_min", smin}, {"radial_slope_max", smax},  {"cusp_slope_min", cmin},
                     {"cusp_slope_max", cmax},   {"normal_slope_min", nmin},  {"normal_slope_max", nmax},
                     {"pokrovsky_talapov_exponent", pt}};
        r.pass = smin >= 1.9 && smax <= 2.1 && cmin >= 2.85 && cmax <= 3.15 && std::abs(pt - 1.5) <= 0.15;
        r.summary = "radial slopes [" + io::num(smin) + ", " + io::num(smax) + "], cusp slopes [" + io::num(cmin) + ", " +
                    io::num(cmax) + "], PT exponent " + io::num(pt);
    });
}

// ----------------------------------------------------------------------------
// 9. Variational arctic circle
// ----------------------------------------------------------------------------

/// Aztec square with the natural domino data and the symmetric square model.
[[nodiscard]] inline DiscreteEnergyProblem aztec_problem(double spacing) {
    DiscreteEnergyProblem p;
    p.domain = aztec_domain();
    p.polygon = domino_polygon();
    p.sigma = std::make_shared<HarmonicSurfaceTension>(calibrate_symmetric(domino_polygon()));
    p.spacing = spacing;
    p.rotation = pi / 4.0;  // grid lines parallel to the sides of the square
    p.eps = 1e-3;
    return p;
}

inline CriterionResult arctic_circle(const VerifyOptions& opt) {
    return detail::timed(9, "variational arctic circle", 600.0, [&](CriterionResult& r) {
        MinimizeOptions mo;
        mo.threads = opt.threads;
        const DiscreteEnergyProblem fine = aztec_problem(1.0 / 64.0), coarse = aztec_problem(1.0 / 32.0);
        const MinimizeResult rf = minimize(fine, mo);
        const MinimizeResult rc = minimize(coarse, mo);
        const LiquidRegion lf = extract_liquid_region(rf.mesh, rf.tri_grad, fine.polygon, 0.05);
        const LiquidRegion lc = extract_liquid_region(rc.mesh, rc.tri_grad, coarse.polygon, 0.05);
        const double haus = hausdorff_to_circle(lf.boundary, {0.0, 0.0}, 1.0);
        bool mono = true;
        for (std::size_t k = 1; k < rf.energy_trace.size(); ++k) mono = mono && rf.energy_trace[k] <= rf.energy_trace[k - 1];
        const double change = std::abs(lf.area - lc.area) / lf.area;
        double outside = 0.0;
        for (const auto& g : rf.tri_grad) outside = std::max(outside, fine.polygon.signed_distance(g));
        r.metrics = {{"hausdorff", haus},
                     {"monotone", mono},
                     {"converged", rf.converged},
                     {"status", rf.status},
                     {"cycles", rf.iterations},
                     {"energy", rf.energy_trace.empty() ? 0.0 : rf.energy_trace.back()},
                     {"area_fine", lf.area},
                     {"area_coarse", lc.area},
                     {"area_change", change},
                     {"components", lf.components},
                     {"euler_characteristic", lf.euler_characteristic},
                     {"max_gradient_outside_N", outside}};
        r.pass = rf.converged && haus < 0.08 && mono && change < 0.05;
        r.summary = "Hausdorff " + io::num(haus) + ", monotone " + (mono ? "yes" : "no") + ", area change " + io::num(change);
    });
}

// ----------------------------------------------------------------------------
// 10. Obstacle degeneracy on the cut hexagon
// ----------------------------------------------------------------------------

inline CriterionResult obstacle_degeneracy(const VerifyOptions& opt) {
    return detail::timed(10, "obstacle degeneracy", 10.0, [&](CriterionResult& r) {
        DiscreteEnergyProblem p;
        p.domain = cut_hexagon().cut;
        p.polygon = equilateral_polygon();
        p.sigma = std::make_shared<HarmonicSurfaceTension>(calibrate_symmetric(p.polygon));
        p.spacing = 1.0 / 64.0;
        MinimizeOptions mo;
        mo.threads = opt.threads;
        const MinimizeResult res = minimize(p, mo);
        double gap = 0.0, dev = 0.0;
        int nodes = 0;
        for (std::size_t k = 0; k < res.h.size(); ++k) {
            if (res.mesh.state[k] == node_outside) continue;
            const Complex z = res.mesh.points[k];
            if (!p.domain.contains(z) && p.domain.boundary_distance(z) > 1e-9 * p.spacing) continue;
            gap = std::max(gap, res.obstacles.M[k] - res.obstacles.m[k]);
            dev = std::max(dev, std::abs(res.h[k] - res.obstacles.M[k]));
            ++nodes;
        }
        r.metrics = {{"nodes", nodes}, {"max_obstacle_gap", gap}, {"max_deviation_from_M", dev}};
        r.pass = nodes > 0 && gap < 1e-9 && dev < 1e-9;
        r.summary = "max(M - m) " + io::num(gap) + ", max |h - M| " + io::num(dev) + " on " + std::to_string(nodes) + " nodes";
    });
}

// ----------------------------------------------------------------------------
// 11. Beltrami and conjugate-equation residuals
// ----------------------------------------------------------------------------

inline CriterionResult pde_residuals(const VerifyOptions& opt) {
    return detail::timed(11, "PDE residuals", 10.0, [&](CriterionResult& r) {
        std::mt19937_64 rng(opt.seed + 11);
        const double h = 1e-5;
        double beltrami = 0.0, conjugate = 0.0;
        for (int d : {3, 5}) {
            const FrozenBoundaryModel m = canonical_epicycloid(d).model;
            const FEvaluator f(m, StructureCoefficient::lozenge());
            for (int k = 0; k < 200; ++k) {
                const Complex w = detail::disc_point(rng, 0.9);
                // conjugate equation for g at w
                const auto [gz, gzb] = detail::wirtinger([&](Complex x) { return teleomorphic_g(m, x); }, w, h);
                conjugate = std::max(conjugate, std::abs(gzb + m.B(w) * std::conj(gz)) / (1.0 + std::abs(gz)));
                // Beltrami equation for f at z = g(w); the preimage seeds the inversions
                // f varies on the scale of the smallest singular value of Dg
                const GValue gv = teleomorphic_g_derivs(m, w);
                const double scale = std::min(1.0, std::abs(gv.g_z) - std::abs(gv.g_zbar));
                const Complex z = gv.g;
                const Complex fz0 = m.B(w);
                const auto [fz, fzb] = detail::wirtinger([&](Complex x) {
                    Complex s = w;
                    return f(x, &s);
                }, z, h * scale);
                beltrami = std::max(beltrami, std::abs(fzb - fz0 * fz));
            }
        }
        r.metrics = {{"points_per_model", 200}, {"beltrami_residual", beltrami}, {"conjugate_residual", conjugate}};
        r.pass = beltrami < 1e-4 && conjugate < 1e-5;
        r.summary = "Beltrami residual " + io::num(beltrami) + ", conjugate residual " + io::num(conjugate);
    });
}

// ----------------------------------------------------------------------------
// Driver
// ----------------------------------------------------------------------------

using Suite = CriterionResult (*)(const VerifyOptions&);

[[nodiscard]] inline const std::vector<Suite>& suites() {
    static const std::vector<Suite> s{lozenge_gradient, hessian_determinant, aztec_kernel,   cusp_census,
                                      tangent_identity, characterization,    density_cross_check, boundary_exponents,
                                      arctic_circle,    obstacle_degeneracy, pde_residuals};
    return s;
}

/// Runs the selected criteria in order; `progress` sees each result as it completes.
[[nodiscard]] inline std::vector<CriterionResult> run(const VerifyOptions& opt,
                                                      const std::function<void(const CriterionResult&)>& progress = {}) {
    std::vector<CriterionResult> out;
    for (std::size_t k = 0; k < suites().size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        out.push_back(suites()[k](opt));
        if (progress) progress(out.back());
    }
    return out;
}

[[nodiscard]] inline std::string line(const CriterionResult& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2fs", r.seconds);
    return std::string(r.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " (" + r.name + "): " + r.summary +
           " [" + buf + "]";
}

[[nodiscard]] inline json report(const std::vector<CriterionResult>& rs) {
    json list = json::array();
    bool all = true;
    for (const auto& r : rs) {
        list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"metrics", r.metrics}});
        all = all && r.pass;
    }
    return {{"schema", io::schema_version}, {"pass", all}, {"criteria", list}};
}

}  // namespace dimer::verify
