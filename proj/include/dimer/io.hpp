#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aztec.hpp"
#include "core.hpp"
#include "frozen_boundary.hpp"
#include "geom.hpp"
#include "height_field.hpp"
#include "surface_tension.hpp"
#include "variational.hpp"

namespace dimer::io {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

/// Round-trip exact decimal with 17 significant digits.
[[nodiscard]] inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Writes comma separated rows; doubles are printed with `num`.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) {
        for (std::size_t k = 0; k < header.size(); ++k) os_ << (k ? "," : "") << header[k];
        os_ << '\n';
    }
    template <class... Ts>
    void row(const Ts&... cols) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(cols), first = false), ...);
        os_ << '\n';
    }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(char v) { return std::string(1, v); }
    std::ostream& os_;
};

// ----------------------------------------------------------------------------
// JSON helpers
// ----------------------------------------------------------------------------

[[nodiscard]] inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

[[nodiscard]] inline Complex complex_from(const json& j, const char* what) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(ErrorKind::input, std::string(what) + ": expected a number or a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

[[nodiscard]] inline std::vector<Complex> complex_list(const json& j, const char* what) {
    if (!j.is_array()) throw Error(ErrorKind::input, std::string(what) + ": expected an array");
    std::vector<Complex> out;
    for (const auto& e : j) out.push_back(complex_from(e, what));
    return out;
}

[[nodiscard]] inline std::vector<double> real_list(const json& j, const char* what) {
    if (!j.is_array()) throw Error(ErrorKind::input, std::string(what) + ": expected an array");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) throw Error(ErrorKind::input, std::string(what) + ": expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

[[nodiscard]] inline json complex_array(const std::vector<Complex>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back(to_json(z));
    return a;
}

[[nodiscard]] inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::input, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::input, "malformed JSON in " + path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::input, "cannot write " + path);
    out << j.dump(2) << '\n';
}

/// Typed member access with an input error naming the missing field.
template <class T>
[[nodiscard]] T field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorKind::input, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::input, std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
[[nodiscard]] T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

// ----------------------------------------------------------------------------
// Surface tension models
// ----------------------------------------------------------------------------

[[nodiscard]] inline json surface_tension_to_json(const HarmonicSurfaceTension& s) {
    return {{"schema", schema_version},
            {"corners", complex_array(s.polygon().corners())},
            {"arc_angles", s.arcs().angles()},
            {"arc_labels", s.arcs().labels()},
            {"c0", to_json(s.c0())},
            {"sigma_anchor", {{"point", to_json(s.anchor_point())}, {"value", s.anchor_value()}}}};
}

/// Arc labels default to 0..m-1; a missing anchor means sigma = 0 at the corners.
[[nodiscard]] inline HarmonicSurfaceTension surface_tension_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::input, "surface tension model must be a JSON object");
    GradientPolygon n(complex_list(j.value("corners", json()), "corners"));
    const std::vector<double> angles = real_list(j.value("arc_angles", json()), "arc_angles");
    std::vector<int> labels;
    if (j.contains("arc_labels")) {
        labels = field<std::vector<int>>(j, "arc_labels");
    } else {
        for (std::size_t k = 0; k < angles.size(); ++k) labels.push_back(static_cast<int>(k));
    }
    const Complex c0 = j.contains("c0") ? complex_from(j["c0"], "c0") : Complex(0.0, 0.0);
    ArcPartition arcs(angles, labels);
    if (j.contains("sigma_anchor")) {
        const json& a = j["sigma_anchor"];
        return HarmonicSurfaceTension(std::move(n), std::move(arcs), c0, complex_from(a.value("point", json()), "sigma_anchor.point"),
                                      field<double>(a, "value"));
    }
    return HarmonicSurfaceTension(std::move(n), std::move(arcs), c0);
}

// ----------------------------------------------------------------------------
// Frozen boundary models
// ----------------------------------------------------------------------------

struct ModelSpec {
    FrozenBoundaryModel model;
    StructureCoefficient mu = StructureCoefficient::lozenge();
    std::string kind;
};

[[nodiscard]] inline json rational_to_json(const Rational& r) {
    return {{"numerator", complex_array(r.numerator().coeffs())}, {"denominator", complex_array(r.denominator().coeffs())}};
}

[[nodiscard]] inline json frozen_model_to_json(const FrozenBoundaryModel& m) {
    json cusps = json::array();
    for (const auto& c : m.cusps) cusps.push_back({{"angle", c.angle}, {"preimage", to_json(c.preimage)}, {"point", to_json(c.point)}});
    return {{"schema", schema_version},
            {"degree", m.degree()},
            {"blaschke_zeros", complex_array(m.B.zeros())},
            {"unimodular", to_json(m.B.unimodular())},
            {"gamma", rational_to_json(m.gamma)},
            {"cusps", cusps}};
}

/// Accepted forms, selected by "model":
///   "aztec"                       B = z^2, gamma = 2z, domino coefficient
///   "epicycloid"  + degree        canonical epicycloid
///   "polynomial"  + degree, angles (unit-circle zeros of gamma)
///   "blaschke"    + blaschke_zeros, [unimodular], and either gamma {numerator,
///                 denominator} or circle_zeros, alpha, [interior_zero]
/// "coefficient": "lozenge" | "domino" overrides the structure coefficient.
[[nodiscard]] inline ModelSpec frozen_model_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::input, "frozen boundary model must be a JSON object");
    ModelSpec s;
    s.kind = field<std::string>(j, "model");
    if (s.kind == "aztec") {
        s.model = canonical_epicycloid(2).model;
        s.mu = StructureCoefficient::domino();
    } else if (s.kind == "epicycloid") {
        s.model = canonical_epicycloid(field<int>(j, "degree")).model;
    } else if (s.kind == "polynomial") {
        s.model = make_univalent_polynomial_model(field<int>(j, "degree"), real_list(j.value("angles", json()), "angles"), false).model;
    } else if (s.kind == "blaschke") {
        const auto zeros = complex_list(j.value("blaschke_zeros", json()), "blaschke_zeros");
        if (zeros.empty()) throw Error(ErrorKind::input, "blaschke_zeros must not be empty");
        for (const auto& a : zeros)
            if (!(std::abs(a) < 1.0)) throw Error(ErrorKind::input, "Blaschke zeros must lie in the open unit disc");
        const Complex eta = j.contains("unimodular") ? complex_from(j["unimodular"], "unimodular") : Complex(1.0, 0.0);
        if (std::abs(std::abs(eta) - 1.0) > 1e-12) throw Error(ErrorKind::input, "unimodular factor must have modulus 1");
        s.model.B = BlaschkeProduct(zeros, eta);
        if (j.contains("gamma")) {
            const json& g = j["gamma"];
            const auto num = complex_list(g.value("numerator", json()), "gamma.numerator");
            const auto den = g.contains("denominator") ? complex_list(g["denominator"], "gamma.denominator")
                                                       : std::vector<Complex>{Complex(1.0, 0.0)};
            if (num.empty() || den.empty()) throw Error(ErrorKind::input, "gamma coefficients must not be empty");
            s.model.gamma = Rational(Polynomial(num), Polynomial(den));
        } else {
            std::optional<Complex> z0;
            if (j.contains("interior_zero")) z0 = complex_from(j["interior_zero"], "interior_zero");
            s.model.gamma = gamma_from_circle_zeros(s.model.B, real_list(j.value("circle_zeros", json()), "circle_zeros"),
                                                    j.contains("alpha") ? complex_from(j["alpha"], "alpha") : Complex(1.0, 0.0), z0);
        }
    } else {
        throw Error(ErrorKind::input, "unknown model '" + s.kind + "'");
    }
    if (j.contains("coefficient")) {
        const auto c = field<std::string>(j, "coefficient");
        if (c == "lozenge") s.mu = StructureCoefficient::lozenge();
        else if (c == "domino") s.mu = StructureCoefficient::domino();
        else throw Error(ErrorKind::input, "coefficient must be 'lozenge' or 'domino'");
    }
    return s;
}

/// (theta, Re R, Im R) at `samples` equally spaced angles.
inline void write_boundary_csv(std::ostream& os, const FrozenBoundaryModel& m, int samples = 2048) {
    CsvWriter w(os, {"theta", "re", "im"});
    for (int k = 0; k < samples; ++k) {
        const double t = two_pi * k / samples;
        const Complex r = boundary_param(m, std::polar(1.0, t));
        w.row(t, r.real(), r.imag());
    }
}

/// Closed path of cubic Bezier segments through R(e^{i theta}) with tangents
/// dR/dtheta = i z R'(z). The second line is the only version-dependent one.
inline void write_boundary_svg(std::ostream& os, const FrozenBoundaryModel& m, int samples = 2048) {
    std::vector<Complex> p(static_cast<std::size_t>(samples)), d(static_cast<std::size_t>(samples));
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int k = 0; k < samples; ++k) {
        const Complex z = std::polar(1.0, two_pi * k / samples);
        const Jet jt = boundary_jet(m, z);
        p[static_cast<std::size_t>(k)] = jt.value();
        d[static_cast<std::size_t>(k)] = Complex(0.0, 1.0) * z * jt.deriv(1);
        xmin = std::min(xmin, p[static_cast<std::size_t>(k)].real());
        xmax = std::max(xmax, p[static_cast<std::size_t>(k)].real());
        ymin = std::min(ymin, p[static_cast<std::size_t>(k)].imag());
        ymax = std::max(ymax, p[static_cast<std::size_t>(k)].imag());
    }
    const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
    const double h = two_pi / samples / 3.0;
    // SVG y grows downwards
    auto pt = [](Complex z) { return num(z.real()) + "," + num(-z.imag()); };
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<!-- dimer boundary export, format 1 -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(xmin - pad) << ' ' << num(-ymax - pad) << ' '
       << num(xmax - xmin + 2 * pad) << ' ' << num(ymax - ymin + 2 * pad) << "\">\n";
    os << "<path fill=\"none\" stroke=\"black\" stroke-width=\"" << num(0.004 * (xmax - xmin + 2 * pad)) << "\" d=\"M"
       << pt(p[0]);
    for (int k = 0; k < samples; ++k) {
        const std::size_t a = static_cast<std::size_t>(k), b = static_cast<std::size_t>((k + 1) % samples);
        os << " C" << pt(p[a] + h * d[a]) << ' ' << pt(p[b] - h * d[b]) << ' ' << pt(p[b]);
    }
    os << " Z\"/>\n";
    for (const auto& c : m.cusps)
        os << "<circle cx=\"" << num(c.point.real()) << "\" cy=\"" << num(-c.point.imag()) << "\" r=\""
           << num(0.01 * (xmax - xmin + 2 * pad)) << "\" fill=\"red\"/>\n";
    os << "</svg>\n";
}

[[nodiscard]] inline json characterization_to_json(const CharacterizationReport& r) {
    return {{"univalent", r.univalent},
            {"tangential_double_point", r.tangential_double_point},
            {"tacnode", to_json(r.tacnode)},
            {"winding", r.winding},
            {"self_reflective", r.self_reflective},
            {"reflect_residual", r.reflect_residual},
            {"pole_free", r.pole_free},
            {"min_pole_winding", r.min_pole_winding},
            {"pole_ratio", r.pole_ratio},
            {"pass", r.pass()}};
}

// ----------------------------------------------------------------------------
// Height fields
// ----------------------------------------------------------------------------

inline void write_height_csv(std::ostream& os, const HeightField& hf) {
    CsvWriter w(os, {"x", "y", "mask", "h", "hx", "hy"});
    for (int j = 0; j < hf.grid.ny; ++j)
        for (int i = 0; i < hf.grid.nx; ++i) {
            const std::size_t k = hf.index(i, j);
            const Complex z = hf.point(i, j);
            w.row(z.real(), z.imag(), hf.mask[k], hf.h[k], hf.grad[k].real(), hf.grad[k].imag());
        }
}

/// Node export of a minimizer in the height-field layout. The gradient of a
/// node is the mean over its triangles; the mask is liquid when any incident
/// triangle is liquid, else the corner of the first incident triangle.
inline void write_minimizer_csv(std::ostream& os, const MinimizeResult& r, const LiquidRegion& lr) {
    CsvWriter w(os, {"x", "y", "mask", "h", "hx", "hy", "m", "M"});
    for (std::size_t k = 0; k < r.mesh.points.size(); ++k) {
        if (r.mesh.state[k] == node_outside) continue;
        Complex g{0.0, 0.0};
        int mask = -1;
        for (const auto& [t, local] : r.mesh.node_tris[k]) {
            (void)local;
            g += r.tri_grad[t];
            const int lab = lr.label[t];
            if (lab < 0) mask = mask_liquid;
            else if (mask < 0) mask = mask_frozen + lab;
        }
        g /= static_cast<double>(r.mesh.node_tris[k].size());
        const Complex z = r.mesh.points[k];
        w.row(z.real(), z.imag(), mask, r.h[k], g.real(), g.imag(), r.obstacles.m[k], r.obstacles.M[k]);
    }
}

inline void write_energy_csv(std::ostream& os, const std::vector<double>& trace) {
    CsvWriter w(os, {"iteration", "energy"});
    for (std::size_t k = 0; k < trace.size(); ++k) w.row(k, trace[k]);
}

/// Plain PBM (P1) of the grid cells, 1 where a triangle of the cell is liquid;
/// the first row is the top of the grid.
inline void write_liquid_pbm(std::ostream& os, const Mesh& mesh, const LiquidRegion& lr) {
    const GridFrame& g = mesh.grid;
    std::vector<char> cell(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny), 0);
    for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
        if (lr.label[t] >= 0) continue;
        const auto& v = mesh.tris[t].v;
        const Complex c = std::conj(g.rot) * (mesh.points[v[0]] + mesh.points[v[1]] + mesh.points[v[2]]) / (3.0 * g.spacing);
        const int i = static_cast<int>(std::floor(c.real())) - g.i0, j = static_cast<int>(std::floor(c.imag())) - g.j0;
        if (i >= 0 && j >= 0 && i < g.nx && j < g.ny) cell[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(i)] = 1;
    }
    os << "P1\n" << g.nx << ' ' << g.ny << '\n';
    for (int j = g.ny - 1; j >= 0; --j) {
        for (int i = 0; i < g.nx; ++i)
            os << (i ? " " : "") << static_cast<int>(cell[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(i)]);
        os << '\n';
    }
}

// ----------------------------------------------------------------------------
// Aztec oracle
// ----------------------------------------------------------------------------

/// One row per bin: rescaled centre, cell count, frequencies of the four types
/// and the analytic north density averaged over the bin's cells.
inline void write_empirical_csv(std::ostream& os, const EmpiricalField& ef) {
    CsvWriter w(os, {"bx", "by", "u", "v", "cells", "north", "south", "east", "west", "analytic_north"});
    for (int by = 0; by < ef.bins; ++by)
        for (int bx = 0; bx < ef.bins; ++bx) {
            const std::size_t k = ef.index(bx, by);
            const Complex c = ef.center(bx, by);
            const double an = k < ef.analytic_mean.size() ? ef.analytic_mean[k] : std::nan("");
            w.row(bx, by, c.real(), c.imag(), ef.cells[k], ef.north[k], ef.south[k], ef.east[k], ef.west[k], an);
        }
}

/// Mean of the analytic north density over the diamond cells of every bin.
inline void fill_analytic_mean(EmpiricalField& ef) {
    ef.analytic_mean.assign(ef.north.size(), 0.0);
    const int n = ef.n;
    for (int y = -n; y < n; ++y)
        for (int x = -n; x < n; ++x) {
            if (!in_aztec(n, x, y)) continue;
            const Complex c = ef.cell_center(x, y);
            ef.analytic_mean[ef.index((x + n) / ef.bin, (y + n) / ef.bin)] += aztec_density(c.real(), c.imag());
        }
    for (std::size_t k = 0; k < ef.analytic_mean.size(); ++k)
        ef.analytic_mean[k] = ef.cells[k] > 0 ? ef.analytic_mean[k] / ef.cells[k] : std::nan("");
}

// ----------------------------------------------------------------------------
// Variational problems
// ----------------------------------------------------------------------------

struct ProblemSpec {
    DiscreteEnergyProblem problem;
    MinimizeOptions options;
    double threshold = 0.05;  // liquid extraction
    std::string name;
};

/// Surface tension choice: {"model": "lozenge"} (closed form, N must be the
/// lozenge triangle), {"model": "symmetric"} (equal arcs on N), or a harmonic
/// model document with corners / arc_angles / c0 / sigma_anchor.
[[nodiscard]] inline std::shared_ptr<const SurfaceTension> sigma_from_json(const json& j, const GradientPolygon& n) {
    const std::string kind = j.is_object() ? j.value("model", std::string("harmonic")) : std::string();
    if (kind == "lozenge") {
        auto s = std::make_shared<LozengeSurfaceTension>();
        if (s->polygon().corners() != n.corners()) throw Error(ErrorKind::input, "the lozenge surface tension needs N = hull{0, 1, i}");
        return s;
    }
    if (kind == "symmetric") return std::make_shared<HarmonicSurfaceTension>(calibrate_symmetric(n));
    if (kind == "harmonic") {
        auto s = std::make_shared<HarmonicSurfaceTension>(surface_tension_from_json(j));
        if (s->polygon().corners() != n.corners()) throw Error(ErrorKind::input, "surface tension corners differ from N");
        return s;
    }
    throw Error(ErrorKind::input, "unknown surface tension model '" + kind + "'");
}

/// Problem document:
///   {"N": [[x, y], ...],
///    "domain": {"vertices": [...], "values": [...]}      explicit boundary data
///           or {"vertices": [...], "labels": [...], "start": h0}   natural data
///    "sigma": {...}, "spacing": 1/64, "rotation": 0, "eps": 1e-3, "threshold": 0.05,
///    "options": {"max_iters", "tol", "nested", "newton"}}
[[nodiscard]] inline ProblemSpec problem_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::input, "problem must be a JSON object");
    ProblemSpec s;
    s.name = j.value("name", std::string("custom"));
    DiscreteEnergyProblem& p = s.problem;
    p.polygon = GradientPolygon(complex_list(j.value("N", json()), "N"));
    if (!j.contains("domain") || !j["domain"].is_object()) throw Error(ErrorKind::input, "missing object 'domain'");
    const json& d = j["domain"];
    auto vertices = complex_list(d.value("vertices", json()), "domain.vertices");
    if (d.contains("labels")) {
        p.domain = build_natural_boundary(p.polygon, std::move(vertices), field<std::vector<int>>(d, "labels"), field_or<double>(d, "start", 0.0));
    } else {
        p.domain = make_domain(std::move(vertices), real_list(d.value("values", json()), "domain.values"));
    }
    p.sigma = sigma_from_json(j.value("sigma", json{{"model", "symmetric"}}), p.polygon);
    p.spacing = field_or<double>(j, "spacing", p.spacing);
    p.rotation = field_or<double>(j, "rotation", p.rotation);
    p.eps = field_or<double>(j, "eps", p.eps);
    s.threshold = field_or<double>(j, "threshold", s.threshold);
    if (j.contains("options")) {
        const json& o = j["options"];
        s.options.max_iters = field_or<int>(o, "max_iters", s.options.max_iters);
        s.options.tol = field_or<double>(o, "tol", s.options.tol);
        s.options.nested = field_or<bool>(o, "nested", s.options.nested);
        s.options.newton = field_or<bool>(o, "newton", s.options.newton);
    }
    p.validate();
    return s;
}

/// Built-in problems: "aztec", "hexagon", "cut-hexagon".
[[nodiscard]] inline ProblemSpec preset_problem(const std::string& name) {
    ProblemSpec s;
    s.name = name;
    DiscreteEnergyProblem& p = s.problem;
    if (name == "aztec") {
        p.domain = aztec_domain();
        p.polygon = domino_polygon();
        p.sigma = std::make_shared<HarmonicSurfaceTension>(calibrate_symmetric(p.polygon));
        p.rotation = pi / 4.0;
    } else if (name == "hexagon") {
        p.domain = lozenge_hexagon();
        p.polygon = lozenge_polygon();
        p.sigma = std::make_shared<LozengeSurfaceTension>();
    } else if (name == "cut-hexagon") {
        p.domain = cut_hexagon().cut;
        p.polygon = equilateral_polygon();
        p.sigma = std::make_shared<HarmonicSurfaceTension>(calibrate_symmetric(p.polygon));
    } else {
        throw Error(ErrorKind::input, "unknown preset '" + name + "' (aztec, hexagon, cut-hexagon)");
    }
    return s;
}

}  // namespace dimer::io
