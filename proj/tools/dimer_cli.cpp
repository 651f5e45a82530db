// Command-line front end: sigma | boundary | height | minimize | sample | verify.
// Exit codes: 0 ok, 2 input or evaluation error, 3 validation failure, 4 no convergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dimer/io.hpp>
#include <dimer/verify.hpp>

namespace {

using dimer::Complex;
using dimer::Error;
using dimer::ErrorKind;
using dimer::io::json;
namespace fs = std::filesystem;

struct RunConfig {
    std::string input;
    std::string out = ".";
    std::uint64_t seed = 1;
    int grid = 0;  // 0: subcommand default
    unsigned threads = 1;
    double tol = 0.0;  // 0: subcommand default
};

void add_common(CLI::App* sub, RunConfig& c) {
    sub->add_option("--input", c.input, "input JSON document");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--grid", c.grid, "grid resolution (meaning depends on the subcommand)")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--tol", c.tol, "tolerance override")->check(CLI::NonNegativeNumber);
}

std::string prepare_out(const RunConfig& c) {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out)) throw Error(ErrorKind::input, "cannot create output directory " + c.out);
    return c.out;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw Error(ErrorKind::input, "cannot write " + (fs::path(dir) / name).string());
    return f;
}

Complex parse_point(const std::string& s) {
    std::stringstream ss(s);
    double x = 0.0, y = 0.0;
    char comma = 0;
    if (!(ss >> x >> comma >> y) || comma != ',') throw Error(ErrorKind::input, "--point expects x,y");
    return {x, y};
}

// ----------------------------------------------------------------------------
// sigma
// ----------------------------------------------------------------------------

int cmd_sigma(const RunConfig& c, const std::string& model, const std::string& point) {
    std::shared_ptr<const dimer::SurfaceTension> st;
    std::shared_ptr<const dimer::HarmonicSurfaceTension> harmonic;
    if (!c.input.empty()) {
        harmonic = std::make_shared<dimer::HarmonicSurfaceTension>(dimer::io::surface_tension_from_json(dimer::io::read_json_file(c.input)));
    } else if (model == "lozenge") {
        st = std::make_shared<dimer::LozengeSurfaceTension>();
    } else if (model == "triangle") {
        harmonic = std::make_shared<dimer::HarmonicSurfaceTension>(dimer::calibrate_symmetric(dimer::lozenge_polygon()));
    } else if (model == "domino") {
        harmonic = std::make_shared<dimer::HarmonicSurfaceTension>(dimer::calibrate_symmetric(dimer::domino_polygon()));
    } else {
        throw Error(ErrorKind::input, "unknown model '" + model + "' (lozenge, triangle, domino, or --input)");
    }
    if (harmonic) st = harmonic;

    if (!point.empty()) {
        const Complex p = parse_point(point);
        if (!(st->polygon().signed_distance(p) < 0.0)) throw Error(ErrorKind::singularity, "boundary singularity");
        const Complex g = st->grad(p);
        const json j{{"schema", dimer::io::schema_version}, {"point", dimer::io::to_json(p)}, {"sigma", st->sigma(p)},
                     {"grad", dimer::io::to_json(g)}};
        std::cout << j.dump(2) << '\n';
        return 0;
    }

    const std::string dir = prepare_out(c);
    const int n = c.grid > 0 ? c.grid : 64;
    auto csv = open_out(dir, "sigma.csv");
    dimer::io::CsvWriter w(csv, {"s", "t", "sigma", "gx", "gy"});
    const bool triangle = st->polygon().corners() == dimer::lozenge_polygon().corners();
    const dimer::HarmonicSurfaceTension reference = dimer::calibrate_symmetric(dimer::lozenge_polygon());
    double cross = 0.0;
    for (int j = 0; j < n; ++j) {
        Complex hint{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            const double u = (i + 0.5) / n, v = (j + 0.5) / n;
            Complex p, g;
            double s = 0.0;
            if (harmonic) {
                // polar grid of the disc pushed forward by U
                const Complex zeta = std::polar(u, dimer::two_pi * v);
                p = harmonic->U(zeta);
                g = harmonic->grad_at_zeta(zeta);
                s = harmonic->sigma_at_zeta(zeta);
            } else {
                // square (u, v) onto the open triangle
                p = Complex(u * (1.0 - v), v);
                g = st->grad(p);
                s = st->sigma(p);
            }
            if (triangle) {
                // the other representation of the lozenge model at the same point
                const Complex other = harmonic ? dimer::lozenge_grad_sigma(p.real(), p.imag()) : reference.grad(p, &hint);
                cross = std::max(cross, std::abs(other - g));
            }
            w.row(p.real(), p.imag(), s, g.real(), g.imag());
        }
    }
    json rep{{"schema", dimer::io::schema_version}, {"model", c.input.empty() ? model : std::string("harmonic")}, {"rows", n * n}};
    if (triangle) rep["max_grad_difference_vs_lozenge"] = cross;
    if (harmonic) dimer::io::write_json_file((fs::path(dir) / "model.json").string(), dimer::io::surface_tension_to_json(*harmonic));
    dimer::io::write_json_file((fs::path(dir) / "sigma.json").string(), rep);
    std::cout << rep.dump(2) << '\n';
    return 0;
}

// ----------------------------------------------------------------------------
// boundary
// ----------------------------------------------------------------------------

int cmd_boundary(const RunConfig& c, int degree) {
    dimer::io::ModelSpec spec;
    if (!c.input.empty()) spec = dimer::io::frozen_model_from_json(dimer::io::read_json_file(c.input));
    else spec.model = dimer::canonical_epicycloid(degree > 0 ? degree : 3).model;
    dimer::FrozenBoundaryModel& m = spec.model;
    const std::string dir = prepare_out(c);

    const dimer::CharacterizationReport rep = dimer::check_characterization(m);
    std::string cusp_error;
    try {
        m.cusps = dimer::scan_cusps(m);
    } catch (const Error& e) {
        cusp_error = e.what();
    }
    const bool count_ok = cusp_error.empty() && static_cast<int>(m.cusps.size()) == m.degree() - 2;
    double tangent = 0.0;
    if (cusp_error.empty()) tangent = dimer::tangent_identity_check(m);

    {
        auto f = open_out(dir, "boundary.csv");
        dimer::io::write_boundary_csv(f, m);
    }
    {
        auto f = open_out(dir, "boundary.svg");
        dimer::io::write_boundary_svg(f, m);
    }
    dimer::io::write_json_file((fs::path(dir) / "model.json").string(), dimer::io::frozen_model_to_json(m));
    json r{{"schema", dimer::io::schema_version},
           {"degree", m.degree()},
           {"cusp_count", m.cusps.size()},
           {"cusp_count_ok", count_ok},
           {"characterization", dimer::io::characterization_to_json(rep)},
           {"tangent_identity_residual", tangent},
           {"pass", rep.pass() && count_ok}};
    if (!cusp_error.empty()) r["cusp_error"] = cusp_error;
    json cusps = json::array();
    for (const auto& cp : m.cusps) cusps.push_back({{"angle", cp.angle}, {"point", dimer::io::to_json(cp.point)}});
    r["cusps"] = cusps;
    dimer::io::write_json_file((fs::path(dir) / "report.json").string(), r);
    std::cout << r.dump(2) << '\n';
    if (!rep.pass()) {
        std::string failed;
        if (!rep.univalent) failed += " i";
        if (!rep.self_reflective) failed += " ii";
        if (!rep.pole_free) failed += " iii";
        std::cerr << "error: characterization failed (condition" << failed << ")\n";
        return 3;
    }
    if (!count_ok) {
        std::cerr << "error: " << (cusp_error.empty() ? "cusp count differs from d - 2" : cusp_error) << '\n';
        return 3;
    }
    return 0;
}

// ----------------------------------------------------------------------------
// height
// ----------------------------------------------------------------------------

int cmd_height(const RunConfig& c) {
    dimer::io::ModelSpec spec;
    if (!c.input.empty()) {
        spec = dimer::io::frozen_model_from_json(dimer::io::read_json_file(c.input));
    } else {
        spec = dimer::io::frozen_model_from_json(json{{"model", "aztec"}});
    }
    const std::string dir = prepare_out(c);
    const dimer::ArcAssignment a =
        spec.mu.tag == dimer::ModelTag::domino ? dimer::aztec_assignment() : dimer::lozenge_assignment();
    const dimer::FEvaluator f(spec.model, spec.mu);

    // grid over the padded bounding box of the frozen boundary
    const dimer::SampledCurve curve = dimer::sample_boundary(spec.model, 2048);
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& z : curve.points()) {
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
    }
    const int n = c.grid > 0 ? c.grid : 129;
    if (n < 2) throw Error(ErrorKind::input, "--grid must be at least 2 for height");
    const double span = 1.1 * std::max(xmax - xmin, ymax - ymin);
    dimer::GridSpec g;
    g.spacing = span / (n - 1);
    g.nx = g.ny = n;
    g.x0 = 0.5 * (xmin + xmax) - 0.5 * span;
    g.y0 = 0.5 * (ymin + ymax) - 0.5 * span;
    g.frozen_band = 0.05 * span;
    const dimer::HeightField hf = dimer::integrate_h(f, a, g, c.threads);
    {
        auto out = open_out(dir, "height.csv");
        dimer::io::write_height_csv(out, hf);
    }
    std::size_t liquid = 0;
    for (int v : hf.mask) liquid += v == dimer::mask_liquid ? 1 : 0;
    const double limit = c.tol > 0.0 ? c.tol : 1e-3 * g.spacing;
    json r{{"schema", dimer::io::schema_version},
           {"model", spec.kind},
           {"coefficient", spec.mu.tag == dimer::ModelTag::domino ? "domino" : "lozenge"},
           {"grid", {{"x0", g.x0}, {"y0", g.y0}, {"spacing", g.spacing}, {"nx", g.nx}, {"ny", g.ny}}},
           {"liquid_points", liquid},
           {"max_curl", hf.max_curl},
           {"max_interior_curl", hf.max_interior_curl},
           {"curl_limit", limit},
           {"pass", hf.max_interior_curl <= limit}};
    dimer::io::write_json_file((fs::path(dir) / "report.json").string(), r);
    std::cout << r.dump(2) << '\n';
    if (hf.max_interior_curl > limit) {
        std::cerr << "error: plaquette curl residual " << dimer::io::num(hf.max_interior_curl) << " exceeds " << dimer::io::num(limit) << '\n';
        return 3;
    }
    return 0;
}

// ----------------------------------------------------------------------------
// minimize
// ----------------------------------------------------------------------------

int cmd_minimize(const RunConfig& c, const std::string& preset, int max_iters) {
    dimer::io::ProblemSpec spec;
    if (!c.input.empty()) spec = dimer::io::problem_from_json(dimer::io::read_json_file(c.input));
    else spec = dimer::io::preset_problem(preset);
    if (c.grid > 0) spec.problem.spacing = 1.0 / c.grid;
    if (c.tol > 0.0) spec.options.tol = c.tol;
    if (max_iters > 0) spec.options.max_iters = max_iters;
    spec.options.threads = c.threads;
    const std::string dir = prepare_out(c);

    const dimer::MinimizeResult res = dimer::minimize(spec.problem, spec.options);
    const dimer::LiquidRegion lr = dimer::extract_liquid_region(res.mesh, res.tri_grad, spec.problem.polygon, spec.threshold);
    {
        auto f = open_out(dir, "field.csv");
        dimer::io::write_minimizer_csv(f, res, lr);
    }
    {
        auto f = open_out(dir, "energy.csv");
        dimer::io::write_energy_csv(f, res.energy_trace);
    }
    {
        auto f = open_out(dir, "liquid.pbm");
        dimer::io::write_liquid_pbm(f, res.mesh, lr);
    }
    bool mono = true;
    for (std::size_t k = 1; k < res.energy_trace.size(); ++k) mono = mono && res.energy_trace[k] <= res.energy_trace[k - 1];
    double sandwich = 0.0;
    for (std::size_t k = 0; k < res.h.size(); ++k) {
        if (res.mesh.state[k] == dimer::node_outside) continue;
        sandwich = std::min({sandwich, res.h[k] - res.obstacles.m[k], res.obstacles.M[k] - res.h[k]});
    }
    json r{{"schema", dimer::io::schema_version},
           {"problem", spec.name},
           {"spacing", spec.problem.spacing},
           {"status", res.status},
           {"converged", res.converged},
           {"cycles", res.iterations},
           {"energy", res.energy_trace.empty() ? 0.0 : res.energy_trace.back()},
           {"monotone", mono},
           {"obstacle_slack", sandwich},
           {"liquid",
            {{"threshold", spec.threshold},
             {"area", lr.area},
             {"components", lr.components},
             {"euler_characteristic", lr.euler_characteristic}}}};
    if (spec.name == "aztec") r["liquid"]["hausdorff_to_unit_circle"] = dimer::hausdorff_to_circle(lr.boundary, {0.0, 0.0}, 1.0);
    dimer::io::write_json_file((fs::path(dir) / "report.json").string(), r);
    std::cout << r.dump(2) << '\n';
    if (!res.converged) {
        std::cerr << "error: minimization did not converge: " << res.status << '\n';
        return 4;
    }
    return 0;
}

// ----------------------------------------------------------------------------
// sample
// ----------------------------------------------------------------------------

int cmd_sample(const RunConfig& c, int samples) {
    const int n = c.grid > 0 ? c.grid : 64;
    if (samples < 1) throw Error(ErrorKind::input, "--samples must be positive");
    const std::string dir = prepare_out(c);
    const dimer::AztecTiling t = dimer::sample_tiling(n, c.seed);
    {
        auto f = open_out(dir, "tiling.csv");
        dimer::write_tiling(f, t);
    }
    const int bin = (2 * n) % 4 == 0 ? 4 : 2;
    dimer::EmpiricalField ef = dimer::empirical_density(n, samples, c.seed, bin, c.threads);
    dimer::io::fill_analytic_mean(ef);
    {
        auto f = open_out(dir, "density.csv");
        dimer::io::write_empirical_csv(f, ef);
    }
    double mae = 0.0;
    int bins = 0;
    for (std::size_t k = 0; k < ef.north.size(); ++k) {
        if (ef.cells[k] != bin * bin) continue;
        mae += std::abs(ef.north[k] - ef.analytic_mean[k]);
        ++bins;
    }
    json r{{"schema", dimer::io::schema_version},
           {"n", n},
           {"samples", samples},
           {"seed", c.seed},
           {"bin", bin},
           {"valid_tiling", t.valid()},
           {"north_mae_vs_analytic", bins ? mae / bins : 0.0},
           {"interior_bins", bins}};
    dimer::io::write_json_file((fs::path(dir) / "report.json").string(), r);
    std::cout << r.dump(2) << '\n';
    return 0;
}

// ----------------------------------------------------------------------------
// verify
// ----------------------------------------------------------------------------

int cmd_verify(const RunConfig& c, const std::vector<int>& only) {
    const std::string dir = prepare_out(c);
    dimer::verify::VerifyOptions o;
    o.threads = c.threads;
    o.seed = c.seed;
    o.only = only;
    const auto results = dimer::verify::run(o, [](const dimer::verify::CriterionResult& r) {
        std::cout << dimer::verify::line(r) << std::endl;
    });
    const json rep = dimer::verify::report(results);
    dimer::io::write_json_file((fs::path(dir) / "verify.json").string(), rep);
    return rep["pass"].get<bool>() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimer limit shapes: surface tensions, frozen boundaries, height functions, minimizers, samplers."};
    app.require_subcommand(1);
    RunConfig cfg;

    std::string model = "lozenge", point;
    auto* sigma = app.add_subcommand("sigma", "sample sigma and its gradient over a grid");
    add_common(sigma, cfg);
    sigma->add_option("--model", model, "lozenge | triangle | domino (ignored with --input)")->capture_default_str();
    sigma->add_option("--point", point, "evaluate at a single point x,y");

    int degree = 0;
    auto* boundary = app.add_subcommand("boundary", "build a frozen boundary and check its characterization");
    add_common(boundary, cfg);
    boundary->add_option("--degree", degree, "canonical epicycloid degree when no --input is given");

    auto* height = app.add_subcommand("height", "reconstruct the height function of a frozen boundary model");
    add_common(height, cfg);

    std::string preset = "aztec";
    int max_iters = 0;
    auto* minimize = app.add_subcommand("minimize", "minimize the discrete energy on a polygonal domain");
    add_common(minimize, cfg);
    minimize->add_option("--preset", preset, "aztec | hexagon | cut-hexagon when no --input is given")->capture_default_str();
    minimize->add_option("--max-iters", max_iters, "outer cycle limit");

    int samples = 1;
    auto* sample = app.add_subcommand("sample", "sample Aztec diamond tilings");
    add_common(sample, cfg);
    sample->add_option("--samples", samples, "number of tilings for the density estimate")->capture_default_str();

    std::vector<int> only;
    auto* verify = app.add_subcommand("verify", "run the acceptance suites");
    add_common(verify, cfg);
    verify->add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, 11));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sigma) return cmd_sigma(cfg, model, point);
        if (*boundary) return cmd_boundary(cfg, degree);
        if (*height) return cmd_height(cfg);
        if (*minimize) return cmd_minimize(cfg, preset, max_iters);
        if (*sample) return cmd_sample(cfg, samples);
        if (*verify) return cmd_verify(cfg, only);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dimer::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
