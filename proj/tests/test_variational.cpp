#include <gtest/gtest.h>

#include <dimer/verify.hpp>

#include <random>

using namespace dimer;

namespace {

DiscreteEnergyProblem lozenge_problem(PolygonalDomain d, double spacing) {
    DiscreteEnergyProblem p;
    p.domain = std::move(d);
    p.polygon = lozenge_polygon();
    p.sigma = std::make_shared<LozengeSurfaceTension>();
    p.spacing = spacing;
    return p;
}

const std::vector<Complex> unit_square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

bool non_increasing(const std::vector<double>& t) {
    for (std::size_t k = 1; k < t.size(); ++k)
        if (t[k] > t[k - 1]) return false;
    return true;
}

}  // namespace

TEST(Variational, NaturalBoundaryExamples) {
    const PolygonalDomain hex = lozenge_hexagon();
    // telescoping increments close the loop
    double s = 0.0;
    for (std::size_t j = 0; j < hex.size(); ++j) {
        const auto jj = static_cast<std::ptrdiff_t>(j);
        s += dot(lozenge_polygon().corner(hex.labels[j]), hex.vertex(jj + 1) - hex.vertex(jj));
    }
    EXPECT_NEAR(s, 0.0, 1e-15);
    EXPECT_NO_THROW((void)aztec_domain());
    try {
        (void)build_natural_boundary(lozenge_polygon(), hex.vertices, {0, 1, 1, 0, 2, 1});
        FAIL() << "mislabelled vertex must be rejected";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::validation);
        EXPECT_NE(std::string(e.what()).find("orthogonality"), std::string::npos);
    }
    EXPECT_EQ(natural_labels(lozenge_polygon(), hex.vertices), hex.labels);
}

TEST(Variational, DomainValidation) {
    EXPECT_THROW((void)make_domain({{0, 0}, {0, 1}, {1, 0}}, {0, 0, 0}), Error);               // clockwise
    EXPECT_THROW((void)make_domain({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {0, 0, 0, 0}), Error);    // bow tie
    EXPECT_THROW((void)make_domain(unit_square, {0, 0, 0}), Error);
}

TEST(Variational, McShaneOfAffineDataIsExact) {
    const Complex p(0.3, 0.2);
    const PolygonalDomain d = affine_domain(unit_square, {1, 0});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 200; ++k) {
        const Complex z(u(rng), u(rng));
        EXPECT_NEAR(mcshane_upper(d, lozenge_polygon(), z), z.real(), 1e-14);
        EXPECT_NEAR(mcshane_lower(d, lozenge_polygon(), z), z.real(), 1e-14);
        // interior gradient: the obstacles bracket the data without pinning it
        const PolygonalDomain e = affine_domain(unit_square, p);
        EXPECT_LE(mcshane_lower(e, lozenge_polygon(), z), dot(p, z) + 1e-14);
        EXPECT_GE(mcshane_upper(e, lozenge_polygon(), z), dot(p, z) - 1e-14);
    }
}

TEST(Variational, McShaneAgainstBruteForceBoundarySampling) {
    const PolygonalDomain d = lozenge_hexagon();
    const GradientPolygon n = lozenge_polygon();
    std::vector<std::pair<Complex, double>> bd;
    for (std::size_t k = 0; k < d.size(); ++k)
        for (int s = 0; s < 400; ++s) {
            const double t = s / 400.0;
            const auto kk = static_cast<std::ptrdiff_t>(k);
            bd.push_back({d.vertex(kk) + t * (d.vertex(kk + 1) - d.vertex(kk)), d.boundary_value(k, t)});
        }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    int open = 0;
    for (int k = 0; k < 300; ++k) {
        const Complex z(u(rng), u(rng));
        if (!d.contains(z)) continue;
        double lo = -1e300, hi = 1e300;
        for (const auto& [w, v] : bd) {
            lo = std::max(lo, -n.support(w - z) + v);
            hi = std::min(hi, n.support(z - w) + v);
        }
        const double m = mcshane_lower(d, n, z), M = mcshane_upper(d, n, z);
        EXPECT_NEAR(m, lo, 2e-3);
        EXPECT_NEAR(M, hi, 2e-3);
        EXPECT_GE(m, lo - 1e-12);  // exact extremum dominates any sample
        EXPECT_LE(M, hi + 1e-12);
        if (M - m > 1e-3) ++open;
    }
    EXPECT_GT(open, 50);  // nontrivial admissible set inside the hexagon
}

TEST(Variational, CutHexagonHasTrivialAdmissibleClass) {
    const CutHexagon c = cut_hexagon();
    DiscreteEnergyProblem p;
    p.domain = c.cut;
    p.polygon = equilateral_polygon();
    p.sigma = std::make_shared<HarmonicSurfaceTension>(calibrate_symmetric(p.polygon));
    p.spacing = 1.0 / 32;
    const Mesh mesh = build_mesh(p);
    const Obstacles o = mcshane_obstacles(p, mesh);
    double gap = 0.0;
    for (std::size_t k = 0; k < mesh.points.size(); ++k)
        if (mesh.state[k] != node_outside && (p.domain.contains(mesh.points[k]) || p.domain.boundary_distance(mesh.points[k]) < 1e-12))
            gap = std::max(gap, o.M[k] - o.m[k]);
    EXPECT_LT(gap, 1e-9);
}

TEST(Variational, InfeasibleDataIsRejected) {
    // slope 2 along a side exceeds every gradient in N
    DiscreteEnergyProblem p = lozenge_problem(make_domain(unit_square, {0.0, 2.0, 2.0, 0.0}), 0.25);
    const Mesh mesh = build_mesh(p);
    try {
        (void)mcshane_obstacles(p, mesh);
        FAIL() << "infeasible data must throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::validation);
    }
}

TEST(Variational, AffineDataGivesAffineMinimizer) {
    const Complex p(0.3, 0.2);
    const DiscreteEnergyProblem pr = lozenge_problem(affine_domain(unit_square, p), 1.0 / 16);
    const MinimizeResult r = minimize(pr);
    ASSERT_TRUE(r.converged) << r.status;
    for (std::size_t k = 0; k < r.h.size(); ++k)
        if (r.mesh.state[k] != node_outside) EXPECT_NEAR(r.h[k], dot(p, r.mesh.points[k]), 1e-8);
    EXPECT_NEAR(r.energy_trace.back(), lozenge_sigma(p.real(), p.imag()) * 1.0, 1e-8);
    EXPECT_TRUE(non_increasing(r.energy_trace));
    const LiquidRegion lr = extract_liquid_region(r.mesh, r.tri_grad, pr.polygon, 0.05);
    EXPECT_NEAR(lr.area, 1.0, 1e-12);  // every triangle has the interior gradient p
    // a corner gradient leaves no liquid at all
    const DiscreteEnergyProblem frozen = lozenge_problem(affine_domain(unit_square, {1, 0}), 1.0 / 8);
    const MinimizeResult rf = minimize(frozen);
    EXPECT_EQ(extract_liquid_region(rf.mesh, rf.tri_grad, frozen.polygon, 0.05).components, 0);
}

TEST(Variational, ComparisonPrinciple) {
    const DiscreteEnergyProblem a = lozenge_problem(affine_domain(unit_square, {0.2, 0.2}), 1.0 / 16);
    const DiscreteEnergyProblem b = lozenge_problem(affine_domain(unit_square, {0.3, 0.3}), 1.0 / 16);
    const MinimizeResult ra = minimize(a), rb = minimize(b);
    for (std::size_t k = 0; k < ra.h.size(); ++k)
        if (ra.mesh.state[k] != node_outside) EXPECT_LE(ra.h[k], rb.h[k] + 1e-6);
    // shifted natural data on the hexagon
    DiscreteEnergyProblem c = lozenge_problem(lozenge_hexagon(), 1.0 / 16), d = c;
    for (auto& v : d.domain.values) v += 0.01;
    const MinimizeResult rc = minimize(c), rd = minimize(d);
    for (std::size_t k = 0; k < rc.h.size(); ++k)
        if (rc.mesh.state[k] != node_outside) EXPECT_LE(rc.h[k], rd.h[k] + 1e-6);
}

TEST(Variational, HexagonLiquidRegionIsTheInscribedEllipse) {
    const double spacing = 1.0 / 64;
    const DiscreteEnergyProblem p = lozenge_problem(lozenge_hexagon(), spacing);
    const MinimizeResult r = minimize(p);
    ASSERT_TRUE(r.converged) << r.status;
    EXPECT_TRUE(non_increasing(r.energy_trace));
    for (std::size_t k = 0; k < r.h.size(); ++k) {
        if (r.mesh.state[k] == node_outside) continue;
        EXPECT_GE(r.h[k] - r.obstacles.m[k], -1e-9);
        EXPECT_GE(r.obstacles.M[k] - r.h[k], -1e-9);
    }
    for (const Complex g : r.tri_grad) EXPECT_LT(p.polygon.signed_distance(g), 1e-9);
    const double threshold = 0.05;
    const LiquidRegion lr = extract_liquid_region(r.mesh, r.tri_grad, p.polygon, threshold);
    EXPECT_EQ(lr.components, 1);
    EXPECT_EQ(lr.euler_characteristic, 1);
    for (double g : side_gaps(r.mesh, lr, p.domain)) EXPECT_LT(g, 2 * spacing);
    // the ellipse inscribed in an affine-regular hexagon covers pi / (2 sqrt 3) of it
    EXPECT_NEAR(lr.area / (pi / (2 * std::sqrt(3.0)) * p.domain.area()), 1.0, 0.05);
}

TEST(Variational, FrozenTrianglesNearBoundarySitAtCorners) {
    const DiscreteEnergyProblem p = lozenge_problem(lozenge_hexagon(), 1.0 / 32);
    const MinimizeResult r = minimize(p);
    const LiquidRegion lr = extract_liquid_region(r.mesh, r.tri_grad, p.polygon, 0.05);
    // the frozen caps at the two obtuse vertices, away from where the ellipse touches the sides
    int checked = 0;
    for (std::size_t t = 0; t < lr.label.size(); ++t) {
        const auto& tri = r.mesh.tris[t];
        const Complex c = (r.mesh.points[tri.v[0]] + r.mesh.points[tri.v[1]] + r.mesh.points[tri.v[2]]) / 3.0;
        if (std::min(std::abs(c), std::abs(c - Complex(1, 1))) > 0.08 || lr.label[t] < 0) continue;
        EXPECT_LT(lr.corner_distance[t], 2 * 0.05);
        ++checked;
    }
    EXPECT_GT(checked, 10);
}

TEST(Variational, AztecSquareGivesOneSimplyConnectedLiquidRegion) {
    const DiscreteEnergyProblem p = verify::aztec_problem(1.0 / 16);
    const MinimizeResult r = minimize(p);
    ASSERT_TRUE(r.converged) << r.status;
    EXPECT_TRUE(non_increasing(r.energy_trace));
    const LiquidRegion lr = extract_liquid_region(r.mesh, r.tri_grad, p.polygon, 0.05);
    EXPECT_EQ(lr.components, 1);
    EXPECT_EQ(lr.euler_characteristic, 1);
    EXPECT_LT(hausdorff_to_circle(lr.boundary, 0.0, 1.0), 0.15);
}

TEST(Variational, ThreadCountDoesNotChangeTheMinimizer) {
    DiscreteEnergyProblem p = lozenge_problem(lozenge_hexagon(), 1.0 / 16);
    MinimizeOptions o1, o3;
    o3.threads = 3;
    const MinimizeResult a = minimize(p, o1), b = minimize(p, o3);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.energy_trace, b.energy_trace);
}

TEST(Variational, InvalidProblemsAreRejected) {
    DiscreteEnergyProblem p = lozenge_problem(lozenge_hexagon(), 0.0);
    EXPECT_THROW(p.validate(), Error);
    p.spacing = 0.1;
    p.eps = 0.7;
    EXPECT_THROW(p.validate(), Error);
    p.eps = 1e-3;
    p.sigma = nullptr;
    EXPECT_THROW(p.validate(), Error);
}
