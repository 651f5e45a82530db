#include <gtest/gtest.h>

#include <dimer/height_field.hpp>

#include <random>

using namespace dimer;

namespace {

FrozenBoundaryModel aztec_model() { return canonical_epicycloid(2).model; }

Complex random_disc(std::mt19937_64& rng, double r) {
    std::uniform_real_distribution<double> u(0, 1);
    return std::polar(r * std::sqrt(u(rng)), two_pi * u(rng));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
        sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST(HeightField, InvertGExamples) {
    const auto m = aztec_model();
    const Complex z = invert_g(m, {0.5, 0.0});
    EXPECT_NEAR(z.real(), 2.0 - std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(z.imag(), 0.0, 1e-12);
    EXPECT_LT(std::abs(invert_g(m, {0.0, 0.0})), 1e-14);
    EXPECT_THROW((void)invert_g(m, {1.5, 0.0}), Error);
}

TEST(HeightField, InvertGRoundTrip) {
    for (int d : {3, 5}) {
        const auto m = canonical_epicycloid(d).model;
        std::mt19937_64 rng(static_cast<std::uint64_t>(d));
        for (int k = 0; k < 500; ++k) {
            const Complex w = teleomorphic_g(m, random_disc(rng, 0.98));
            EXPECT_LT(std::abs(teleomorphic_g(m, invert_g(m, w)) - w), 1e-9);
        }
    }
}

TEST(HeightField, AztecClosedForms) {
    EXPECT_EQ(aztec_f(0.0), Complex(0, 0));
    EXPECT_NEAR(std::abs(aztec_f({0.6, 0.0}) - Complex(1.0 / 3, 0)), 0.0, 1e-15);
    const FEvaluator f(aztec_model(), StructureCoefficient::domino());
    std::mt19937_64 rng(1);
    for (int k = 0; k < 200; ++k) {
        const Complex z = random_disc(rng, 0.99);
        EXPECT_LT(std::abs(f(z) - aztec_f(z)), 1e-10);
    }
    EXPECT_NEAR(aztec_density(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(aztec_density(0, 1 / std::sqrt(2.0) - 1e-12), 0.5, 1e-6);
    EXPECT_EQ(aztec_density(0, 1.2), 1.0);
    EXPECT_EQ(aztec_density(0, -1.2), 0.0);
}

TEST(HeightField, GradientExamples) {
    const ArcAssignment equal{ArcPartition::equal(3), lozenge_polygon()};
    EXPECT_LT(std::abs(equal.gradient(0.0) - Complex(1.0 / 3, 1.0 / 3)), 1e-15);
    const FEvaluator f(aztec_model(), StructureCoefficient::domino());
    const ArcAssignment a = aztec_assignment();
    const Complex w = f(0.0);
    EXPECT_NEAR(a.arcs.measure(0, w), 0.25, 1e-15);  // the arc carrying the north corner
    EXPECT_EQ(a.arcs.labels()[0], 1);
    EXPECT_EQ(a.polygon.corner(1), Complex(0, 1));
    // north-density component against the closed form
    std::mt19937_64 rng(2);
    for (int k = 0; k < 200; ++k) {
        const Complex z = random_disc(rng, 0.98);
        EXPECT_NEAR(a.arcs.measure(0, f(z)), aztec_density(z.real(), z.imag()), 1e-8);
    }
}

TEST(HeightField, GradientTendsToCornerAtFrozenBoundary) {
    // the approach is a square-root law in the distance to the boundary
    const FEvaluator f(aztec_model(), StructureCoefficient::domino());
    const ArcAssignment a = aztec_assignment();
    std::vector<double> dist, err;
    for (double d : {1e-4, 1e-5, 1e-6, 1e-7}) {
        dist.push_back(d);
        err.push_back(std::abs(grad_h(f, a, {0.0, 1.0 - d}) - Complex(0, 1)));
    }
    EXPECT_LT(err.back(), 1e-3);
    EXPECT_NEAR(fit_slope(dist, err), 0.5, 0.05);
    const FEvaluator fl(aztec_model(), StructureCoefficient::lozenge());
    EXPECT_LT(std::abs(grad_h(fl, lozenge_assignment(), std::polar(1.0 - 1e-7, pi / 6))), 1e-3);
}

TEST(HeightField, FMovesToTheCircleMonotonicallyAlongRays) {
    for (int d : {2, 3, 5}) {
        const auto m = canonical_epicycloid(d).model;
        const FEvaluator f(m, StructureCoefficient::lozenge());
        for (double t : {0.3, 1.2, 2.0}) {
            const Complex target = boundary_param(m, std::polar(1.0, t));
            const Complex centre = teleomorphic_g(m, 0.0);
            double prev = 0.0;
            Complex seed{0, 0};
            for (int k = 0; k <= 20; ++k) {
                const double r = 0.99 + 0.0099 * k / 20;
                const double v = std::abs(f(centre + r * (target - centre), &seed));
                EXPECT_GT(v, prev);
                EXPECT_LT(v, 1.0);
                prev = v;
            }
        }
    }
}

TEST(HeightField, HolderExponents) {
    const auto m = canonical_epicycloid(3).model;
    const FEvaluator f(m, StructureCoefficient::lozenge());
    // smooth boundary point R(1) = 3/2, approached along the inward normal
    std::vector<double> x, y;
    for (int k = 0; k <= 10; ++k) {
        const double t = std::pow(10.0, -6.0 + 0.3 * k);
        x.push_back(t);
        y.push_back(std::abs(f({1.5 - t, 0.0}) - m.B(1.0)));
    }
    EXPECT_NEAR(fit_slope(x, y), 0.5, 0.1);
    // the cusp R(-1) = -1/2, approached through the compressed directions
    const auto cusps = find_cusps(m);
    ASSERT_EQ(cusps.size(), 1u);
    const Cusp c = cusps[0];
    for (double s : {1.0, -1.0}) {
        x.clear();
        y.clear();
        for (int k = 0; k <= 8; ++k) {
            const double rho = std::pow(10.0, -2.0 + k / 8.0);
            const Complex z = teleomorphic_g(m, c.preimage - rho * c.preimage * std::polar(1.0, s * pi / 6));
            x.push_back(std::abs(z - c.point));
            y.push_back(std::abs(f(z) - m.B(c.preimage)));
        }
        EXPECT_NEAR(fit_slope(x, y), 1.0 / 3.0, 0.07);
    }
}

TEST(HeightField, IntegrateOnDiscIsCurlFree) {
    const FEvaluator f(aztec_model(), StructureCoefficient::lozenge());
    GridSpec g;
    g.spacing = 1.0 / 128;
    g.x0 = g.y0 = -1.1;
    g.nx = g.ny = 283;
    g.frozen_band = 0.05;
    const HeightField hf = integrate_h(f, lozenge_assignment(), g, 2);
    EXPECT_LT(hf.max_interior_curl, 1e-6);
    const GradientPolygon n = lozenge_polygon();
    std::size_t liquid = 0;
    for (std::size_t k = 0; k < hf.mask.size(); ++k) {
        if (hf.mask[k] == mask_liquid) {
            ++liquid;
            EXPECT_LT(n.signed_distance(hf.grad[k]), 0.0);
            EXPECT_LT(std::abs(hf.point(static_cast<int>(k % g.nx), static_cast<int>(k / g.nx))), 1.0);
        } else if (hf.mask[k] >= mask_frozen) {
            EXPECT_EQ(hf.grad[k], n.corner(hf.mask[k] - mask_frozen));
        }
    }
    // liquid points fill the unit disc
    EXPECT_NEAR(liquid * g.spacing * g.spacing, pi, 0.05);
}

TEST(HeightField, ConstantAssignmentGivesAffineHeight) {
    const FEvaluator f(canonical_epicycloid(3).model, StructureCoefficient::lozenge());
    const Complex p(0, 1);
    const ArcAssignment a{ArcPartition({0.0, 2.0}, {2, 2}), lozenge_polygon()};
    GridSpec g;
    g.spacing = 0.05;
    g.x0 = -1.0;
    g.y0 = -1.2;
    g.nx = 56;
    g.ny = 49;
    const HeightField hf = integrate_h(f, a, g);
    std::size_t anchor = hf.mask.size();
    for (std::size_t k = 0; k < hf.mask.size(); ++k)
        if (hf.mask[k] == mask_liquid && hf.h[k] == 0.0) anchor = k;
    ASSERT_LT(anchor, hf.mask.size());
    const Complex za = hf.point(static_cast<int>(anchor % g.nx), static_cast<int>(anchor / g.nx));
    for (std::size_t k = 0; k < hf.mask.size(); ++k) {
        if (hf.mask[k] != mask_liquid) continue;
        const Complex z = hf.point(static_cast<int>(k % g.nx), static_cast<int>(k / g.nx));
        EXPECT_NEAR(hf.h[k], dot(p, z - za), 1e-12);
        EXPECT_LT(std::abs(hf.grad[k] - p), 1e-12);
    }
}

TEST(HeightField, ThreadCountDoesNotChangeTheField) {
    const FEvaluator f(canonical_epicycloid(4).model, StructureCoefficient::lozenge());
    GridSpec g;
    g.spacing = 0.04;
    g.x0 = g.y0 = -1.6;
    g.nx = g.ny = 81;
    const HeightField a = integrate_h(f, lozenge_assignment(), g, 1);
    const HeightField b = integrate_h(f, lozenge_assignment(), g, 3);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.grad, b.grad);
}

TEST(HeightField, PokrovskyTalapovExponent) {
    const FEvaluator f(aztec_model(), StructureCoefficient::lozenge());
    std::vector<double> x, y;
    for (int k = 0; k <= 10; ++k) {
        const double d = std::pow(10.0, -4.0 + 0.2 * k);
        x.push_back(d);
        y.push_back(std::abs(height_excess_along_normal(f, lozenge_assignment(), pi / 6, d)));
    }
    EXPECT_NEAR(fit_slope(x, y), 1.5, 0.15);
}
