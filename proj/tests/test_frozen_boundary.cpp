#include <gtest/gtest.h>

#include <dimer/frozen_boundary.hpp>

#include <random>

using namespace dimer;

namespace {

FrozenBoundaryModel aztec_model() { return canonical_epicycloid(2).model; }

Complex random_disc(std::mt19937_64& rng, double r) {
    std::uniform_real_distribution<double> u(0, 1);
    return std::polar(r * std::sqrt(u(rng)), two_pi * u(rng));
}

// Brute-force self-intersection test of the closed curve R(e^{it}) sampled at n points.
bool curve_crosses_itself(const FrozenBoundaryModel& m, int n = 600) {
    std::vector<Complex> p(n);
    for (int k = 0; k < n; ++k) p[k] = boundary_param(m, std::polar(1.0, two_pi * (k + 0.25) / n));
    auto orient = [](Complex a, Complex b, Complex c) { return cross(b - a, c - a); };
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            const Complex a = p[i], b = p[(i + 1) % n], c = p[j], d = p[(j + 1) % n];
            if (orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0) return true;
        }
    return false;
}

}  // namespace

TEST(FrozenBoundary, CanonicalGammaCoefficients) {
    const auto d2 = canonical_epicycloid(2);
    ASSERT_EQ(d2.gamma.size(), 2u);
    EXPECT_EQ(d2.gamma[1], Complex(2, 0));
    const auto d3 = canonical_epicycloid(3);
    EXPECT_EQ(d3.gamma[1], Complex(1.5, 0));
    EXPECT_EQ(d3.gamma[2], Complex(1.5, 0));
    // p = gamma - z gamma' / d
    EXPECT_NEAR(std::abs(d3.p[1] - Complex(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(d3.p[2] - Complex(0.5, 0)), 0.0, 1e-15);
    EXPECT_THROW((void)canonical_epicycloid(1), Error);
}

TEST(FrozenBoundary, GammaFromCircleZerosIsSelfReflective) {
    const BlaschkeProduct b({{0.3, 0.0}, {-0.2, 0.4}, {0.1, -0.5}}, std::polar(1.0, 0.4));
    const auto g1 = gamma_from_circle_zeros(b, {0.5, 2.0, 4.1}, {1.0, 0.3});
    const auto g2 = gamma_from_circle_zeros(b, {1.3}, {0.2, 1.0}, Complex(0.3, 0.2));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, two_pi);
    for (const auto& g : {g1, g2}) {
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const Complex z = std::polar(1.0, u(rng));
            worst = std::max(worst, std::abs(g(z) - b(z) * std::conj(g(reflect(z)))));
        }
        EXPECT_LT(worst, 1e-12);
    }
    EXPECT_NEAR(std::abs(g2(Complex(0.3, 0.2))), 0.0, 1e-14);
    EXPECT_THROW((void)gamma_from_circle_zeros(b, {0.5, 2.0}, {1.0, 0.0}), Error);
    EXPECT_THROW((void)gamma_from_circle_zeros(b, {0.5}, {1.0, 0.0}, Complex(1.5, 0.0)), Error);
}

TEST(FrozenBoundary, KernelForAztecModel) {
    const auto m = aztec_model();
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        const Complex z = random_disc(rng, 0.99), w = random_disc(rng, 0.99);
        const Complex expect = 2.0 * z * w / (z + w);
        EXPECT_LT(std::abs(phi_kernel(m, z, w) - expect), 1e-12 * (1 + std::abs(expect)));
    }
    EXPECT_THROW((void)phi_kernel(m, {0.3, 0.1}, {-0.3, -0.1}), Error);  // B(z) = B(w) off the diagonal
}

TEST(FrozenBoundary, KernelSymmetryAndDiagonal) {
    const auto m = canonical_epicycloid(5).model;
    std::mt19937_64 rng(3);
    for (int k = 0; k < 100; ++k) {
        const Complex z = random_disc(rng, 0.95), w = random_disc(rng, 0.95);
        EXPECT_LT(std::abs(phi_kernel(m, z, w) - phi_kernel(m, w, z)), 1e-12 * (1 + std::abs(phi_kernel(m, z, w))));
    }
    for (const Complex z : {Complex(0.6, 0.3), Complex(-0.2, 0.7), std::polar(1.0, 0.4)})
        EXPECT_LT(std::abs(phi_kernel(m, z, z + 1e-6) - boundary_param(m, z)), 1e-5);
}

TEST(FrozenBoundary, TeleomorphicG) {
    const auto m = aztec_model();
    std::mt19937_64 rng(4);
    for (int k = 0; k < 200; ++k) {
        const Complex z = random_disc(rng, 0.999);
        EXPECT_LT(std::abs(teleomorphic_g(m, z) - 2.0 * z / (1.0 + std::norm(z))), 1e-12);
    }
    const auto m5 = canonical_epicycloid(5).model;
    EXPECT_EQ(teleomorphic_g(m5, 0.0), Complex(0, 0));
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 100; ++k) {
        const Complex z = std::polar(0.3 + 0.6 * u(rng), two_pi * u(rng));
        EXPECT_LT(std::abs(teleomorphic_g(m5, reflect(z)) - teleomorphic_g(m5, z)), 1e-10);
        // the off-diagonal kernel gives the same map
        EXPECT_LT(std::abs(phi_kernel(m5, z, reflect(z)) - teleomorphic_g(m5, z)), 1e-10);
    }
}

TEST(FrozenBoundary, BoundaryParametrizationExamples) {
    const auto m2 = aztec_model();
    const auto m3 = canonical_epicycloid(3).model;
    for (int k = 0; k < 16; ++k) {
        const Complex z = std::polar(1.0, two_pi * k / 16);
        EXPECT_LT(std::abs(boundary_param(m2, z) - z), 1e-14);
        EXPECT_LT(std::abs(boundary_param(m3, z) - (z + 0.5 * z * z)), 1e-14);
    }
    EXPECT_LT(std::abs(boundary_param(m3, -1.0) - Complex(-0.5, 0)), 1e-15);
    EXPECT_THROW((void)boundary_param(m2, 0.0), Error);  // critical point of B
}

TEST(FrozenBoundary, CharacterizationOfCanonicalModels) {
    for (int d = 2; d <= 8; ++d) {
        const auto rep = check_characterization(canonical_epicycloid(d).model);
        EXPECT_TRUE(rep.pass()) << d;
        EXPECT_LT(rep.reflect_residual, 1e-10);
        EXPECT_EQ(rep.winding, 1);
    }
}

TEST(FrozenBoundary, BrokenGammaFailsSelfReflectivity) {
    FrozenBoundaryModel m;
    m.B = BlaschkeProduct::power(2);
    m.gamma = Rational(Polynomial(std::vector<Complex>{0, 0, 0, 1}), Polynomial(std::vector<Complex>{1}));
    const auto rep = check_characterization(m);
    EXPECT_FALSE(rep.self_reflective);
    EXPECT_FALSE(rep.pass());
    // R = -z^3/2, so the residual on the circle is (3/2)|z^2 - z^-2| = 3|sin 2t|
    EXPECT_NEAR(rep.reflect_residual, 3.0, 1e-4);
    const Complex z = std::polar(1.0, 0.3);
    EXPECT_NEAR(std::abs(boundary_param_deriv(m, z) - m.B(z) / (z * z) * std::conj(boundary_param_deriv(m, reflect(z)))),
                3.0 * std::sin(0.6), 1e-12);
}

TEST(FrozenBoundary, MergedCuspsBreakUnivalence) {
    const auto close = make_univalent_polynomial_model(4, {0.0, 0.5}, false);
    ASSERT_TRUE(curve_crosses_itself(close.model));
    EXPECT_FALSE(check_characterization(close.model).univalent);
    EXPECT_THROW((void)make_univalent_polynomial_model(4, {0.0, 0.5}), Error);
    const auto apart = make_univalent_polynomial_model(4, {0.0, pi}, false);
    ASSERT_FALSE(curve_crosses_itself(apart.model));
    EXPECT_TRUE(check_characterization(apart.model).univalent);
}

TEST(FrozenBoundary, CuspExamples) {
    EXPECT_TRUE(find_cusps(aztec_model()).empty());
    const auto c3 = find_cusps(canonical_epicycloid(3).model);
    ASSERT_EQ(c3.size(), 1u);
    EXPECT_NEAR(std::abs(std::remainder(c3[0].angle - pi, two_pi)), 0.0, 1e-10);
    EXPECT_LT(std::abs(c3[0].point - Complex(-0.5, 0)), 1e-10);
    const auto c4 = find_cusps(canonical_epicycloid(4).model);
    ASSERT_EQ(c4.size(), 2u);
    std::vector<Complex> pts{c4[0].point, c4[1].point};
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
    EXPECT_LT(std::abs(pts[0] - Complex(0, -2.0 / 3)), 1e-10);
    EXPECT_LT(std::abs(pts[1] - Complex(0, 2.0 / 3)), 1e-10);
    for (int d = 2; d <= 8; ++d) EXPECT_EQ(static_cast<int>(find_cusps(canonical_epicycloid(d).model).size()), d - 2);
}

TEST(FrozenBoundary, TangentIdentity) {
    EXPECT_LT(tangent_identity_check(aztec_model()), 1e-12);
    EXPECT_LT(tangent_identity_check(canonical_epicycloid(3).model), 1e-8);
    EXPECT_LT(tangent_identity_check(canonical_epicycloid(6).model), 1e-8);
}

TEST(FrozenBoundary, UnivalentPolynomialModels) {
    // d = 3 with the critical angle at pi is the canonical cardioid
    const auto c = make_univalent_polynomial_model(3, {pi});
    for (int k = 0; k < 8; ++k) {
        const Complex z = std::polar(1.0, two_pi * k / 8);
        EXPECT_LT(std::abs(boundary_param(c.model, z) - (z + 0.5 * z * z)), 1e-12);
    }
    const auto q = make_univalent_polynomial_model(4, {pi / 2, 3 * pi / 2});
    for (int k = 0; k < 8; ++k) {
        const Complex z = std::polar(1.0, two_pi * k / 8);
        EXPECT_LT(std::abs(boundary_param(q.model, z) - (z + z * z * z / 3.0)), 1e-12);
    }
    // rotated cardioid: the single cusp moves to angle 0
    const auto r = make_univalent_polynomial_model(3, {0.0});
    const auto cusps = find_cusps(r.model);
    ASSERT_EQ(cusps.size(), 1u);
    EXPECT_LT(std::abs(std::remainder(cusps[0].angle, two_pi)), 1e-9);
    // coefficient relation and self-inversive derivative
    for (const auto& u : {c, q, make_univalent_polynomial_model(6, {0.3, 1.9, 3.3, 5.0})}) {
        const int d = static_cast<int>(u.p.size());
        EXPECT_LT(std::abs(std::conj(u.p[1]) - static_cast<double>(d - 1) * u.p[static_cast<std::size_t>(d - 1)]), 1e-12);
        const Polynomial dp = Polynomial(u.p).derivative();
        for (int k = 0; k < 50; ++k) {
            const Complex z = std::polar(0.5 + 0.02 * k, 0.37 * k);
            EXPECT_LT(std::abs(dp(z) - std::pow(z, d - 2) * std::conj(dp(reflect(z)))), 1e-12 * (1 + std::abs(dp(z))));
        }
    }
    EXPECT_THROW((void)make_univalent_polynomial_model(4, {1.0}), Error);
    EXPECT_THROW((void)make_univalent_polynomial_model(4, {1.0, 1.0}), Error);
}

TEST(FrozenBoundary, TangentTurnsMonotonicallyBetweenCusps) {
    const auto m = canonical_epicycloid(5).model;
    const auto cusps = find_cusps(m);
    const int n = 1000;
    double prev = 0.0;
    bool have = false;
    for (int k = 0; k <= n; ++k) {
        const double t = two_pi * k / n;
        bool near = false;
        for (const auto& c : cusps) near = near || std::abs(std::remainder(t - c.angle, two_pi)) < 2.0 * two_pi / n;
        const Complex z = std::polar(1.0, t);
        const Complex tau = Complex(0, 1) * z * boundary_param_deriv(m, z);
        if (near) {
            have = false;
            continue;
        }
        // tangent direction of the oriented curve, compared modulo pi
        const double a = std::arg(tau * tau);
        if (have) EXPECT_GT(std::remainder(a - prev, two_pi), 0.0) << t;
        prev = a;
        have = true;
    }
}
