#include <gtest/gtest.h>

#include <dimer/surface_tension.hpp>

#include <numeric>
#include <random>

using namespace dimer;

namespace {

// -int_0^theta log(2 sin x) dx for 0 < theta <= 2.5: the log x part is integrated
// exactly and the smooth remainder log(sin x / x) by composite Simpson.
double lobachevsky_oracle(double theta, int n = 4000) {
    auto f = [](double x) { return x == 0.0 ? 0.0 : std::log(std::sin(x) / x); };
    const double h = theta / n;
    double s = f(0.0) + f(theta);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return -(theta * std::log(2.0) + theta * std::log(theta) - theta + s * h / 3.0);
}

Complex random_in_triangle(std::mt19937_64& rng, double margin) {
    std::uniform_real_distribution<double> u(0, 1);
    for (;;) {
        const double s = u(rng), t = u(rng);
        if (s > margin && t > margin && 1 - s - t > margin) return {s, t};
    }
}

}  // namespace

TEST(SurfaceTension, LobachevskyExamples) {
    EXPECT_NEAR(lobachevsky(0.0), 0.0, 1e-15);
    EXPECT_LT(std::abs(lobachevsky(pi)), 1e-9);
    EXPECT_NEAR(lobachevsky(pi / 3), lobachevsky_oracle(pi / 3), 1e-9);
    EXPECT_NEAR(lobachevsky(pi / 3), 0.3383138688, 1e-9);
}

TEST(SurfaceTension, LobachevskyAgainstQuadratureAndSymmetries) {
    for (double t = 0.05; t < 2.5; t += 0.173) {
        EXPECT_NEAR(lobachevsky(t), lobachevsky_oracle(t), 1e-9) << t;
        EXPECT_NEAR(lobachevsky(-t), -lobachevsky(t), 1e-12);
        EXPECT_NEAR(lobachevsky(t + pi), lobachevsky(t), 1e-10);
        EXPECT_NEAR(lobachevsky(t), lobachevsky_series(t), 1e-10);
    }
    // pi/6 is the global maximum
    for (double t = 0.01; t < pi; t += 0.01) EXPECT_LE(lobachevsky(t), lobachevsky(pi / 6) + 1e-12);
    EXPECT_NEAR(lobachevsky(pi / 6), 1.5 * lobachevsky(pi / 3), 1e-12);
}

TEST(SurfaceTension, LozengeSigmaExamples) {
    EXPECT_NEAR(lozenge_sigma(1.0 / 3, 1.0 / 3), -3.0 / (pi * pi) * lobachevsky_oracle(pi / 3), 1e-10);
    EXPECT_NEAR(lozenge_sigma(1.0 / 3, 1.0 / 3), -0.1028351, 1e-6);
    EXPECT_DOUBLE_EQ(lozenge_sigma(0.2, 0.5), lozenge_sigma(0.5, 0.2));
    // sigma -> 0 at a corner, like eps log eps
    const double e = 1e-4;
    EXPECT_NEAR(lozenge_sigma(e, e), -(2 * lobachevsky_oracle(pi * e) - lobachevsky_oracle(2 * pi * e)) / (pi * pi), 1e-12);
    EXPECT_LT(std::abs(lozenge_sigma(e, e)), 1e-4);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 200; ++k) {
        const Complex p = random_in_triangle(rng, 1e-3);
        EXPECT_LE(lozenge_sigma(p.real(), p.imag()), 0.0);
    }
}

TEST(SurfaceTension, LozengeGradientExamples) {
    EXPECT_NEAR(std::abs(lozenge_grad_sigma(1.0 / 3, 1.0 / 3)), 0.0, 1e-15);
    const Complex g = lozenge_grad_sigma(0.5, 0.25);
    EXPECT_NEAR(g.real(), std::log(2.0) / (2 * pi), 1e-12);
    EXPECT_NEAR(g.imag(), 0.0, 1e-12);
    const double h = 1e-5;
    const Complex fd((lozenge_sigma(0.4 + h, 0.3) - lozenge_sigma(0.4 - h, 0.3)) / (2 * h),
                     (lozenge_sigma(0.4, 0.3 + h) - lozenge_sigma(0.4, 0.3 - h)) / (2 * h));
    EXPECT_LT(std::abs(fd - lozenge_grad_sigma(0.4, 0.3)), 1e-6);
    const LozengeSurfaceTension st;
    try {
        (void)st.grad({0.5, 0.0});
        FAIL() << "boundary gradient must throw";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::singularity);
    }
}

TEST(SurfaceTension, LozengeHessianMatchesGradientDifferences) {
    std::mt19937_64 rng(2);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const Complex p = random_in_triangle(rng, 0.05);
        const auto H = lozenge_hessian(p.real(), p.imag());
        const Complex dx = (lozenge_grad_sigma(p.real() + h, p.imag()) - lozenge_grad_sigma(p.real() - h, p.imag())) / (2 * h);
        const Complex dy = (lozenge_grad_sigma(p.real(), p.imag() + h) - lozenge_grad_sigma(p.real(), p.imag() - h)) / (2 * h);
        EXPECT_NEAR(H[0], dx.real(), 1e-5 * (1 + std::abs(H[0])));
        EXPECT_NEAR(H[1], dx.imag(), 1e-5 * (1 + std::abs(H[1])));
        EXPECT_NEAR(H[2], dy.imag(), 1e-5 * (1 + std::abs(H[2])));
        EXPECT_GT(H[0], 0.0);
        EXPECT_NEAR(H[0] * H[2] - H[1] * H[1], 1.0, 1e-9);
    }
}

TEST(SurfaceTension, GradientMapIsMonotone) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 500; ++k) {
        const Complex p = random_in_triangle(rng, 1e-3), q = random_in_triangle(rng, 1e-3);
        EXPECT_GT(dot(lozenge_grad_sigma(p.real(), p.imag()) - lozenge_grad_sigma(q.real(), q.imag()), p - q), 0.0);
    }
}

TEST(SurfaceTension, GradientBlowsUpLogarithmically) {
    // inward normals at the midpoints of the edge s = 0 and of the hypotenuse
    struct Case {
        Complex mid, normal;
        double rate;
    };
    for (const Case c : {Case{{0, 0.5}, {1, 0}, 1.0 / pi}, Case{{0.5, 0.5}, Complex(-1, -1) / std::sqrt(2.0), std::sqrt(2.0) / pi}}) {
        std::vector<double> x, y;
        for (int k = 0; k <= 12; ++k) {
            const double d = std::pow(10.0, -5.0 + 3.0 * k / 12);
            const Complex p = c.mid + d * c.normal;
            x.push_back(-std::log(d));
            y.push_back(std::abs(lozenge_grad_sigma(p.real(), p.imag())));
        }
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size(), my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            sxy += (x[k] - mx) * (y[k] - my);
            sxx += (x[k] - mx) * (x[k] - mx);
        }
        EXPECT_NEAR(sxy / sxx, c.rate, 0.15 * c.rate);
    }
}

TEST(SurfaceTension, HarmonicUAtCentre) {
    const auto sym = calibrate_symmetric(lozenge_polygon());
    EXPECT_NEAR(std::abs(sym.U(0.0) - Complex(1.0 / 3, 1.0 / 3)), 0.0, 1e-15);
    const HarmonicSurfaceTension uneven(lozenge_polygon(), ArcPartition({0.0, pi, 1.5 * pi}, {0, 1, 2}), {0, 0});
    EXPECT_NEAR(std::abs(uneven.U(0.0) - Complex(0.25, 0.25)), 0.0, 1e-15);
    EXPECT_THROW((void)sym.U({1.0, 0.0}), Error);
}

TEST(SurfaceTension, HarmonicUStaysInsideAndIsInjective) {
    const auto st = calibrate_symmetric(domino_polygon());
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 1000; ++k) {
        const Complex z = std::polar(std::sqrt(u(rng)) * 0.999999, two_pi * u(rng));
        EXPECT_LT(st.polygon().signed_distance(st.U(z)), -1e-12);
    }
    std::vector<Complex> pre, img;
    for (int i = 1; i <= 30; ++i)
        for (int j = 0; j < 40; ++j) {
            pre.push_back(std::polar(0.98 * i / 30.0, two_pi * j / 40.0));
            img.push_back(st.U(pre.back()));
        }
    for (std::size_t a = 0; a < pre.size(); ++a)
        for (std::size_t b = a + 1; b < pre.size(); ++b)
            if (std::abs(pre[a] - pre[b]) > 1e-6) ASSERT_GT(std::abs(img[a] - img[b]), 1e-9);
}

TEST(SurfaceTension, SymmetricTriangleMatchesLozengeClosedForm) {
    const auto st = calibrate_symmetric(lozenge_polygon());
    EXPECT_NEAR(std::abs(st.grad_at_zeta(0.0)), 0.0, 1e-14);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 300; ++k) {
        const Complex z = std::polar(0.95 * std::sqrt(u(rng)), two_pi * u(rng));
        const Complex p = st.U(z);
        EXPECT_LT(std::abs(st.grad_at_zeta(z) - lozenge_grad_sigma(p.real(), p.imag())), 1e-6);
        EXPECT_NEAR(st.sigma_at_zeta(z), lozenge_sigma(p.real(), p.imag()), 1e-6);
        // the same value through the point-based interface (inverse of U)
        EXPECT_LT(std::abs(st.grad(p) - lozenge_grad_sigma(p.real(), p.imag())), 1e-6);
    }
}

TEST(SurfaceTension, HarmonicPairSatisfiesCauchyRiemann) {
    // componentwise, Re(i grad sigma o U) and Re U (likewise Im) are harmonic conjugates
    const auto st = calibrate_symmetric(domino_polygon());
    const double h = 1e-4;
    int orientation = 0;
    for (const Complex z : {Complex(0.1, 0.2), Complex(-0.4, 0.3), Complex(0.5, -0.5), Complex(0.0, -0.8)}) {
        auto A = [&](Complex q) { return Complex(0, 1) * st.grad_at_zeta(q); };
        auto B = [&](Complex q) { return st.U(q); };
        const Complex Ax = (A(z + h) - A(z - h)) / (2 * h), Ay = (A(z + Complex(0, h)) - A(z - Complex(0, h))) / (2 * h);
        const Complex Bx = (B(z + h) - B(z - h)) / (2 * h), By = (B(z + Complex(0, h)) - B(z - Complex(0, h))) / (2 * h);
        for (int c = 0; c < 2; ++c) {
            auto comp = [c](Complex v) { return c == 0 ? v.real() : v.imag(); };
            const double plus = std::abs(comp(Ax) - comp(By)) + std::abs(comp(Ay) + comp(Bx));
            const double minus = std::abs(comp(Ax) + comp(By)) + std::abs(comp(Ay) - comp(Bx));
            const int o = plus < minus ? 1 : -1;
            if (orientation == 0) orientation = o;
            EXPECT_EQ(o, orientation);
            EXPECT_LT(std::min(plus, minus), 1e-6 * (1 + std::abs(Ax) + std::abs(Bx)));
        }
    }
}

TEST(SurfaceTension, HarmonicInverseRoundTrip) {
    const auto st = calibrate_symmetric(domino_polygon());
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 200; ++k) {
        const Complex z = std::polar(0.97 * std::sqrt(u(rng)), two_pi * u(rng));
        EXPECT_LT(std::abs(st.inverse(st.U(z)) - z), 1e-9);
    }
}

TEST(SurfaceTension, CalibrationExamples) {
    const auto tri = calibrate_symmetric(lozenge_polygon());
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(tri.arcs().length(k), two_pi / 3, 1e-15);
    const auto sq = calibrate_symmetric(domino_polygon());
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(sq.arcs().length(k), pi / 2, 1e-15);
    const CalibrationResult fit = calibrate_arcs(lozenge_polygon(), {0.0, 0.0, 0.0}, {0.0, 2.3, 4.0});
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(fit.model.arcs().length(k), two_pi / 3, 1e-4);
    EXPECT_LT(fit.residual, 1e-8);
}
