#include <gtest/gtest.h>

#include <dimer/aztec.hpp>
#include <dimer/height_field.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace dimer;

namespace {

// Fraction of diamond bins outside radius r whose most frequent domino type
// appears with frequency below `frozen`.
double unfrozen_fraction_outside(const EmpiricalField& ef, double r, double frozen) {
    int outside = 0, unfrozen = 0;
    for (int by = 0; by < ef.bins; ++by)
        for (int bx = 0; bx < ef.bins; ++bx) {
            const std::size_t k = ef.index(bx, by);
            if (ef.cells[k] != ef.bin * ef.bin || std::abs(ef.center(bx, by)) < r) continue;
            ++outside;
            const double top = std::max({ef.north[k], ef.south[k], ef.east[k], ef.west[k]});
            if (top < frozen) ++unfrozen;
        }
    return static_cast<double>(unfrozen) / outside;
}

}  // namespace

TEST(Aztec, EnumerationCounts) {
    for (int n = 1; n <= 4; ++n) {
        const auto all = enumerate_tilings(n);
        EXPECT_EQ(all.size(), std::size_t{1} << (n * (n + 1) / 2)) << n;
        std::set<std::string> keys;
        for (const auto& t : all) {
            EXPECT_TRUE(t.valid());
            keys.insert(tiling_key(t));
        }
        EXPECT_EQ(keys.size(), all.size());
    }
}

TEST(Aztec, OrderOneIsFair) {
    std::map<std::string, int> freq;
    for (std::uint64_t s = 0; s < 10000; ++s) ++freq[tiling_key(sample_tiling(1, s))];
    ASSERT_EQ(freq.size(), 2u);
    for (const auto& [k, c] : freq) EXPECT_NEAR(c / 10000.0, 0.5, 0.02);
}

TEST(Aztec, OrderTwoIsUniform) {
    std::map<std::string, int> freq;
    for (const auto& t : enumerate_tilings(2)) freq[tiling_key(t)] = 0;
    const int samples = 100000;
    for (int s = 0; s < samples; ++s) {
        const auto key = tiling_key(sample_tiling(2, static_cast<std::uint64_t>(s) * 7919 + 1));
        ASSERT_TRUE(freq.count(key));
        ++freq[key];
    }
    double chi2 = 0.0;
    const double expect = samples / 8.0;
    for (const auto& [k, c] : freq) chi2 += (c - expect) * (c - expect) / expect;
    EXPECT_LT(chi2, 18.475);  // 99th percentile of chi-square with 7 degrees of freedom
}

TEST(Aztec, SamplesAreValidAndReachTheEnumeratedSet) {
    std::set<std::string> all;
    for (const auto& t : enumerate_tilings(3)) all.insert(tiling_key(t));
    std::set<std::string> seen;
    for (std::uint64_t s = 0; s < 3000; ++s) {
        const auto t = sample_tiling(3, s);
        ASSERT_TRUE(t.valid());
        const auto key = tiling_key(t);
        EXPECT_TRUE(all.count(key));
        seen.insert(key);
    }
    EXPECT_EQ(seen.size(), 64u);
    for (int n : {10, 37, 64}) EXPECT_TRUE(sample_tiling(n, 99).valid()) << n;
}

TEST(Aztec, SeedDeterminism) {
    const auto a = sample_tiling(40, 12345), b = sample_tiling(40, 12345), c = sample_tiling(40, 12346);
    EXPECT_EQ(a.dominoes, b.dominoes);
    EXPECT_NE(a.dominoes, c.dominoes);
    std::ostringstream sa, sb;
    write_tiling(sa, a);
    write_tiling(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    const std::string text = sa.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 40 * 41 + 1);
}

TEST(Aztec, EmpiricalDensityExamples) {
    const EmpiricalField ef = empirical_density(64, 200, 2024, 4, 2);
    auto bin_at = [&](double u, double v) {
        const int bx = static_cast<int>((u / ef.scale() + ef.n) / ef.bin), by = static_cast<int>((v / ef.scale() + ef.n) / ef.bin);
        return ef.index(bx, by);
    };
    EXPECT_NEAR(ef.north[bin_at(0.0, 0.0)], 0.25, 0.05);
    // (0, +-0.9) lies inside the disc, so compare with the analytic density there
    EXPECT_NEAR(ef.north[bin_at(0.0, 0.9)], aztec_density(0.0, 0.9), 0.05);
    EXPECT_NEAR(ef.north[bin_at(0.0, -0.9)], aztec_density(0.0, -0.9), 0.05);
    // the frozen caps start outside the unit circle
    EXPECT_GT(ef.north[bin_at(0.0, 1.15)], 0.95);
    EXPECT_LT(ef.north[bin_at(0.0, -1.15)], 0.05);
    for (std::size_t k = 0; k < ef.north.size(); ++k) {
        if (ef.cells[k] == 0) continue;
        EXPECT_GE(ef.north[k], 0.0);
        EXPECT_LE(ef.north[k], 1.0);
        EXPECT_NEAR(ef.north[k] + ef.south[k] + ef.east[k] + ef.west[k], 1.0, 1e-12);
    }
}

TEST(Aztec, EmpiricalFieldDoesNotDependOnThreads) {
    const EmpiricalField a = empirical_density(16, 20, 5, 4, 1), b = empirical_density(16, 20, 5, 4, 3);
    EXPECT_EQ(a.north, b.north);
    EXPECT_EQ(a.west, b.west);
    for (std::size_t k = 0; k < a.mean_height.size(); ++k)
        if (!std::isnan(a.mean_height[k])) EXPECT_EQ(a.mean_height[k], b.mean_height[k]);
}

TEST(Aztec, MeanHeightGradientLiesInN) {
    const EmpiricalField ef = empirical_density(48, 100, 77, 4, 2);
    int checked = 0;
    for (int Y = -20; Y <= 20; Y += 4)
        for (int X = -20; X <= 20; X += 4) {
            const Complex u(X * ef.scale(), Y * ef.scale());
            if (std::abs(u) > 0.8) continue;
            const Complex g = ef.height_gradient(X, Y, 2);
            // |gx| + |gy| <= 1 up to sampling noise
            EXPECT_LT(std::abs(g.real()) + std::abs(g.imag()), 1.0 + 0.15) << X << "," << Y;
            ++checked;
        }
    EXPECT_GT(checked, 30);
    // each frozen cap sits at a corner of N
    const int r = static_cast<int>(1.15 * 48 / std::sqrt(2.0));
    EXPECT_LT(std::abs(ef.height_gradient(0, r) - Complex(0, 1)), 0.05);
    EXPECT_LT(std::abs(ef.height_gradient(0, -r) - Complex(0, -1)), 0.05);
    EXPECT_LT(std::abs(ef.height_gradient(r, 0) - Complex(-1, 0)), 0.05);
    EXPECT_LT(std::abs(ef.height_gradient(-r, 0) - Complex(1, 0)), 0.05);
}

TEST(Aztec, ArcticCircleConcentrates) {
    std::vector<double> frac;
    for (int n : {16, 32, 64}) frac.push_back(unfrozen_fraction_outside(empirical_density(n, 60, 31, 2), 1.05, 0.99));
    EXPECT_GT(frac[0], frac[1]);
    EXPECT_GT(frac[1], frac[2]);
}

TEST(Aztec, RejectsBadArguments) {
    EXPECT_THROW((void)sample_tiling(0, 1), Error);
    EXPECT_THROW((void)empirical_density(10, 5, 1, 3), Error);
    EXPECT_THROW((void)enumerate_tilings(5), Error);
}
