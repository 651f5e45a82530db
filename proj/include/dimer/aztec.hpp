#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"

namespace dimer {

// ----------------------------------------------------------------------------
// Counter-based RNG (splitmix64 finalizer over a keyed counter)
// ----------------------------------------------------------------------------

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stateless stream: draw(round, counter) depends only on (seed, round, counter).
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}
    [[nodiscard]] constexpr std::uint64_t draw(std::uint64_t round, std::uint64_t counter) const noexcept {
        return splitmix64(splitmix64(splitmix64(seed_) ^ round) + counter);
    }
    [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }
    /// Seed of the k-th independent sample derived from this stream.
    [[nodiscard]] constexpr std::uint64_t derive(std::uint64_t k) const noexcept { return draw(~0ULL, k); }

private:
    std::uint64_t seed_;
};

// ----------------------------------------------------------------------------
// Aztec diamond tilings
// ----------------------------------------------------------------------------
//
// Cells of the order-n diamond are unit squares with lower-left corner (x, y),
// -n <= x, y < n and |x + 1/2| + |y + 1/2| <= n. A domino is stored by its
// lower-left cell; N/S dominoes are horizontal, E/W vertical. With
// c = (x + y + n) mod 2 of the lower-left cell, a horizontal domino is N for
// c = 0 and S otherwise, a vertical one E for c = 0 and W otherwise.

enum class Dir : std::uint8_t { N, S, E, W };

struct Domino {
    int x = 0, y = 0;
    Dir dir = Dir::N;

    [[nodiscard]] bool horizontal() const noexcept { return dir == Dir::N || dir == Dir::S; }
    [[nodiscard]] bool operator==(const Domino&) const = default;
};

[[nodiscard]] inline char dir_char(Dir d) noexcept {
    switch (d) {
        case Dir::N: return 'N';
        case Dir::S: return 'S';
        case Dir::E: return 'E';
        default: return 'W';
    }
}

[[nodiscard]] inline bool in_aztec(int n, int x, int y) noexcept {
    return std::abs(2 * x + 1) + std::abs(2 * y + 1) <= 2 * n;
}

struct AztecTiling {
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<Domino> dominoes;

    /// Cell -> domino index over the bounding square, -1 where uncovered.
    [[nodiscard]] std::vector<int> cell_owner() const {
        const int w = 2 * n;
        std::vector<int> own(static_cast<std::size_t>(w * w), -1);
        for (std::size_t k = 0; k < dominoes.size(); ++k) {
            const auto& d = dominoes[k];
            const int x2 = d.horizontal() ? d.x + 1 : d.x, y2 = d.horizontal() ? d.y : d.y + 1;
            for (auto [cx, cy] : {std::pair{d.x, d.y}, std::pair{x2, y2}}) {
                if (cx < -n || cy < -n || cx >= n || cy >= n) return {};
                auto& o = own[static_cast<std::size_t>((cy + n) * w + (cx + n))];
                if (o != -1) return {};
                o = static_cast<int>(k);
            }
        }
        return own;
    }

    /// Exact cover of the order-n diamond with direction labels consistent with the colouring.
    [[nodiscard]] bool valid() const {
        if (dominoes.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1)) return false;
        const auto own = cell_owner();
        if (own.empty()) return false;
        const int w = 2 * n;
        for (int y = -n; y < n; ++y)
            for (int x = -n; x < n; ++x)
                if ((own[static_cast<std::size_t>((y + n) * w + (x + n))] != -1) != in_aztec(n, x, y)) return false;
        for (const auto& d : dominoes) {
            const bool even = ((d.x + d.y + n) % 2 + 2) % 2 == 0;
            const Dir expect = d.horizontal() ? (even ? Dir::N : Dir::S) : (even ? Dir::E : Dir::W);
            if (d.dir != expect) return false;
        }
        return true;
    }
};

namespace detail {

inline Dir classify(int n, int x, int y, bool horizontal) noexcept {
    const bool even = ((x + y + n) % 2 + 2) % 2 == 0;
    return horizontal ? (even ? Dir::N : Dir::S) : (even ? Dir::E : Dir::W);
}

/// One shuffle step from order n to n + 1. `choose(k)` returns the orientation
/// bit of the k-th created block (true: horizontal pair).
template <class Choose>
std::vector<Domino> shuffle_step(int n, const std::vector<Domino>& in, Choose&& choose) {
    const int w = 2 * n, w2 = 2 * (n + 1);
    std::vector<int> own(static_cast<std::size_t>(std::max(w, 1) * std::max(w, 1)), -1);
    auto at = [&](int x, int y) -> int {
        if (x < -n || y < -n || x >= n || y >= n) return -1;
        return own[static_cast<std::size_t>((y + n) * w + (x + n))];
    };
    for (std::size_t k = 0; k < in.size(); ++k) {
        own[static_cast<std::size_t>((in[k].y + n) * w + (in[k].x + n))] = static_cast<int>(k);
    }
    // destruction: N below S in a 2x2 block, E left of W
    std::vector<char> dead(in.size(), 0);
    for (std::size_t k = 0; k < in.size(); ++k) {
        const auto& d = in[k];
        if (d.dir == Dir::N) {
            const int o = at(d.x, d.y + 1);
            if (o >= 0 && in[static_cast<std::size_t>(o)].dir == Dir::S) dead[k] = dead[static_cast<std::size_t>(o)] = 1;
        } else if (d.dir == Dir::E) {
            const int o = at(d.x + 1, d.y);
            if (o >= 0 && in[static_cast<std::size_t>(o)].dir == Dir::W) dead[k] = dead[static_cast<std::size_t>(o)] = 1;
        }
    }
    // sliding
    std::vector<Domino> out;
    out.reserve(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 2));
    std::vector<char> filled(static_cast<std::size_t>(w2 * w2), 0);
    auto mark = [&](const Domino& d) {
        const int x2 = d.horizontal() ? d.x + 1 : d.x, y2 = d.horizontal() ? d.y : d.y + 1;
        filled[static_cast<std::size_t>((d.y + n + 1) * w2 + (d.x + n + 1))] = 1;
        filled[static_cast<std::size_t>((y2 + n + 1) * w2 + (x2 + n + 1))] = 1;
    };
    for (std::size_t k = 0; k < in.size(); ++k) {
        if (dead[k]) continue;
        Domino d = in[k];
        switch (d.dir) {
            case Dir::N: ++d.y; break;
            case Dir::S: --d.y; break;
            case Dir::E: ++d.x; break;
            case Dir::W: --d.x; break;
        }
        out.push_back(d);
        mark(d);
    }
    // creation: empty cells split uniquely into 2x2 blocks, found by a row-major scan
    const int m = n + 1;
    std::uint64_t counter = 0;
    for (int y = -m; y < m; ++y)
        for (int x = -m; x < m; ++x) {
            if (!in_aztec(m, x, y) || filled[static_cast<std::size_t>((y + m) * w2 + (x + m))]) continue;
            if (choose(counter++)) {
                out.push_back({x, y, Dir::S});
                out.push_back({x, y + 1, Dir::N});
            } else {
                out.push_back({x, y, Dir::W});
                out.push_back({x + 1, y, Dir::E});
            }
            mark(out[out.size() - 2]);
            mark(out.back());
        }
    return out;
}

}  // namespace detail

/// Uniform random tiling of the order-n Aztec diamond by domino shuffling.
[[nodiscard]] inline AztecTiling sample_tiling(int n, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorKind::input, "sample_tiling needs n >= 1");
    const CounterRng rng(seed);
    std::vector<Domino> cur;
    for (int k = 0; k < n; ++k) {
        cur = detail::shuffle_step(k, cur, [&](std::uint64_t c) { return (rng.draw(static_cast<std::uint64_t>(k), c) >> 63) != 0; });
#ifndef NDEBUG
        if (!AztecTiling{k + 1, seed, cur}.valid()) throw Error(ErrorKind::validation, "shuffle broke the exact cover");
#endif
    }
    return {n, seed, std::move(cur)};
}

/// All tilings of the order-n diamond (n <= 4), by exhaustive cell-by-cell search.
[[nodiscard]] inline std::vector<AztecTiling> enumerate_tilings(int n) {
    if (n < 1 || n > 4) throw Error(ErrorKind::input, "enumerate_tilings supports 1 <= n <= 4");
    const int w = 2 * n;
    std::vector<char> used(static_cast<std::size_t>(w * w), 0);
    auto idx = [&](int x, int y) { return static_cast<std::size_t>((y + n) * w + (x + n)); };
    for (int y = -n; y < n; ++y)
        for (int x = -n; x < n; ++x)
            if (!in_aztec(n, x, y)) used[idx(x, y)] = 1;
    std::vector<AztecTiling> all;
    std::vector<Domino> cur;
    auto rec = [&](auto&& self) -> void {
        int fx = 0, fy = 0;
        bool found = false;
        for (int y = -n; y < n && !found; ++y)
            for (int x = -n; x < n; ++x)
                if (!used[idx(x, y)]) {
                    fx = x;
                    fy = y;
                    found = true;
                    break;
                }
        if (!found) {
            all.push_back({n, 0, cur});
            return;
        }
        used[idx(fx, fy)] = 1;
        if (fx + 1 < n && !used[idx(fx + 1, fy)]) {
            used[idx(fx + 1, fy)] = 1;
            cur.push_back({fx, fy, detail::classify(n, fx, fy, true)});
            self(self);
            cur.pop_back();
            used[idx(fx + 1, fy)] = 0;
        }
        if (fy + 1 < n && !used[idx(fx, fy + 1)]) {
            used[idx(fx, fy + 1)] = 1;
            cur.push_back({fx, fy, detail::classify(n, fx, fy, false)});
            self(self);
            cur.pop_back();
            used[idx(fx, fy + 1)] = 0;
        }
        used[idx(fx, fy)] = 0;
    };
    rec(rec);
    return all;
}

/// Canonical text key of a tiling (sorted domino list), for frequency tests.
[[nodiscard]] inline std::string tiling_key(const AztecTiling& t) {
    auto ds = t.dominoes;
    std::sort(ds.begin(), ds.end(), [](const Domino& a, const Domino& b) {
        return a.y != b.y ? a.y < b.y : a.x != b.x ? a.x < b.x : a.dir < b.dir;
    });
    std::string key;
    for (const auto& d : ds) key += std::to_string(d.x) + "," + std::to_string(d.y) + dir_char(d.dir) + ";";
    return key;
}

inline void write_tiling(std::ostream& os, const AztecTiling& t) {
    os << "x,y,orientation\n";
    for (const auto& d : t.dominoes) os << d.x << ',' << d.y << ',' << dir_char(d.dir) << '\n';
}

// ----------------------------------------------------------------------------
// Thurston height
// ----------------------------------------------------------------------------

/// Thurston heights on the lattice vertices (X, Y), -n <= X, Y <= n, of the
/// diamond, stored row-major with width 2n + 1 (NaN outside). Crossing a lattice
/// edge with the black cell ((x + y + n) even) on the left changes the height by
/// +1, or by -3 when the edge bisects a domino. h = 0 at the vertex (0, n).
[[nodiscard]] inline std::vector<double> thurston_height(const AztecTiling& t) {
    const int n = t.n, w = 2 * n, v = 2 * n + 1;
    const auto own = t.cell_owner();
    if (own.empty()) throw Error(ErrorKind::validation, "thurston_height: invalid tiling");
    auto owner = [&](int x, int y) -> int {
        if (x < -n || y < -n || x >= n || y >= n) return -1;
        return own[static_cast<std::size_t>((y + n) * w + (x + n))];
    };
    auto black = [&](int x, int y) { return ((x + y + n) % 2 + 2) % 2 == 0; };
    auto vin = [&](int X, int Y) { return std::abs(X) + std::abs(Y) <= n + 1 && X >= -n && X <= n && Y >= -n && Y <= n; };
    // a vertex belongs to the diamond when one of its four cells does
    auto vertex_in = [&](int X, int Y) {
        return vin(X, Y) && (owner(X, Y) >= 0 || owner(X - 1, Y) >= 0 || owner(X, Y - 1) >= 0 || owner(X - 1, Y - 1) >= 0);
    };
    std::vector<double> h(static_cast<std::size_t>(v * v), std::nan(""));
    auto hi = [&](int X, int Y) -> double& { return h[static_cast<std::size_t>((Y + n) * v + (X + n))]; };
    std::vector<std::pair<int, int>> queue{{0, n}};
    hi(0, n) = 0.0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const auto [X, Y] = queue[q];
        // moves: +x, -x, +y, -y. Cells left/right of a directed edge:
        //  +x from (X,Y): left cell (X, Y), right cell (X, Y-1)
        //  +y from (X,Y): left cell (X-1, Y), right cell (X, Y)
        const int mx[4] = {1, -1, 0, 0}, my[4] = {0, 0, 1, -1};
        for (int e = 0; e < 4; ++e) {
            const int X2 = X + mx[e], Y2 = Y + my[e];
            if (!vertex_in(X2, Y2) || !std::isnan(hi(X2, Y2))) continue;
            int lx, ly, rx, ry;
            if (e == 0) { lx = X; ly = Y; rx = X; ry = Y - 1; }
            else if (e == 1) { lx = X - 1; ly = Y - 1; rx = X - 1; ry = Y; }
            else if (e == 2) { lx = X - 1; ly = Y; rx = X; ry = Y; }
            else { lx = X; ly = Y - 1; rx = X - 1; ry = Y - 1; }
            const int ol = owner(lx, ly), orr = owner(rx, ry);
            // edges on the diamond boundary need at least one inside cell
            if (ol < 0 && orr < 0) continue;
            const bool crossed = ol >= 0 && ol == orr;
            const double step = crossed ? -3.0 : 1.0;
            hi(X2, Y2) = hi(X, Y) + (black(lx, ly) ? step : -step);
            queue.push_back({X2, Y2});
        }
    }
    return h;
}

// ----------------------------------------------------------------------------
// Empirical densities
// ----------------------------------------------------------------------------

/// Per-bin frequencies of the four domino types over square bins of `bin`
/// cells. Coordinates are rescaled by sqrt(2)/n so that the diamond is
/// |u| + |v| <= sqrt(2) and the arctic circle is the unit circle.
struct EmpiricalField {
    int n = 0, bin = 4, samples = 0;
    int bins = 0;                           // per axis
    std::vector<double> north, south, east, west;  // frequency of a cell covered by each type
    std::vector<double> analytic_mean;      // filled by the caller when comparing
    std::vector<int> cells;                 // diamond cells per bin
    std::vector<double> mean_height;        // per lattice vertex (width 2n + 1), normalized, NaN outside

    [[nodiscard]] double scale() const noexcept { return std::sqrt(2.0) / n; }
    [[nodiscard]] std::size_t index(int bx, int by) const noexcept {
        return static_cast<std::size_t>(by) * static_cast<std::size_t>(bins) + static_cast<std::size_t>(bx);
    }
    /// Bin center in rescaled coordinates.
    [[nodiscard]] Complex center(int bx, int by) const noexcept {
        return {(-n + (bx + 0.5) * bin) * scale(), (-n + (by + 0.5) * bin) * scale()};
    }
    /// Rescaled center of cell (x, y).
    [[nodiscard]] Complex cell_center(int x, int y) const noexcept { return {(x + 0.5) * scale(), (y + 0.5) * scale()}; }
    [[nodiscard]] double height(int X, int Y) const noexcept {
        return mean_height[static_cast<std::size_t>((Y + n) * (2 * n + 1) + (X + n))];
    }
    /// Central-difference gradient of the mean height at lattice vertex (X, Y),
    /// in rescaled coordinates, over a stencil of half-width `r` lattice units.
    [[nodiscard]] Complex height_gradient(int X, int Y, int r = 2) const noexcept {
        const double s = 2.0 * r * scale();
        return {(height(X + r, Y) - height(X - r, Y)) / s, (height(X, Y + r) - height(X, Y - r)) / s};
    }
};

[[nodiscard]] inline EmpiricalField empirical_density(int n, int num_samples, std::uint64_t seed, int bin = 4,
                                                      unsigned threads = 1) {
    if (n < 1 || num_samples < 1 || bin < 1 || (2 * n) % bin != 0)
        throw Error(ErrorKind::input, "empirical_density: need n >= 1, samples >= 1 and bin dividing 2n");
    EmpiricalField ef;
    ef.n = n;
    ef.bin = bin;
    ef.samples = num_samples;
    ef.bins = 2 * n / bin;
    const std::size_t nb = static_cast<std::size_t>(ef.bins) * static_cast<std::size_t>(ef.bins);
    const int v = 2 * n + 1;
    ef.cells.assign(nb, 0);
    for (int y = -n; y < n; ++y)
        for (int x = -n; x < n; ++x)
            if (in_aztec(n, x, y)) ++ef.cells[ef.index((x + n) / bin, (y + n) / bin)];

    struct Partial {
        std::vector<double> c[4];
        std::vector<double> h;
    };
    // samples split into fixed chunks so the reduction order is thread-independent
    const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(num_samples), 64);
    std::vector<Partial> part(chunks);
    const CounterRng rng(seed);
    parallel_for(chunks, threads, [&](std::size_t c) {
        Partial& p = part[c];
        for (auto& a : p.c) a.assign(nb, 0.0);
        p.h.assign(static_cast<std::size_t>(v * v), 0.0);
        for (std::size_t s = c; s < static_cast<std::size_t>(num_samples); s += chunks) {
            const AztecTiling t = sample_tiling(n, rng.derive(s));
            for (const auto& d : t.dominoes) {
                const int x2 = d.horizontal() ? d.x + 1 : d.x, y2 = d.horizontal() ? d.y : d.y + 1;
                for (auto [cx, cy] : {std::pair{d.x, d.y}, std::pair{x2, y2}})
                    p.c[static_cast<int>(d.dir)][ef.index((cx + n) / bin, (cy + n) / bin)] += 1.0;
            }
            const auto h = thurston_height(t);
            for (std::size_t k = 0; k < h.size(); ++k) p.h[k] += h[k];
        }
    });
    ef.north.assign(nb, 0.0);
    ef.south.assign(nb, 0.0);
    ef.east.assign(nb, 0.0);
    ef.west.assign(nb, 0.0);
    ef.mean_height.assign(static_cast<std::size_t>(v * v), 0.0);
    for (const auto& p : part) {
        for (std::size_t k = 0; k < nb; ++k) {
            ef.north[k] += p.c[0][k];
            ef.south[k] += p.c[1][k];
            ef.east[k] += p.c[2][k];
            ef.west[k] += p.c[3][k];
        }
        for (std::size_t k = 0; k < ef.mean_height.size(); ++k) ef.mean_height[k] += p.h[k];
    }
    for (std::size_t k = 0; k < nb; ++k) {
        const double denom = ef.cells[k] > 0 ? static_cast<double>(ef.cells[k]) * num_samples : 1.0;
        ef.north[k] /= denom;
        ef.south[k] /= denom;
        ef.east[k] /= denom;
        ef.west[k] /= denom;
    }
    // -h / 2 gives the frozen gradients (0,1), (1,0), (0,-1), (-1,0) in the
    // north, west, south and east regions; sqrt(2)/n rescales the plane
    for (auto& h : ef.mean_height) h *= -ef.scale() / (2.0 * num_samples);
    return ef;
}

}  // namespace dimer
