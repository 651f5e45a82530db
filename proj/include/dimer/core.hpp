#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dimer {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ----------------------------------------------------------------------------
// Errors. The kind decides the process exit code in the command-line tool.
// ----------------------------------------------------------------------------

enum class ErrorKind {
    input,        // malformed request or arity mismatch
    domain,       // argument outside the domain of the operation
    singularity,  // evaluation at a logarithmic singularity
    pole,         // evaluation at a pole
    validation,   // a structural check failed
    convergence,  // an iterative method did not converge
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[nodiscard]] inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::validation: return 3;
        case ErrorKind::convergence: return 4;
        default: return 2;
    }
}

// ----------------------------------------------------------------------------
// Small helpers
// ----------------------------------------------------------------------------

/// Real inner product of two plane vectors stored as complex numbers.
[[nodiscard]] inline double dot(Complex a, Complex b) noexcept {
    return a.real() * b.real() + a.imag() * b.imag();
}

/// z-component of the cross product a x b.
/// 1 / z without the overflow guards of the library division.
[[nodiscard]] inline Complex reciprocal(Complex z) noexcept {
    const double d = z.real() * z.real() + z.imag() * z.imag();
    return {z.real() / d, -z.imag() / d};
}
[[nodiscard]] inline double cross(Complex a, Complex b) noexcept {
    return a.real() * b.imag() - a.imag() * b.real();
}

[[nodiscard]] inline bool is_finite(Complex z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Reduce an angle to [0, 2pi).
[[nodiscard]] inline double wrap_angle(double t) noexcept {
    double r = std::fmod(t, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

/// Reflection in the unit circle, z -> 1/conj(z).
[[nodiscard]] inline Complex reflect(Complex z) noexcept { return 1.0 / std::conj(z); }

// ----------------------------------------------------------------------------
// Deterministic parallel loop. Each index is processed independently, so the
// result never depends on the thread count.
// ----------------------------------------------------------------------------

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t t = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::vector<std::exception_ptr> errors(t);
    for (std::size_t w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = n * w / t;
                const std::size_t hi = n * (w + 1) / t;
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace dimer
