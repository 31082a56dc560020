#pragma once

#include <cstddef>
#include <span>

// Dense vector kernels used by the simplex pivot loop and the recurrent
// network matrix-vector products. Scalar reference implementations plus an
// AVX2 variant, selected once at startup from CPUID.

namespace rollcast::kernels {

struct Ops {
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // dot(x, y)
    double (*dot)(const double* x, const double* y, std::size_t n);
    // x *= a
    void (*scale)(double a, double* x, std::size_t n);
    const char* name;
};

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
} // namespace avx2
#endif

/// Best implementation for the running CPU, resolved once.
const Ops& active();

/// Scalar reference table, for equivalence tests.
const Ops& reference();

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}

inline void scale(double a, std::span<double> x) {
    active().scale(a, x.data(), x.size());
}

} // namespace rollcast::kernels
