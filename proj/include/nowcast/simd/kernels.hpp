#pragma once
// Data-parallel inner loops (GLM score/information accumulation, Gini
// covariance sum). Each kernel has a scalar reference and, on x86-64, an
// AVX2+FMA variant; the variant is chosen once at runtime from CPUID and can
// be pinned with NOWCAST_SIMD=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace nowcast::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    // sum a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum a[i]*b[i]*c[i]
    double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
    // y[i] += alpha*x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // Lower triangle (incl. diagonal) of the row-major n*n matrix a += alpha * x x^T.
    void (*syr_lower)(double alpha, const double* x, double* a, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant is not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

// The table selected for this process.
const KernelTable& kernels();

// Pins the active table (tests). Falls back to scalar when unavailable.
void force_isa(Isa isa);

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b)
{
    return kernels().dot(a.data(), b.data(), a.size());
}

inline double dot3(std::span<const double> a, std::span<const double> b, std::span<const double> c)
{
    return kernels().dot3(a.data(), b.data(), c.data(), a.size());
}

} // namespace nowcast::simd
