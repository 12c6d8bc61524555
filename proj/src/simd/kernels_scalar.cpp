#include "nowcast/simd/kernels.hpp"

namespace nowcast::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot3_scalar(const double* a, const double* b, const double* c, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void syr_lower_scalar(double alpha, const double* x, double* a, std::size_t n)
{
    for (std::size_t j = 0; j < n; ++j) {
        const double s = alpha * x[j];
        double* row = a + j * n;
        for (std::size_t l = 0; l <= j; ++l) row[l] += s * x[l];
    }
}

constexpr KernelTable kScalar{Isa::scalar, dot_scalar, dot3_scalar, axpy_scalar, syr_lower_scalar};

} // namespace

const KernelTable& scalar_kernels() { return kScalar; }

} // namespace nowcast::simd
