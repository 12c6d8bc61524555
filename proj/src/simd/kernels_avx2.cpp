// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include "nowcast/simd/kernels.hpp"

#include <immintrin.h>

namespace nowcast::simd::detail {

namespace {

inline double hsum(__m256d v)
{
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot3_avx2(const double* a, const double* b, const double* c, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i] * c[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void syr_lower_avx2(double alpha, const double* x, double* a, std::size_t n)
{
    for (std::size_t j = 0; j < n; ++j) {
        const double s = alpha * x[j];
        const __m256d vs = _mm256_set1_pd(s);
        double* row = a + j * n;
        const std::size_t len = j + 1;
        std::size_t l = 0;
        for (; l + 4 <= len; l += 4)
            _mm256_storeu_pd(row + l, _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + l), _mm256_loadu_pd(row + l)));
        for (; l < len; ++l) row[l] += s * x[l];
    }
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2, dot3_avx2, axpy_avx2, syr_lower_avx2};

} // namespace

const KernelTable& avx2_table() { return kAvx2; }

} // namespace nowcast::simd::detail
