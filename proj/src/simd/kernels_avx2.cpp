// Compiled with -mavx2 -mfma. Nothing in this file may run unless
// avx2_kernels() has confirmed CPU support.
#include "beem/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

#include <vector>

namespace beem::simd {
namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
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

void diag_quadratic_avx2(const PointsView& p, const double* center, const double* inv_var, double* out) {
    const std::size_t n = p.count;
    const std::size_t body = n - n % 4;
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
    for (std::size_t j = 0; j < p.dims; ++j) {
        const double* col = p.column(j);
        const __m256d c = _mm256_set1_pd(center[j]);
        const __m256d w = _mm256_set1_pd(inv_var[j]);
        for (std::size_t i = 0; i < body; i += 4) {
            __m256d d = _mm256_sub_pd(_mm256_loadu_pd(col + i), c);
            __m256d o = _mm256_loadu_pd(out + i);
            _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_mul_pd(d, d), w, o));
        }
        for (std::size_t i = body; i < n; ++i) {
            const double d = col[i] - center[j];
            out[i] += d * d * inv_var[j];
        }
    }
}

void mahalanobis_avx2(const PointsView& p, const double* mean, const double* chol, double* out) {
    const std::size_t d = p.dims;
    const std::size_t n = p.count;
    const std::size_t body = n - n % 4;
    std::vector<double> z(4 * d);
    for (std::size_t i = 0; i < body; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t r = 0; r < d; ++r) {
            __m256d v = _mm256_sub_pd(_mm256_loadu_pd(p.column(r) + i), _mm256_set1_pd(mean[r]));
            for (std::size_t c = 0; c < r; ++c) {
                v = _mm256_fnmadd_pd(_mm256_set1_pd(chol[r * d + c]), _mm256_loadu_pd(&z[4 * c]), v);
            }
            const __m256d zr = _mm256_div_pd(v, _mm256_set1_pd(chol[r * d + r]));
            _mm256_storeu_pd(&z[4 * r], zr);
            acc = _mm256_fmadd_pd(zr, zr, acc);
        }
        _mm256_storeu_pd(out + i, acc);
    }
    if (body < n) {
        PointsView tail = p;
        tail.data = p.data + body;
        tail.count = n - body;
        scalar_kernels().mahalanobis(tail, mean, chol, out + body);
    }
}

}  // namespace

const KernelTable* avx2_kernels() {
    static const KernelTable table{Isa::Avx2, &dot_avx2, &diag_quadratic_avx2, &mahalanobis_avx2};
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &table : nullptr;
}

}  // namespace beem::simd

#else

namespace beem::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace beem::simd

#endif
