#pragma once

#include <cstddef>

#include <Eigen/Core>

#if defined(__AVX2__) && defined(__FMA__) && defined(__F16C__)
#define LOWRANK_HALF_SIMD 1
#include <immintrin.h>
#endif

namespace lowrank::detail {

// Streaming kernels over half-precision data with double-precision
// arithmetic, K rows at a time so that x and acc are swept once per group.
// Every row is summed in the same order whatever K is, so results do not
// depend on the grouping.

// Software prefetch of K rows into L2 while a kernel streams other rows:
// at progress i the line at begin + i/2 is requested, so one kernel call
// covers half a row. The fused sensing pass uses the dot for the first half
// of the next group and the axpy for the second, keeping DRAM busy during
// both phases. No effect on the arithmetic.
template <int K>
struct HalfPrefetch {
  const Eigen::half* const* rows = nullptr;
  std::size_t begin = 0;
  void at(std::size_t i) const {
#if defined(LOWRANK_HALF_SIMD)
    if (rows != nullptr && (i & 63) == 0) {
      for (int q = 0; q < K; ++q) _mm_prefetch(reinterpret_cast<const char*>(rows[q] + begin + i / 2), _MM_HINT_T1);
    }
#else
    (void)i;
#endif
  }
};

/// out[q] = sum_i a[q][i] * x[i], q < K
template <int K>
void dot_half_double(const Eigen::half* const* a, const double* x, std::size_t n, double* out,
                     HalfPrefetch<K> pf = {}) {
  std::size_t i = 0;
#if defined(LOWRANK_HALF_SIMD) && defined(__AVX512F__)
  __m512d lo[K], hi[K];
  for (int q = 0; q < K; ++q) lo[q] = hi[q] = _mm512_setzero_pd();
  for (; i + 16 <= n; i += 16) {
    pf.at(i);
    const __m512d x0 = _mm512_loadu_pd(x + i);
    const __m512d x1 = _mm512_loadu_pd(x + i + 8);
    for (int q = 0; q < K; ++q) {
      const __m512 f = _mm512_cvtph_ps(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a[q] + i)));
      lo[q] = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm512_castps512_ps256(f)), x0, lo[q]);
      hi[q] = _mm512_fmadd_pd(_mm512_cvtps_pd(_mm256_castpd_ps(_mm512_extractf64x4_pd(_mm512_castps_pd(f), 1))), x1, hi[q]);
    }
  }
  for (int q = 0; q < K; ++q) {
    alignas(64) double lanes[8];
    _mm512_store_pd(lanes, _mm512_add_pd(lo[q], hi[q]));
    out[q] = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
  }
#elif defined(LOWRANK_HALF_SIMD)
  __m256d lo[K], hi[K];
  for (int q = 0; q < K; ++q) lo[q] = hi[q] = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    const __m256d x0 = _mm256_loadu_pd(x + i);
    const __m256d x1 = _mm256_loadu_pd(x + i + 4);
    for (int q = 0; q < K; ++q) {
      const __m256 f = _mm256_cvtph_ps(_mm_loadu_si128(reinterpret_cast<const __m128i*>(a[q] + i)));
      lo[q] = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(f)), x0, lo[q]);
      hi[q] = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(f, 1)), x1, hi[q]);
    }
  }
  for (int q = 0; q < K; ++q) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(lo[q], hi[q]));
    out[q] = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  }
#else
  for (int q = 0; q < K; ++q) out[q] = 0.0;
#endif
  for (int q = 0; q < K; ++q) {
    for (std::size_t j = i; j < n; ++j) out[q] += static_cast<double>(static_cast<float>(a[q][j])) * x[j];
  }
}

/// acc[i] += sum_q alpha[q] * a[q][i], q < K
template <int K>
void axpy_half_double(const double* alpha, const Eigen::half* const* a, double* acc, std::size_t n,
                      HalfPrefetch<K> pf = {}) {
  std::size_t i = 0;
#if defined(LOWRANK_HALF_SIMD) && defined(__AVX512F__)
  __m512d va[K];
  for (int q = 0; q < K; ++q) va[q] = _mm512_set1_pd(alpha[q]);
  for (; i + 16 <= n; i += 16) {
    pf.at(i);
    __m512d lo = _mm512_loadu_pd(acc + i);
    __m512d hi = _mm512_loadu_pd(acc + i + 8);
    for (int q = 0; q < K; ++q) {
      const __m512 f = _mm512_cvtph_ps(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a[q] + i)));
      lo = _mm512_fmadd_pd(va[q], _mm512_cvtps_pd(_mm512_castps512_ps256(f)), lo);
      hi = _mm512_fmadd_pd(va[q], _mm512_cvtps_pd(_mm256_castpd_ps(_mm512_extractf64x4_pd(_mm512_castps_pd(f), 1))), hi);
    }
    _mm512_storeu_pd(acc + i, lo);
    _mm512_storeu_pd(acc + i + 8, hi);
  }
#elif defined(LOWRANK_HALF_SIMD)
  __m256d va[K];
  for (int q = 0; q < K; ++q) va[q] = _mm256_set1_pd(alpha[q]);
  for (; i + 8 <= n; i += 8) {
    pf.at(i);
    __m256d lo = _mm256_loadu_pd(acc + i);
    __m256d hi = _mm256_loadu_pd(acc + i + 4);
    for (int q = 0; q < K; ++q) {
      const __m256 f = _mm256_cvtph_ps(_mm_loadu_si128(reinterpret_cast<const __m128i*>(a[q] + i)));
      lo = _mm256_fmadd_pd(va[q], _mm256_cvtps_pd(_mm256_castps256_ps128(f)), lo);
      hi = _mm256_fmadd_pd(va[q], _mm256_cvtps_pd(_mm256_extractf128_ps(f, 1)), hi);
    }
    _mm256_storeu_pd(acc + i, lo);
    _mm256_storeu_pd(acc + i + 4, hi);
  }
#endif
  for (; i < n; ++i) {
    for (int q = 0; q < K; ++q) acc[i] += alpha[q] * static_cast<double>(static_cast<float>(a[q][i]));
  }
}

}  // namespace lowrank::detail
