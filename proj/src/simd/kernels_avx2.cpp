#include <immintrin.h>

#include "polymer/simd/kernels.hpp"

namespace polymer::simd {

namespace {

void stencil_avx2(double* out, std::size_t n, double w, const double* a, const double* b,
                  const double* const* nbr, int n_nbr, const double* mult) {
  const __m256d vw = _mm256_set1_pd(w);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    for (int j = 0; j < n_nbr; ++j) s = _mm256_add_pd(s, _mm256_loadu_pd(nbr[j] + i));
    s = _mm256_mul_pd(vw, s);
    if (mult) s = _mm256_mul_pd(_mm256_loadu_pd(mult + i), s);
    _mm256_storeu_pd(out + i, s);
  }
  for (; i < n; ++i) {
    double s = a[i] + b[i];
    for (int j = 0; j < n_nbr; ++j) s += nbr[j][i];
    s = w * s;
    out[i] = mult ? mult[i] * s : s;
  }
}

// Four counters at once, one per 64-bit lane, each word in the low half.
void philox_row_avx2(Philox4x32::Key key, std::int32_t x1, std::int32_t step, std::uint32_t c1,
                     std::uint32_t c2, std::uint32_t c3, std::size_t n, std::uint64_t* out) {
  const __m256i lo_mask = _mm256_set1_epi64x(0xFFFFFFFFll);
  const __m256i m0 = _mm256_set1_epi64x(Philox4x32::kM0);
  const __m256i m1 = _mm256_set1_epi64x(Philox4x32::kM1);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const auto base = x1 + step * std::int32_t(i);
    __m256i v0 = _mm256_set_epi64x(std::uint32_t(base + 3 * step), std::uint32_t(base + 2 * step),
                                   std::uint32_t(base + step), std::uint32_t(base));
    __m256i v1 = _mm256_set1_epi64x(c1);
    __m256i v2 = _mm256_set1_epi64x(c2);
    __m256i v3 = _mm256_set1_epi64x(c3);
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k0 += Philox4x32::kW0;
        k1 += Philox4x32::kW1;
      }
      const __m256i p0 = _mm256_mul_epu32(v0, m0);
      const __m256i p1 = _mm256_mul_epu32(v2, m1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), v1),
                                          _mm256_set1_epi64x(k0));
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), v3),
                                          _mm256_set1_epi64x(k1));
      v1 = _mm256_and_si256(p1, lo_mask);
      v3 = _mm256_and_si256(p0, lo_mask);
      v0 = n0;
      v2 = n2;
    }
    const __m256i word = _mm256_or_si256(_mm256_slli_epi64(v0, 32), v1);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), word);
  }
  for (; i < n; ++i) {
    const auto x = std::uint32_t(x1 + step * std::int32_t(i));
    out[i] = philox_word({x, c1, c2, c3}, key);
  }
}

}  // namespace

extern const KernelSet kAvx2Kernels;
const KernelSet kAvx2Kernels{Isa::kAvx2, "avx2", stencil_avx2, philox_row_avx2};

}  // namespace polymer::simd
