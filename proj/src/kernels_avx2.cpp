// AVX2 variants. Compiled with -mavx2 for this translation unit only;
// callers must route through dispatch so non-AVX2 hosts never reach here.

#include "audit/kernels.hpp"

#include <algorithm>
#include <cmath>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace audit::kernels::detail {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double sum_squares_avx2(std::span<const float> x) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x.data() + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += static_cast<double>(x[i]) * x[i];
    return total;
}

double sum_abs_avx2(std::span<const float> x) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x.data() + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, v));
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += std::fabs(static_cast<double>(x[i]));
    return total;
}

float peak_abs_avx2(std::span<const float> x) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    const __m256 sign_mask = _mm256_set1_ps(-0.0f);
    __m256 peak = _mm256_setzero_ps();
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(x.data() + i);
        peak = _mm256_max_ps(peak, _mm256_andnot_ps(sign_mask, v));
    }
    alignas(32) float lanes[8];
    _mm256_store_ps(lanes, peak);
    float out = 0.0f;
    for (float l : lanes) out = std::max(out, l);
    for (; i < n; ++i) out = std::max(out, std::fabs(x[i]));
    return out;
}

void mix_scaled_clamped_avx2(std::span<float> y, std::span<const float> x, float gain) {
    const std::size_t n = std::min(y.size(), x.size());
    std::size_t i = 0;
    const __m256 g = _mm256_set1_ps(gain);
    const __m256 lo = _mm256_set1_ps(-1.0f);
    const __m256 hi = _mm256_set1_ps(1.0f);
    for (; i + 8 <= n; i += 8) {
        __m256 a = _mm256_loadu_ps(y.data() + i);
        __m256 b = _mm256_loadu_ps(x.data() + i);
        __m256 r = _mm256_add_ps(a, _mm256_mul_ps(g, b));
        r = _mm256_min_ps(hi, _mm256_max_ps(lo, r));
        _mm256_storeu_ps(y.data() + i, r);
    }
    for (; i < n; ++i) y[i] = std::clamp(y[i] + gain * x[i], -1.0f, 1.0f);
}

void scale_clamped_avx2(std::span<float> x, float gain) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    const __m256 g = _mm256_set1_ps(gain);
    const __m256 lo = _mm256_set1_ps(-1.0f);
    const __m256 hi = _mm256_set1_ps(1.0f);
    for (; i + 8 <= n; i += 8) {
        __m256 r = _mm256_mul_ps(g, _mm256_loadu_ps(x.data() + i));
        r = _mm256_min_ps(hi, _mm256_max_ps(lo, r));
        _mm256_storeu_ps(x.data() + i, r);
    }
    for (; i < n; ++i) x[i] = std::clamp(gain * x[i], -1.0f, 1.0f);
}

}  // namespace audit::kernels::detail

#else

namespace audit::kernels::detail {

double sum_squares_avx2(std::span<const float> x) { return sum_squares_scalar(x); }
double sum_abs_avx2(std::span<const float> x) { return sum_abs_scalar(x); }
float peak_abs_avx2(std::span<const float> x) { return peak_abs_scalar(x); }
void mix_scaled_clamped_avx2(std::span<float> y, std::span<const float> x, float gain) {
    mix_scaled_clamped_scalar(y, x, gain);
}
void scale_clamped_avx2(std::span<float> x, float gain) { scale_clamped_scalar(x, gain); }

}  // namespace audit::kernels::detail

#endif
