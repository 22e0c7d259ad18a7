#include "audit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace audit::kernels {

namespace {

Isa detect() {
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
    return Isa::scalar;
}

std::optional<Isa> g_forced;

}  // namespace

Isa active_isa() {
    if (g_forced) return *g_forced;
    static const Isa detected = detect();
    return detected;
}

void force_isa(Isa isa) { g_forced = isa; }
void reset_isa() { g_forced.reset(); }

namespace detail {

double sum_squares_scalar(std::span<const float> x) {
    double acc = 0.0;
    for (float v : x) acc += static_cast<double>(v) * v;
    return acc;
}

double sum_abs_scalar(std::span<const float> x) {
    double acc = 0.0;
    for (float v : x) acc += std::fabs(static_cast<double>(v));
    return acc;
}

float peak_abs_scalar(std::span<const float> x) {
    float peak = 0.0f;
    for (float v : x) peak = std::max(peak, std::fabs(v));
    return peak;
}

void mix_scaled_clamped_scalar(std::span<float> y, std::span<const float> x, float gain) {
    const std::size_t n = std::min(y.size(), x.size());
    for (std::size_t i = 0; i < n; ++i)
        y[i] = std::clamp(y[i] + gain * x[i], -1.0f, 1.0f);
}

void scale_clamped_scalar(std::span<float> x, float gain) {
    for (float& v : x) v = std::clamp(gain * v, -1.0f, 1.0f);
}

}  // namespace detail

double sum_squares(std::span<const float> x) {
    return active_isa() == Isa::avx2 ? detail::sum_squares_avx2(x)
                                     : detail::sum_squares_scalar(x);
}

double sum_abs(std::span<const float> x) {
    return active_isa() == Isa::avx2 ? detail::sum_abs_avx2(x)
                                     : detail::sum_abs_scalar(x);
}

float peak_abs(std::span<const float> x) {
    return active_isa() == Isa::avx2 ? detail::peak_abs_avx2(x)
                                     : detail::peak_abs_scalar(x);
}

void mix_scaled_clamped(std::span<float> y, std::span<const float> x, float gain) {
    if (active_isa() == Isa::avx2)
        detail::mix_scaled_clamped_avx2(y, x, gain);
    else
        detail::mix_scaled_clamped_scalar(y, x, gain);
}

void scale_clamped(std::span<float> x, float gain) {
    if (active_isa() == Isa::avx2)
        detail::scale_clamped_avx2(x, gain);
    else
        detail::scale_clamped_scalar(x, gain);
}

}  // namespace audit::kernels
