#ifndef AUDIT_KERNELS_HPP
#define AUDIT_KERNELS_HPP

#include <cstddef>
#include <span>

namespace audit::kernels {

// Sample-buffer arithmetic used by the acoustics and perturbation code.
// Each kernel has a scalar reference implementation and an AVX2 variant;
// dispatch() picks the widest ISA the CPU supports at runtime.

enum class Isa { scalar, avx2 };

Isa active_isa();
void force_isa(Isa isa);   // test hook; scalar is always legal
void reset_isa();          // back to auto-detection

double sum_squares(std::span<const float> x);
double sum_abs(std::span<const float> x);
float peak_abs(std::span<const float> x);

// y[i] = clamp(y[i] + gain * x[i], -1, 1)
void mix_scaled_clamped(std::span<float> y, std::span<const float> x, float gain);
// x[i] = clamp(gain * x[i], -1, 1)
void scale_clamped(std::span<float> x, float gain);

namespace detail {
double sum_squares_scalar(std::span<const float> x);
double sum_squares_avx2(std::span<const float> x);
double sum_abs_scalar(std::span<const float> x);
double sum_abs_avx2(std::span<const float> x);
float peak_abs_scalar(std::span<const float> x);
float peak_abs_avx2(std::span<const float> x);
void mix_scaled_clamped_scalar(std::span<float> y, std::span<const float> x, float gain);
void mix_scaled_clamped_avx2(std::span<float> y, std::span<const float> x, float gain);
void scale_clamped_scalar(std::span<float> x, float gain);
void scale_clamped_avx2(std::span<float> x, float gain);
}  // namespace detail

}  // namespace audit::kernels

#endif
