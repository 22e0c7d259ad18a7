#ifndef AUDIT_PERTURB_HPP
#define AUDIT_PERTURB_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "audit/wav.hpp"

namespace audit::perturb {

enum class Arm {
    silence_prepend_10s,
    white_prefix_1s,
    white_insert_mid,
    white_throughout,
    real_noise_throughout,
    truncate,
};

const char* arm_name(Arm arm);
Arm arm_from_name(const std::string& name);

struct PerturbationSpec {
    Arm arm = Arm::silence_prepend_10s;
    std::optional<double> snr_db;        // required for noise arms
    std::optional<double> insert_at_s;   // required for white_insert_mid / truncate
    std::string noise_path;              // real_noise_throughout only
    std::uint64_t seed = 0;
};

enum class MixRegion { prefix, at, throughout };

audio::AudioBuffer prepend_silence(const audio::AudioBuffer& buf, double seconds);

// Zero-mean unit-variance Gaussian samples; Box-Muller over a seeded
// mt19937_64 so sequences are identical across standard libraries.
audio::AudioBuffer synth_white_noise(double duration_s, int sample_rate,
                                     std::uint64_t seed);

// Rescales noise so the signal-to-noise power ratio equals snr_db.
// prefix / at(t) regions insert the noise; throughout overlays it.
audio::AudioBuffer mix_at_snr(const audio::AudioBuffer& signal,
                              const audio::AudioBuffer& noise, double snr_db,
                              MixRegion region, double at_s = 0.0);

audio::AudioBuffer truncate_at(const audio::AudioBuffer& buf, double t_s);

// Measured power ratio of signal vs. scaled noise; oracle for SNR tests.
double measure_snr_db(const audio::AudioBuffer& signal,
                      const audio::AudioBuffer& scaled_noise);

audio::AudioBuffer apply(const audio::AudioBuffer& buf, const PerturbationSpec& spec);

}  // namespace audit::perturb

#endif
