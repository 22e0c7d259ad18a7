#ifndef AUDIT_ACOUSTICS_HPP
#define AUDIT_ACOUSTICS_HPP

#include <optional>
#include <vector>

#include "audit/wav.hpp"

namespace audit::acoustics {

struct VadConfig {
    int frame_ms = 30;
    double energy_threshold = 0.01;   // frame RMS, normalized amplitude
    int hangover_frames = 5;
};

struct VoicedSegment {
    double start_s = 0.0;
    double end_s = 0.0;
};

struct VadResult {
    double nonvocal_share = 0.0;
    std::vector<VoicedSegment> voiced;
};

struct NoiseConfig {
    int frame = 2048;
    int hop = 512;
    double threshold = 0.01;
};

struct AudioFeatures {
    double total_duration_s = 0.0;
    double nonvocal_share = 0.0;
    std::optional<double> noise_rms;
    std::optional<double> noise_db;
};

VadResult vad_nonvocal_share(const audio::AudioBuffer& buf, const VadConfig& cfg = {});

// Mean RMS over sub-threshold frames; absent when every frame is loud.
struct NoiseResult {
    std::optional<double> noise_rms;
    std::optional<double> noise_db;
};
NoiseResult background_noise(const audio::AudioBuffer& buf, const NoiseConfig& cfg = {});

AudioFeatures extract_features(const audio::AudioBuffer& buf, const VadConfig& vad = {},
                               const NoiseConfig& noise = {});

}  // namespace audit::acoustics

#endif
