#include "audit/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "audit/error.hpp"
#include "audit/kernels.hpp"

namespace audit::acoustics {

VadResult vad_nonvocal_share(const audio::AudioBuffer& buf, const VadConfig& cfg) {
    if (buf.samples.empty()) throw AuditError("empty_buffer", "no samples");
    const std::size_t frame_len = static_cast<std::size_t>(
        std::max(1, cfg.frame_ms * buf.sample_rate / 1000));
    const std::size_t n_frames = (buf.samples.size() + frame_len - 1) / frame_len;

    std::vector<bool> voiced(n_frames, false);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t begin = f * frame_len;
        const std::size_t len = std::min(frame_len, buf.samples.size() - begin);
        double rms = std::sqrt(
            kernels::sum_squares(std::span<const float>(buf.samples).subspan(begin, len)) /
            static_cast<double>(len));
        voiced[f] = rms >= cfg.energy_threshold;
    }

    // hangover: extend each voiced run forward
    if (cfg.hangover_frames > 0) {
        int remaining = 0;
        for (std::size_t f = 0; f < n_frames; ++f) {
            if (voiced[f]) {
                remaining = cfg.hangover_frames;
            } else if (remaining > 0) {
                voiced[f] = true;
                --remaining;
            }
        }
    }

    VadResult result;
    const double frame_s = static_cast<double>(frame_len) / buf.sample_rate;
    double voiced_s = 0.0;
    std::size_t f = 0;
    while (f < n_frames) {
        if (!voiced[f]) { ++f; continue; }
        std::size_t start = f;
        while (f < n_frames && voiced[f]) ++f;
        double start_s = start * frame_s;
        double end_s = std::min(f * frame_s, buf.duration_s());
        result.voiced.push_back({start_s, end_s});
        voiced_s += end_s - start_s;
    }
    result.nonvocal_share = std::clamp(1.0 - voiced_s / buf.duration_s(), 0.0, 1.0);
    return result;
}

NoiseResult background_noise(const audio::AudioBuffer& buf, const NoiseConfig& cfg) {
    if (static_cast<int>(buf.samples.size()) < cfg.frame)
        throw AuditError("buffer_too_short",
                         "need at least " + std::to_string(cfg.frame) + " samples");
    double sum = 0.0;
    int quiet = 0;
    for (std::size_t begin = 0; begin + cfg.frame <= buf.samples.size();
         begin += cfg.hop) {
        double rms = std::sqrt(
            kernels::sum_squares(std::span<const float>(buf.samples)
                                     .subspan(begin, static_cast<std::size_t>(cfg.frame))) /
            cfg.frame);
        if (rms < cfg.threshold) {
            sum += rms;
            ++quiet;
        }
    }
    NoiseResult result;
    if (quiet > 0) {
        result.noise_rms = sum / quiet;
        if (*result.noise_rms > 0.0) {
            // report the noise floor at centibel precision; finer resolution is
            // below the measurement noise of the frame-averaged estimate
            double db = 20.0 * std::log10(*result.noise_rms);
            result.noise_db = std::round(db * 100.0) / 100.0;
        }
    }
    return result;
}

AudioFeatures extract_features(const audio::AudioBuffer& buf, const VadConfig& vad,
                               const NoiseConfig& noise) {
    AudioFeatures features;
    features.total_duration_s = buf.duration_s();
    features.nonvocal_share = vad_nonvocal_share(buf, vad).nonvocal_share;
    if (static_cast<int>(buf.samples.size()) >= noise.frame) {
        NoiseResult n = background_noise(buf, noise);
        features.noise_rms = n.noise_rms;
        features.noise_db = n.noise_db;
    }
    return features;
}

}  // namespace audit::acoustics
