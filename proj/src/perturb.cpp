#include "audit/perturb.hpp"

#include <cmath>
#include <random>
#include <span>

#include "audit/error.hpp"
#include "audit/kernels.hpp"

namespace audit::perturb {

namespace {

double mean_power(std::span<const float> x) {
    if (x.empty()) return 0.0;
    return kernels::sum_squares(x) / static_cast<double>(x.size());
}

audio::AudioBuffer loop_extend(const audio::AudioBuffer& noise, std::size_t length) {
    audio::AudioBuffer out;
    out.sample_rate = noise.sample_rate;
    out.samples.reserve(length);
    while (out.samples.size() < length) {
        std::size_t take = std::min(noise.samples.size(), length - out.samples.size());
        out.samples.insert(out.samples.end(), noise.samples.begin(),
                           noise.samples.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return out;
}

}  // namespace

const char* arm_name(Arm arm) {
    switch (arm) {
        case Arm::silence_prepend_10s: return "silence_prepend_10s";
        case Arm::white_prefix_1s: return "white_prefix_1s";
        case Arm::white_insert_mid: return "white_insert_mid";
        case Arm::white_throughout: return "white_throughout";
        case Arm::real_noise_throughout: return "real_noise_throughout";
        case Arm::truncate: return "truncate";
    }
    return "?";
}

Arm arm_from_name(const std::string& name) {
    for (Arm a : {Arm::silence_prepend_10s, Arm::white_prefix_1s, Arm::white_insert_mid,
                  Arm::white_throughout, Arm::real_noise_throughout, Arm::truncate})
        if (name == arm_name(a)) return a;
    throw AuditError("unknown_arm", "no perturbation arm named '" + name + "'");
}

audio::AudioBuffer prepend_silence(const audio::AudioBuffer& buf, double seconds) {
    if (seconds <= 0.0)
        throw AuditError("bad_argument", "silence duration must be positive");
    audio::AudioBuffer out;
    out.sample_rate = buf.sample_rate;
    const std::size_t pad =
        static_cast<std::size_t>(std::llround(seconds * buf.sample_rate));
    out.samples.assign(pad, 0.0f);
    out.samples.insert(out.samples.end(), buf.samples.begin(), buf.samples.end());
    return out;
}

audio::AudioBuffer synth_white_noise(double duration_s, int sample_rate,
                                     std::uint64_t seed) {
    if (duration_s <= 0.0)
        throw AuditError("bad_argument", "noise duration must be positive");
    audio::AudioBuffer out;
    out.sample_rate = sample_rate;
    const std::size_t n =
        static_cast<std::size_t>(std::llround(duration_s * sample_rate));
    out.samples.resize(n);
    std::mt19937_64 rng(seed);
    // Hand-rolled Box-Muller: std::normal_distribution streams differ
    // between standard libraries, this keeps sequences portable.
    auto uniform = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    };
    for (std::size_t i = 0; i < n; i += 2) {
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        out.samples[i] = static_cast<float>(r * std::cos(2.0 * M_PI * u2));
        if (i + 1 < n)
            out.samples[i + 1] = static_cast<float>(r * std::sin(2.0 * M_PI * u2));
    }
    return out;
}

audio::AudioBuffer mix_at_snr(const audio::AudioBuffer& signal,
                              const audio::AudioBuffer& noise, double snr_db,
                              MixRegion region, double at_s) {
    const double p_signal = mean_power(signal.samples);
    if (p_signal <= 0.0)
        throw AuditError("undefined_snr", "signal region has zero power");
    const double p_noise = mean_power(noise.samples);
    if (p_noise <= 0.0)
        throw AuditError("undefined_snr", "noise has zero power");

    const double gain =
        std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));

    audio::AudioBuffer out;
    out.sample_rate = signal.sample_rate;

    if (region == MixRegion::throughout) {
        if (noise.samples.size() < signal.samples.size())
            throw AuditError("bad_argument", "noise shorter than signal");
        out.samples = signal.samples;
        kernels::mix_scaled_clamped(out.samples,
                                    std::span<const float>(noise.samples)
                                        .first(signal.samples.size()),
                                    static_cast<float>(gain));
        return out;
    }

    std::vector<float> scaled = noise.samples;
    kernels::scale_clamped(scaled, static_cast<float>(gain));

    const std::size_t split =
        region == MixRegion::prefix
            ? 0
            : static_cast<std::size_t>(std::llround(at_s * signal.sample_rate));
    if (split > signal.samples.size())
        throw AuditError("bad_argument", "insertion point outside signal");

    out.samples.reserve(signal.samples.size() + scaled.size());
    out.samples.insert(out.samples.end(), signal.samples.begin(),
                       signal.samples.begin() + static_cast<std::ptrdiff_t>(split));
    out.samples.insert(out.samples.end(), scaled.begin(), scaled.end());
    out.samples.insert(out.samples.end(),
                       signal.samples.begin() + static_cast<std::ptrdiff_t>(split),
                       signal.samples.end());
    return out;
}

audio::AudioBuffer truncate_at(const audio::AudioBuffer& buf, double t_s) {
    if (t_s <= 0.0 || t_s >= buf.duration_s())
        throw AuditError("bad_argument", "truncation point outside (0, duration)");
    audio::AudioBuffer out;
    out.sample_rate = buf.sample_rate;
    const std::size_t n = static_cast<std::size_t>(std::llround(t_s * buf.sample_rate));
    out.samples.assign(buf.samples.begin(),
                       buf.samples.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

double measure_snr_db(const audio::AudioBuffer& signal,
                      const audio::AudioBuffer& scaled_noise) {
    double ps = mean_power(signal.samples);
    double pn = mean_power(scaled_noise.samples);
    if (ps <= 0.0 || pn <= 0.0)
        throw AuditError("undefined_snr", "zero power component");
    return 10.0 * std::log10(ps / pn);
}

audio::AudioBuffer apply(const audio::AudioBuffer& buf, const PerturbationSpec& spec) {
    switch (spec.arm) {
        case Arm::silence_prepend_10s:
            return prepend_silence(buf, 10.0);
        case Arm::white_prefix_1s: {
            if (!spec.snr_db) throw AuditError("bad_argument", "snr_db required");
            auto noise = synth_white_noise(1.0, buf.sample_rate, spec.seed);
            return mix_at_snr(buf, noise, *spec.snr_db, MixRegion::prefix);
        }
        case Arm::white_insert_mid: {
            if (!spec.snr_db || !spec.insert_at_s)
                throw AuditError("bad_argument", "snr_db and insert_at_s required");
            auto noise = synth_white_noise(1.0, buf.sample_rate, spec.seed);
            return mix_at_snr(buf, noise, *spec.snr_db, MixRegion::at, *spec.insert_at_s);
        }
        case Arm::white_throughout: {
            if (!spec.snr_db) throw AuditError("bad_argument", "snr_db required");
            auto noise = synth_white_noise(buf.duration_s() + 1.0 / buf.sample_rate,
                                           buf.sample_rate, spec.seed);
            return mix_at_snr(buf, noise, *spec.snr_db, MixRegion::throughout);
        }
        case Arm::real_noise_throughout: {
            if (!spec.snr_db) throw AuditError("bad_argument", "snr_db required");
            if (spec.noise_path.empty())
                throw AuditError("bad_argument", "noise_path required");
            auto noise = audio::read_wav(spec.noise_path);
            auto extended = loop_extend(noise, buf.samples.size());
            return mix_at_snr(buf, extended, *spec.snr_db, MixRegion::throughout);
        }
        case Arm::truncate: {
            if (!spec.insert_at_s)
                throw AuditError("bad_argument", "insert_at_s required");
            return truncate_at(buf, *spec.insert_at_s);
        }
    }
    throw AuditError("unknown_arm", "unhandled perturbation arm");
}

}  // namespace audit::perturb
