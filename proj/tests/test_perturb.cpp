#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "audit/acoustics.hpp"
#include "audit/error.hpp"
#include "audit/perturb.hpp"
#include "audit/wav.hpp"

using namespace audit;

namespace {

audio::AudioBuffer tone(double seconds, int rate, double amp, double hz) {
    audio::AudioBuffer buf;
    buf.sample_rate = rate;
    std::size_t n = static_cast<std::size_t>(seconds * rate);
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        buf.samples[i] =
            static_cast<float>(amp * std::sin(2.0 * M_PI * hz * i / rate));
    return buf;
}

}  // namespace

TEST_CASE("prepend silence sample counts are exact") {
    audio::AudioBuffer buf = tone(2.0, 44100, 0.3, 440.0);
    REQUIRE(buf.samples.size() == 88200);
    audio::AudioBuffer out = perturb::prepend_silence(buf, 10.0);
    CHECK(out.samples.size() == 529200);
    for (std::size_t i = 0; i < 441000; ++i) REQUIRE(out.samples[i] == 0.0f);
    CHECK(out.samples[441000] == buf.samples[0]);
    CHECK_THROWS_AS(perturb::prepend_silence(buf, 0.0), AuditError);
}

TEST_CASE("prepended silence raises the nonvocal share") {
    audio::AudioBuffer buf = tone(2.0, 16000, 0.5, 440.0);
    double before = acoustics::vad_nonvocal_share(buf).nonvocal_share;
    double after =
        acoustics::vad_nonvocal_share(perturb::prepend_silence(buf, 10.0))
            .nonvocal_share;
    CHECK(after > before);
}

TEST_CASE("white noise determinism and statistics") {
    audio::AudioBuffer a = perturb::synth_white_noise(1.0, 44100, 99);
    audio::AudioBuffer b = perturb::synth_white_noise(1.0, 44100, 99);
    audio::AudioBuffer c = perturb::synth_white_noise(1.0, 44100, 100);
    REQUIRE(a.samples.size() == 44100);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);

    double mean = std::accumulate(a.samples.begin(), a.samples.end(), 0.0) /
                  a.samples.size();
    CHECK(std::abs(mean) < 0.02);
    double var = 0.0;
    for (float s : a.samples) var += (s - mean) * (s - mean);
    var /= a.samples.size();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("mix at snr hits the target within a tenth of a decibel") {
    audio::AudioBuffer signal = tone(3.0, 16000, 0.4, 440.0);
    audio::AudioBuffer noise = perturb::synth_white_noise(3.0, 16000, 7);
    for (double target : {5.0, 10.0}) {
        // reproduce the scale the mixer applies, then measure the power ratio
        double ps = 0.0, pn = 0.0;
        for (float s : signal.samples) ps += static_cast<double>(s) * s;
        for (float s : noise.samples) pn += static_cast<double>(s) * s;
        ps /= signal.samples.size();
        pn /= noise.samples.size();
        double gain = std::sqrt(ps / (pn * std::pow(10.0, target / 10.0)));
        audio::AudioBuffer scaled = noise;
        for (auto& s : scaled.samples) s = static_cast<float>(s * gain);
        CHECK(std::abs(perturb::measure_snr_db(signal, scaled) - target) < 0.1);
    }
}

TEST_CASE("snr scaling obeys db arithmetic") {
    audio::AudioBuffer signal = tone(2.0, 16000, 0.4, 440.0);
    audio::AudioBuffer noise = perturb::synth_white_noise(1.0, 16000, 3);
    audio::AudioBuffer at5 =
        perturb::mix_at_snr(signal, noise, 5.0, perturb::MixRegion::prefix);
    audio::AudioBuffer at10 =
        perturb::mix_at_snr(signal, noise, 10.0, perturb::MixRegion::prefix);
    // prefix arms insert the scaled noise ahead of the signal
    REQUIRE(at5.samples.size() == signal.samples.size() + noise.samples.size());
    double expected = std::pow(10.0, -5.0 / 20.0);
    // compare noise amplitudes sample by sample (pre-clip region, small amps)
    double ratio_sum = 0.0;
    int counted = 0;
    for (std::size_t i = 0; i < noise.samples.size(); ++i) {
        if (std::abs(at5.samples[i]) < 1e-4 || std::abs(at5.samples[i]) > 0.9)
            continue;
        ratio_sum += at10.samples[i] / at5.samples[i];
        ++counted;
    }
    REQUIRE(counted > 1000);
    CHECK(ratio_sum / counted == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("zero-power signal region is undefined snr") {
    audio::AudioBuffer silent;
    silent.sample_rate = 16000;
    silent.samples.assign(16000, 0.0f);
    audio::AudioBuffer noise = perturb::synth_white_noise(1.0, 16000, 1);
    CHECK_THROWS_AS(
        perturb::mix_at_snr(silent, noise, 5.0, perturb::MixRegion::throughout),
        AuditError);
}

TEST_CASE("truncate") {
    audio::AudioBuffer buf = tone(2.0, 44100, 0.3, 440.0);
    audio::AudioBuffer cut = perturb::truncate_at(buf, 1.0);
    CHECK(cut.samples.size() == 44100);
    audio::AudioBuffer again = perturb::truncate_at(cut, 1.0 - 1e-9);
    CHECK(again.samples.size() <= cut.samples.size());
    CHECK_THROWS_AS(perturb::truncate_at(buf, 5.0), AuditError);
    CHECK_THROWS_AS(perturb::truncate_at(buf, 0.0), AuditError);

    auto path = std::filesystem::temp_directory_path() / "audit_trunc.wav";
    audio::write_wav(path.string(), cut);
    audio::AudioBuffer back = audio::read_wav(path.string());
    REQUIRE(back.samples.size() == cut.samples.size());
    // one 16-bit quantization step of error at most; a second pass is exact
    for (std::size_t i = 0; i < cut.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - cut.samples[i]) <= 1.0f / 32767.0f);
    audio::write_wav(path.string(), back);
    audio::AudioBuffer twice = audio::read_wav(path.string());
    CHECK(twice.samples == back.samples);
    std::filesystem::remove(path);
}

TEST_CASE("every arm is deterministic per seed and keeps duration books") {
    audio::AudioBuffer buf = tone(4.0, 16000, 0.4, 330.0);
    const int rate = 16000;
    std::vector<perturb::PerturbationSpec> specs;
    specs.push_back({perturb::Arm::silence_prepend_10s, {}, {}, "", 5});
    specs.push_back({perturb::Arm::white_prefix_1s, 5.0, {}, "", 5});
    specs.push_back({perturb::Arm::white_insert_mid, 5.0, 2.0, "", 5});
    specs.push_back({perturb::Arm::white_throughout, 10.0, {}, "", 5});
    specs.push_back({perturb::Arm::truncate, {}, 1.5, "", 5});

    auto noise_path = std::filesystem::temp_directory_path() / "audit_noise.wav";
    audio::write_wav(noise_path.string(), perturb::synth_white_noise(1.0, rate, 77));
    specs.push_back(
        {perturb::Arm::real_noise_throughout, 10.0, {}, noise_path.string(), 5});

    for (const auto& spec : specs) {
        CAPTURE(perturb::arm_name(spec.arm));
        audio::AudioBuffer a = perturb::apply(buf, spec);
        audio::AudioBuffer b = perturb::apply(buf, spec);
        CHECK(a.samples == b.samples);
        switch (spec.arm) {
            case perturb::Arm::silence_prepend_10s:
                CHECK(a.samples.size() == buf.samples.size() + 10 * rate);
                break;
            case perturb::Arm::white_prefix_1s:
            case perturb::Arm::white_insert_mid:
                CHECK(a.samples.size() == buf.samples.size() + rate);
                break;
            case perturb::Arm::white_throughout:
            case perturb::Arm::real_noise_throughout:
                CHECK(a.samples.size() == buf.samples.size());
                break;
            case perturb::Arm::truncate:
                CHECK(a.samples.size() == static_cast<std::size_t>(1.5 * rate));
                break;
        }
    }
    std::filesystem::remove(noise_path);
}

TEST_CASE("throughout mixing meets the snr target end to end") {
    audio::AudioBuffer buf = tone(3.0, 16000, 0.4, 440.0);
    perturb::PerturbationSpec spec{perturb::Arm::white_throughout, 10.0, {}, "", 9};
    audio::AudioBuffer mixed = perturb::apply(buf, spec);
    // recovered noise = mixed - signal (clipping negligible at these amps)
    audio::AudioBuffer recovered;
    recovered.sample_rate = buf.sample_rate;
    recovered.samples.resize(buf.samples.size());
    for (std::size_t i = 0; i < buf.samples.size(); ++i)
        recovered.samples[i] = mixed.samples[i] - buf.samples[i];
    CHECK(std::abs(perturb::measure_snr_db(buf, recovered) - 10.0) < 0.1);
}
