#ifndef AUDIT_WAV_HPP
#define AUDIT_WAV_HPP

#include <string>
#include <vector>

namespace audit::audio {

struct AudioBuffer {
    std::vector<float> samples;   // normalized to [-1, 1]
    int sample_rate = 44100;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// PCM-16 mono RIFF/WAVE only. Samples are scaled by 1/32768.
AudioBuffer read_wav(const std::string& path);

// Writes PCM-16 mono; read_wav(write_wav(x)) round-trips bit-exactly for
// buffers that originated from PCM-16.
void write_wav(const std::string& path, const AudioBuffer& buf);

}  // namespace audit::audio

#endif
