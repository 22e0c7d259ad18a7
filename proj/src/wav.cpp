#include "audit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "audit/error.hpp"

namespace audit::audio {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ofstream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AuditError("io_error", "cannot open " + path);
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        throw AuditError("truncated_header", path + " is not a RIFF/WAVE file");

    AudioBuffer buf;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const char* id = reinterpret_cast<const char*>(data.data() + pos);
        std::uint32_t size = read_u32(data.data() + pos + 4);
        std::size_t body = pos + 8;
        if (body + size > data.size())
            throw AuditError("truncated_header", "chunk overruns file in " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw AuditError("truncated_header", "short fmt chunk");
            std::uint16_t format = read_u16(data.data() + body);
            std::uint16_t channels = read_u16(data.data() + body + 2);
            std::uint32_t rate = read_u32(data.data() + body + 4);
            std::uint16_t bits = read_u16(data.data() + body + 14);
            if (format != 1) throw AuditError("unsupported_format", "non-PCM WAV");
            if (channels != 1)
                throw AuditError("unsupported_channels",
                                 "expected mono, got " + std::to_string(channels));
            if (bits != 16) throw AuditError("unsupported_format", "expected 16-bit PCM");
            buf.sample_rate = static_cast<int>(rate);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw AuditError("truncated_header", "data before fmt chunk");
            std::size_t count = size / 2;
            buf.samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::int16_t s = static_cast<std::int16_t>(
                    read_u16(data.data() + body + 2 * i));
                buf.samples[i] = static_cast<float>(s) / 32768.0f;
            }
            return buf;
        }
        pos = body + size + (size & 1);
    }
    throw AuditError("truncated_header", "no data chunk in " + path);
}

void write_wav(const std::string& path, const AudioBuffer& buf) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AuditError("io_error", "cannot write " + path);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.samples.size() * 2);
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);   // PCM
    write_u16(out, 1);   // mono
    write_u32(out, static_cast<std::uint32_t>(buf.sample_rate));
    write_u32(out, static_cast<std::uint32_t>(buf.sample_rate * 2));
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (float v : buf.samples) {
        float clamped = std::clamp(v, -1.0f, 1.0f);
        int s = static_cast<int>(std::lrintf(clamped * 32768.0f));
        s = std::clamp(s, -32768, 32767);
        write_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
    }
}

}  // namespace audit::audio
