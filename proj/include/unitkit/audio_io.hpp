#ifndef UNITKIT_AUDIO_IO_HPP
#define UNITKIT_AUDIO_IO_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "unitkit/error.hpp"

namespace unitkit {

struct Waveform {
    std::vector<double> samples;  // in [-1, 1]
    int sample_rate_hz = 16000;
};

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw Error("unexpected end of file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
           std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

inline std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw Error("unexpected end of file");
    return std::uint16_t(b[0]) | std::uint16_t(b[1]) << 8;
}

}  // namespace detail

/// Reads a 16-bit PCM mono RIFF WAV file. Samples scaled by 1/32768.
inline Waveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open wav: " + path);

    char riff[4], wave[4];
    in.read(riff, 4);
    if (!in || std::memcmp(riff, "RIFF", 4) != 0)
        throw Error(path + ": not a RIFF file");
    detail::read_u32(in);  // riff size
    in.read(wave, 4);
    if (!in || std::memcmp(wave, "WAVE", 4) != 0)
        throw Error(path + ": not a WAVE file");

    Waveform w;
    bool have_fmt = false;
    while (true) {
        char tag[4];
        in.read(tag, 4);
        if (!in) break;
        std::uint32_t chunk_size = detail::read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            std::uint16_t format = detail::read_u16(in);
            std::uint16_t channels = detail::read_u16(in);
            std::uint32_t rate = detail::read_u32(in);
            detail::read_u32(in);  // byte rate
            detail::read_u16(in);  // block align
            std::uint16_t bits = detail::read_u16(in);
            if (format != 1) throw Error(path + ": unsupported format, only PCM");
            if (channels != 1) throw Error(path + ": unsupported format, only mono");
            if (bits != 16) throw Error(path + ": unsupported format, only 16-bit");
            w.sample_rate_hz = static_cast<int>(rate);
            if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw Error(path + ": data chunk before fmt");
            const std::size_t n = chunk_size / 2;
            w.samples.resize(n);
            std::vector<char> buf(chunk_size);
            in.read(buf.data(), chunk_size);
            if (!in) throw Error(path + ": truncated data chunk");
            for (std::size_t i = 0; i < n; ++i) {
                std::int16_t s = static_cast<std::int16_t>(
                    std::uint16_t(static_cast<unsigned char>(buf[2 * i])) |
                    std::uint16_t(static_cast<unsigned char>(buf[2 * i + 1])) << 8);
                w.samples[i] = static_cast<double>(s) / 32768.0;
            }
            return w;
        } else {
            in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
    }
    throw Error(path + ": no data chunk");
}

/// Writes 16-bit PCM mono. Hard-clips to [-1, 1] and returns the clip count.
inline std::size_t write_wav(const Waveform& w, const std::string& path) {
    for (double s : w.samples)
        if (!std::isfinite(s)) throw Error("write_wav: non-finite sample");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write wav: " + path);

    const std::uint32_t data_size = static_cast<std::uint32_t>(w.samples.size() * 2);
    out.write("RIFF", 4);
    detail::write_u32(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    detail::write_u32(out, 16);
    detail::write_u16(out, 1);  // PCM
    detail::write_u16(out, 1);  // mono
    detail::write_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
    detail::write_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
    detail::write_u16(out, 2);
    detail::write_u16(out, 16);
    out.write("data", 4);
    detail::write_u32(out, data_size);

    std::size_t clipped = 0;
    for (double s : w.samples) {
        double c = s;
        if (c > 1.0) { c = 1.0; ++clipped; }
        if (c < -1.0) { c = -1.0; ++clipped; }
        long v = std::lrint(c * 32768.0);
        if (v > 32767) v = 32767;
        if (v < -32768) v = -32768;
        auto q = static_cast<std::int16_t>(v);
        detail::write_u16(out, static_cast<std::uint16_t>(q));
    }
    if (!out) throw Error("write failed: " + path);
    return clipped;
}

}  // namespace unitkit

#endif
