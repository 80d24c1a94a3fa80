#ifndef UNITKIT_FEATURES_HPP
#define UNITKIT_FEATURES_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "unitkit/audio_io.hpp"
#include "unitkit/error.hpp"

namespace unitkit {

/// T x D frame-feature matrix, row-major.
struct FeatureMatrix {
    std::vector<float> data;  // rows * cols
    std::size_t rows = 0;
    std::size_t cols = 0;
    double frame_rate_hz = 50.0;
    std::uint32_t source_layer = 0;

    float* row(std::size_t t) { return data.data() + t * cols; }
    const float* row(std::size_t t) const { return data.data() + t * cols; }
};

struct PhoneInterval {
    std::size_t start_frame = 0;
    std::size_t end_frame = 0;  // inclusive
    std::string phone;
};

struct PhoneAlignment {
    std::vector<PhoneInterval> intervals;

    /// Per-frame phone labels over [0, T).
    std::vector<std::string> to_frames() const {
        std::vector<std::string> out;
        for (const auto& iv : intervals)
            for (std::size_t t = iv.start_frame; t <= iv.end_frame; ++t)
                out.push_back(iv.phone);
        return out;
    }
};

struct SessionEmbedding {
    std::vector<float> vector;
    std::string utterance_id;
};

namespace detail {

constexpr char kFmatMagic[4] = {'F', 'M', 'A', 'T'};

}  // namespace detail

inline void write_features(const FeatureMatrix& m, const std::string& path) {
    for (float v : m.data)
        if (!std::isfinite(v)) throw Error("write_features: non-finite entry");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write features: " + path);
    out.write(detail::kFmatMagic, 4);
    detail::write_u32(out, 1);  // version
    detail::write_u32(out, static_cast<std::uint32_t>(m.rows));
    detail::write_u32(out, static_cast<std::uint32_t>(m.cols));
    float fr = static_cast<float>(m.frame_rate_hz);
    std::uint32_t fr_bits;
    std::memcpy(&fr_bits, &fr, 4);
    detail::write_u32(out, fr_bits);
    detail::write_u32(out, m.source_layer);
    for (float v : m.data) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        detail::write_u32(out, bits);
    }
    if (!out) throw Error("write failed: " + path);
}

inline FeatureMatrix read_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open features: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kFmatMagic, 4) != 0)
        throw Error(path + ": bad magic, not an FMAT file");
    std::uint32_t version = detail::read_u32(in);
    if (version != 1)
        throw Error(path + ": unsupported FMAT version " + std::to_string(version));
    FeatureMatrix m;
    m.rows = detail::read_u32(in);
    m.cols = detail::read_u32(in);
    std::uint32_t fr_bits = detail::read_u32(in);
    float fr;
    std::memcpy(&fr, &fr_bits, 4);
    m.frame_rate_hz = fr;
    m.source_layer = detail::read_u32(in);

    const std::size_t n = m.rows * m.cols;
    m.data.resize(n);
    in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(n * 4));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != n * 4) {
        std::ostringstream msg;
        msg << path << ": truncated payload, expected " << n * 4
            << " bytes, got " << got;
        throw Error(msg.str());
    }
    // payload stored little-endian; host is little-endian on all supported targets
    for (float v : m.data)
        if (!std::isfinite(v)) throw Error(path + ": non-finite entry in payload");
    return m;
}

inline void write_embedding(const SessionEmbedding& e, const std::string& path) {
    FeatureMatrix m;
    m.rows = 1;
    m.cols = e.vector.size();
    m.data = e.vector;
    write_features(m, path);
}

inline SessionEmbedding read_embedding(const std::string& path, const std::string& utterance_id) {
    FeatureMatrix m = read_features(path);
    if (m.rows != 1) throw Error(path + ": embedding file must have rows=1");
    return SessionEmbedding{m.data, utterance_id};
}

/// Parses "start end phone" lines and validates contiguous coverage of [0, T).
inline PhoneAlignment read_alignment(const std::string& path, std::size_t num_frames) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open alignment: " + path);
    PhoneAlignment a;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        long long start, end;
        std::string phone;
        if (!(ls >> start >> end >> phone))
            throw Error(path + ": malformed line " + std::to_string(line_no));
        if (start < 0 || end < start)
            throw Error(path + ": invalid interval at line " + std::to_string(line_no));
        a.intervals.push_back({static_cast<std::size_t>(start),
                               static_cast<std::size_t>(end), phone});
    }
    std::size_t expect = 0;
    for (const auto& iv : a.intervals) {
        if (iv.start_frame != expect) {
            std::ostringstream msg;
            msg << path << ": coverage " << (iv.start_frame > expect ? "gap" : "overlap")
                << " at frame " << expect;
            throw Error(msg.str());
        }
        expect = iv.end_frame + 1;
    }
    if (expect != num_frames) {
        std::ostringstream msg;
        msg << path << ": coverage gap at frame " << expect << ", expected "
            << num_frames << " frames";
        if (expect < num_frames) throw Error(msg.str());
        throw Error(path + ": alignment extends past frame " + std::to_string(num_frames));
    }
    return a;
}

inline void write_alignment(const PhoneAlignment& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write alignment: " + path);
    for (const auto& iv : a.intervals)
        out << iv.start_frame << ' ' << iv.end_frame << ' ' << iv.phone << '\n';
}

}  // namespace unitkit

#endif
