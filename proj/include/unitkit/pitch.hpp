#ifndef UNITKIT_PITCH_HPP
#define UNITKIT_PITCH_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "unitkit/audio_io.hpp"
#include "unitkit/error.hpp"
#include "unitkit/features.hpp"
#include "unitkit/segment.hpp"

namespace unitkit {

struct PitchTrack {
    std::vector<double> log_f0;  // natural log of Hz; 0.0 sentinel when unvoiced
    std::vector<bool> voiced;
    double frame_rate_hz = 50.0;
};

/// Frame-level F0 by normalized autocorrelation peak search over a 40 ms
/// window hopped at 1/frame_rate. A frame is voiced iff the peak value
/// reaches voicing_threshold.
inline PitchTrack extract_f0(const Waveform& w, double frame_rate_hz,
                             double f_min = 60.0, double f_max = 400.0,
                             double voicing_threshold = 0.3) {
    if (w.samples.empty()) throw Error("extract_f0: empty waveform");
    if (w.sample_rate_hz < 2.0 * f_max)
        throw Error("extract_f0: sample rate below 2*f_max");
    const double sr = static_cast<double>(w.sample_rate_hz);
    const std::size_t win = static_cast<std::size_t>(std::lround(0.040 * sr));
    const std::size_t hop = static_cast<std::size_t>(std::lround(sr / frame_rate_hz));
    if (w.samples.size() < win) throw Error("extract_f0: waveform shorter than analysis window");

    const std::size_t lag_min = static_cast<std::size_t>(std::floor(sr / f_max));
    const std::size_t lag_max = static_cast<std::size_t>(std::ceil(sr / f_min));

    PitchTrack track;
    track.frame_rate_hz = frame_rate_hz;

    std::vector<double> r(lag_max + 2, 0.0);
    for (std::size_t start = 0; start + win <= w.samples.size(); start += hop) {
        const double* x = w.samples.data() + start;
        const std::size_t n = win;

        double energy = 0.0;
        for (std::size_t i = 0; i < n; ++i) energy += x[i] * x[i];
        if (energy <= 1e-12) {
            track.log_f0.push_back(0.0);
            track.voiced.push_back(false);
            continue;
        }

        // Normalized autocorrelation r(tau) over the lag band, with one
        // extra lag each side for parabolic interpolation.
        const std::size_t lo = lag_min > 1 ? lag_min - 1 : 1;
        const std::size_t hi = lag_max + 1 < n ? lag_max + 1 : n - 1;
        for (std::size_t tau = lo; tau <= hi; ++tau) {
            double num = 0.0, e2 = 0.0;
            for (std::size_t i = 0; i + tau < n; ++i) {
                num += x[i] * x[i + tau];
                e2 += x[i + tau] * x[i + tau];
            }
            double e1 = 0.0;
            for (std::size_t i = 0; i + tau < n; ++i) e1 += x[i] * x[i];
            r[tau] = (e1 > 0.0 && e2 > 0.0) ? num / std::sqrt(e1 * e2) : 0.0;
        }

        double best = -1.0;
        std::size_t tau_argmax = lag_min;
        for (std::size_t tau = lag_min; tau <= lag_max && tau <= hi; ++tau) {
            if (r[tau] > best) {
                best = r[tau];
                tau_argmax = tau;
            }
        }

        if (best < voicing_threshold) {
            track.log_f0.push_back(0.0);
            track.voiced.push_back(false);
            continue;
        }

        // Smallest local maximum near the global peak = fundamental (larger
        // multiples of the period peak equally high on periodic signals).
        std::size_t tau_best = tau_argmax;
        for (std::size_t tau = lag_min; tau < tau_argmax; ++tau) {
            if (r[tau] >= 0.95 * best && r[tau] >= r[tau - 1] && r[tau] >= r[tau + 1]) {
                tau_best = tau;
                break;
            }
        }

        double lag = static_cast<double>(tau_best);
        if (tau_best > lo && tau_best < hi) {
            const double ym = r[tau_best - 1], y0 = r[tau_best], yp = r[tau_best + 1];
            const double denom = ym - 2.0 * y0 + yp;
            if (std::abs(denom) > 1e-12) {
                const double delta = 0.5 * (ym - yp) / denom;
                if (delta > -1.0 && delta < 1.0) lag += delta;
            }
        }
        const double f0 = sr / lag;
        track.log_f0.push_back(std::log(f0));
        track.voiced.push_back(true);
    }
    return track;
}

/// Restores the framewise representation of a deduplicated sequence.
inline std::vector<std::uint32_t> expand_units_to_frames(const UnitSequence& seq) {
    if (!seq.dedup) throw Error("expand_units_to_frames: sequence is not deduplicated");
    return expand_to_frames(seq);
}

/// Pitch file: FMAT with two rows (log_f0, voiced as 0/1).
inline void write_pitch(const PitchTrack& track, const std::string& path) {
    FeatureMatrix m;
    m.rows = 2;
    m.cols = track.log_f0.size();
    m.frame_rate_hz = track.frame_rate_hz;
    m.data.resize(2 * m.cols);
    for (std::size_t i = 0; i < m.cols; ++i) {
        m.data[i] = static_cast<float>(track.log_f0[i]);
        m.data[m.cols + i] = track.voiced[i] ? 1.0f : 0.0f;
    }
    write_features(m, path);
}

inline PitchTrack read_pitch(const std::string& path) {
    FeatureMatrix m = read_features(path);
    if (m.rows != 2) throw Error(path + ": pitch file must have two rows");
    PitchTrack track;
    track.frame_rate_hz = m.frame_rate_hz;
    track.log_f0.resize(m.cols);
    track.voiced.resize(m.cols);
    for (std::size_t i = 0; i < m.cols; ++i) {
        track.log_f0[i] = m.data[i];
        track.voiced[i] = m.data[m.cols + i] != 0.0f;
    }
    return track;
}

}  // namespace unitkit

#endif
