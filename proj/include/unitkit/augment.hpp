#ifndef UNITKIT_AUGMENT_HPP
#define UNITKIT_AUGMENT_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "unitkit/audio_io.hpp"
#include "unitkit/error.hpp"
#include "unitkit/rng.hpp"

namespace unitkit {

struct AugmentPolicy {
    double stretch_low = 1.0;
    double stretch_high = 1.5;
    double snr_low_db = 0.0;
    double snr_high_db = 15.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (stretch_low < 1.0) throw Error("AugmentPolicy: stretch_low must be >= 1.0");
        if (stretch_high < stretch_low) throw Error("AugmentPolicy: stretch range inverted");
        if (snr_high_db < snr_low_db) throw Error("AugmentPolicy: snr range inverted");
    }
};

struct AugmentDraw {
    double stretch_scalar = 1.0;
    double snr_db = 0.0;
    std::uint64_t noise_offset = 0;
};

/// Deterministic per-utterance draw: scalar ~ U[stretch range],
/// snr ~ U[snr range], plus a raw offset word for noise placement.
inline AugmentDraw sample_policy(const AugmentPolicy& policy, const std::string& utterance_id) {
    policy.validate();
    Rng rng(mix_seed(policy.seed, fnv1a64(utterance_id)));
    AugmentDraw d;
    d.stretch_scalar = rng.next_double(policy.stretch_low, policy.stretch_high);
    d.snr_db = rng.next_double(policy.snr_low_db, policy.snr_high_db);
    d.noise_offset = rng.next_u64();
    return d;
}

/// Scales repetition counts by a >= 1 factor, round-half-up, floor 1.
inline std::vector<std::uint32_t> stretch_durations(const std::vector<std::uint32_t>& counts,
                                                    double scalar) {
    if (scalar < 1.0) throw Error("stretch_durations: scalar must be >= 1");
    std::vector<std::uint32_t> out;
    out.reserve(counts.size());
    for (std::uint32_t c : counts) {
        if (c == 0) throw Error("stretch_durations: zero input count");
        const double scaled = static_cast<double>(c) * scalar;
        auto r = static_cast<std::uint32_t>(std::floor(scaled + 0.5));
        out.push_back(r < 1 ? 1u : r);
    }
    return out;
}

inline double mean_power(const std::vector<double>& samples) {
    double s = 0.0;
    for (double x : samples) s += x * x;
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
}

struct MixResult {
    Waveform mixed;          // unclipped; clipping happens at write time
    double noise_gain = 0.0;
    std::size_t noise_start = 0;
};

/// Adds noise at the requested SNR. Noise is cropped or looped from a
/// seeded random start offset to cover the signal, then scaled so
/// 10*log10(P_signal / P_scaled_noise) = snr_db.
inline MixResult mix_noise_at_snr(const Waveform& signal, const Waveform& noise,
                                  double snr_db, std::uint64_t seed) {
    if (signal.samples.empty() || noise.samples.empty())
        throw Error("mix_noise_at_snr: empty input");
    if (signal.sample_rate_hz != noise.sample_rate_hz)
        throw Error("mix_noise_at_snr: sample rate mismatch");

    Rng rng(mix_seed(seed, fnv1a64("mix_noise")));
    const std::size_t start = rng.next_index(noise.samples.size());

    const std::size_t n = signal.samples.size();
    std::vector<double> cut(n);
    for (std::size_t i = 0; i < n; ++i)
        cut[i] = noise.samples[(start + i) % noise.samples.size()];

    const double p_s = mean_power(signal.samples);
    const double p_n = mean_power(cut);
    if (p_s <= 0.0) throw Error("mix_noise_at_snr: silent signal, SNR undefined");
    if (p_n <= 0.0) throw Error("mix_noise_at_snr: silent noise, SNR undefined");

    const double gain = std::sqrt(p_s / (p_n * std::pow(10.0, snr_db / 10.0)));

    MixResult r;
    r.noise_gain = gain;
    r.noise_start = start;
    r.mixed.sample_rate_hz = signal.sample_rate_hz;
    r.mixed.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        r.mixed.samples[i] = signal.samples[i] + gain * cut[i];
    return r;
}

}  // namespace unitkit

#endif
