#ifndef UNITKIT_TARGETS_HPP
#define UNITKIT_TARGETS_HPP

#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "unitkit/error.hpp"
#include "unitkit/features.hpp"
#include "unitkit/pitch.hpp"
#include "unitkit/segment.hpp"

namespace unitkit {

/// Seq2seq training target: phonemes + EOS in, unit pairs out (reduction
/// factor 2), ending in an explicit stop group.
struct T2uTarget {
    std::vector<std::uint32_t> input_phonemes;            // last symbol = phoneme EOS
    std::vector<std::array<std::uint32_t, 2>> output_groups;  // last group contains EOS
    std::uint32_t unit_eos = 0;
    std::uint32_t phoneme_eos = 0;
    std::string utterance_id;
};

struct PredictorTargets {
    std::vector<std::uint32_t> dedup_units;
    std::vector<std::uint32_t> repetition_counts;
    std::vector<double> framewise_log_f0;
    std::vector<bool> voiced_mask;
    std::string session_embedding_ref;
};

/// Groups a deduplicated unit sequence into pairs with EOS padding. An odd
/// tail is padded inside its pair; an even sequence gets a trailing all-EOS
/// group so the stop target is always explicit.
inline T2uTarget prepare_t2u_target(const std::vector<std::uint32_t>& phonemes,
                                    const UnitSequence& units,
                                    std::uint32_t unit_eos, std::uint32_t phoneme_eos,
                                    const std::string& utterance_id = {}) {
    if (phonemes.empty()) throw Error("prepare_t2u_target: empty phoneme sequence");
    if (units.units.empty()) throw Error("prepare_t2u_target: empty unit sequence");
    if (!units.dedup) throw Error("prepare_t2u_target: unit sequence must be deduplicated");
    for (auto u : units.units)
        if (u >= unit_eos) throw Error("prepare_t2u_target: unit id collides with EOS");

    T2uTarget t;
    t.unit_eos = unit_eos;
    t.phoneme_eos = phoneme_eos;
    t.utterance_id = utterance_id;
    t.input_phonemes = phonemes;
    t.input_phonemes.push_back(phoneme_eos);

    const auto& u = units.units;
    for (std::size_t i = 0; i + 1 < u.size(); i += 2)
        t.output_groups.push_back({u[i], u[i + 1]});
    if (u.size() % 2 == 1)
        t.output_groups.push_back({u.back(), unit_eos});
    else
        t.output_groups.push_back({unit_eos, unit_eos});
    return t;
}

/// Inverse of the grouping: concatenate and strip trailing EOS tokens.
inline std::vector<std::uint32_t> ungroup_t2u_target(const T2uTarget& t) {
    std::vector<std::uint32_t> out;
    for (const auto& g : t.output_groups) {
        out.push_back(g[0]);
        out.push_back(g[1]);
    }
    while (!out.empty() && out.back() == t.unit_eos) out.pop_back();
    return out;
}

inline PredictorTargets prepare_predictor_targets(const UnitSequence& units,
                                                  const PitchTrack& pitch,
                                                  const SessionEmbedding& embedding) {
    if (!units.dedup) throw Error("prepare_predictor_targets: unit sequence must be deduplicated");
    const std::size_t total = units.total_frames();
    if (total != pitch.log_f0.size()) {
        std::ostringstream msg;
        msg << "prepare_predictor_targets: length mismatch, " << total
            << " vs " << pitch.log_f0.size();
        throw Error(msg.str());
    }
    PredictorTargets t;
    t.dedup_units = units.units;
    t.repetition_counts = units.durations;
    t.framewise_log_f0 = pitch.log_f0;
    t.voiced_mask = pitch.voiced;
    t.session_embedding_ref = embedding.utterance_id;
    return t;
}

inline std::vector<std::uint32_t> restore_durations(
    const std::vector<std::uint32_t>& dedup_units,
    const std::vector<std::uint32_t>& predicted_counts) {
    if (dedup_units.size() != predicted_counts.size())
        throw Error("restore_durations: length mismatch");
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < dedup_units.size(); ++i) {
        if (predicted_counts[i] == 0)
            throw Error("restore_durations: zero repetition count at position " +
                        std::to_string(i));
        for (std::uint32_t r = 0; r < predicted_counts[i]; ++r)
            out.push_back(dedup_units[i]);
    }
    return out;
}

}  // namespace unitkit

#endif
