#ifndef UNITKIT_SEGMENT_HPP
#define UNITKIT_SEGMENT_HPP

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "unitkit/error.hpp"
#include "unitkit/kmeans.hpp"

namespace unitkit {

struct UnitSequence {
    std::vector<std::uint32_t> units;
    std::vector<std::uint32_t> durations;  // frames, same length as units
    double frame_rate_hz = 50.0;
    bool dedup = false;

    std::size_t total_frames() const {
        std::size_t t = 0;
        for (auto d : durations) t += d;
        return t;
    }
};

struct DpdpParams {
    double lambda = 1.0;
    std::size_t max_segment_frames = 50;
};

/// Expands (unit, duration) pairs back to one unit id per frame.
inline std::vector<std::uint32_t> expand_to_frames(const UnitSequence& seq) {
    std::vector<std::uint32_t> out;
    out.reserve(seq.total_frames());
    for (std::size_t i = 0; i < seq.units.size(); ++i)
        for (std::uint32_t r = 0; r < seq.durations[i]; ++r)
            out.push_back(seq.units[i]);
    return out;
}

/// Merges consecutive equal units, summing durations.
inline UnitSequence dedup_runs(const UnitSequence& seq) {
    if (seq.units.size() != seq.durations.size())
        throw Error("dedup_runs: units/durations length mismatch");
    UnitSequence out;
    out.frame_rate_hz = seq.frame_rate_hz;
    out.dedup = true;
    for (std::size_t i = 0; i < seq.units.size(); ++i) {
        if (seq.durations[i] == 0) throw Error("dedup_runs: zero duration");
        if (!out.units.empty() && out.units.back() == seq.units[i]) {
            out.durations.back() += seq.durations[i];
        } else {
            out.units.push_back(seq.units[i]);
            out.durations.push_back(seq.durations[i]);
        }
    }
    return out;
}

/// Globally optimal unit-labeled segmentation minimizing
///   sum over segments of (sum_t ||x_t - c_u||^2 + lambda),
/// segments limited to max_segment_frames. Ties break toward later
/// boundaries, then lower unit ids. Returns a framewise sequence
/// (dedup = false, units repeated per frame within each segment).
inline UnitSequence dpdp_segment(const FeatureMatrix& features, const Codebook& cb,
                                 const DpdpParams& params) {
    if (features.cols != cb.dim) {
        std::ostringstream msg;
        msg << "dpdp_segment: dimension mismatch, features have " << features.cols
            << ", codebook has " << cb.dim;
        throw Error(msg.str());
    }
    const std::size_t T = features.rows;
    if (T == 0) throw Error("dpdp_segment: empty feature matrix");
    if (params.max_segment_frames < 1) throw Error("dpdp_segment: max_segment_frames must be >= 1");
    const std::size_t k = cb.k;
    const std::size_t max_len = params.max_segment_frames;

    // Per-frame squared distance to every centroid.
    std::vector<double> d(T * k);
    std::vector<double> frame(features.cols);
    for (std::size_t t = 0; t < T; ++t) {
        const float* src = features.row(t);
        for (std::size_t j = 0; j < features.cols; ++j) frame[j] = src[j];
        for (std::size_t c = 0; c < k; ++c)
            d[t * k + c] = detail::sq_dist(frame.data(), cb.centroid(c), cb.dim);
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(T + 1, inf);  // best[t] = optimal cost of frames [0, t)
    best[0] = 0.0;
    std::vector<std::size_t> back_start(T + 1, 0);
    std::vector<std::uint32_t> back_unit(T + 1, 0);

    std::vector<double> acc(k);
    for (std::size_t t = 1; t <= T; ++t) {
        std::fill(acc.begin(), acc.end(), 0.0);
        // Last segment covers frames [a, t); a descends so longer segments
        // are visited later and only strict improvements replace the
        // later-boundary choice.
        for (std::size_t len = 1; len <= max_len && len <= t; ++len) {
            const std::size_t a = t - len;
            for (std::size_t c = 0; c < k; ++c) acc[c] += d[a * k + c];
            if (best[a] == inf) continue;
            double seg_best = inf;
            std::uint32_t seg_unit = 0;
            for (std::size_t c = 0; c < k; ++c) {
                if (acc[c] < seg_best) {
                    seg_best = acc[c];
                    seg_unit = static_cast<std::uint32_t>(c);
                }
            }
            const double cand = best[a] + seg_best + params.lambda;
            if (cand < best[t]) {
                best[t] = cand;
                back_start[t] = a;
                back_unit[t] = seg_unit;
            }
        }
    }

    // Backtrack.
    std::vector<std::pair<std::size_t, std::uint32_t>> segs;  // (length, unit)
    for (std::size_t t = T; t > 0; t = back_start[t])
        segs.emplace_back(t - back_start[t], back_unit[t]);

    UnitSequence out;
    out.frame_rate_hz = features.frame_rate_hz;
    out.dedup = false;
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        for (std::size_t r = 0; r < it->first; ++r) {
            out.units.push_back(it->second);
            out.durations.push_back(1);
        }
    }
    return out;
}

/// Optimal total cost only (no backtrace); exposed for analyses and tests.
inline double dpdp_cost(const FeatureMatrix& features, const Codebook& cb,
                        const DpdpParams& params) {
    UnitSequence s = dpdp_segment(features, cb, params);
    UnitSequence dd = dedup_runs(s);
    // Recompute the objective from the segmentation.
    double cost = 0.0;
    std::size_t t = 0;
    std::vector<double> frame(features.cols);
    for (std::size_t i = 0; i < dd.units.size(); ++i) {
        for (std::uint32_t r = 0; r < dd.durations[i]; ++r, ++t) {
            const float* src = features.row(t);
            for (std::size_t j = 0; j < features.cols; ++j) frame[j] = src[j];
            cost += detail::sq_dist(frame.data(), cb.centroid(dd.units[i]), cb.dim);
        }
        cost += params.lambda;
    }
    return cost;
}

/// Mean over utterances of unit_length / phoneme_length.
inline double length_ratio(const std::vector<std::size_t>& unit_lengths,
                           const std::vector<std::size_t>& phoneme_lengths) {
    if (unit_lengths.size() != phoneme_lengths.size())
        throw Error("length_ratio: list length mismatch");
    if (unit_lengths.empty()) throw Error("length_ratio: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < unit_lengths.size(); ++i) {
        if (phoneme_lengths[i] == 0)
            throw Error("length_ratio: zero phoneme length at utterance " + std::to_string(i));
        sum += static_cast<double>(unit_lengths[i]) / static_cast<double>(phoneme_lengths[i]);
    }
    return sum / static_cast<double>(unit_lengths.size());
}

// Unit file: one line per utterance, "id<TAB>u1 u2 ...<TAB>d1 d2 ...".

inline void write_units(std::ostream& out, const std::string& id, const UnitSequence& seq) {
    out << id << '\t';
    for (std::size_t i = 0; i < seq.units.size(); ++i)
        out << (i ? " " : "") << seq.units[i];
    out << '\t';
    for (std::size_t i = 0; i < seq.durations.size(); ++i)
        out << (i ? " " : "") << seq.durations[i];
    out << '\n';
}

inline std::vector<std::pair<std::string, UnitSequence>> read_units_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open unit file: " + path);
    std::vector<std::pair<std::string, UnitSequence>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos
                                                    : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw Error(path + ": malformed unit line " + std::to_string(line_no));
        UnitSequence seq;
        std::istringstream us(line.substr(tab1 + 1, tab2 - tab1 - 1));
        std::uint32_t v;
        while (us >> v) seq.units.push_back(v);
        std::istringstream ds(line.substr(tab2 + 1));
        while (ds >> v) seq.durations.push_back(v);
        if (seq.units.size() != seq.durations.size())
            throw Error(path + ": units/durations length mismatch at line " +
                        std::to_string(line_no));
        bool is_dedup = true;
        for (std::size_t i = 1; i < seq.units.size(); ++i)
            if (seq.units[i] == seq.units[i - 1]) is_dedup = false;
        seq.dedup = is_dedup;
        out.emplace_back(line.substr(0, tab1), std::move(seq));
    }
    return out;
}

}  // namespace unitkit

#endif
