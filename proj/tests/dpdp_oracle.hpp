#ifndef UNITKIT_TESTS_DPDP_ORACLE_HPP
#define UNITKIT_TESTS_DPDP_ORACLE_HPP

// Exhaustive-search oracle for duration-penalized segmentation. Enumerates
// every segmentation (2^(T-1) boundary patterns) and every per-segment unit
// label, entirely independent of the DP implementation. Usable only for
// tiny T and k.

#include <cstdint>
#include <limits>
#include <vector>

#include "unitkit/kmeans.hpp"
#include "unitkit/segment.hpp"

namespace testoracle {

struct DpdpSolution {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> boundaries;  // segment end indices (exclusive)
    std::vector<std::uint32_t> units;     // one per segment
};

inline DpdpSolution exhaustive_dpdp(const unitkit::FeatureMatrix& feats,
                                    const unitkit::Codebook& cb,
                                    const unitkit::DpdpParams& params) {
    const std::size_t T = feats.rows;
    const std::size_t k = cb.k;

    // Per-frame squared distances, summed naively per segment.
    std::vector<std::vector<double>> d(T, std::vector<double>(k));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < feats.cols; ++j) {
                const double diff = double(feats.row(t)[j]) - cb.centroid(c)[j];
                s += diff * diff;
            }
            d[t][c] = s;
        }

    DpdpSolution best;
    const std::uint64_t patterns = T >= 1 ? (1ull << (T - 1)) : 0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        // bit i set = boundary after frame i
        std::vector<std::size_t> ends;
        for (std::size_t i = 0; i + 1 < T; ++i)
            if (mask & (1ull << i)) ends.push_back(i + 1);
        ends.push_back(T);

        bool ok = true;
        std::size_t start = 0;
        for (std::size_t e : ends) {
            if (e - start > params.max_segment_frames) ok = false;
            start = e;
        }
        if (!ok) continue;

        double cost = 0.0;
        std::vector<std::uint32_t> units;
        start = 0;
        for (std::size_t e : ends) {
            double seg_best = std::numeric_limits<double>::infinity();
            std::uint32_t seg_unit = 0;
            for (std::uint32_t c = 0; c < k; ++c) {
                double s = 0.0;
                for (std::size_t t = start; t < e; ++t) s += d[t][c];
                if (s < seg_best) {
                    seg_best = s;
                    seg_unit = c;
                }
            }
            cost += seg_best + params.lambda;
            units.push_back(seg_unit);
            start = e;
        }

        // Tie rule of the implementation: later boundaries preferred. With
        // boundaries encoded as end indices, "later" means lexicographically
        // larger end lists at equal cost and equal segment counts; strict
        // cost improvement always wins.
        if (cost < best.cost - 1e-12) {
            best.cost = cost;
            best.boundaries = ends;
            best.units = units;
        }
    }
    return best;
}

}  // namespace testoracle

#endif
