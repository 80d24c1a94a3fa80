#ifndef UNITKIT_SAMPLER_HPP
#define UNITKIT_SAMPLER_HPP

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "unitkit/error.hpp"
#include "unitkit/manifest.hpp"
#include "unitkit/rng.hpp"

namespace unitkit {

struct MixSpec {
    Manifest natural;
    Manifest synthetic;
    double oversampling_rate = 1.0;  // r: natural sampled r times more often
    std::size_t epoch_size = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (oversampling_rate < 1.0) throw Error("MixSpec: oversampling_rate must be >= 1");
        if (epoch_size < 1) throw Error("MixSpec: epoch_size must be >= 1");
        if (natural.records.empty() || synthetic.records.empty())
            throw Error("MixSpec: both manifests must be nonempty");
    }
};

struct WeightedRecord {
    UtteranceRecord record;
    double weight = 1.0;
};

/// Merged corpus with per-record sampling weights: r for natural, 1 for
/// synthetic.
inline std::vector<WeightedRecord> compose_corpus(const MixSpec& spec) {
    spec.validate();
    std::unordered_set<std::string> ids;
    std::vector<WeightedRecord> out;
    out.reserve(spec.natural.records.size() + spec.synthetic.records.size());
    for (const auto& r : spec.natural.records) {
        if (!ids.insert(r.id).second)
            throw Error("compose_corpus: id collision \"" + r.id + "\"");
        out.push_back({r, spec.oversampling_rate});
    }
    for (const auto& r : spec.synthetic.records) {
        if (!ids.insert(r.id).second)
            throw Error("compose_corpus: id collision \"" + r.id + "\"");
        out.push_back({r, 1.0});
    }
    return out;
}

/// Weighted sampling with replacement from an explicit weighted pool,
/// a pure function of (seed, epoch_index).
inline std::vector<std::string> weighted_schedule(const std::vector<WeightedRecord>& pool,
                                                  std::size_t epoch_size,
                                                  std::uint64_t seed,
                                                  std::uint64_t epoch_index = 0) {
    if (pool.empty()) throw Error("weighted_schedule: empty pool");
    std::vector<double> cumulative(pool.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!(pool[i].weight > 0.0))
            throw Error("weighted_schedule: non-positive weight for \"" + pool[i].record.id + "\"");
        total += pool[i].weight;
        cumulative[i] = total;
    }

    Rng rng(mix_seed(seed, mix_seed(fnv1a64("epoch"), epoch_index)));
    std::vector<std::string> schedule;
    schedule.reserve(epoch_size);
    for (std::size_t s = 0; s < epoch_size; ++s) {
        const double u = rng.next_double() * total;
        std::size_t lo = 0, hi = pool.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] > u) hi = mid;
            else lo = mid + 1;
        }
        schedule.push_back(pool[lo].record.id);
    }
    return schedule;
}

inline std::vector<std::string> epoch_schedule(const MixSpec& spec, std::uint64_t epoch_index = 0) {
    return weighted_schedule(compose_corpus(spec), spec.epoch_size, spec.seed, epoch_index);
}

}  // namespace unitkit

#endif
