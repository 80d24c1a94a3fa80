#ifndef UNITKIT_METRICS_HPP
#define UNITKIT_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "unitkit/error.hpp"
#include "unitkit/features.hpp"

namespace unitkit {

/// Sparse unit x phone frame-count table. Mergeable monoid.
struct ContingencyTable {
    std::map<std::pair<std::uint32_t, std::string>, std::uint64_t> counts;
    std::uint64_t total = 0;

    void add(std::uint32_t unit, const std::string& phone, std::uint64_t n = 1) {
        counts[{unit, phone}] += n;
        total += n;
    }

    void merge(const ContingencyTable& other) {
        for (const auto& [key, n] : other.counts) counts[key] += n;
        total += other.total;
    }

    std::size_t num_units() const {
        std::uint32_t prev = 0;
        bool first = true;
        std::size_t n = 0;
        for (const auto& [key, _] : counts) {
            if (first || key.first != prev) ++n;
            prev = key.first;
            first = false;
        }
        return n;
    }
};

inline ContingencyTable accumulate_counts(const std::vector<std::uint32_t>& units,
                                          const PhoneAlignment& align) {
    const auto phones = align.to_frames();
    if (phones.size() != units.size()) {
        std::ostringstream msg;
        msg << "accumulate_counts: length mismatch, " << units.size()
            << " unit frames vs " << phones.size() << " aligned frames";
        throw Error(msg.str());
    }
    ContingencyTable t;
    for (std::size_t i = 0; i < units.size(); ++i) t.add(units[i], phones[i]);
    return t;
}

/// Frame-weighted probability that a frame's phone is the majority phone of
/// its unit: (1/total) * sum_u max_p counts[u][p].
inline double phone_purity(const ContingencyTable& t) {
    if (t.total == 0) throw Error("phone_purity: undefined on empty table");
    double sum = 0.0;
    std::uint64_t cur_max = 0;
    bool have = false;
    std::uint32_t cur_unit = 0;
    for (const auto& [key, n] : t.counts) {
        if (have && key.first != cur_unit) {
            sum += static_cast<double>(cur_max);
            cur_max = 0;
        }
        cur_unit = key.first;
        have = true;
        cur_max = std::max(cur_max, n);
    }
    if (have) sum += static_cast<double>(cur_max);
    return sum / static_cast<double>(t.total);
}

/// Transpose dual: (1/total) * sum_p max_u counts[u][p].
inline double cluster_purity(const ContingencyTable& t) {
    if (t.total == 0) throw Error("cluster_purity: undefined on empty table");
    std::map<std::string, std::uint64_t> per_phone_max;
    for (const auto& [key, n] : t.counts) {
        auto& m = per_phone_max[key.second];
        m = std::max(m, n);
    }
    double sum = 0.0;
    for (const auto& [_, m] : per_phone_max) sum += static_cast<double>(m);
    return sum / static_cast<double>(t.total);
}

inline double mean_absolute_error(const std::vector<double>& pred,
                                  const std::vector<double>& target,
                                  const std::vector<bool>* mask = nullptr) {
    if (pred.size() != target.size())
        throw Error("mean_absolute_error: length mismatch");
    if (mask && mask->size() != pred.size())
        throw Error("mean_absolute_error: mask length mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        sum += std::abs(pred[i] - target[i]);
        ++n;
    }
    if (n == 0) throw Error("mean_absolute_error: no unmasked positions");
    return sum / static_cast<double>(n);
}

}  // namespace unitkit

#endif
