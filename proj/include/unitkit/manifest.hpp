#ifndef UNITKIT_MANIFEST_HPP
#define UNITKIT_MANIFEST_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "unitkit/error.hpp"
#include "unitkit/rng.hpp"

namespace unitkit {

enum class Gender { male, female, unknown };
enum class Kind { natural, synthetic };

inline std::string to_string(Gender g) {
    switch (g) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        default: return "unknown";
    }
}

inline std::string to_string(Kind k) {
    return k == Kind::natural ? "natural" : "synthetic";
}

inline Gender gender_from_string(const std::string& s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    if (s == "unknown") return Gender::unknown;
    throw Error("invalid gender value: " + s);
}

inline Kind kind_from_string(const std::string& s) {
    if (s == "natural") return Kind::natural;
    if (s == "synthetic") return Kind::synthetic;
    throw Error("invalid kind value: " + s);
}

struct UtteranceRecord {
    std::string id;
    std::string audio_path;
    double duration_sec = 0.0;
    std::string speaker_id;
    Gender gender = Gender::unknown;
    Kind kind = Kind::natural;
    std::string text;      // empty = absent
    bool has_text = false;
    std::set<std::string> tags;
    double weight = 1.0;   // sampling weight, written by compose

    bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
    std::vector<UtteranceRecord> records;
    double frame_rate_hz = 50.0;

    double total_duration_sec() const {
        double s = 0.0;
        for (const auto& r : records) s += r.duration_sec;
        return s;
    }
};

struct ManifestStats {
    double total_hours = 0.0;
    std::size_t num_utterances = 0;
    std::size_t num_speakers = 0;
    std::map<std::string, std::size_t> gender_counts;
    std::map<std::string, std::size_t> kind_counts;
};

namespace detail {

inline nlohmann::json record_to_json(const UtteranceRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["audio_path"] = r.audio_path;
    j["duration_sec"] = r.duration_sec;
    j["speaker_id"] = r.speaker_id;
    j["gender"] = to_string(r.gender);
    j["kind"] = to_string(r.kind);
    if (r.has_text) j["text"] = r.text;
    if (!r.tags.empty()) j["tags"] = r.tags;
    if (r.weight != 1.0) j["weight"] = r.weight;
    return j;
}

inline UtteranceRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
    static const std::unordered_set<std::string> known = {
        "id", "audio_path", "duration_sec", "speaker_id",
        "gender", "kind", "text", "tags", "weight"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key))
            throw Error("line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    }
    UtteranceRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.audio_path = j.at("audio_path").get<std::string>();
        r.duration_sec = j.at("duration_sec").get<double>();
        r.speaker_id = j.at("speaker_id").get<std::string>();
        r.gender = gender_from_string(j.at("gender").get<std::string>());
        r.kind = kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("text")) {
            r.text = j.at("text").get<std::string>();
            r.has_text = true;
        }
        if (j.contains("tags")) {
            for (const auto& t : j.at("tags")) r.tags.insert(t.get<std::string>());
        }
        if (j.contains("weight")) r.weight = j.at("weight").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    }
    if (!(r.duration_sec >= 0.0) || !std::isfinite(r.duration_sec))
        throw Error("line " + std::to_string(line_no) + ": invalid duration_sec");
    return r;
}

}  // namespace detail

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest: " + path);
    Manifest m;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw Error("line " + std::to_string(line_no) + ": malformed manifest line");
        UtteranceRecord r = detail::record_from_json(j, line_no);
        auto [it, inserted] = seen.emplace(r.id, line_no);
        if (!inserted)
            throw Error("duplicate id \"" + r.id + "\" at line " + std::to_string(line_no));
        m.records.push_back(std::move(r));
    }
    return m;
}

inline void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest: " + path);
    for (const auto& r : m.records) out << detail::record_to_json(r).dump() << '\n';
}

inline ManifestStats manifest_stats(const Manifest& m) {
    ManifestStats s;
    std::unordered_set<std::string> speakers;
    for (const auto& r : m.records) {
        s.total_hours += r.duration_sec / 3600.0;
        speakers.insert(r.speaker_id);
        s.gender_counts[to_string(r.gender)]++;
        s.kind_counts[to_string(r.kind)]++;
    }
    s.num_utterances = m.records.size();
    s.num_speakers = speakers.size();
    return s;
}

/// Selects a duration-bounded subset: speaker quotas first (alternating
/// genders when balancing), then a seeded uniform pass over the chosen
/// speakers' utterances until the hour target is met.
inline Manifest build_split(const Manifest& manifest, double target_hours,
                            std::size_t speaker_budget, bool gender_balance,
                            std::uint64_t seed) {
    if (target_hours <= 0.0) throw Error("build_split: target_hours must be > 0");
    if (manifest.records.empty()) throw Error("build_split: empty manifest");
    if (speaker_budget == 0) throw Error("build_split: infeasible, speaker_budget is 0");
    for (const auto& r : manifest.records)
        if (!(r.duration_sec > 0.0))
            throw Error("build_split: record \"" + r.id + "\" has non-positive duration");

    const double target_sec = target_hours * 3600.0;

    // Saturation: target covers the corpus within tolerance, return it whole.
    if (manifest.total_duration_sec() <= target_sec * 1.02) return manifest;

    // Group speakers by gender, in first-appearance order.
    std::vector<std::string> male, female, other;
    std::unordered_set<std::string> seen;
    for (const auto& r : manifest.records) {
        if (!seen.insert(r.speaker_id).second) continue;
        switch (r.gender) {
            case Gender::male: male.push_back(r.speaker_id); break;
            case Gender::female: female.push_back(r.speaker_id); break;
            default: other.push_back(r.speaker_id); break;
        }
    }

    Rng rng(mix_seed(seed, fnv1a64("build_split")));
    auto shuffle = [&rng](std::vector<std::string>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.next_index(i)]);
    };
    shuffle(male);
    shuffle(female);
    shuffle(other);

    std::unordered_set<std::string> chosen;
    if (gender_balance) {
        std::size_t mi = 0, fi = 0;
        while (chosen.size() < speaker_budget) {
            const bool take_male = (chosen.size() % 2 == 0);
            if (take_male && mi < male.size()) chosen.insert(male[mi++]);
            else if (!take_male && fi < female.size()) chosen.insert(female[fi++]);
            else if (mi < male.size() && mi <= fi) chosen.insert(male[mi++]);
            else if (fi < female.size() && fi <= mi) chosen.insert(female[fi++]);
            else break;  // one gender exhausted and |M-F| would exceed 1
        }
        if (chosen.empty()) throw Error("build_split: infeasible, no gendered speakers for balancing");
    } else {
        std::vector<std::string> all;
        all.reserve(male.size() + female.size() + other.size());
        all.insert(all.end(), male.begin(), male.end());
        all.insert(all.end(), female.begin(), female.end());
        all.insert(all.end(), other.begin(), other.end());
        shuffle(all);
        for (const auto& s : all) {
            if (chosen.size() >= speaker_budget) break;
            chosen.insert(s);
        }
    }

    // Uniform seeded order over the chosen speakers' utterances.
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
        if (chosen.count(manifest.records[i].speaker_id)) pool.push_back(i);
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng.next_index(i)]);

    std::vector<std::size_t> picked;
    double total = 0.0;
    for (std::size_t idx : pool) {
        const double d = manifest.records[idx].duration_sec;
        if (total + d > target_sec * 1.02) continue;
        picked.push_back(idx);
        total += d;
        if (total >= target_sec * 0.98) break;
    }
    std::sort(picked.begin(), picked.end());  // preserve manifest order

    Manifest out;
    out.frame_rate_hz = manifest.frame_rate_hz;
    for (std::size_t idx : picked) out.records.push_back(manifest.records[idx]);
    return out;
}

}  // namespace unitkit

#endif
