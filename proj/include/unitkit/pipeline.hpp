#ifndef UNITKIT_PIPELINE_HPP
#define UNITKIT_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unitkit/augment.hpp"
#include "unitkit/error.hpp"
#include "unitkit/features.hpp"
#include "unitkit/kmeans.hpp"
#include "unitkit/manifest.hpp"
#include "unitkit/metrics.hpp"
#include "unitkit/parallel.hpp"
#include "unitkit/pitch.hpp"
#include "unitkit/sampler.hpp"
#include "unitkit/segment.hpp"
#include "unitkit/targets.hpp"

namespace unitkit {

/// Key-value config with [section] headers; '#' starts a comment line.
struct PipelineConfig {
    // section -> key -> value, sections kept in file order
    std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections;

    const std::map<std::string, std::string>* find(const std::string& name) const {
        for (const auto& [sec, kv] : sections)
            if (sec == name) return &kv;
        return nullptr;
    }
};

inline PipelineConfig parse_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path);
    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    std::string current;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        std::string s = line.substr(first, last - first + 1);
        if (s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            current = s.substr(1, s.size() - 2);
            cfg.sections.emplace_back(current, std::map<std::string, std::string>{});
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos || current.empty())
            throw Error(path + ": malformed config line " + std::to_string(line_no));
        std::string key = s.substr(0, eq);
        std::string value = s.substr(eq + 1);
        auto trim = [](std::string& t) {
            const auto a = t.find_first_not_of(" \t");
            const auto b = t.find_last_not_of(" \t");
            t = a == std::string::npos ? std::string{} : t.substr(a, b - a + 1);
        };
        trim(key);
        trim(value);
        cfg.sections.back().second[key] = value;
    }
    return cfg;
}

struct StageReport {
    std::string stage;
    std::string output;
    std::string digest;  // hex FNV-1a of the output file bytes
};

struct PipelineReport {
    std::vector<StageReport> stages;
};

namespace detail {

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot digest missing file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

inline std::string require(const std::map<std::string, std::string>& kv,
                           const std::string& stage, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
        throw Error("stage " + stage + ": missing config key \"" + key + "\"");
    return it->second;
}

inline std::string optional(const std::map<std::string, std::string>& kv,
                            const std::string& key, const std::string& fallback = {}) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

inline void require_path(const std::string& stage, const std::string& p) {
    if (!std::filesystem::exists(p))
        throw Error("stage " + stage + ": missing path " + p);
}

inline double to_double(const std::string& stage, const std::string& key, const std::string& v) {
    try {
        return std::stod(v);
    } catch (...) {
        throw Error("stage " + stage + ": invalid number for " + key + ": " + v);
    }
}

inline std::uint64_t to_u64(const std::string& stage, const std::string& key, const std::string& v) {
    try {
        return std::stoull(v);
    } catch (...) {
        throw Error("stage " + stage + ": invalid integer for " + key + ": " + v);
    }
}

/// "lo:hi" pair.
inline std::pair<double, double> to_range(const std::string& stage, const std::string& key,
                                          const std::string& v) {
    const auto colon = v.find(':');
    if (colon == std::string::npos)
        throw Error("stage " + stage + ": expected lo:hi for " + key + ": " + v);
    return {to_double(stage, key, v.substr(0, colon)),
            to_double(stage, key, v.substr(colon + 1))};
}

}  // namespace detail

/// Runs the configured stages in the fixed order
/// dpdp -> dedup -> metrics -> targets -> augment -> compose.
/// Sections absent from the config are skipped. All randomness comes from
/// explicit seeds in the config.
inline PipelineReport run_pipeline(const PipelineConfig& cfg, std::size_t default_threads = 1) {
    PipelineReport report;
    std::size_t threads = default_threads;
    if (const auto* p = cfg.find("pipeline")) {
        if (p->count("threads"))
            threads = static_cast<std::size_t>(detail::to_u64("pipeline", "threads", p->at("threads")));
    }
    auto record = [&](const std::string& stage, const std::string& out_path) {
        report.stages.push_back({stage, out_path, detail::file_digest(out_path)});
    };

    if (const auto* kv = cfg.find("dpdp")) {
        const std::string stage = "dpdp";
        const std::string cb_path = detail::require(*kv, stage, "codebook");
        detail::require_path(stage, cb_path);
        const std::string manifest_path = detail::require(*kv, stage, "manifest");
        detail::require_path(stage, manifest_path);
        const std::string feat_dir = detail::require(*kv, stage, "features");
        detail::require_path(stage, feat_dir);
        const std::string out_path = detail::require(*kv, stage, "out");
        DpdpParams params;
        params.lambda = detail::to_double(stage, "lambda", detail::optional(*kv, "lambda", "1.0"));
        params.max_segment_frames = static_cast<std::size_t>(
            detail::to_u64(stage, "max_segment_frames",
                           detail::optional(*kv, "max_segment_frames", "50")));

        const Codebook cb = read_codebook(cb_path);
        const Manifest m = load_manifest(manifest_path);
        std::vector<UnitSequence> results(m.records.size());
        parallel_for(m.records.size(), threads, [&](std::size_t i) {
            const std::string fp = feat_dir + "/" + m.records[i].id + ".fmat";
            const FeatureMatrix feats = read_features(fp);
            results[i] = dpdp_segment(feats, cb, params);
        });
        std::ofstream out(out_path);
        if (!out) throw Error("stage dpdp: cannot write " + out_path);
        for (std::size_t i = 0; i < m.records.size(); ++i)
            write_units(out, m.records[i].id, results[i]);
        out.close();
        record(stage, out_path);
    }

    if (const auto* kv = cfg.find("dedup")) {
        const std::string stage = "dedup";
        const std::string in_path = detail::require(*kv, stage, "in");
        detail::require_path(stage, in_path);
        const std::string out_path = detail::require(*kv, stage, "out");
        auto seqs = read_units_file(in_path);
        std::ofstream out(out_path);
        if (!out) throw Error("stage dedup: cannot write " + out_path);
        for (const auto& [id, seq] : seqs) write_units(out, id, dedup_runs(seq));
        out.close();
        record(stage, out_path);
    }

    if (const auto* kv = cfg.find("metrics")) {
        const std::string stage = "metrics";
        const std::string units_path = detail::require(*kv, stage, "units");
        detail::require_path(stage, units_path);
        const std::string align_dir = detail::require(*kv, stage, "alignments");
        detail::require_path(stage, align_dir);
        const std::string out_path = detail::require(*kv, stage, "out");
        auto seqs = read_units_file(units_path);
        ContingencyTable table;
        for (const auto& [id, seq] : seqs) {
            const auto framewise = expand_to_frames(seq);
            const auto align = read_alignment(align_dir + "/" + id + ".ali", framewise.size());
            table.merge(accumulate_counts(framewise, align));
        }
        nlohmann::json j;
        j["phone_purity"] = phone_purity(table);
        j["cluster_purity"] = cluster_purity(table);
        j["k_effective"] = table.num_units();
        j["total_frames"] = table.total;
        std::ofstream out(out_path);
        if (!out) throw Error("stage metrics: cannot write " + out_path);
        out << j.dump(2) << '\n';
        out.close();
        record(stage, out_path);
    }

    if (const auto* kv = cfg.find("targets")) {
        const std::string stage = "targets";
        const std::string units_path = detail::require(*kv, stage, "units");
        detail::require_path(stage, units_path);
        const std::string pitch_dir = detail::optional(*kv, "pitch");
        const std::string phoneme_dir = detail::optional(*kv, "phonemes");
        const std::string embed_dir = detail::optional(*kv, "embeddings");
        const std::string out_path = detail::require(*kv, stage, "out");
        auto seqs = read_units_file(units_path);
        std::uint32_t eos = 0;
        if (kv->count("eos")) {
            eos = static_cast<std::uint32_t>(detail::to_u64(stage, "eos", kv->at("eos")));
        } else {
            for (const auto& [id, seq] : seqs)
                for (auto u : seq.units) eos = std::max(eos, u + 1);
        }
        std::ofstream out(out_path);
        if (!out) throw Error("stage targets: cannot write " + out_path);
        for (const auto& [id, seq] : seqs) {
            UnitSequence dd = seq.dedup ? seq : dedup_runs(seq);
            nlohmann::json j;
            j["id"] = id;
            std::vector<std::uint32_t> phonemes;
            if (!phoneme_dir.empty()) {
                std::ifstream pin(phoneme_dir + "/" + id + ".phn");
                if (pin) {
                    std::uint32_t p;
                    while (pin >> p) phonemes.push_back(p);
                }
            }
            j["phonemes"] = phonemes;
            nlohmann::json groups = nlohmann::json::array();
            if (!phonemes.empty()) {
                const auto t = prepare_t2u_target(phonemes, dd, eos, eos, id);
                for (const auto& g : t.output_groups) groups.push_back({g[0], g[1]});
            }
            j["groups"] = groups;
            j["counts"] = dd.durations;
            j["pitch_path"] = pitch_dir.empty() ? "" : pitch_dir + "/" + id + ".f0";
            j["embedding_path"] = embed_dir.empty() ? "" : embed_dir + "/" + id + ".xv";
            out << j.dump() << '\n';
        }
        out.close();
        record(stage, out_path);
    }

    if (const auto* kv = cfg.find("augment")) {
        const std::string stage = "augment";
        const std::string manifest_path = detail::require(*kv, stage, "manifest");
        detail::require_path(stage, manifest_path);
        const std::string audio_root = detail::optional(*kv, "audio_root", ".");
        const std::string noise_path = detail::require(*kv, stage, "noise");
        detail::require_path(stage, noise_path);
        const std::string out_dir = detail::require(*kv, stage, "out_dir");
        const std::string out_manifest = detail::require(*kv, stage, "out_manifest");
        AugmentPolicy policy;
        auto stretch = detail::to_range(stage, "stretch", detail::optional(*kv, "stretch", "1.0:1.5"));
        policy.stretch_low = stretch.first;
        policy.stretch_high = stretch.second;
        auto snr = detail::to_range(stage, "snr", detail::optional(*kv, "snr", "0:15"));
        policy.snr_low_db = snr.first;
        policy.snr_high_db = snr.second;
        policy.seed = detail::to_u64(stage, "seed", detail::optional(*kv, "seed", "0"));
        policy.validate();

        const Manifest m = load_manifest(manifest_path);
        const Waveform noise = read_wav(noise_path);
        std::filesystem::create_directories(out_dir);
        std::vector<UtteranceRecord> out_records(m.records.size());
        parallel_for(m.records.size(), threads, [&](std::size_t i) {
            const auto& rec = m.records[i];
            const Waveform sig = read_wav(audio_root + "/" + rec.audio_path);
            const AugmentDraw draw = sample_policy(policy, rec.id);
            const MixResult mixed = mix_noise_at_snr(sig, noise, draw.snr_db, draw.noise_offset);
            UtteranceRecord r = rec;
            r.id = "aug-" + rec.id;  // augmented copies are new corpus entries
            r.audio_path = r.id + ".wav";
            write_wav(mixed.mixed, out_dir + "/" + r.audio_path);
            out_records[i] = std::move(r);
        });
        Manifest out_m;
        out_m.frame_rate_hz = m.frame_rate_hz;
        out_m.records = std::move(out_records);
        save_manifest(out_m, out_manifest);

        // Duration-domain stretch of a unit file, when configured.
        if (kv->count("units")) {
            const std::string units_in = kv->at("units");
            detail::require_path(stage, units_in);
            const std::string units_out = detail::require(*kv, stage, "units_out");
            auto seqs = read_units_file(units_in);
            std::ofstream uo(units_out);
            if (!uo) throw Error("stage augment: cannot write " + units_out);
            for (auto& [id, seq] : seqs) {
                const AugmentDraw draw = sample_policy(policy, id);
                seq.durations = stretch_durations(seq.durations, draw.stretch_scalar);
                write_units(uo, id, seq);
            }
            uo.close();
            record(stage, units_out);
        }
        record(stage, out_manifest);
    }

    if (const auto* kv = cfg.find("compose")) {
        const std::string stage = "compose";
        const std::string nat_path = detail::require(*kv, stage, "natural");
        detail::require_path(stage, nat_path);
        const std::string syn_path = detail::require(*kv, stage, "synthetic");
        detail::require_path(stage, syn_path);
        const std::string out_path = detail::require(*kv, stage, "out");
        MixSpec spec;
        spec.natural = load_manifest(nat_path);
        spec.synthetic = load_manifest(syn_path);
        spec.oversampling_rate = detail::to_double(stage, "rate", detail::optional(*kv, "rate", "1"));
        spec.epoch_size = 1;
        const auto merged = compose_corpus(spec);
        std::ofstream out(out_path);
        if (!out) throw Error("stage compose: cannot write " + out_path);
        for (const auto& wr : merged) {
            nlohmann::json j = detail::record_to_json(wr.record);
            j["weight"] = wr.weight;
            out << j.dump() << '\n';
        }
        out.close();
        record(stage, out_path);
    }

    return report;
}

}  // namespace unitkit

#endif
