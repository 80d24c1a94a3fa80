// unitkit command-line front end. Every operation is a subcommand; errors go
// to stderr with a nonzero exit, data and reports go to stdout or the given
// output paths.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "unitkit/unitkit.hpp"

namespace fs = std::filesystem;
using namespace unitkit;

namespace {

std::string stem_of(const std::string& path) {
    return fs::path(path).stem().string();
}

void cmd_manifest_stats(const std::string& path) {
    const Manifest m = load_manifest(path);
    const ManifestStats s = manifest_stats(m);
    nlohmann::json j;
    j["total_hours"] = s.total_hours;
    j["num_utterances"] = s.num_utterances;
    j["num_speakers"] = s.num_speakers;
    j["gender_counts"] = s.gender_counts;
    j["kind_counts"] = s.kind_counts;
    std::cout << j.dump(2) << '\n';
}

void cmd_split(const std::string& in, const std::string& out, double hours,
               std::size_t speakers, bool balance, std::uint64_t seed) {
    const Manifest m = load_manifest(in);
    const Manifest split = build_split(m, hours, speakers, balance, seed);
    save_manifest(split, out);
    std::cerr << "wrote " << split.records.size() << " records, "
              << manifest_stats(split).total_hours << " h\n";
}

void cmd_kmeans_fit(const std::vector<std::string>& feature_paths, const std::string& out,
                    std::size_t k, std::uint64_t seed, std::size_t max_iters, double tol,
                    double subsample, std::uint64_t subsample_seed) {
    std::vector<FeatureMatrix> mats;
    mats.reserve(feature_paths.size());
    for (const auto& p : feature_paths) mats.push_back(read_features(p));
    if (subsample < 1.0) {
        // keep each frame with probability `subsample`, seeded
        Rng rng(mix_seed(subsample_seed, fnv1a64("subsample")));
        for (auto& m : mats) {
            FeatureMatrix kept;
            kept.cols = m.cols;
            kept.frame_rate_hz = m.frame_rate_hz;
            kept.source_layer = m.source_layer;
            for (std::size_t t = 0; t < m.rows; ++t) {
                if (rng.next_double() >= subsample) continue;
                kept.data.insert(kept.data.end(), m.row(t), m.row(t) + m.cols);
                kept.rows++;
            }
            m = std::move(kept);
        }
    }
    std::vector<const FeatureMatrix*> ptrs;
    for (const auto& m : mats)
        if (m.rows > 0) ptrs.push_back(&m);
    const Codebook cb = kmeans_fit(ptrs, k, max_iters, tol, seed);
    write_codebook(cb, out);
    std::cerr << "k=" << cb.k << " dim=" << cb.dim << " iterations=" << cb.iterations
              << " inertia=" << cb.inertia << '\n';
}

void cmd_kmeans_assign(const std::string& cb_path, const std::string& feat_path,
                       const std::string& out_path) {
    const Codebook cb = read_codebook(cb_path);
    const FeatureMatrix feats = read_features(feat_path);
    const auto ids = kmeans_assign(feats, cb);
    UnitSequence seq;
    seq.frame_rate_hz = feats.frame_rate_hz;
    seq.units = ids;
    seq.durations.assign(ids.size(), 1);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    write_units(out, stem_of(feat_path), seq);
}

void cmd_dpdp(const std::string& cb_path, const std::string& feat_path,
              const std::string& out_path, double lambda, std::size_t max_seg) {
    const Codebook cb = read_codebook(cb_path);
    const FeatureMatrix feats = read_features(feat_path);
    const UnitSequence seq = dpdp_segment(feats, cb, DpdpParams{lambda, max_seg});
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    write_units(out, stem_of(feat_path), seq);
}

void cmd_dedup(const std::string& in_path, const std::string& out_path) {
    auto seqs = read_units_file(in_path);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    for (const auto& [id, seq] : seqs) write_units(out, id, dedup_runs(seq));
}

void cmd_ratio(const std::string& units_path, const std::string& align_dir) {
    auto seqs = read_units_file(units_path);
    std::vector<std::size_t> unit_lengths, phoneme_lengths;
    for (const auto& [id, seq] : seqs) {
        const auto align = read_alignment(align_dir + "/" + id + ".ali", seq.total_frames());
        unit_lengths.push_back(seq.units.size());
        phoneme_lengths.push_back(align.intervals.size());
    }
    std::cout << length_ratio(unit_lengths, phoneme_lengths) << '\n';
}

void cmd_purity(const std::string& units_dir, const std::string& align_dir,
                const std::string& report) {
    ContingencyTable table;
    std::vector<fs::path> files;
    if (fs::is_directory(units_dir)) {
        for (const auto& e : fs::directory_iterator(units_dir))
            if (e.path().extension() == ".units" || e.path().extension() == ".txt")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(units_dir);
    }
    for (const auto& f : files) {
        for (const auto& [id, seq] : read_units_file(f.string())) {
            const auto framewise = expand_to_frames(seq);
            const auto align = read_alignment(align_dir + "/" + id + ".ali", framewise.size());
            table.merge(accumulate_counts(framewise, align));
        }
    }
    nlohmann::json j;
    j["phone_purity"] = phone_purity(table);
    j["cluster_purity"] = cluster_purity(table);
    j["k_effective"] = table.num_units();
    j["total_frames"] = table.total;
    if (report == "json") {
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "phone_purity=" << j["phone_purity"] << " cluster_purity="
                  << j["cluster_purity"] << " k_effective=" << j["k_effective"]
                  << " total_frames=" << j["total_frames"] << '\n';
    }
}

void cmd_f0(const std::string& wav_path, const std::string& out_path, double frame_rate,
            double f_min, double f_max, double threshold) {
    const Waveform w = read_wav(wav_path);
    const PitchTrack track = extract_f0(w, frame_rate, f_min, f_max, threshold);
    write_pitch(track, out_path);
    std::size_t voiced = 0;
    for (bool v : track.voiced) voiced += v;
    std::cerr << track.log_f0.size() << " frames, " << voiced << " voiced\n";
}

void cmd_targets(const std::string& manifest_path, const std::string& units_path,
                 const std::string& pitch_dir, const std::string& out_dir,
                 const std::string& phoneme_dir, const std::string& embed_dir) {
    const Manifest m = load_manifest(manifest_path);
    auto seqs = read_units_file(units_path);
    std::map<std::string, UnitSequence> by_id;
    std::uint32_t eos = 0;
    for (auto& [id, seq] : seqs) {
        for (auto u : seq.units) eos = std::max(eos, u + 1);
        by_id.emplace(id, std::move(seq));
    }
    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/targets.jsonl");
    if (!out) throw Error("cannot write " + out_dir + "/targets.jsonl");
    for (const auto& rec : m.records) {
        auto it = by_id.find(rec.id);
        if (it == by_id.end()) throw Error("no units for utterance \"" + rec.id + "\"");
        UnitSequence dd = it->second.dedup ? it->second : dedup_runs(it->second);
        nlohmann::json j;
        j["id"] = rec.id;
        std::vector<std::uint32_t> phonemes;
        if (!phoneme_dir.empty()) {
            std::ifstream pin(phoneme_dir + "/" + rec.id + ".phn");
            std::uint32_t p;
            while (pin >> p) phonemes.push_back(p);
        }
        j["phonemes"] = phonemes;
        nlohmann::json groups = nlohmann::json::array();
        if (!phonemes.empty()) {
            const auto t = prepare_t2u_target(phonemes, dd, eos, eos, rec.id);
            for (const auto& g : t.output_groups) groups.push_back({g[0], g[1]});
        }
        j["groups"] = groups;
        j["counts"] = dd.durations;
        j["pitch_path"] = pitch_dir.empty() ? "" : pitch_dir + "/" + rec.id + ".f0";
        j["embedding_path"] = embed_dir.empty() ? "" : embed_dir + "/" + rec.id + ".xv";
        out << j.dump() << '\n';
    }
}

void cmd_augment(const std::string& in_manifest, const std::string& out_dir,
                 const std::string& noise_manifest, const std::string& audio_root,
                 const std::string& stretch, const std::string& snr, std::uint64_t seed,
                 std::size_t threads) {
    AugmentPolicy policy;
    auto parse_range = [](const std::string& s, double& lo, double& hi) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw Error("expected lo:hi range: " + s);
        lo = std::stod(s.substr(0, colon));
        hi = std::stod(s.substr(colon + 1));
    };
    parse_range(stretch, policy.stretch_low, policy.stretch_high);
    parse_range(snr, policy.snr_low_db, policy.snr_high_db);
    policy.seed = seed;
    policy.validate();

    const Manifest m = load_manifest(in_manifest);
    const Manifest noise_m = load_manifest(noise_manifest);
    if (noise_m.records.empty()) throw Error("empty noise manifest");
    const std::string noise_root = fs::path(noise_manifest).parent_path().string();

    fs::create_directories(out_dir);
    std::vector<UtteranceRecord> out_records(m.records.size());
    parallel_for(m.records.size(), threads, [&](std::size_t i) {
        const auto& rec = m.records[i];
        const Waveform sig = read_wav(audio_root.empty()
                                          ? rec.audio_path
                                          : audio_root + "/" + rec.audio_path);
        const AugmentDraw draw = sample_policy(policy, rec.id);
        const auto& nrec = noise_m.records[draw.noise_offset % noise_m.records.size()];
        const Waveform noise = read_wav(noise_root.empty()
                                            ? nrec.audio_path
                                            : noise_root + "/" + nrec.audio_path);
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
    save_manifest(out_m, out_dir + "/augmented.mnf");
}

void cmd_compose(const std::string& natural, const std::string& synthetic,
                 double rate, const std::string& out_path) {
    MixSpec spec;
    spec.natural = load_manifest(natural);
    spec.synthetic = load_manifest(synthetic);
    spec.oversampling_rate = rate;
    const auto merged = compose_corpus(spec);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    for (const auto& wr : merged) {
        nlohmann::json j = detail::record_to_json(wr.record);
        j["weight"] = wr.weight;
        out << j.dump() << '\n';
    }
}

void cmd_sample(const std::string& merged_path, std::size_t epoch_size,
                std::size_t epochs, std::uint64_t seed) {
    const Manifest m = load_manifest(merged_path);
    std::vector<WeightedRecord> pool;
    pool.reserve(m.records.size());
    for (const auto& r : m.records) pool.push_back({r, r.weight});
    for (std::size_t e = 0; e < epochs; ++e)
        for (const auto& id : weighted_schedule(pool, epoch_size, seed, e))
            std::cout << id << '\n';
}

void cmd_pipeline(const std::string& config_path, std::size_t threads) {
    const PipelineConfig cfg = parse_pipeline_config(config_path);
    const PipelineReport report = run_pipeline(cfg, threads);
    for (const auto& s : report.stages)
        std::cout << "stage=" << s.stage << " output=" << s.output
                  << " digest=" << s.digest << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete speech unit pipeline toolkit", "unitkit"};
    app.require_subcommand(1);

    std::string in, out, cb_path, feat_path, units_path, align_dir, manifest_path;
    std::string pitch_dir, phoneme_dir, embed_dir, noise_manifest, audio_root;
    std::string stretch = "1.0:1.5", snr = "0:15", report = "json", config_path;
    std::vector<std::string> feature_paths;
    double hours = 100.0, lambda = 1.0, tol = kKmeansDefaultTol;
    double frame_rate = 50.0, f_min = 60.0, f_max = 400.0, threshold = 0.3, rate = 1.0;
    double subsample = 1.0;
    std::size_t speakers = 245, k = 500, max_iters = kKmeansDefaultMaxIters;
    std::size_t max_seg = 50, epoch_size = 1000, epochs = 1, threads = 1;
    std::uint64_t seed = 0;
    bool balance = false;

    auto* c_stats = app.add_subcommand("manifest-stats", "Summarize a manifest");
    c_stats->add_option("path", in, "Manifest path")->required();

    auto* c_split = app.add_subcommand("split", "Build a duration-bounded corpus split");
    c_split->add_option("--hours", hours, "Target hours")->required();
    c_split->add_option("--speakers", speakers, "Speaker budget")->required();
    c_split->add_flag("--balance", balance, "Balance male/female speaker counts");
    c_split->add_option("--seed", seed, "Random seed")->required();
    c_split->add_option("in", in, "Input manifest")->required();
    c_split->add_option("out", out, "Output manifest")->required();

    auto* c_fit = app.add_subcommand("kmeans-fit", "Learn a codebook from feature files");
    c_fit->add_option("--k", k, "Number of clusters")->required();
    c_fit->add_option("--seed", seed, "Random seed")->required();
    c_fit->add_option("--max-iters", max_iters, "Lloyd iteration cap");
    c_fit->add_option("--tol", tol, "Relative inertia tolerance");
    c_fit->add_option("--subsample", subsample, "Frame keep probability (default all frames)");
    c_fit->add_option("inputs", feature_paths, "Feature files, last argument is the output codebook")
        ->required()
        ->expected(-2);

    auto* c_assign = app.add_subcommand("kmeans-assign", "Assign frames to nearest centroids");
    c_assign->add_option("codebook", cb_path, "Codebook file")->required();
    c_assign->add_option("features", feat_path, "Feature file")->required();
    c_assign->add_option("out", out, "Output unit file")->required();

    auto* c_dpdp = app.add_subcommand("dpdp", "Duration-penalized segmentation");
    c_dpdp->add_option("--lambda", lambda, "Duration penalty");
    c_dpdp->add_option("--max-segment-frames", max_seg, "Segment length cap");
    c_dpdp->add_option("codebook", cb_path, "Codebook file")->required();
    c_dpdp->add_option("features", feat_path, "Feature file")->required();
    c_dpdp->add_option("out", out, "Output unit file")->required();

    auto* c_dedup = app.add_subcommand("dedup", "Merge consecutive repeated units");
    c_dedup->add_option("in", in, "Input unit file")->required();
    c_dedup->add_option("out", out, "Output unit file")->required();

    auto* c_ratio = app.add_subcommand("ratio", "Mean unit/phoneme length ratio");
    c_ratio->add_option("units", units_path, "Unit file")->required();
    c_ratio->add_option("alignments", align_dir, "Alignment directory")->required();

    auto* c_purity = app.add_subcommand("purity", "Phone and cluster purity");
    c_purity->add_option("units", units_path, "Unit file or directory")->required();
    c_purity->add_option("alignments", align_dir, "Alignment directory")->required();
    c_purity->add_option("--report", report, "Report format: json or text");

    auto* c_f0 = app.add_subcommand("f0", "Extract a frame-level pitch track");
    c_f0->add_option("--frame-rate", frame_rate, "Frames per second");
    c_f0->add_option("--f-min", f_min, "Search band low edge (Hz)");
    c_f0->add_option("--f-max", f_max, "Search band high edge (Hz)");
    c_f0->add_option("--voicing-threshold", threshold, "Autocorrelation peak threshold");
    c_f0->add_option("wav", in, "Input wav")->required();
    c_f0->add_option("out", out, "Output pitch file (FMAT, two rows)")->required();

    auto* c_targets = app.add_subcommand("targets", "Prepare T2U and predictor targets");
    c_targets->add_option("manifest", manifest_path, "Manifest")->required();
    c_targets->add_option("units", units_path, "Unit file")->required();
    c_targets->add_option("pitch", pitch_dir, "Pitch directory")->required();
    c_targets->add_option("out", out, "Output directory")->required();
    c_targets->add_option("--phonemes", phoneme_dir, "Phoneme id directory (<id>.phn)");
    c_targets->add_option("--embeddings", embed_dir, "Session embedding directory (<id>.xv)");

    auto* c_aug = app.add_subcommand("augment", "Add noise at sampled SNR per utterance");
    c_aug->add_option("--stretch", stretch, "Duration stretch range lo:hi");
    c_aug->add_option("--snr", snr, "SNR range lo:hi (dB)");
    c_aug->add_option("--noise-manifest", noise_manifest, "Noise clip manifest")->required();
    c_aug->add_option("--seed", seed, "Random seed")->required();
    c_aug->add_option("--audio-root", audio_root, "Root for manifest audio paths");
    c_aug->add_option("--threads", threads, "Worker thread cap");
    c_aug->add_option("in", in, "Input manifest")->required();
    c_aug->add_option("out", out, "Output directory")->required();

    auto* c_compose = app.add_subcommand("compose", "Merge corpora with sampling weights");
    c_compose->add_option("--rate", rate, "Oversampling rate r for natural data")->required();
    c_compose->add_option("--natural", in, "Natural manifest")->required();
    c_compose->add_option("--synthetic", feat_path, "Synthetic manifest")->required();
    c_compose->add_option("--out", out, "Merged manifest")->required();

    auto* c_sample = app.add_subcommand("sample", "Emit a weighted epoch schedule");
    c_sample->add_option("--epoch-size", epoch_size, "Draws per epoch")->required();
    c_sample->add_option("--epochs", epochs, "Number of epochs");
    c_sample->add_option("--seed", seed, "Random seed")->required();
    c_sample->add_option("merged", in, "Merged manifest with weights")->required();

    auto* c_pipe = app.add_subcommand("pipeline", "Run configured stages in order");
    c_pipe->add_option("config", config_path, "Pipeline config file")->required();
    c_pipe->add_option("--threads", threads, "Worker thread cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_stats) cmd_manifest_stats(in);
        else if (*c_split) cmd_split(in, out, hours, speakers, balance, seed);
        else if (*c_fit) {
            if (feature_paths.size() < 2)
                throw Error("kmeans-fit needs at least one feature file and an output path");
            std::string cb_out = feature_paths.back();
            feature_paths.pop_back();
            cmd_kmeans_fit(feature_paths, cb_out, k, seed, max_iters, tol, subsample, seed);
        }
        else if (*c_assign) cmd_kmeans_assign(cb_path, feat_path, out);
        else if (*c_dpdp) cmd_dpdp(cb_path, feat_path, out, lambda, max_seg);
        else if (*c_dedup) cmd_dedup(in, out);
        else if (*c_ratio) cmd_ratio(units_path, align_dir);
        else if (*c_purity) cmd_purity(units_path, align_dir, report);
        else if (*c_f0) cmd_f0(in, out, frame_rate, f_min, f_max, threshold);
        else if (*c_targets) cmd_targets(manifest_path, units_path, pitch_dir, out, phoneme_dir, embed_dir);
        else if (*c_aug) cmd_augment(in, out, noise_manifest, audio_root, stretch, snr, seed, threads);
        else if (*c_compose) cmd_compose(in, feat_path, rate, out);
        else if (*c_sample) cmd_sample(in, epoch_size, epochs, seed);
        else if (*c_pipe) cmd_pipeline(config_path, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
