#include <doctest.h>

#include "unitkit/manifest.hpp"
#include "unitkit/rng.hpp"
#include "test_util.hpp"

#include <cmath>
#include <set>

using namespace unitkit;

namespace {

std::string record_line(const std::string& id, const std::string& speaker,
                        const std::string& gender, double dur,
                        const std::string& kind = "natural") {
    return "{\"id\":\"" + id + "\",\"audio_path\":\"" + id + ".wav\",\"duration_sec\":" +
           std::to_string(dur) + ",\"speaker_id\":\"" + speaker + "\",\"gender\":\"" +
           gender + "\",\"kind\":\"" + kind + "\"}\n";
}

Manifest synthetic_corpus(std::size_t num_speakers, std::size_t utts_per_speaker,
                          double utt_sec) {
    Manifest m;
    for (std::size_t s = 0; s < num_speakers; ++s) {
        for (std::size_t u = 0; u < utts_per_speaker; ++u) {
            UtteranceRecord r;
            r.id = "spk" + std::to_string(s) + "_u" + std::to_string(u);
            r.audio_path = r.id + ".wav";
            r.duration_sec = utt_sec;
            r.speaker_id = "spk" + std::to_string(s);
            r.gender = (s % 2 == 0) ? Gender::male : Gender::female;
            m.records.push_back(r);
        }
    }
    return m;
}

}  // namespace

TEST_CASE("load_manifest: empty file") {
    testutil::TempDir tmp("manifest_empty");
    testutil::write_text(tmp.file("m.mnf"), "");
    const Manifest m = load_manifest(tmp.file("m.mnf"));
    CHECK(m.records.empty());
    CHECK(m.total_duration_sec() == 0.0);
}

TEST_CASE("load_manifest: two records, order preserved") {
    testutil::TempDir tmp("manifest_two");
    testutil::write_text(tmp.file("m.mnf"),
                         record_line("u1", "s1", "male", 3.0) +
                         record_line("u2", "s2", "female", 4.5));
    const Manifest m = load_manifest(tmp.file("m.mnf"));
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[0].id == "u1");
    CHECK(m.records[1].id == "u2");
    CHECK(m.records[1].gender == Gender::female);
    CHECK(m.total_duration_sec() == doctest::Approx(7.5));
}

TEST_CASE("load_manifest: duplicate id names the id and line") {
    testutil::TempDir tmp("manifest_dup");
    std::string content;
    content += record_line("u0", "s", "male", 1.0);
    content += record_line("u9", "s", "male", 1.0);
    content += record_line("u1", "s", "male", 1.0);  // line 3
    content += record_line("u2", "s", "male", 1.0);
    content += record_line("u3", "s", "male", 1.0);
    content += record_line("u4", "s", "male", 1.0);
    content += record_line("u1", "s", "male", 1.0);  // line 7, duplicate
    testutil::write_text(tmp.file("m.mnf"), content);
    try {
        load_manifest(tmp.file("m.mnf"));
        FAIL("expected duplicate-id error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("u1") != std::string::npos);
        CHECK(msg.find("7") != std::string::npos);
    }
}

TEST_CASE("load_manifest: malformed line reports line number") {
    testutil::TempDir tmp("manifest_bad");
    testutil::write_text(tmp.file("m.mnf"),
                         record_line("u1", "s", "male", 1.0) + "not json\n");
    try {
        load_manifest(tmp.file("m.mnf"));
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("load_manifest: unknown keys rejected") {
    testutil::TempDir tmp("manifest_unknown");
    testutil::write_text(tmp.file("m.mnf"),
                         "{\"id\":\"a\",\"audio_path\":\"a.wav\",\"duration_sec\":1,"
                         "\"speaker_id\":\"s\",\"gender\":\"male\",\"kind\":\"natural\","
                         "\"mystery\":1}\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("m.mnf")), Error);
}

TEST_CASE("save/load round-trip is the identity on records") {
    testutil::TempDir tmp("manifest_rt");
    Manifest m = synthetic_corpus(5, 3, 12.5);
    m.records[2].text = "hello world";
    m.records[2].has_text = true;
    m.records[4].tags = {"clean", "session1"};
    m.records[1].kind = Kind::synthetic;
    save_manifest(m, tmp.file("m.mnf"));
    const Manifest back = load_manifest(tmp.file("m.mnf"));
    REQUIRE(back.records.size() == m.records.size());
    for (std::size_t i = 0; i < m.records.size(); ++i)
        CHECK(back.records[i] == m.records[i]);
    CHECK(std::abs(back.total_duration_sec() - m.total_duration_sec()) <=
          1e-6 * m.total_duration_sec());
}

TEST_CASE("manifest_stats") {
    SUBCASE("empty") {
        const ManifestStats s = manifest_stats(Manifest{});
        CHECK(s.total_hours == 0.0);
        CHECK(s.num_utterances == 0);
        CHECK(s.num_speakers == 0);
    }
    SUBCASE("two 30 s records") {
        Manifest m = synthetic_corpus(2, 1, 30.0);
        const ManifestStats s = manifest_stats(m);
        CHECK(s.total_hours == doctest::Approx(60.0 / 3600.0));
        CHECK(s.num_utterances == 2);
    }
    SUBCASE("gender counts from a hand-built fixture") {
        Manifest m;
        for (int i = 0; i < 3; ++i) {
            UtteranceRecord r;
            r.id = "u" + std::to_string(i);
            r.audio_path = r.id + ".wav";
            r.duration_sec = 1.0;
            r.speaker_id = "s" + std::to_string(i);
            r.gender = i < 2 ? Gender::male : Gender::female;
            m.records.push_back(r);
        }
        const ManifestStats s = manifest_stats(m);
        CHECK(s.num_speakers == 3);
        CHECK(s.gender_counts.at("male") == 2);
        CHECK(s.gender_counts.at("female") == 1);
    }
}

TEST_CASE("build_split: speaker budget, balance, and hour window") {
    // 2338 speakers, enough utterances for ~960 h total.
    Manifest m = synthetic_corpus(2338, 30, 49.3);
    const Manifest split = build_split(m, 100.0, 245, true, 17);

    std::set<std::string> speakers;
    std::size_t males = 0, females = 0;
    std::set<std::string> seen;
    for (const auto& r : split.records) {
        speakers.insert(r.speaker_id);
        if (seen.insert(r.speaker_id).second) {
            if (r.gender == Gender::male) ++males;
            else ++females;
        }
    }
    CHECK(speakers.size() <= 245);
    CHECK(speakers.size() >= 200);  // the budget should be roughly used
    CHECK(std::abs(int(males) - int(females)) <= 1);
    const double hours = split.total_duration_sec() / 3600.0;
    CHECK(hours >= 98.0);
    CHECK(hours <= 102.0);
}

TEST_CASE("build_split: saturation returns the whole manifest") {
    Manifest m = synthetic_corpus(4, 2, 10.0);
    const Manifest split = build_split(m, 1000.0, 10, false, 3);
    CHECK(split.records.size() == m.records.size());
}

TEST_CASE("build_split: deterministic for a fixed seed") {
    testutil::TempDir tmp("split_det");
    Manifest m = synthetic_corpus(50, 10, 60.0);
    const Manifest a = build_split(m, 2.0, 20, true, 99);
    const Manifest b = build_split(m, 2.0, 20, true, 99);
    save_manifest(a, tmp.file("a.mnf"));
    save_manifest(b, tmp.file("b.mnf"));
    CHECK(testutil::read_bytes(tmp.file("a.mnf")) == testutil::read_bytes(tmp.file("b.mnf")));
}

TEST_CASE("build_split: output is a sub-multiset and idempotent") {
    Manifest m = synthetic_corpus(30, 8, 45.0);
    const Manifest split = build_split(m, 1.5, 10, false, 5);
    std::set<std::string> orig;
    for (const auto& r : m.records) orig.insert(r.id);
    std::set<std::string> got;
    for (const auto& r : split.records) {
        CHECK(orig.count(r.id) == 1);
        CHECK(got.insert(r.id).second);  // no duplication
    }
    const Manifest again = build_split(split, 1.5, 10, false, 5);
    CHECK(again.records.size() == split.records.size());
}

TEST_CASE("build_split: infeasible constraints") {
    Manifest m = synthetic_corpus(3, 2, 10.0);
    CHECK_THROWS_AS(build_split(m, 1.0, 0, false, 1), Error);
    CHECK_THROWS_AS(build_split(Manifest{}, 1.0, 5, false, 1), Error);
    CHECK_THROWS_AS(build_split(m, -1.0, 5, false, 1), Error);
}
