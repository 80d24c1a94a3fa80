#include <doctest.h>

#include "unitkit/segment.hpp"
#include "unitkit/rng.hpp"
#include "dpdp_oracle.hpp"
#include "test_util.hpp"

#include <cmath>
#include <sstream>

using namespace unitkit;

namespace {

FeatureMatrix random_features(std::size_t T, std::size_t D, Rng& rng, double scale = 2.0) {
    FeatureMatrix m;
    m.rows = T;
    m.cols = D;
    for (std::size_t i = 0; i < T * D; ++i)
        m.data.push_back(static_cast<float>((rng.next_double() * 2.0 - 1.0) * scale));
    return m;
}

Codebook random_codebook(std::size_t k, std::size_t D, Rng& rng, double scale = 2.0) {
    Codebook cb;
    cb.k = k;
    cb.dim = D;
    for (std::size_t i = 0; i < k * D; ++i)
        cb.centroids.push_back((rng.next_double() * 2.0 - 1.0) * scale);
    return cb;
}

double sequence_cost(const FeatureMatrix& feats, const Codebook& cb,
                     const UnitSequence& seq, double lambda) {
    const UnitSequence dd = dedup_runs(seq);
    double cost = 0.0;
    std::size_t t = 0;
    for (std::size_t i = 0; i < dd.units.size(); ++i) {
        for (std::uint32_t r = 0; r < dd.durations[i]; ++r, ++t) {
            double s = 0.0;
            for (std::size_t j = 0; j < feats.cols; ++j) {
                const double diff = double(feats.row(t)[j]) - cb.centroid(dd.units[i])[j];
                s += diff * diff;
            }
            cost += s;
        }
        cost += lambda;
    }
    return cost;
}

}  // namespace

TEST_CASE("dpdp: lambda=0, max_segment_frames=1 degenerates to framewise assignment") {
    Rng rng(5);
    const FeatureMatrix feats = random_features(40, 3, rng);
    const Codebook cb = random_codebook(6, 3, rng);
    const UnitSequence seq = dpdp_segment(feats, cb, DpdpParams{0.0, 1});
    const auto assigned = kmeans_assign(feats, cb);
    CHECK(seq.units == assigned);
    CHECK(seq.total_frames() == feats.rows);
}

TEST_CASE("dpdp: T=1 single segment") {
    Rng rng(6);
    const FeatureMatrix feats = random_features(1, 2, rng);
    const Codebook cb = random_codebook(3, 2, rng);
    const UnitSequence seq = dpdp_segment(feats, cb, DpdpParams{1.0, 50});
    REQUIRE(seq.units.size() == 1);
    CHECK(seq.units[0] == kmeans_assign(feats, cb)[0]);
    CHECK(sequence_cost(feats, cb, seq, 1.0) ==
          doctest::Approx(dpdp_cost(feats, cb, DpdpParams{1.0, 50})));
}

TEST_CASE("dpdp: exhaustive oracle equality on small instances") {
    Rng rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t T = 1 + rng.next_index(8);
        const std::size_t D = 1 + rng.next_index(3);
        const std::size_t k = 1 + rng.next_index(3);
        const double lambda = (trial % 3) * 0.5;
        const FeatureMatrix feats = random_features(T, D, rng);
        const Codebook cb = random_codebook(k, D, rng);
        const DpdpParams params{lambda, 8};

        const auto oracle = testoracle::exhaustive_dpdp(feats, cb, params);
        const UnitSequence seq = dpdp_segment(feats, cb, params);
        const double got = sequence_cost(feats, cb, seq, lambda);
        CHECK(std::abs(got - oracle.cost) <= 1e-9);
    }
}

TEST_CASE("dpdp: cost monotone non-decreasing and segments non-increasing in lambda") {
    Rng rng(8);
    const FeatureMatrix feats = random_features(30, 2, rng);
    const Codebook cb = random_codebook(4, 2, rng);
    double prev_cost = -1.0;
    std::size_t prev_segments = SIZE_MAX;
    for (double lambda : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const UnitSequence seq = dpdp_segment(feats, cb, DpdpParams{lambda, 50});
        const double cost = sequence_cost(feats, cb, seq, lambda);
        const std::size_t n_segments = dedup_runs(seq).units.size();
        CHECK(cost >= prev_cost - 1e-9);
        CHECK(n_segments <= prev_segments);
        CHECK(seq.total_frames() == feats.rows);
        prev_cost = cost;
        prev_segments = n_segments;
    }
}

TEST_CASE("dpdp: error cases") {
    Rng rng(9);
    const Codebook cb = random_codebook(3, 2, rng);
    FeatureMatrix empty;
    empty.rows = 0;
    empty.cols = 2;
    CHECK_THROWS_AS(dpdp_segment(empty, cb, DpdpParams{1.0, 50}), Error);
    const FeatureMatrix wrong = random_features(5, 3, rng);
    CHECK_THROWS_AS(dpdp_segment(wrong, cb, DpdpParams{1.0, 50}), Error);
}

TEST_CASE("dedup_runs: definition, idempotence, expansion inverse") {
    SUBCASE("merges runs") {
        UnitSequence s;
        s.units = {5, 5, 7, 7, 7, 5};
        s.durations = {1, 1, 1, 1, 1, 1};
        const UnitSequence d = dedup_runs(s);
        CHECK(d.units == std::vector<std::uint32_t>{5, 7, 5});
        CHECK(d.durations == std::vector<std::uint32_t>{2, 3, 1});
        CHECK(d.total_frames() == 6);
        CHECK(d.dedup);
    }
    SUBCASE("idempotent on deduplicated input") {
        UnitSequence s;
        s.units = {1, 2, 3};
        s.durations = {4, 1, 2};
        s.dedup = true;
        const UnitSequence d = dedup_runs(s);
        CHECK(d.units == s.units);
        CHECK(d.durations == s.durations);
    }
    SUBCASE("random sequences: expand(dedup(s)) = framewise(s)") {
        Rng rng(10);
        for (int trial = 0; trial < 200; ++trial) {
            UnitSequence s;
            const std::size_t n = 1 + rng.next_index(40);
            for (std::size_t i = 0; i < n; ++i) {
                s.units.push_back(static_cast<std::uint32_t>(rng.next_index(4)));
                s.durations.push_back(1 + static_cast<std::uint32_t>(rng.next_index(3)));
            }
            CHECK(expand_to_frames(dedup_runs(s)) == expand_to_frames(s));
        }
    }
}

TEST_CASE("length_ratio") {
    CHECK(length_ratio({42}, {10}) == doctest::Approx(4.2));
    CHECK(length_ratio({7, 9, 13}, {7, 9, 13}) == doctest::Approx(1.0));
    CHECK(length_ratio({4, 8}, {2, 2}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(length_ratio({1, 2}, {1}), Error);
    try {
        length_ratio({1, 2}, {1, 0});
        FAIL("expected zero-length error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("pipeline ratio ordering: raw >= dedup >= dpdp+dedup") {
    // Toy corpus: phone-like stretches of a centroid plus noise.
    Rng rng(12);
    Codebook cb;
    cb.k = 5;
    cb.dim = 2;
    for (std::size_t i = 0; i < 10; ++i) cb.centroids.push_back(rng.next_double() * 10.0);

    double raw_sum = 0.0, dedup_sum = 0.0, dpdp_sum = 0.0;
    const int utts = 20;
    for (int u = 0; u < utts; ++u) {
        const std::size_t phones = 3 + rng.next_index(4);
        FeatureMatrix feats;
        feats.cols = 2;
        for (std::size_t p = 0; p < phones; ++p) {
            const std::size_t c = rng.next_index(5);
            const std::size_t len = 4 + rng.next_index(5);
            for (std::size_t t = 0; t < len; ++t) {
                for (std::size_t j = 0; j < 2; ++j)
                    feats.data.push_back(static_cast<float>(
                        cb.centroids[c * 2 + j] + (rng.next_double() - 0.5) * 1.2));
                feats.rows++;
            }
        }
        UnitSequence raw;
        raw.units = kmeans_assign(feats, cb);
        raw.durations.assign(raw.units.size(), 1);
        const UnitSequence dd = dedup_runs(raw);
        const UnitSequence smooth = dedup_runs(dpdp_segment(feats, cb, DpdpParams{1.0, 50}));
        raw_sum += double(raw.units.size()) / double(phones);
        dedup_sum += double(dd.units.size()) / double(phones);
        dpdp_sum += double(smooth.units.size()) / double(phones);
    }
    CHECK(raw_sum / utts >= dedup_sum / utts);
    CHECK(dedup_sum / utts >= dpdp_sum / utts);
}

TEST_CASE("unit file round trip") {
    testutil::TempDir tmp("units");
    UnitSequence a;
    a.units = {3, 3, 9, 1};
    a.durations = {1, 1, 1, 1};
    UnitSequence b;
    b.units = {5, 7, 5};
    b.durations = {2, 3, 1};
    b.dedup = true;
    {
        std::ofstream out(tmp.file("u.units"));
        write_units(out, "utt_a", a);
        write_units(out, "utt_b", b);
    }
    const auto back = read_units_file(tmp.file("u.units"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].first == "utt_a");
    CHECK(back[0].second.units == a.units);
    CHECK(back[0].second.dedup == false);
    CHECK(back[1].first == "utt_b");
    CHECK(back[1].second.durations == b.durations);
    CHECK(back[1].second.dedup == true);
}
