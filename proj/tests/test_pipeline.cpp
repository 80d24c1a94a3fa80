#include <doctest.h>

#include "unitkit/pipeline.hpp"
#include "toy_corpus.hpp"
#include "test_util.hpp"

using namespace unitkit;

TEST_CASE("pipeline: empty stage list succeeds with an empty report") {
    testutil::TempDir tmp("pipe_empty");
    testutil::write_text(tmp.file("empty.cfg"), "[pipeline]\nthreads = 1\n");
    const PipelineConfig cfg = parse_pipeline_config(tmp.file("empty.cfg"));
    const PipelineReport report = run_pipeline(cfg);
    CHECK(report.stages.empty());
}

TEST_CASE("pipeline: missing codebook fails naming stage dpdp and the path") {
    testutil::TempDir tmp("pipe_missing");
    testutil::write_text(tmp.file("bad.cfg"),
                         "[dpdp]\n"
                         "codebook = /nonexistent/cb.kmcb\n"
                         "manifest = x.mnf\n"
                         "features = f\n"
                         "out = u.txt\n");
    const PipelineConfig cfg = parse_pipeline_config(tmp.file("bad.cfg"));
    try {
        run_pipeline(cfg);
        FAIL("expected missing-path error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("dpdp") != std::string::npos);
        CHECK(msg.find("/nonexistent/cb.kmcb") != std::string::npos);
    }
}

TEST_CASE("pipeline: full toy run is deterministic across runs and thread counts") {
    testutil::TempDir tmp("pipe_full");
    const auto corpus = toycorpus::build(tmp.subdir("corpus"), 12, 3);

    auto run_once = [&](const std::string& work, std::size_t threads) {
        std::filesystem::create_directories(work);
        const std::string cfg_path = work + "/pipeline.cfg";
        testutil::write_text(cfg_path, toycorpus::pipeline_config_text(corpus.root, work));
        PipelineConfig cfg = parse_pipeline_config(cfg_path);
        return run_pipeline(cfg, threads);
    };

    const PipelineReport a = run_once(tmp.subdir("run_a"), 1);
    const PipelineReport b = run_once(tmp.subdir("run_b"), 1);
    const PipelineReport c = run_once(tmp.subdir("run_c"), 4);

    REQUIRE(a.stages.size() == b.stages.size());
    REQUIRE(a.stages.size() == c.stages.size());
    CHECK(a.stages.size() >= 6);
    for (std::size_t i = 0; i < a.stages.size(); ++i) {
        CHECK(a.stages[i].stage == b.stages[i].stage);
        CHECK(a.stages[i].digest == b.stages[i].digest);
        CHECK(a.stages[i].digest == c.stages[i].digest);
    }
}

TEST_CASE("pipeline config parser") {
    testutil::TempDir tmp("pipe_cfg");
    testutil::write_text(tmp.file("c.cfg"),
                         "# comment\n"
                         "[alpha]\n"
                         "key = value with spaces\n"
                         "num=42\n"
                         "\n"
                         "[beta]\n"
                         "x = 1\n");
    const PipelineConfig cfg = parse_pipeline_config(tmp.file("c.cfg"));
    REQUIRE(cfg.find("alpha") != nullptr);
    CHECK(cfg.find("alpha")->at("key") == "value with spaces");
    CHECK(cfg.find("alpha")->at("num") == "42");
    CHECK(cfg.find("beta")->at("x") == "1");
    CHECK(cfg.find("gamma") == nullptr);

    testutil::write_text(tmp.file("bad.cfg"), "key_without_section = 1\n");
    CHECK_THROWS_AS(parse_pipeline_config(tmp.file("bad.cfg")), Error);
}
