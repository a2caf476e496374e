#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "support/test_util.hpp"

using namespace simpeval;
using nlohmann::json;

namespace {

std::string golden(const std::string& name) { return testutil::data_path("golden/" + name); }

RunConfig golden_config() {
    RunConfig cfg;
    cfg.sources_path = golden("sources.jsonl");
    cfg.output_paths = {golden("outputs_copy.jsonl"), golden("outputs_simple.jsonl")};
    cfg.metrics = {kAllMetrics.begin(), kAllMetrics.end()};
    return cfg;
}

TransportConfig fixtures() { return {TransportConfig::Kind::fixture_file, "", golden("fixtures.jsonl"), 4}; }
TransportConfig live(const std::string& flags = "") {
    return {TransportConfig::Kind::subprocess_lines, testutil::stub_command(flags), "", 4};
}

} // namespace

TEST(Harness, GoldenReportFromFixtures) {
    auto cfg = golden_config();
    cfg.transport = fixtures();
    Evaluator ev(cfg);
    const auto report = ev.run();
    EXPECT_EQ(render_json(report), testutil::read_text(golden("report.json")));
    EXPECT_EQ(render_markdown(report), testutil::read_text(golden("report.md")));
    EXPECT_EQ(ev.scorer()->stats().transport_calls, 0u);
    EXPECT_GT(ev.scorer()->stats().fixture_hits, 0u);
}

TEST(Harness, LiveStubMatchesFixtureReplay) {
    auto cfg = golden_config();
    cfg.transport = live("--shuffle");
    cfg.workers = 3;
    EXPECT_EQ(render_json(run_evaluation(cfg)), testutil::read_text(golden("report.json")));
}

TEST(Harness, IdentitySystem) {
    auto cfg = golden_config();
    cfg.output_paths = {golden("outputs_copy.jsonl")};
    cfg.transport = fixtures();
    const auto r = run_evaluation(cfg);
    const auto& copy = *r.system("Copy");
    EXPECT_NEAR(*copy.overall.bleu_c->value, 100.0, 1e-9);
    EXPECT_EQ(*copy.overall.esa->p, 1.0);
    EXPECT_EQ(*copy.overall.esa->r, 1.0);
    EXPECT_EQ(*copy.overall.esa->f1, 1.0);
    EXPECT_EQ(*copy.overall.summac->p, *copy.overall.summac->r);
    EXPECT_EQ(*copy.overall.length->tokens, *r.input->overall.length->tokens);
    EXPECT_EQ(*copy.overall.length->sents, *r.input->overall.length->sents);
    EXPECT_EQ(*copy.overall.qafe->p, *copy.overall.qafe->r);
}

TEST(Harness, MetricSubsetNeedsNoScorer) {
    auto cfg = golden_config();
    cfg.metrics = {Metric::fkgl};
    const auto r = run_evaluation(cfg);
    EXPECT_EQ(r.metrics, std::vector<Metric>{Metric::fkgl});
    const auto& cell = r.systems[0].overall;
    EXPECT_TRUE(cell.fkgl);
    EXPECT_FALSE(cell.summac || cell.qafe || cell.esa || cell.bleu_c || cell.length || cell.sle);
    const auto md = render_markdown(r);
    EXPECT_EQ(md.find("SummaC"), std::string::npos);
    EXPECT_EQ(md.find("BLEU_C"), std::string::npos);
    EXPECT_NE(md.find("| System | FKGL |"), std::string::npos);
    EXPECT_NE(md.find("## Counts"), std::string::npos);
    for (const auto& inst : r.instances) {
        EXPECT_TRUE(inst.contains("fkgl"));
        EXPECT_FALSE(inst.contains("bleu_c"));
    }
}

TEST(Harness, MissingScorerIsConfigError) {
    auto cfg = golden_config();
    cfg.metrics = {Metric::summac};
    EXPECT_THROW(run_evaluation(cfg), ConfigError);
}

TEST(Harness, FixtureMissFailsRun) {
    testutil::TempDir dir;
    testutil::write_text(dir.file("empty.jsonl"), "");
    auto cfg = golden_config();
    cfg.metrics = {Metric::sle};
    cfg.transport = TransportConfig{TransportConfig::Kind::fixture_file, "", dir.file("empty.jsonl"), 4};
    try {
        run_evaluation(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.exit_code(), 4);
        EXPECT_NE(std::string(e.what()).find("doc"), std::string::npos);
    }
}

TEST(Harness, TargetLevelOverride) {
    testutil::TempDir dir;
    testutil::write_jsonl(dir.file("out.jsonl"), {{{"doc_id", "doc-comet"}, {"system", "X"}, {"sentences", {"A comet came."}}}});
    auto cfg = golden_config();
    cfg.output_paths = {dir.file("out.jsonl")};
    cfg.metrics = {Metric::fkgl};
    EXPECT_THROW(run_evaluation(cfg), ConfigError);
    cfg.target_level = 1.0;
    const auto r = run_evaluation(cfg);
    EXPECT_EQ(r.systems[0].levels.at(0).level, 1.0);
    EXPECT_EQ(r.config["target_level"], 1.0);
}

TEST(Harness, IngestionErrors) {
    testutil::TempDir dir;
    auto cfg = golden_config();
    cfg.metrics = {Metric::fkgl};
    testutil::write_jsonl(dir.file("o.jsonl"), {{{"doc_id", "nope"}, {"system", "X"}, {"target_level", 1}, {"sentences", {"A."}}}});
    cfg.output_paths = {dir.file("o.jsonl")};
    EXPECT_THROW(run_evaluation(cfg), IngestionError);
    const json line = {{"doc_id", "doc-comet"}, {"system", "X"}, {"target_level", 1}, {"sentences", {"A."}}};
    testutil::write_jsonl(dir.file("o.jsonl"), {line, line});
    EXPECT_THROW(run_evaluation(cfg), IngestionError);
}

TEST(Harness, PrecomputedSleScores) {
    testutil::TempDir dir;
    testutil::write_jsonl(dir.file("out.jsonl"), {
        {{"doc_id", "doc-comet"}, {"system", "X"}, {"target_level", 1}, {"sentences", {"A comet came.", "It was bright."}}},
        {{"doc_id", "doc-river"}, {"system", "X"}, {"target_level", 2}, {"sentences", {"Rivers flow."}}}});
    testutil::write_jsonl(dir.file("sle.jsonl"), {
        {{"doc_id", "doc-comet"}, {"system", "X"}, {"sle", {1.2, 1.2}}},
        {{"doc_id", "doc-river"}, {"sle", {2.4}}},
        {{"doc_id", "doc-river"}, {"system", "Input"}, {"sle", {3.0, 3.0, 3.0, 3.0}}}});
    auto cfg = golden_config();
    cfg.output_paths = {dir.file("out.jsonl")};
    cfg.metrics = {Metric::sle};
    cfg.sle_scores_path = dir.file("sle.jsonl");
    const auto r = run_evaluation(cfg);
    const auto& x = r.systems[0];
    EXPECT_NEAR(*x.level(1.0)->sle->epsilon, 0.2, 1e-12);
    EXPECT_NEAR(*x.level(2.0)->sle->epsilon, 0.4, 1e-12);
    EXPECT_NEAR(*x.overall.sle->epsilon, 0.3, 1e-12);
    EXPECT_NEAR(*r.input->overall.sle->raw, 3.0, 1e-12);
    EXPECT_EQ(r.input->overall.sle->n, 1u);
    const auto md = render_markdown(r);
    EXPECT_NE(md.find("| X | 0.20 (1.20) | 0.40 (2.40) | 0.30 (1.80) |"), std::string::npos) << md;
}

TEST(Harness, ExactTargetsGiveZeroError) {
    testutil::TempDir dir;
    testutil::write_jsonl(dir.file("out.jsonl"), {
        {{"doc_id", "doc-comet"}, {"system", "X"}, {"target_level", 3}, {"sentences", {"A comet came.", "It was bright."}}}});
    auto cfg = golden_config();
    cfg.output_paths = {dir.file("out.jsonl")};
    cfg.metrics = {Metric::sle};
    auto client = testutil::function_client([](const ScorerRequest&) { return json{{"sle", 3.0}}; });
    Evaluator ev(cfg);
    ev.set_scorer(client);
    EXPECT_EQ(*ev.run().systems[0].overall.sle->epsilon, 0.0);
}

TEST(Harness, WorkerCountDoesNotChangeReport) {
    auto cfg = golden_config();
    cfg.transport = fixtures();
    cfg.workers = 1;
    const auto one = render_json(run_evaluation(cfg));
    cfg.workers = 4;
    EXPECT_EQ(render_json(run_evaluation(cfg)), one);
}

TEST(Harness, RecordingTwiceGivesIdenticalFixtures) {
    testutil::TempDir dir;
    auto cfg = golden_config();
    cfg.transport = live();
    cfg.workers = 2;
    cfg.record_fixture_path = dir.file("a.jsonl");
    const auto first = render_json(run_evaluation(cfg));
    cfg.record_fixture_path = dir.file("b.jsonl");
    cfg.transport = live("--shuffle");
    EXPECT_EQ(render_json(run_evaluation(cfg)), first);
    EXPECT_EQ(testutil::read_text(dir.file("a.jsonl")), testutil::read_text(dir.file("b.jsonl")));
    EXPECT_EQ(testutil::read_text(dir.file("a.jsonl")), testutil::read_text(golden("fixtures.jsonl")));
}

TEST(Harness, CacheDirectoryDoesNotChangeResults) {
    testutil::TempDir dir;
    auto cfg = golden_config();
    cfg.transport = live();
    cfg.cache_dir = dir.file("cache");
    Evaluator cold(cfg);
    const auto a = render_json(cold.run());
    Evaluator warm(cfg);
    const auto b = render_json(warm.run());
    EXPECT_EQ(a, b);
    EXPECT_GT(cold.scorer()->stats().transport_requests, 0u);
    EXPECT_EQ(warm.scorer()->stats().transport_requests, 0u);
}

TEST(Harness, HeuristicNerWithoutScorer) {
    auto cfg = golden_config();
    cfg.metrics = {Metric::esa, Metric::bleu_c, Metric::length};
    const auto r = run_evaluation(cfg);
    EXPECT_EQ(r.config["ner_provider"], "heuristic");
    EXPECT_EQ(*r.system("Copy")->overall.esa->f1, 1.0);
    EXPECT_LT(*r.system("Simple")->overall.esa->r, 1.0);
}

TEST(Harness, SyntheticIdentityCorpusIsFast) {
    testutil::TempDir dir;
    std::mt19937_64 rng(1);
    std::vector<json> sources, outputs;
    for (int i = 0; i < 50; ++i) {
        const auto text = testutil::random_text(rng, 3, 4);
        const auto doc = segment_sentences(text);
        std::vector<std::string> sents;
        for (std::size_t s = 0; s < doc.sentence_count(); ++s) sents.push_back(doc.sentence_text(s));
        const std::string id = "d" + std::to_string(i);
        sources.push_back({{"id", id}, {"text", text}});
        outputs.push_back({{"doc_id", id}, {"system", "Identity"}, {"target_level", i % 4}, {"sentences", sents},
                           {"paragraph_breaks", doc.paragraph_breaks}});
    }
    testutil::write_jsonl(dir.file("src.jsonl"), sources);
    testutil::write_jsonl(dir.file("out.jsonl"), outputs);
    RunConfig cfg;
    cfg.sources_path = dir.file("src.jsonl");
    cfg.output_paths = {dir.file("out.jsonl")};
    cfg.metrics = {kAllMetrics.begin(), kAllMetrics.end()};
    cfg.transport = live();
    cfg.workers = 4;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_evaluation(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 5.0);
    const auto& c = r.systems[0].overall;
    EXPECT_NEAR(*c.bleu_c->value, 100.0, 1e-9);
    EXPECT_EQ(*c.esa->f1, 1.0);
    EXPECT_EQ(*c.summac->p, *c.summac->r);
    EXPECT_EQ(*c.length->tokens, *r.input->overall.length->tokens);
}
