// Command-line front end: run, delta, humaneval, sample.
//
// Exit codes: 0 success, 2 config error, 3 ingestion error, 4 scorer/transport
// error, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "simpeval/simpeval.hpp"

namespace fs = std::filesystem;
using namespace simpeval;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + path.string());
    out << text;
}

MetricReport load_report(const std::string& path) {
    try {
        return parse_report(read_file(path));
    } catch (const ReportError& e) {
        throw IngestionError(path + ": " + e.what());
    }
}

struct RunArgs {
    std::string sources;
    std::vector<std::string> outputs;
    std::string metrics = "summac,qafe,esa,bleu_c,length,fkgl,sle";
    std::string target_level = "per-doc";
    std::string scorer;
    std::string fixtures;
    std::string record;
    std::string cache_dir;
    std::string report_out;
    std::string format = "json,markdown";
    std::string ner = "auto";
    std::string sle_scores;
    std::string summac_conv;
    std::string systems;
    std::string abbreviations;
    std::size_t workers = 1;
    std::size_t in_flight = 4;
    std::uint64_t seed = 0;
    bool no_smoothing = false;
};

int cmd_run(const RunArgs& a) {
    RunConfig cfg;
    cfg.sources_path = a.sources;
    cfg.output_paths = a.outputs;
    for (const auto& m : split_list(a.metrics)) cfg.metrics.push_back(parse_metric(m));
    if (a.target_level != "per-doc") {
        try {
            std::size_t used = 0;
            cfg.target_level = std::stod(a.target_level, &used);
            if (used != a.target_level.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("--target-level must be a number or per-doc");
        }
    }
    if (!a.scorer.empty() && !a.fixtures.empty()) throw ConfigError("--scorer and --fixtures are exclusive");
    if (!a.scorer.empty()) {
        cfg.transport = TransportConfig{TransportConfig::Kind::subprocess_lines, a.scorer, "", a.in_flight};
    } else if (!a.fixtures.empty()) {
        cfg.transport = TransportConfig{TransportConfig::Kind::fixture_file, "", a.fixtures, a.in_flight};
    }
    if (!a.record.empty()) {
        if (a.scorer.empty()) throw ConfigError("--record needs a live --scorer");
        cfg.record_fixture_path = a.record;
    }
    if (!a.cache_dir.empty()) cfg.cache_dir = a.cache_dir;
    if (!a.sle_scores.empty()) cfg.sle_scores_path = a.sle_scores;
    if (!a.summac_conv.empty()) cfg.conv_weights_path = a.summac_conv;
    cfg.system_order = split_list(a.systems);
    if (a.ner == "auto") {
        cfg.ner = NerMode::auto_select;
    } else if (a.ner == "heuristic") {
        cfg.ner = NerMode::heuristic;
    } else if (a.ner == "external") {
        cfg.ner = NerMode::external;
    } else {
        throw ConfigError("--ner must be auto, heuristic or external");
    }
    if (!a.abbreviations.empty()) {
        std::ifstream in(a.abbreviations);
        if (!in) throw ConfigError("cannot open abbreviation list " + a.abbreviations);
        cfg.segmenter.abbreviations.clear();
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) cfg.segmenter.abbreviations.insert(line);
    }
    cfg.bleu.smoothing = !a.no_smoothing;
    cfg.workers = a.workers;
    cfg.seed = a.seed;

    std::vector<ReportFormat> formats;
    for (const auto& f : split_list(a.format)) {
        if (f == "json") {
            formats.push_back(ReportFormat::json);
        } else if (f == "markdown") {
            formats.push_back(ReportFormat::markdown);
        } else {
            throw ConfigError("unknown format " + f);
        }
    }

    const auto report = run_evaluation(cfg);

    std::error_code ec;
    fs::create_directories(a.report_out, ec);
    if (ec) throw IOError("cannot create " + a.report_out);
    for (auto f : formats) {
        const auto name = f == ReportFormat::json ? "report.json" : "report.md";
        write_file(fs::path(a.report_out) / name, render_report(report, f));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference-less evaluation of document simplification outputs"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Score system outputs against their sources");
    run_cmd->add_option("--sources", run.sources, "Source corpus (JSON Lines)")->required();
    run_cmd->add_option("--outputs", run.outputs, "System output files (JSON Lines)")->required();
    run_cmd->add_option("--metrics", run.metrics, "Comma list of summac,qafe,esa,bleu_c,length,fkgl,sle")
        ->capture_default_str();
    run_cmd->add_option("--target-level", run.target_level, "Target reading level for every document, or per-doc")
        ->capture_default_str();
    auto* scorer_opt = run_cmd->add_option("--scorer", run.scorer, "Worker command speaking the line protocol");
    run_cmd->add_option("--fixtures", run.fixtures, "Replay scorer responses from a fixture file")->excludes(scorer_opt);
    run_cmd->add_option("--record", run.record, "Write every scorer response to this fixture file");
    run_cmd->add_option("--cache-dir", run.cache_dir, "Content-addressed response cache");
    run_cmd->add_option("--report-out", run.report_out, "Directory for report.json / report.md")->required();
    run_cmd->add_option("--format", run.format, "Comma list of json,markdown")->capture_default_str();
    run_cmd->add_option("--workers", run.workers, "Parallel instance workers")->capture_default_str();
    run_cmd->add_option("--in-flight", run.in_flight, "Max outstanding worker requests")->capture_default_str();
    run_cmd->add_option("--seed", run.seed, "Recorded in the report configuration")->capture_default_str();
    run_cmd->add_option("--ner", run.ner, "Entity provider: auto, heuristic, external")->capture_default_str();
    run_cmd->add_option("--sle-scores", run.sle_scores, "Precomputed sentence SLE scores (JSON Lines)");
    run_cmd->add_option("--summac-conv", run.summac_conv, "Convolution weights for histogram scoring");
    run_cmd->add_option("--systems", run.systems, "Comma list fixing the system order");
    run_cmd->add_option("--abbreviations", run.abbreviations, "Abbreviation stop-list, one per line");
    run_cmd->add_flag("--no-bleu-smoothing", run.no_smoothing, "Disable add-one smoothing for BLEU_C");

    std::string delta_in, delta_out, delta_json;
    double delta_level = 3.0;
    auto* delta_cmd = app.add_subcommand("delta", "Change from an in-domain to an out-of-domain report");
    delta_cmd->add_option("--in", delta_in, "In-domain report.json")->required();
    delta_cmd->add_option("--out", delta_out, "Out-of-domain report.json")->required();
    delta_cmd->add_option("--level", delta_level, "Shared target level")->required();
    delta_cmd->add_option("--json", delta_json, "Also write the delta table as JSON");

    std::string ratings_path, human_json;
    auto* human_cmd = app.add_subcommand("humaneval", "Aggregate binary human ratings");
    human_cmd->add_option("--ratings", ratings_path, "Ratings (JSON Lines)")->required();
    human_cmd->add_option("--json", human_json, "Also write the table as JSON");

    std::string pool_path, meta_path, category_map_path, manifest_out;
    std::size_t quota = 200;
    std::size_t total = 0;
    std::uint64_t sample_seed = 0;
    EligibilityRule rule;
    auto* sample_cmd = app.add_subcommand("sample", "Build a stratified out-of-domain test set");
    sample_cmd->add_option("--pool", pool_path, "Candidate documents (corpus JSON Lines)")->required();
    sample_cmd->add_option("--meta", meta_path, "Semantic types (JSON Lines)")->required();
    sample_cmd->add_option("--category-map", category_map_path, "Semantic type to category map (JSON)");
    sample_cmd->add_option("--quota", quota, "Documents per category")->capture_default_str();
    sample_cmd->add_option("--total", total, "Expected sample size (default categories x quota)");
    sample_cmd->add_option("--seed", sample_seed, "Sampling seed")->capture_default_str();
    sample_cmd->add_option("--min-sentences", rule.min_sentences)->capture_default_str();
    sample_cmd->add_option("--min-paragraphs", rule.min_paragraphs)->capture_default_str();
    sample_cmd->add_option("--manifest", manifest_out, "Write the id list here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*delta_cmd) {
            const auto d = delta_report(load_report(delta_in), load_report(delta_out), delta_level);
            if (!delta_json.empty()) write_file(delta_json, delta_to_json(d).dump(2) + "\n");
            std::cout << render_delta_markdown(d);
            return 0;
        }
        if (*human_cmd) {
            const auto rows = significance_vs_best(read_ratings(ratings_path));
            if (!human_json.empty()) write_file(human_json, human_eval_to_json(rows).dump(2) + "\n");
            std::cout << render_human_eval_markdown(rows);
            return 0;
        }
        if (*sample_cmd) {
            const auto categories = category_map_path.empty() ? CategoryMap::defaults() : CategoryMap::load(category_map_path);
            const auto pool = build_pool(read_corpus(pool_path), read_semantic_types(meta_path), categories, rule);
            const auto n = total == 0 ? categories.categories().size() * quota : total;
            const auto ids = stratified_sample(pool, categories.categories(), quota, n, sample_seed);
            std::string text;
            for (const auto& id : ids) text += id + "\n";
            if (manifest_out.empty()) {
                std::cout << text;
            } else {
                write_file(manifest_out, text);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "eval: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "eval: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
