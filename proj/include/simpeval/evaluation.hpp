#pragma once

// End-to-end evaluation: ingestion of sources and system outputs, per-instance
// metric computation (optionally parallel), deterministic aggregation into a
// MetricReport.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/corpus.hpp"
#include "simpeval/entity_adequacy.hpp"
#include "simpeval/errors.hpp"
#include "simpeval/faithfulness.hpp"
#include "simpeval/report.hpp"
#include "simpeval/scorer_protocol.hpp"
#include "simpeval/simplicity.hpp"
#include "simpeval/surface_metrics.hpp"

namespace simpeval {

struct EvalInstance {
    std::string doc_id;
    std::shared_ptr<const Document> source;
    Document output;
    TargetLevel target;
    std::string system;
};

/// System-output file: {"doc_id": str, "system": str, "target_level": real, "sentences": [str]}
/// per line, with optional "paragraph_breaks".
inline std::vector<EvalInstance> read_system_outputs(const std::string& path,
                                                     const std::map<std::string, std::shared_ptr<const Document>>& sources) {
    std::vector<EvalInstance> out;
    std::set<std::pair<std::string, std::string>> seen;
    detail::for_each_jsonl_line(path, [&](std::size_t lineno, const std::string& line) {
        const auto where = path + ":" + std::to_string(lineno);
        const auto j = detail::parse_json_line(path, lineno, line);
        EvalInstance inst;
        try {
            inst.doc_id = j.at("doc_id").get<std::string>();
            inst.system = j.at("system").get<std::string>();
            if (j.contains("target_level") && !j["target_level"].is_null()) {
                inst.target.level = j["target_level"].get<double>();
            } else {
                inst.target.level = std::numeric_limits<double>::quiet_NaN();
            }
            std::vector<std::size_t> breaks;
            if (j.contains("paragraph_breaks")) breaks = j["paragraph_breaks"].get<std::vector<std::size_t>>();
            inst.output = from_sentences(j.at("sentences").get<std::vector<std::string>>(), std::move(breaks));
        } catch (const nlohmann::json::exception& e) {
            throw IngestionError(where + ": " + e.what());
        } catch (const IngestionError& e) {
            throw IngestionError(where + " (doc " + inst.doc_id + "): " + e.what());
        }
        const auto src = sources.find(inst.doc_id);
        if (src == sources.end()) throw IngestionError(where + ": doc " + inst.doc_id + " has no source document");
        inst.source = src->second;
        if (!seen.emplace(inst.system, inst.doc_id).second) {
            throw IngestionError(where + ": duplicate output for system " + inst.system + ", doc " + inst.doc_id);
        }
        out.push_back(std::move(inst));
    });
    return out;
}

/// Precomputed sentence scores: {"doc_id": str, "sle": [real], "system"?: str}.
/// A record without "system" applies to every system; "system": "Input" holds
/// scores for the source document.
class SleScoreFile {
public:
    static SleScoreFile load(const std::string& path) {
        SleScoreFile f;
        detail::for_each_jsonl_line(path, [&](std::size_t lineno, const std::string& line) {
            const auto j = detail::parse_json_line(path, lineno, line);
            try {
                const auto key = std::make_pair(j.value("system", std::string()), j.at("doc_id").get<std::string>());
                if (!f.scores_.emplace(key, j.at("sle").get<std::vector<double>>()).second) {
                    throw IngestionError(path + ":" + std::to_string(lineno) + ": duplicate SLE record for " + key.second);
                }
            } catch (const nlohmann::json::exception& e) {
                throw IngestionError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        });
        return f;
    }

    const std::vector<double>* find(const std::string& system, const std::string& doc_id) const {
        auto it = scores_.find({system, doc_id});
        if (it == scores_.end()) it = scores_.find({std::string(), doc_id});
        return it == scores_.end() ? nullptr : &it->second;
    }

    /// Source-document scores are stored under the system name "Input".
    const std::vector<double>* find_source(const std::string& doc_id) const {
        const auto it = scores_.find({std::string(kInputSystem), doc_id});
        return it == scores_.end() ? nullptr : &it->second;
    }

    static constexpr const char* kInputSystem = "Input";

private:
    std::map<std::pair<std::string, std::string>, std::vector<double>> scores_;
};

enum class NerMode { auto_select, heuristic, external };

struct RunConfig {
    std::string sources_path;
    std::vector<std::string> output_paths;
    std::vector<Metric> metrics;
    std::optional<double> target_level; ///< nullopt: per-document targets
    std::optional<TransportConfig> transport;
    std::optional<std::string> record_fixture_path;
    std::optional<std::string> cache_dir;
    std::optional<std::string> sle_scores_path;
    std::optional<std::string> conv_weights_path;
    std::vector<std::string> system_order; ///< empty: first appearance
    NerMode ner = NerMode::auto_select;
    BleuConfig bleu;
    FkglConfig fkgl;
    SegmenterConfig segmenter = SegmenterConfig::defaults();
    std::size_t workers = 1;
    std::uint64_t seed = 0;
};

/// Per-instance values; absent optionals are missing values or unrequested metrics.
struct InstanceScores {
    std::optional<double> summac_p, summac_r;
    std::optional<QaResult> qafe_p, qafe_r;
    std::optional<PRF> esa;
    std::size_t input_entities = 0, output_entities = 0;
    std::optional<double> bleu_c;
    std::optional<DocStats> out_stats;
    std::optional<double> fkgl;
    std::optional<std::vector<double>> sle_sentences;
    std::optional<double> sle_doc;
};

namespace detail {

inline std::vector<Metric> canonical_metrics(const std::vector<Metric>& requested) {
    std::vector<Metric> out;
    for (auto m : kAllMetrics)
        if (std::find(requested.begin(), requested.end(), m) != requested.end()) out.push_back(m);
    return out;
}

inline bool has(const std::vector<Metric>& ms, Metric m) { return std::find(ms.begin(), ms.end(), m) != ms.end(); }

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline nlohmann::json qa_trace(const QaResult& q) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : q.items) {
        items.push_back({{"question", it.question},
                         {"gold", it.gold_answer},
                         {"predicted", it.predicted_answer},
                         {"answerable", it.answerable},
                         {"overlap", opt_json(it.overlap)}});
    }
    return {{"score", opt_json(q.score)}, {"items", items}};
}

/// Runs `fn(i)` for i in [0, n) on `workers` threads; the lowest-index failure is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, n); ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

[[noreturn]] inline void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const Error& e) {
        throw Error(context + ": " + e.what(), e.exit_code());
    }
}

} // namespace detail

class Evaluator {
public:
    explicit Evaluator(RunConfig cfg) : cfg_(std::move(cfg)) { cfg_.metrics = detail::canonical_metrics(cfg_.metrics); }

    /// Uses an already-built scorer client instead of `cfg.transport`.
    void set_scorer(std::shared_ptr<ScorerClient> scorer) { scorer_ = std::move(scorer); }

    MetricReport run() {
        load();
        setup_scorer();
        compute_sources();
        scores_.assign(instances_.size(), {});
        detail::parallel_for(instances_.size(), cfg_.workers, [&](std::size_t i) {
            try {
                scores_[i] = score_instance(instances_[i]);
            } catch (const Error&) {
                detail::rethrow_with_context("doc " + instances_[i].doc_id + " (system " + instances_[i].system + ")");
            }
        });
        if (recorder_ && cfg_.record_fixture_path) recorder_->finalize(*cfg_.record_fixture_path);
        return aggregate();
    }

    const std::vector<EvalInstance>& instances() const { return instances_; }
    std::shared_ptr<ScorerClient> scorer() const { return scorer_; }

private:
    bool uses(Metric m) const { return detail::has(cfg_.metrics, m); }

    bool external_ner() const {
        if (cfg_.ner == NerMode::external) return true;
        if (cfg_.ner == NerMode::heuristic) return false;
        return scorer_ != nullptr || cfg_.transport.has_value();
    }

    void load() {
        for (auto& rec : read_corpus(cfg_.sources_path, cfg_.segmenter)) {
            const auto id = rec.id;
            if (!sources_.emplace(id, std::make_shared<const Document>(std::move(rec.doc))).second) {
                throw IngestionError("duplicate source id " + id);
            }
        }
        if (cfg_.output_paths.empty()) throw ConfigError("no system output files given");
        for (const auto& path : cfg_.output_paths) {
            auto part = read_system_outputs(path, sources_);
            for (auto& inst : part) instances_.push_back(std::move(inst));
        }
        for (auto& inst : instances_) {
            if (cfg_.target_level) inst.target.level = *cfg_.target_level;
            if (std::isnan(inst.target.level)) {
                throw ConfigError("doc " + inst.doc_id + " has no target_level and no --target-level was given");
            }
        }
        system_order_ = cfg_.system_order;
        for (const auto& inst : instances_) {
            if (std::find(system_order_.begin(), system_order_.end(), inst.system) == system_order_.end()) {
                if (!cfg_.system_order.empty()) throw ConfigError("system " + inst.system + " missing from system order");
                system_order_.push_back(inst.system);
            }
        }
        if (cfg_.sle_scores_path) sle_file_ = SleScoreFile::load(*cfg_.sle_scores_path);
        if (cfg_.conv_weights_path) conv_ = ConvWeights::load(*cfg_.conv_weights_path);
    }

    void setup_scorer() {
        const bool needs = uses(Metric::summac) || uses(Metric::qafe) || (uses(Metric::sle) && !sle_file_) ||
                           (uses(Metric::esa) && cfg_.ner == NerMode::external);
        if (!scorer_ && cfg_.transport) {
            scorer_ = ScorerClient::from_config(*cfg_.transport);
        }
        if (needs && !scorer_) throw ConfigError("requested metrics need a scorer command or a fixture file");
        if (!scorer_) return;
        if (cfg_.cache_dir) scorer_->set_cache(std::make_shared<DiskCache>(*cfg_.cache_dir));
        if (cfg_.record_fixture_path) {
            recorder_ = std::make_shared<FixtureRecorder>();
            scorer_->set_recorder(recorder_);
        }
    }

    std::vector<double> sle_scores(const std::string& system, const std::string& doc_id, const Document& doc) {
        if (sle_file_) {
            const auto* s = sle_file_->find(system, doc_id);
            if (!s) throw IngestionError("no precomputed SLE scores for doc " + doc_id);
            return *s;
        }
        return sentence_sle_scores(doc, *scorer_);
    }

    EntitySet entities(const Document& doc) {
        if (external_ner()) return entity_set_from(ner_entities(doc, *scorer_), EntityProvider::external_ner);
        return extract_entities_heuristic(doc);
    }

    struct SourceInfo {
        DocStats stats;
        std::optional<double> fkgl;
        std::optional<EntitySet> entities;
        std::optional<double> sle_doc;
    };

    void compute_sources() {
        std::vector<std::string> ids;
        for (const auto& inst : instances_)
            if (!source_info_.contains(inst.doc_id)) {
                source_info_[inst.doc_id];
                ids.push_back(inst.doc_id);
            }
        std::vector<SourceInfo> infos(ids.size());
        detail::parallel_for(ids.size(), cfg_.workers, [&](std::size_t i) {
            const auto& doc = *sources_.at(ids[i]);
            try {
                SourceInfo info;
                info.stats = doc_stats(doc);
                if (info.stats.word_count > 0) info.fkgl = fkgl(info.stats, cfg_.fkgl);
                if (uses(Metric::esa)) info.entities = entities(doc);
                if (uses(Metric::sle)) {
                    if (!sle_file_) {
                        info.sle_doc = sle_doc(sentence_sle_scores(doc, *scorer_), doc.sentence_count());
                    } else if (const auto* s = sle_file_->find_source(ids[i])) {
                        info.sle_doc = sle_doc(*s, doc.sentence_count());
                    }
                }
                infos[i] = std::move(info);
            } catch (const Error&) {
                detail::rethrow_with_context("source doc " + ids[i]);
            }
        });
        for (std::size_t i = 0; i < ids.size(); ++i) source_info_[ids[i]] = std::move(infos[i]);
    }

    InstanceScores score_instance(const EvalInstance& inst) {
        InstanceScores s;
        const Document& src = *inst.source;
        const Document& out = inst.output;
        if (uses(Metric::summac)) {
            const auto m = nli_matrix(src, out, *scorer_);
            if (conv_) {
                s.summac_p = summac_conv_precision(m, conv_);
                s.summac_r = summac_conv_recall(m, conv_);
            } else {
                s.summac_p = summac_precision(m);
                s.summac_r = summac_recall(m);
            }
        }
        if (uses(Metric::qafe)) {
            s.qafe_p = qafe_precision(src, out, *scorer_);
            s.qafe_r = qafe_recall(src, out, *scorer_);
        }
        if (uses(Metric::esa)) {
            const auto& in_ents = *source_info_.at(inst.doc_id).entities;
            const auto out_ents = entities(out);
            s.esa = esa(in_ents, out_ents);
            s.input_entities = in_ents.entities.size();
            s.output_entities = out_ents.entities.size();
        }
        if (uses(Metric::bleu_c)) s.bleu_c = bleu_c(out, src, cfg_.bleu);
        s.out_stats = doc_stats(out);
        if (uses(Metric::fkgl) && s.out_stats->word_count > 0) s.fkgl = fkgl(*s.out_stats, cfg_.fkgl);
        if (uses(Metric::sle)) {
            s.sle_sentences = sle_scores(inst.system, inst.doc_id, out);
            s.sle_doc = sle_doc(*s.sle_sentences, out.sentence_count());
        }
        return s;
    }

    GroupCell group_cell(const std::vector<std::size_t>& idx) const {
        GroupCell c;
        c.n_docs = idx.size();
        const auto triple = [&](auto get_p, auto get_r) {
            TripleCell t;
            std::vector<double> ps, rs;
            for (auto i : idx) {
                if (const auto p = get_p(scores_[i])) ps.push_back(*p); else ++t.missing_p;
                if (const auto r = get_r(scores_[i])) rs.push_back(*r); else ++t.missing_r;
            }
            t.n_p = ps.size();
            t.n_r = rs.size();
            if (!ps.empty()) t.p = detail::mean_of(ps);
            if (!rs.empty()) t.r = detail::mean_of(rs);
            if (t.p && t.r) t.f1 = f1_combine(*t.p, *t.r);
            return t;
        };
        if (uses(Metric::summac)) {
            c.summac = triple([](const InstanceScores& s) { return s.summac_p; },
                              [](const InstanceScores& s) { return s.summac_r; });
        }
        if (uses(Metric::qafe)) {
            c.qafe = triple([](const InstanceScores& s) { return s.qafe_p->score; },
                            [](const InstanceScores& s) { return s.qafe_r->score; });
        }
        if (uses(Metric::esa)) {
            c.esa = triple([](const InstanceScores& s) { return std::optional<double>(s.esa->precision); },
                           [](const InstanceScores& s) { return std::optional<double>(s.esa->recall); });
        }
        const auto scalar = [&](auto get) {
            ScalarCell sc;
            std::vector<double> v;
            for (auto i : idx) {
                if (const auto x = get(scores_[i])) v.push_back(*x); else ++sc.missing;
            }
            sc.n = v.size();
            if (!v.empty()) sc.value = detail::mean_of(v);
            return sc;
        };
        if (uses(Metric::bleu_c)) c.bleu_c = scalar([](const InstanceScores& s) { return s.bleu_c; });
        if (uses(Metric::fkgl)) c.fkgl = scalar([](const InstanceScores& s) { return s.fkgl; });
        if (uses(Metric::length) && !idx.empty()) {
            std::vector<Document> docs;
            for (auto i : idx) docs.push_back(instances_[i].output);
            const auto ls = length_stats(docs);
            c.length = LengthCell{ls.mean_tokens, ls.mean_sentences, idx.size()};
        }
        if (uses(Metric::sle) && !idx.empty()) {
            std::vector<ScoredDoc> batch;
            for (auto i : idx) batch.push_back({*scores_[i].sle_doc, instances_[i].target});
            const auto rep = level_grouped_report(batch);
            c.sle = SleCell{rep.total.epsilon, rep.total.raw_mean, rep.total.count};
        }
        return c;
    }

    GroupCell input_cell(const std::vector<std::string>& doc_ids) const {
        GroupCell c;
        c.n_docs = doc_ids.size();
        if (uses(Metric::length)) {
            std::vector<Document> docs;
            for (const auto& id : doc_ids) docs.push_back(*sources_.at(id));
            const auto ls = length_stats(docs);
            c.length = LengthCell{ls.mean_tokens, ls.mean_sentences, docs.size()};
        }
        if (uses(Metric::fkgl)) {
            ScalarCell sc;
            std::vector<double> v;
            for (const auto& id : doc_ids) {
                if (const auto f = source_info_.at(id).fkgl) v.push_back(*f); else ++sc.missing;
            }
            sc.n = v.size();
            if (!v.empty()) sc.value = detail::mean_of(v);
            c.fkgl = sc;
        }
        if (uses(Metric::sle)) {
            std::vector<double> v;
            for (const auto& id : doc_ids)
                if (const auto s = source_info_.at(id).sle_doc) v.push_back(*s);
            c.sle = SleCell{std::nullopt, v.empty() ? std::nullopt : std::optional(detail::mean_of(v)), v.size()};
        }
        return c;
    }

    nlohmann::json instance_json(std::size_t i) const {
        const auto& inst = instances_[i];
        const auto& s = scores_[i];
        nlohmann::json j{{"doc_id", inst.doc_id}, {"system", inst.system}, {"level", inst.target.level}};
        if (s.summac_p) j["summac"] = {{"p", *s.summac_p}, {"r", *s.summac_r}};
        if (s.qafe_p) j["qafe"] = {{"p", detail::qa_trace(*s.qafe_p)}, {"r", detail::qa_trace(*s.qafe_r)}};
        if (s.esa) {
            j["esa"] = {{"p", s.esa->precision}, {"r", s.esa->recall}, {"f1", s.esa->f1},
                        {"input_entities", s.input_entities}, {"output_entities", s.output_entities}};
        }
        if (s.bleu_c) j["bleu_c"] = *s.bleu_c;
        if (uses(Metric::length)) j["length"] = {{"tokens", s.out_stats->token_count}, {"sents", s.out_stats->sentence_count}};
        if (uses(Metric::fkgl)) j["fkgl"] = detail::opt_json(s.fkgl);
        if (s.sle_doc) j["sle"] = {{"doc", *s.sle_doc}, {"sentences", *s.sle_sentences}};
        return j;
    }

    MetricReport aggregate() const {
        MetricReport r;
        r.metrics = cfg_.metrics;
        r.config = {{"target_level", cfg_.target_level ? nlohmann::json(*cfg_.target_level) : nlohmann::json("per-doc")},
                    {"bleu_smoothing", cfg_.bleu.smoothing},
                    {"summac_mode", conv_ ? "conv" : "zero_shot"},
                    {"seed", cfg_.seed}};
        if (uses(Metric::esa)) r.config["ner_provider"] = to_string(external_ner() ? EntityProvider::external_ner : EntityProvider::heuristic);
        if (uses(Metric::sle)) r.config["sle_source"] = sle_file_ ? "file" : "scorer";

        std::map<double, std::vector<std::string>> level_sources;
        std::vector<std::string> all_sources;
        for (const auto& sys : system_order_) {
            SystemReport sr;
            sr.system = sys;
            std::vector<std::size_t> all;
            std::map<double, std::vector<std::size_t>> by_level;
            for (std::size_t i = 0; i < instances_.size(); ++i) {
                if (instances_[i].system != sys) continue;
                all.push_back(i);
                by_level[instances_[i].target.level].push_back(i);
                auto& ls = level_sources[instances_[i].target.level];
                if (std::find(ls.begin(), ls.end(), instances_[i].doc_id) == ls.end()) ls.push_back(instances_[i].doc_id);
                if (std::find(all_sources.begin(), all_sources.end(), instances_[i].doc_id) == all_sources.end()) {
                    all_sources.push_back(instances_[i].doc_id);
                }
            }
            sr.overall = group_cell(all);
            for (const auto& [level, idx] : by_level) sr.levels.push_back({level, group_cell(idx)});
            r.systems.push_back(std::move(sr));
        }
        if (!all_sources.empty()) {
            SystemReport in;
            in.system = "Input";
            in.overall = input_cell(all_sources);
            for (const auto& [level, ids] : level_sources) in.levels.push_back({level, input_cell(ids)});
            r.input = std::move(in);
        }
        for (std::size_t i = 0; i < instances_.size(); ++i) r.instances.push_back(instance_json(i));
        return r;
    }

    RunConfig cfg_;
    std::shared_ptr<ScorerClient> scorer_;
    std::shared_ptr<FixtureRecorder> recorder_;
    std::map<std::string, std::shared_ptr<const Document>> sources_;
    std::vector<EvalInstance> instances_;
    std::vector<std::string> system_order_;
    std::optional<SleScoreFile> sle_file_;
    std::optional<ConvWeights> conv_;
    std::map<std::string, SourceInfo> source_info_;
    std::vector<InstanceScores> scores_;
};

inline MetricReport run_evaluation(const RunConfig& cfg) { return Evaluator(cfg).run(); }

} // namespace simpeval
