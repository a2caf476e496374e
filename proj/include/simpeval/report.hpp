#pragma once

// Aggregated evaluation report: per (system, level) metric cells, JSON
// serialization (schema-versioned, lossless) and markdown tables.

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/errors.hpp"
#include "simpeval/prf.hpp"
#include "simpeval/simplicity.hpp"

namespace simpeval {

inline constexpr int kReportSchemaVersion = 1;

enum class Metric { summac, qafe, esa, bleu_c, length, fkgl, sle };
inline constexpr std::array<Metric, 7> kAllMetrics{Metric::summac, Metric::qafe,   Metric::esa, Metric::bleu_c,
                                                    Metric::length, Metric::fkgl, Metric::sle};

inline const char* to_string(Metric m) {
    switch (m) {
    case Metric::summac: return "summac";
    case Metric::qafe: return "qafe";
    case Metric::esa: return "esa";
    case Metric::bleu_c: return "bleu_c";
    case Metric::length: return "length";
    case Metric::fkgl: return "fkgl";
    case Metric::sle: return "sle";
    }
    return "?";
}

inline Metric parse_metric(std::string_view s) {
    for (auto m : kAllMetrics)
        if (s == to_string(m)) return m;
    throw ConfigError("unknown metric \"" + std::string(s) + "\"");
}

/// Precision/recall/F1 cell. Means disclose how many documents they average
/// over and how many were missing.
struct TripleCell {
    std::optional<double> p, r, f1;
    std::size_t n_p = 0, n_r = 0;
    std::size_t missing_p = 0, missing_r = 0;

    friend bool operator==(const TripleCell&, const TripleCell&) = default;
};

struct ScalarCell {
    std::optional<double> value;
    std::size_t n = 0;
    std::size_t missing = 0;

    friend bool operator==(const ScalarCell&, const ScalarCell&) = default;
};

struct LengthCell {
    std::optional<double> tokens, sents;
    std::size_t n = 0;

    friend bool operator==(const LengthCell&, const LengthCell&) = default;
};

struct SleCell {
    std::optional<double> epsilon; ///< absent for the input row
    std::optional<double> raw;
    std::size_t n = 0;

    friend bool operator==(const SleCell&, const SleCell&) = default;
};

struct GroupCell {
    std::size_t n_docs = 0;
    std::optional<TripleCell> summac, qafe, esa;
    std::optional<ScalarCell> bleu_c, fkgl;
    std::optional<LengthCell> length;
    std::optional<SleCell> sle;

    friend bool operator==(const GroupCell&, const GroupCell&) = default;
};

struct LevelGroup {
    double level = 0.0;
    GroupCell cell;

    friend bool operator==(const LevelGroup&, const LevelGroup&) = default;
};

struct SystemReport {
    std::string system;
    GroupCell overall;
    std::vector<LevelGroup> levels; ///< ascending

    const GroupCell* level(double l) const {
        for (const auto& g : levels)
            if (g.level == l) return &g.cell;
        return nullptr;
    }

    friend bool operator==(const SystemReport&, const SystemReport&) = default;
};

struct MetricReport {
    int schema_version = kReportSchemaVersion;
    std::vector<Metric> metrics; ///< canonical order
    nlohmann::json config = nlohmann::json::object();
    std::vector<SystemReport> systems; ///< configuration order
    std::optional<SystemReport> input; ///< source-side statistics
    std::vector<nlohmann::json> instances;

    bool has(Metric m) const { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); }

    const SystemReport* system(const std::string& name) const {
        for (const auto& s : systems)
            if (s.system == name) return &s;
        return nullptr;
    }

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

inline nlohmann::json cell_to_json(const GroupCell& c) {
    nlohmann::json j{{"n_docs", c.n_docs}};
    const auto triple = [](const TripleCell& t) {
        return nlohmann::json{{"p", opt_json(t.p)},     {"r", opt_json(t.r)},
                              {"f1", opt_json(t.f1)},   {"n_p", t.n_p},
                              {"n_r", t.n_r},           {"missing_p", t.missing_p},
                              {"missing_r", t.missing_r}};
    };
    const auto scalar = [](const ScalarCell& s) {
        return nlohmann::json{{"value", opt_json(s.value)}, {"n", s.n}, {"missing", s.missing}};
    };
    if (c.summac) j["summac"] = triple(*c.summac);
    if (c.qafe) j["qafe"] = triple(*c.qafe);
    if (c.esa) j["esa"] = triple(*c.esa);
    if (c.bleu_c) j["bleu_c"] = scalar(*c.bleu_c);
    if (c.fkgl) j["fkgl"] = scalar(*c.fkgl);
    if (c.length) j["length"] = {{"tokens", opt_json(c.length->tokens)}, {"sents", opt_json(c.length->sents)}, {"n", c.length->n}};
    if (c.sle) j["sle"] = {{"epsilon", opt_json(c.sle->epsilon)}, {"raw", opt_json(c.sle->raw)}, {"n", c.sle->n}};
    return j;
}

inline GroupCell cell_from_json(const nlohmann::json& j) {
    GroupCell c;
    c.n_docs = j.at("n_docs").get<std::size_t>();
    const auto triple = [](const nlohmann::json& t) {
        TripleCell x;
        x.p = opt_double(t, "p");
        x.r = opt_double(t, "r");
        x.f1 = opt_double(t, "f1");
        x.n_p = t.at("n_p").get<std::size_t>();
        x.n_r = t.at("n_r").get<std::size_t>();
        x.missing_p = t.at("missing_p").get<std::size_t>();
        x.missing_r = t.at("missing_r").get<std::size_t>();
        return x;
    };
    const auto scalar = [](const nlohmann::json& s) {
        return ScalarCell{opt_double(s, "value"), s.at("n").get<std::size_t>(), s.at("missing").get<std::size_t>()};
    };
    if (j.contains("summac")) c.summac = triple(j["summac"]);
    if (j.contains("qafe")) c.qafe = triple(j["qafe"]);
    if (j.contains("esa")) c.esa = triple(j["esa"]);
    if (j.contains("bleu_c")) c.bleu_c = scalar(j["bleu_c"]);
    if (j.contains("fkgl")) c.fkgl = scalar(j["fkgl"]);
    if (j.contains("length")) {
        const auto& l = j["length"];
        c.length = LengthCell{opt_double(l, "tokens"), opt_double(l, "sents"), l.at("n").get<std::size_t>()};
    }
    if (j.contains("sle")) {
        const auto& s = j["sle"];
        c.sle = SleCell{opt_double(s, "epsilon"), opt_double(s, "raw"), s.at("n").get<std::size_t>()};
    }
    return c;
}

inline nlohmann::json system_to_json(const SystemReport& s) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& g : s.levels) levels.push_back({{"level", g.level}, {"cell", cell_to_json(g.cell)}});
    return {{"system", s.system}, {"overall", cell_to_json(s.overall)}, {"levels", levels}};
}

inline SystemReport system_from_json(const nlohmann::json& j) {
    SystemReport s;
    s.system = j.at("system").get<std::string>();
    s.overall = cell_from_json(j.at("overall"));
    for (const auto& g : j.at("levels")) s.levels.push_back({g.at("level").get<double>(), cell_from_json(g.at("cell"))});
    return s;
}

} // namespace detail

inline nlohmann::json report_to_json(const MetricReport& r) {
    nlohmann::json metrics = nlohmann::json::array();
    for (auto m : r.metrics) metrics.push_back(to_string(m));
    nlohmann::json systems = nlohmann::json::array();
    for (const auto& s : r.systems) systems.push_back(detail::system_to_json(s));
    nlohmann::json j{{"schema_version", r.schema_version}, {"metrics", metrics}, {"config", r.config}, {"systems", systems}};
    j["input"] = r.input ? detail::system_to_json(*r.input) : nlohmann::json(nullptr);
    j["instances"] = r.instances;
    return j;
}

inline MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport r;
    try {
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion) {
            throw ReportError("unsupported report schema version " + std::to_string(r.schema_version));
        }
        for (const auto& m : j.at("metrics")) r.metrics.push_back(parse_metric(m.get<std::string>()));
        r.config = j.at("config");
        for (const auto& s : j.at("systems")) r.systems.push_back(detail::system_from_json(s));
        if (!j.at("input").is_null()) r.input = detail::system_from_json(j["input"]);
        for (const auto& i : j.at("instances")) r.instances.push_back(i);
    } catch (const nlohmann::json::exception& e) {
        throw ReportError(std::string("malformed report: ") + e.what());
    }
    return r;
}

/// Pretty-printed JSON with a trailing newline.
inline std::string render_json(const MetricReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline MetricReport parse_report(const std::string& text) {
    try {
        return report_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ReportError(std::string("report is not JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Markdown

namespace detail {

inline std::string fixed(const std::optional<double>& v, int decimals) {
    if (!v) return "-";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
    return buf;
}

inline std::string level_label(double level) {
    char buf[32];
    if (level == static_cast<double>(static_cast<long long>(level))) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(level));
    } else {
        std::snprintf(buf, sizeof buf, "%g", level);
    }
    return buf;
}

inline std::string table_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) out += " " + c + " |";
    return out + "\n";
}

inline std::string table_header(const std::vector<std::string>& cells) {
    std::string out = table_row(cells) + "|";
    for (std::size_t i = 0; i < cells.size(); ++i) out += "---|";
    return out + "\n";
}

inline std::vector<double> all_levels(const MetricReport& r) {
    std::vector<double> levels;
    for (const auto& s : r.systems)
        for (const auto& g : s.levels) levels.push_back(g.level);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

inline std::string sle_pair(const SleCell* c) {
    if (!c || !c->raw) return "-";
    return c->epsilon ? format_error_with_raw(*c->epsilon, *c->raw) : "- (" + fixed(c->raw, 2) + ")";
}

} // namespace detail

inline std::string render_markdown(const MetricReport& r) {
    using detail::fixed;
    std::string out = "# Evaluation report\n\n";

    // Faithfulness and conservativity, one row per system over all levels.
    {
        std::vector<std::string> header{"System"};
        const auto triple_header = [&](const char* name) {
            for (const char* part : {"P", "R", "F1"}) header.push_back(std::string(name) + " " + part);
        };
        if (r.has(Metric::summac)) triple_header("SummaC");
        if (r.has(Metric::qafe)) triple_header("QAFactEval");
        if (r.has(Metric::esa)) triple_header("ESA");
        if (r.has(Metric::length)) {
            header.push_back("Tokens");
            header.push_back("Sents");
        }
        if (r.has(Metric::bleu_c)) header.push_back("BLEU_C");
        out += "## Meaning preservation and conservativity\n\n" + detail::table_header(header);
        const auto row = [&](const std::string& name, const GroupCell& c) {
            std::vector<std::string> cells{name};
            const auto triple = [&](const std::optional<TripleCell>& t) {
                cells.push_back(t ? fixed(t->p, 2) : "-");
                cells.push_back(t ? fixed(t->r, 2) : "-");
                cells.push_back(t ? fixed(t->f1, 2) : "-");
            };
            if (r.has(Metric::summac)) triple(c.summac);
            if (r.has(Metric::qafe)) triple(c.qafe);
            if (r.has(Metric::esa)) triple(c.esa);
            if (r.has(Metric::length)) {
                cells.push_back(c.length ? fixed(c.length->tokens, 1) : "-");
                cells.push_back(c.length ? fixed(c.length->sents, 1) : "-");
            }
            if (r.has(Metric::bleu_c)) cells.push_back(c.bleu_c ? fixed(c.bleu_c->value, 1) : "-");
            out += detail::table_row(cells);
        };
        if (header.size() > 1) {
            if (r.input) row("Input", r.input->overall);
            for (const auto& s : r.systems) row(s.system, s.overall);
        }
        out += "\n";
    }

    // Simplicity: FKGL and per-level error with raw means.
    {
        const auto levels = detail::all_levels(r);
        std::vector<std::string> header{"System"};
        if (r.has(Metric::fkgl)) header.push_back("FKGL");
        if (r.has(Metric::sle)) {
            for (double l : levels) header.push_back("eSLE L" + detail::level_label(l));
            header.push_back("eSLE Total");
        }
        out += "## Simplicity\n\n" + detail::table_header(header);
        const auto row = [&](const SystemReport& s) {
            std::vector<std::string> cells{s.system};
            if (r.has(Metric::fkgl)) cells.push_back(s.overall.fkgl ? fixed(s.overall.fkgl->value, 2) : "-");
            if (r.has(Metric::sle)) {
                for (double l : levels) {
                    const auto* c = s.level(l);
                    cells.push_back(detail::sle_pair(c && c->sle ? &*c->sle : nullptr));
                }
                cells.push_back(detail::sle_pair(s.overall.sle ? &*s.overall.sle : nullptr));
            }
            out += detail::table_row(cells);
        };
        if (header.size() > 1) {
            if (r.input) row(*r.input);
            for (const auto& s : r.systems) row(s);
        }
        out += "\n";
    }

    // Counts behind every mean.
    {
        std::vector<std::string> header{"System", "Level", "Docs"};
        if (r.has(Metric::qafe)) {
            header.push_back("QAFactEval missing P");
            header.push_back("QAFactEval missing R");
        }
        if (r.has(Metric::fkgl)) header.push_back("FKGL missing");
        out += "## Counts\n\n" + detail::table_header(header);
        for (const auto& s : r.systems) {
            const auto row = [&](const std::string& level, const GroupCell& c) {
                std::vector<std::string> cells{s.system, level, std::to_string(c.n_docs)};
                if (r.has(Metric::qafe)) {
                    cells.push_back(c.qafe ? std::to_string(c.qafe->missing_p) : "-");
                    cells.push_back(c.qafe ? std::to_string(c.qafe->missing_r) : "-");
                }
                if (r.has(Metric::fkgl)) cells.push_back(c.fkgl ? std::to_string(c.fkgl->missing) : "-");
                out += detail::table_row(cells);
            };
            for (const auto& g : s.levels) row(detail::level_label(g.level), g.cell);
            row("all", s.overall);
        }
    }
    return out;
}

enum class ReportFormat { json, markdown };

inline std::string render_report(const MetricReport& r, ReportFormat f) {
    return f == ReportFormat::json ? render_json(r) : render_markdown(r);
}

} // namespace simpeval
