#pragma once

// Cellwise change of a system's metrics between two reports at one target level.

#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/report.hpp"

namespace simpeval {

struct DeltaCell {
    std::string key; ///< e.g. "summac.p", "bleu_c", "sle.epsilon"
    double delta = 0.0;
    std::optional<double> paired_raw; ///< raw SLE delta carried next to the error delta
};

struct DeltaRow {
    std::string system;
    std::vector<DeltaCell> cells;

    const DeltaCell* find(const std::string& key) const {
        for (const auto& c : cells)
            if (c.key == key) return &c;
        return nullptr;
    }
};

struct DeltaReport {
    double level = 0.0;
    std::vector<DeltaRow> rows;
};

namespace detail {

inline void push_delta(std::vector<DeltaCell>& out, const std::string& key, const std::optional<double>& from,
                       const std::optional<double>& to) {
    if (from && to) out.push_back({key, *to - *from, std::nullopt});
}

inline std::vector<DeltaCell> cell_delta(const GroupCell& in, const GroupCell& out) {
    std::vector<DeltaCell> d;
    const auto triple = [&](const char* name, const std::optional<TripleCell>& a, const std::optional<TripleCell>& b) {
        if (!a || !b) return;
        push_delta(d, std::string(name) + ".p", a->p, b->p);
        push_delta(d, std::string(name) + ".r", a->r, b->r);
        push_delta(d, std::string(name) + ".f1", a->f1, b->f1);
    };
    triple("summac", in.summac, out.summac);
    triple("qafe", in.qafe, out.qafe);
    triple("esa", in.esa, out.esa);
    if (in.length && out.length) {
        push_delta(d, "length.tokens", in.length->tokens, out.length->tokens);
        push_delta(d, "length.sents", in.length->sents, out.length->sents);
    }
    if (in.bleu_c && out.bleu_c) push_delta(d, "bleu_c", in.bleu_c->value, out.bleu_c->value);
    if (in.fkgl && out.fkgl) push_delta(d, "fkgl", in.fkgl->value, out.fkgl->value);
    if (in.sle && out.sle && in.sle->epsilon && out.sle->epsilon) {
        DeltaCell c{"sle.epsilon", *out.sle->epsilon - *in.sle->epsilon, std::nullopt};
        if (in.sle->raw && out.sle->raw) c.paired_raw = *out.sle->raw - *in.sle->raw;
        d.push_back(c);
    }
    return d;
}

} // namespace detail

/// out_domain - in_domain for every metric both reports carry at `level`.
inline DeltaReport delta_report(const MetricReport& in_domain, const MetricReport& out_domain, double level) {
    std::set<std::string> a, b;
    for (const auto& s : in_domain.systems) a.insert(s.system);
    for (const auto& s : out_domain.systems) b.insert(s.system);
    if (a != b) throw ReportError("reports cover different systems");

    DeltaReport rep;
    rep.level = level;
    for (const auto& s : in_domain.systems) {
        const auto* in_cell = s.level(level);
        const auto* out_cell = out_domain.system(s.system)->level(level);
        if (!in_cell || !out_cell) {
            throw ReportError("system " + s.system + " has no results at level " + detail::level_label(level));
        }
        rep.rows.push_back({s.system, detail::cell_delta(*in_cell, *out_cell)});
    }
    return rep;
}

inline nlohmann::json delta_to_json(const DeltaReport& d) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : d.rows) {
        nlohmann::json cells = nlohmann::json::object();
        for (const auto& c : r.cells) {
            cells[c.key] = c.paired_raw ? nlohmann::json{{"delta", c.delta}, {"raw", *c.paired_raw}}
                                        : nlohmann::json{{"delta", c.delta}};
        }
        rows.push_back({{"system", r.system}, {"cells", cells}});
    }
    return {{"level", d.level}, {"rows", rows}};
}

/// Table with P/R columns, BLEU_C, FKGL and the paired error cell "0.17 (-0.25)".
inline std::string render_delta_markdown(const DeltaReport& d) {
    static const std::vector<std::pair<std::string, std::string>> columns{
        {"summac.p", "SummaC P"}, {"summac.r", "SummaC R"}, {"qafe.p", "QAFactEval P"}, {"qafe.r", "QAFactEval R"},
        {"esa.p", "ESA P"},       {"esa.r", "ESA R"},       {"bleu_c", "BLEU_C"},       {"fkgl", "FKGL"},
        {"sle.epsilon", "eSLE"}};
    std::vector<std::pair<std::string, std::string>> present;
    for (const auto& col : columns) {
        for (const auto& r : d.rows) {
            if (r.find(col.first)) {
                present.push_back(col);
                break;
            }
        }
    }
    std::vector<std::string> header{"System"};
    for (const auto& p : present) header.push_back(p.second);
    std::string out = detail::table_header(header);
    for (const auto& r : d.rows) {
        std::vector<std::string> cells{r.system};
        for (const auto& [key, label] : present) {
            const auto* c = r.find(key);
            if (!c) {
                cells.push_back("-");
            } else if (c->paired_raw) {
                cells.push_back(format_error_with_raw(c->delta, *c->paired_raw));
            } else {
                cells.push_back(detail::fixed(c->delta, 2));
            }
        }
        out += detail::table_row(cells);
    }
    return out;
}

} // namespace simpeval
