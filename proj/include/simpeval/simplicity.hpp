#pragma once

// Document simplicity from sentence-level reading-level estimates, and the
// absolute error of that estimate against a commanded target level.

#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simpeval/errors.hpp"

namespace simpeval {

struct SentenceSLE {
    std::size_t sentence_index = 0;
    double sle = 0.0;
};

struct TargetLevel {
    double level = 0.0;

    friend auto operator<=>(const TargetLevel&, const TargetLevel&) = default;
};

/// Mean sentence score. `expected_sentences`, when non-zero, must match the count.
inline double sle_doc(std::span<const SentenceSLE> scores, std::size_t expected_sentences = 0) {
    if (scores.empty()) throw MetricError("SLE_doc of a document without sentence scores");
    if (expected_sentences != 0 && scores.size() != expected_sentences) {
        throw MetricError("got " + std::to_string(scores.size()) + " sentence scores for " +
                          std::to_string(expected_sentences) + " sentences");
    }
    double sum = 0.0;
    for (const auto& s : scores) {
        if (!std::isfinite(s.sle)) throw MetricError("non-finite sentence score");
        sum += s.sle;
    }
    return sum / static_cast<double>(scores.size());
}

inline double sle_doc(std::span<const double> scores, std::size_t expected_sentences = 0) {
    std::vector<SentenceSLE> recs;
    recs.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) recs.push_back({i, scores[i]});
    return sle_doc(recs, expected_sentences);
}

struct ScoredDoc {
    double doc_sle = 0.0;
    TargetLevel target;
};

/// Mean absolute error between document scores and their targets.
inline double epsilon_sle(std::span<const ScoredDoc> batch) {
    if (batch.empty()) throw MetricError("epsilon SLE of an empty batch");
    double sum = 0.0;
    for (const auto& d : batch) sum += std::abs(d.doc_sle - d.target.level);
    return sum / static_cast<double>(batch.size());
}

struct LevelCell {
    double epsilon = 0.0;
    double raw_mean = 0.0;
    std::size_t count = 0;
};

struct LevelGroupedReport {
    std::map<TargetLevel, LevelCell> levels;
    LevelCell total; ///< MAE over the whole batch, not a mean of per-level values
};

inline LevelGroupedReport level_grouped_report(std::span<const ScoredDoc> batch) {
    if (batch.empty()) throw MetricError("level report of an empty batch");
    std::map<TargetLevel, std::vector<ScoredDoc>> parts;
    for (const auto& d : batch) parts[d.target].push_back(d);

    const auto cell = [](std::span<const ScoredDoc> docs) {
        LevelCell c;
        c.epsilon = epsilon_sle(docs);
        double raw = 0.0;
        for (const auto& d : docs) raw += d.doc_sle;
        c.raw_mean = raw / static_cast<double>(docs.size());
        c.count = docs.size();
        return c;
    };
    LevelGroupedReport rep;
    for (const auto& [level, docs] : parts) rep.levels.emplace(level, cell(docs));
    rep.total = cell(batch);
    return rep;
}

/// "0.22 (1.12)": error followed by the raw mean in parentheses.
inline std::string format_error_with_raw(double epsilon, double raw, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f (%.*f)", decimals, epsilon, decimals, raw);
    return buf;
}

} // namespace simpeval
