#pragma once

// Meaning-preservation scores: NLI-matrix reductions (precision per output
// sentence, recall per input sentence) and QA-based consistency orchestration.

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/errors.hpp"
#include "simpeval/prf.hpp"
#include "simpeval/score_matrix.hpp"
#include "simpeval/scorer_protocol.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

/// Mean over output sentences (columns) of the best entailment from any input sentence.
inline double summac_precision(const ScoreMatrix& m) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double best = m(0, j);
        for (std::size_t i = 1; i < m.rows(); ++i) best = std::max(best, m(i, j));
        sum += best;
    }
    return sum / static_cast<double>(m.cols());
}

/// Mean over input sentences (rows) of the best entailment into any output sentence.
inline double summac_recall(const ScoreMatrix& m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double best = m(i, 0);
        for (std::size_t j = 1; j < m.cols(); ++j) best = std::max(best, m(i, j));
        sum += best;
    }
    return sum / static_cast<double>(m.rows());
}

/// Equal-width bin of v over [0, 1]; the last bin is closed on the right.
inline std::size_t histogram_bin(double v, std::size_t bins) {
    const auto b = static_cast<std::size_t>(v * static_cast<double>(bins));
    return std::min(b, bins - 1);
}

/// One histogram per column, each summing to the row count.
inline std::vector<std::vector<std::size_t>> summac_histogram(const ScoreMatrix& m, std::size_t bins) {
    if (bins < 2) throw ConfigError("histogram needs at least 2 bins");
    std::vector<std::vector<std::size_t>> out(m.cols(), std::vector<std::size_t>(bins, 0));
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) ++out[j][histogram_bin(m(i, j), bins)];
    return out;
}

/// Externally trained 1-D convolution over column histograms.
struct ConvWeights {
    std::size_t bins = 0;
    std::vector<double> weights;
    double bias = 0.0;

    static ConvWeights from_json(const nlohmann::json& j) {
        ConvWeights w;
        try {
            w.bins = j.at("bins").get<std::size_t>();
            w.weights = j.at("weights").get<std::vector<double>>();
            if (j.contains("bias")) w.bias = j["bias"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("conv weights: ") + e.what());
        }
        if (w.bins < 2 || w.weights.size() != w.bins) throw ConfigError("conv weights need |weights| = bins >= 2");
        return w;
    }

    static ConvWeights load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open conv weights " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("conv weights " + path + ": " + e.what());
        }
    }
};

/// Per-column score: weights applied to the row-normalized histogram, plus bias,
/// clamped to [0, 1].
inline std::vector<double> summac_conv_columns(const ScoreMatrix& m, const std::optional<ConvWeights>& w) {
    if (!w) throw ConfigError("convolution scoring requested but no weights were provided");
    const auto hists = summac_histogram(m, w->bins);
    std::vector<double> out;
    out.reserve(hists.size());
    for (const auto& h : hists) {
        double s = w->bias;
        for (std::size_t b = 0; b < h.size(); ++b) s += w->weights[b] * static_cast<double>(h[b]) / static_cast<double>(m.rows());
        out.push_back(std::clamp(s, 0.0, 1.0));
    }
    return out;
}

inline double summac_conv_precision(const ScoreMatrix& m, const std::optional<ConvWeights>& w) {
    const auto cols = summac_conv_columns(m, w);
    double sum = 0.0;
    for (double c : cols) sum += c;
    return sum / static_cast<double>(cols.size());
}

inline double summac_conv_recall(const ScoreMatrix& m, const std::optional<ConvWeights>& w) {
    return summac_conv_precision(m.transpose(), w);
}

// ---------------------------------------------------------------------------
// QA-based consistency

struct QAItem {
    std::string question;
    std::string gold_answer;
    std::string predicted_answer;
    std::optional<double> overlap; ///< only for answerable items
    bool answerable = false;
};

struct QaResult {
    std::optional<double> score; ///< nullopt when no question survives filtering
    std::vector<QAItem> items;
};

/// Questions come from `question_doc`; answers are sought in `context_doc`.
/// Unanswerable questions are dropped before overlap scoring.
inline QaResult qa_consistency(const Document& question_doc, const Document& context_doc, ScorerClient& scorer) {
    QaResult res;
    const auto generated = scorer.run(Task::qg, {nlohmann::json{{"text", question_doc.text()}}});
    const auto items = detail::result_field<nlohmann::json>(generated.front(), "items", Task::qg);
    if (!items.is_array()) throw ScorerError("qg result \"items\" is not an array");
    for (const auto& it : items) {
        QAItem q;
        q.question = detail::result_field<std::string>(it, "question", Task::qg);
        q.gold_answer = detail::result_field<std::string>(it, "answer", Task::qg);
        res.items.push_back(std::move(q));
    }
    if (res.items.empty()) return res;

    const auto context = context_doc.text();
    std::vector<nlohmann::json> qa_payloads;
    std::vector<nlohmann::json> filter_payloads;
    for (const auto& q : res.items) {
        qa_payloads.push_back({{"question", q.question}, {"context", context}});
        filter_payloads.push_back({{"question", q.question}, {"context", context}});
    }
    const auto answers = scorer.run(Task::qa, qa_payloads);
    const auto verdicts = scorer.run(Task::filter, filter_payloads);

    std::vector<nlohmann::json> lerc_payloads;
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < res.items.size(); ++i) {
        auto& q = res.items[i];
        q.predicted_answer = detail::result_field<std::string>(answers[i], "answer", Task::qa);
        q.answerable = detail::result_field<bool>(verdicts[i], "answerable", Task::filter);
        if (!q.answerable) continue;
        survivors.push_back(i);
        lerc_payloads.push_back({{"question", q.question}, {"gold", q.gold_answer}, {"predicted", q.predicted_answer}});
    }
    if (survivors.empty()) return res;

    const auto overlaps = scorer.run(Task::lerc, lerc_payloads);
    double sum = 0.0;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        const double v = detail::result_field<double>(overlaps[k], "overlap", Task::lerc);
        res.items[survivors[k]].overlap = v;
        sum += v;
    }
    res.score = sum / static_cast<double>(survivors.size());
    return res;
}

/// Questions from the output, answered against the source.
inline QaResult qafe_precision(const Document& source, const Document& output, ScorerClient& scorer) {
    return qa_consistency(output, source, scorer);
}

/// Questions from the source, answered against the output.
inline QaResult qafe_recall(const Document& source, const Document& output, ScorerClient& scorer) {
    return qa_consistency(source, output, scorer);
}

} // namespace simpeval
