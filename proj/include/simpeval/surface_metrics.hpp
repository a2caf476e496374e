#pragma once

// Conservativity and readability metrics: FKGL, BLEU against the input, lengths.

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simpeval/errors.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

struct FkglConfig {
    double sentence_weight = 0.39;
    double syllable_weight = 11.8;
    double intercept = -15.59;
};

inline double fkgl(const DocStats& st, const FkglConfig& cfg = {}) {
    if (st.word_count == 0) throw MetricError("FKGL needs at least one word");
    if (st.sentence_count == 0) throw MetricError("FKGL needs at least one sentence");
    const double words = static_cast<double>(st.word_count);
    return cfg.sentence_weight * (words / static_cast<double>(st.sentence_count)) +
           cfg.syllable_weight * (static_cast<double>(st.syllable_count) / words) + cfg.intercept;
}

inline double fkgl(const Document& doc, const FkglConfig& cfg = {}) { return fkgl(doc_stats(doc), cfg); }

inline constexpr std::size_t kBleuOrder = 4;

struct BleuConfig {
    /// Add-one on the n >= 2 precisions when some higher-order match count is zero.
    bool smoothing = true;
};

/// Sufficient statistics of a single hypothesis/reference pair.
struct BleuStats {
    std::array<std::size_t, kBleuOrder> matches{}; ///< clipped n-gram matches, index n-1
    std::array<std::size_t, kBleuOrder> totals{};  ///< hypothesis n-gram count
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;

    friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

inline BleuStats bleu_stats(std::span<const std::string> hyp, std::span<const std::string> ref) {
    // Intern tokens so n-gram keys are integer vectors.
    std::unordered_map<std::string, int> vocab;
    const auto ids = [&](std::span<const std::string> seq) {
        std::vector<int> out;
        out.reserve(seq.size());
        for (const auto& t : seq) out.push_back(vocab.try_emplace(t, static_cast<int>(vocab.size())).first->second);
        return out;
    };
    const auto h = ids(hyp);
    const auto r = ids(ref);

    BleuStats st;
    st.hyp_len = h.size();
    st.ref_len = r.size();
    for (std::size_t n = 1; n <= kBleuOrder; ++n) {
        std::map<std::vector<int>, std::size_t> ref_counts;
        std::map<std::vector<int>, std::size_t> hyp_counts;
        for (std::size_t i = 0; i + n <= r.size(); ++i) ++ref_counts[{r.begin() + i, r.begin() + i + n}];
        for (std::size_t i = 0; i + n <= h.size(); ++i) ++hyp_counts[{h.begin() + i, h.begin() + i + n}];
        std::size_t matched = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : hyp_counts) {
            total += count;
            const auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matched += std::min(count, it->second);
        }
        st.matches[n - 1] = matched;
        st.totals[n - 1] = total;
    }
    return st;
}

/// BLEU on a 0-100 scale from sufficient statistics.
inline double bleu_score(const BleuStats& st, const BleuConfig& cfg = {}) {
    if (st.hyp_len == 0 || st.ref_len == 0) throw MetricError("BLEU needs non-empty token sequences");
    if (st.matches[0] == 0) return 0.0;

    bool any_zero = false;
    for (std::size_t n = 1; n < kBleuOrder; ++n) any_zero = any_zero || st.matches[n] == 0;
    if (any_zero && !cfg.smoothing) return 0.0;

    double log_sum = std::log(static_cast<double>(st.matches[0]) / static_cast<double>(st.totals[0]));
    for (std::size_t n = 1; n < kBleuOrder; ++n) {
        const double add = any_zero ? 1.0 : 0.0;
        log_sum += std::log((static_cast<double>(st.matches[n]) + add) / (static_cast<double>(st.totals[n]) + add));
    }
    const double c = static_cast<double>(st.hyp_len);
    const double r = static_cast<double>(st.ref_len);
    const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
    return 100.0 * bp * std::exp(log_sum / static_cast<double>(kBleuOrder));
}

/// BLEU of the whole output token sequence against the whole input token sequence.
inline double bleu_c(const Document& output, const Document& input, const BleuConfig& cfg = {}) {
    const auto hyp = token_surfaces(output);
    const auto ref = token_surfaces(input);
    if (hyp.empty() || ref.empty()) throw MetricError("BLEU_C needs non-empty documents");
    return bleu_score(bleu_stats(hyp, ref), cfg);
}

struct LengthStats {
    double mean_tokens = 0.0;
    double mean_sentences = 0.0;
};

inline LengthStats length_stats(std::span<const Document> batch) {
    if (batch.empty()) throw MetricError("length statistics of an empty batch");
    double tokens = 0.0;
    double sents = 0.0;
    for (const auto& doc : batch) {
        const auto st = doc_stats(doc);
        tokens += static_cast<double>(st.token_count);
        sents += static_cast<double>(st.sentence_count);
    }
    const auto n = static_cast<double>(batch.size());
    return {tokens / n, sents / n};
}

} // namespace simpeval
