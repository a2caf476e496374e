#pragma once

// Entity-based semantic adequacy (ESA): set overlap of named entities between
// the input and the simplified output.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/unistr.h>

#include "simpeval/prf.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

enum class EntityProvider { heuristic, external_ner };

inline const char* to_string(EntityProvider p) {
    return p == EntityProvider::heuristic ? "heuristic" : "external_ner";
}

struct EntitySet {
    std::set<std::string> entities;
    EntityProvider provider = EntityProvider::heuristic;
};

/// Case-folds, strips non-alphanumeric code points from both ends and collapses
/// whitespace. Idempotent.
inline std::string normalize_entity(std::string_view s) {
    std::string folded;
    icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())))
        .foldCase()
        .toUTF8String(folded);
    folded = detail::collapse_whitespace(folded);

    std::size_t begin = 0;
    while (begin < folded.size()) {
        const auto cp = detail::decode_at(folded, begin);
        if (detail::is_alnum(cp.value)) break;
        begin = cp.end;
    }
    std::size_t end = begin;
    for (std::size_t pos = begin; pos < folded.size();) {
        const auto cp = detail::decode_at(folded, pos);
        if (detail::is_alnum(cp.value)) end = cp.end;
        pos = cp.end;
    }
    return detail::collapse_whitespace(std::string_view(folded).substr(begin, end - begin));
}

/// Lowercase function words that are not entities when they open a sentence.
inline const std::set<std::string, std::less<>>& entity_stop_words() {
    static const std::set<std::string, std::less<>> words{
        "a",     "about", "after",   "all",  "also", "an",    "and",   "as",    "at",    "because",
        "before", "but",  "by",      "during", "each", "every", "for", "from",  "he",    "her",
        "here",  "his",   "however", "i",    "if",   "in",    "it",    "its",   "many",  "meanwhile",
        "most",  "my",    "no",      "not",  "now",  "of",    "on",    "one",   "or",    "our",
        "she",   "since", "so",      "some", "still", "that", "the",   "their", "then",  "there",
        "these", "they",  "this",    "those", "though", "to", "today", "under", "until", "we",
        "what",  "when",  "where",   "which", "while", "who", "why",   "with",  "yet",   "you",
        "your"};
    return words;
}

namespace detail {

inline bool is_capitalized(const Token& t) {
    if (t.kind != TokenKind::word || t.surface.empty()) return false;
    const auto c = decode_at(t.surface, 0).value;
    return u_isupper(c) || u_istitle(c);
}

} // namespace detail

/// Offline entity extraction: maximal runs of capitalized word tokens within a
/// sentence. A capitalized stop-word in sentence-initial position is dropped
/// from its run.
inline EntitySet extract_entities_heuristic(const Document& doc) {
    EntitySet out;
    out.provider = EntityProvider::heuristic;
    const auto& stop = entity_stop_words();
    for (const auto& sent : doc.sentences) {
        std::string run;
        const auto flush = [&] {
            auto norm = normalize_entity(run);
            if (!norm.empty()) out.entities.insert(std::move(norm));
            run.clear();
        };
        for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
            const auto& tok = sent.tokens[i];
            if (!detail::is_capitalized(tok)) {
                flush();
                continue;
            }
            if (i == 0 && stop.contains(normalize_entity(tok.surface))) continue;
            if (!run.empty()) run.push_back(' ');
            run += tok.surface;
        }
        flush();
    }
    return out;
}

/// Wraps entity strings returned by an external NER provider.
inline EntitySet entity_set_from(const std::vector<std::string>& raw, EntityProvider provider) {
    EntitySet out;
    out.provider = provider;
    for (const auto& e : raw) {
        auto norm = normalize_entity(e);
        if (!norm.empty()) out.entities.insert(std::move(norm));
    }
    return out;
}

/// Precision is measured over output entities, recall over input entities. An
/// empty denominator scores 1 only when both sets are empty.
inline PRF esa(const EntitySet& input, const EntitySet& output) {
    std::size_t shared = 0;
    for (const auto& e : output.entities) shared += input.entities.contains(e) ? 1 : 0;
    const bool both_empty = input.entities.empty() && output.entities.empty();
    const auto ratio = [&](std::size_t denom) {
        if (denom == 0) return both_empty ? 1.0 : 0.0;
        return static_cast<double>(shared) / static_cast<double>(denom);
    };
    return PRF::from(ratio(output.entities.size()), ratio(input.entities.size()));
}

} // namespace simpeval
