#pragma once

// Canonical document model: tokenizer, sentence segmenter, syllable counter.
//
// All offsets are byte offsets into the UTF-8 `Document::raw` string.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "simpeval/errors.hpp"

namespace simpeval {

enum class TokenKind { word, number, punctuation };

inline const char* to_string(TokenKind kind) {
    switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::number: return "number";
    case TokenKind::punctuation: return "punctuation";
    }
    return "?";
}

struct Token {
    std::string surface;
    TokenKind kind = TokenKind::word;
    std::size_t start = 0; ///< inclusive
    std::size_t end = 0;   ///< exclusive

    friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
    std::vector<Token> tokens;
    std::size_t index = 0;

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
    std::vector<Sentence> sentences;
    /// Index of the first sentence of each paragraph; always starts with 0.
    std::vector<std::size_t> paragraph_breaks;
    std::string raw;

    std::size_t sentence_count() const { return sentences.size(); }
    std::size_t paragraph_count() const { return std::max<std::size_t>(1, paragraph_breaks.size()); }

    /// Source text of one sentence with internal whitespace runs collapsed to one space.
    std::string sentence_text(std::size_t i) const;
    /// Whitespace-normalized text of the whole document.
    std::string text() const;

    friend bool operator==(const Document&, const Document&) = default;
};

struct SegmenterConfig {
    /// Whitespace-delimited chunks ending in "." that never close a sentence.
    std::set<std::string, std::less<>> abbreviations;

    static SegmenterConfig defaults();
    static SegmenterConfig without_abbreviations() { return {}; }
};

struct DocStats {
    std::size_t token_count = 0;
    std::size_t word_count = 0; ///< word + number tokens
    std::size_t sentence_count = 0;
    std::size_t syllable_count = 0; ///< word tokens only

    DocStats& operator+=(const DocStats& o) {
        token_count += o.token_count;
        word_count += o.word_count;
        sentence_count += o.sentence_count;
        syllable_count += o.syllable_count;
        return *this;
    }
    friend DocStats operator+(DocStats a, const DocStats& b) { return a += b; }
    friend bool operator==(const DocStats&, const DocStats&) = default;
};

namespace detail {

struct CodePoint {
    UChar32 value;
    std::size_t begin;
    std::size_t end;
};

/// Decodes the code point at byte offset `pos`. Ill-formed bytes decode as U+FFFD
/// spanning one byte.
inline CodePoint decode_at(std::string_view s, std::size_t pos) {
    int32_t i = static_cast<int32_t>(pos);
    const auto len = static_cast<int32_t>(s.size());
    UChar32 c = 0;
    U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, len, c);
    if (c < 0) c = 0xFFFD;
    return {c, pos, static_cast<std::size_t>(i)};
}

inline bool is_space(UChar32 c) { return u_isUWhiteSpace(c); }
inline bool is_digit(UChar32 c) { return u_isdigit(c); }
inline bool is_letter(UChar32 c) {
    return u_isalpha(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}
inline bool is_alnum(UChar32 c) { return is_letter(c) || is_digit(c); }
inline bool is_word_joiner(UChar32 c) { return c == '\'' || c == 0x2019 || c == '-'; }
inline bool is_number_joiner(UChar32 c) { return c == '.' || c == ','; }

inline bool is_valid_utf8(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        int32_t i = static_cast<int32_t>(pos);
        UChar32 c = 0;
        U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
        if (c < 0) return false;
        pos = static_cast<std::size_t>(i);
    }
    return true;
}

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto cp = decode_at(s, pos);
        if (is_space(cp.value)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.append(s.substr(cp.begin, cp.end - cp.begin));
        }
        pos = cp.end;
    }
    return out;
}

inline bool is_terminal(std::string_view s) { return s == "." || s == "!" || s == "?"; }

inline bool is_closing(std::string_view s) {
    return s == "\"" || s == "'" || s == ")" || s == "]" || s == "”" || s == "’" ||
           s == "»";
}

inline bool is_opening(std::string_view s) {
    return s == "\"" || s == "'" || s == "(" || s == "[" || s == "“" || s == "‘" ||
           s == "«";
}

inline bool starts_upper_or_digit(std::string_view s) {
    if (s.empty()) return false;
    const auto c = decode_at(s, 0).value;
    return u_isupper(c) || u_istitle(c) || is_digit(c);
}

} // namespace detail

/// Splits text into word, number and punctuation tokens.
///
/// A word is a run of letters/digits starting with a letter, where an apostrophe
/// or hyphen may join two alphanumeric characters. A number is a digit run where
/// "." or "," may join two digits; if letters follow immediately the whole run
/// becomes a word ("3rd"). Every other non-whitespace code point is a single
/// punctuation token. `base` is added to every span.
inline std::vector<Token> tokenize(std::string_view text, std::size_t base = 0) {
    using namespace detail;
    std::vector<Token> tokens;
    std::size_t pos = 0;
    const auto peek = [&](std::size_t at) -> UChar32 {
        return at < text.size() ? decode_at(text, at).value : U_SENTINEL;
    };
    // Consumes alnum characters with internal word joiners starting at `at`.
    const auto consume_word = [&](std::size_t at) {
        while (at < text.size()) {
            const auto cp = decode_at(text, at);
            if (is_alnum(cp.value)) {
                at = cp.end;
            } else if (is_word_joiner(cp.value) && cp.end < text.size() &&
                       is_alnum(peek(cp.end))) {
                at = cp.end;
            } else {
                break;
            }
        }
        return at;
    };

    while (pos < text.size()) {
        const auto cp = decode_at(text, pos);
        if (is_space(cp.value)) {
            pos = cp.end;
            continue;
        }
        std::size_t end = cp.end;
        TokenKind kind = TokenKind::punctuation;
        if (is_digit(cp.value)) {
            kind = TokenKind::number;
            while (end < text.size()) {
                const auto next = decode_at(text, end);
                if (is_digit(next.value)) {
                    end = next.end;
                } else if (is_number_joiner(next.value) && is_digit(peek(next.end))) {
                    end = next.end;
                } else {
                    break;
                }
            }
            if (end < text.size() && is_letter(peek(end))) {
                kind = TokenKind::word;
                end = consume_word(end);
            }
        } else if (is_letter(cp.value)) {
            kind = TokenKind::word;
            end = consume_word(end);
        }
        tokens.push_back(Token{std::string(text.substr(pos, end - pos)), kind, base + pos, base + end});
        pos = end;
    }
    return tokens;
}

inline SegmenterConfig SegmenterConfig::defaults() {
    SegmenterConfig cfg;
    for (const char* a : {"Mr.",   "Mrs.",  "Ms.",  "Dr.",   "Prof.", "Sr.",  "Jr.",  "St.",
                          "Mt.",   "Gen.",  "Col.", "Capt.", "Lt.",   "Sgt.", "Gov.", "Sen.",
                          "Rep.",  "Rev.",  "Hon.", "vs.",   "etc.",  "e.g.", "i.e.", "cf.",
                          "Inc.",  "Ltd.",  "Co.",  "Corp.", "Bros.", "No.",  "Fig.", "approx.",
                          "Jan.",  "Feb.",  "Mar.", "Apr.",  "Jun.",  "Jul.", "Aug.", "Sep.",
                          "Sept.", "Oct.",  "Nov.", "Dec."}) {
        cfg.abbreviations.emplace(a);
    }
    return cfg;
}

namespace detail {

/// Splits the tokens of one paragraph into sentences.
inline void split_paragraph(std::string_view raw, std::vector<Token> tokens,
                            const SegmenterConfig& cfg, std::vector<Sentence>& out) {
    std::vector<Token> current;
    const auto adjacent = [&](std::size_t a, std::size_t b) { return tokens[a].end == tokens[b].start; };
    std::size_t k = 0;
    while (k < tokens.size()) {
        if (!(tokens[k].kind == TokenKind::punctuation && is_terminal(tokens[k].surface))) {
            current.push_back(std::move(tokens[k]));
            ++k;
            continue;
        }
        std::size_t last = k;
        while (last + 1 < tokens.size() && adjacent(last, last + 1) &&
               (is_terminal(tokens[last + 1].surface) || is_closing(tokens[last + 1].surface))) {
            ++last;
        }
        bool split = false;
        const std::size_t next = last + 1;
        if (next < tokens.size() && !adjacent(last, next)) {
            const bool opens_upper = is_opening(tokens[next].surface) && next + 1 < tokens.size() &&
                                     adjacent(next, next + 1) &&
                                     starts_upper_or_digit(tokens[next + 1].surface);
            split = starts_upper_or_digit(tokens[next].surface) || opens_upper;
        }
        if (split && tokens[k].surface == ".") {
            std::size_t chunk = k;
            while (chunk > 0 && adjacent(chunk - 1, chunk)) --chunk;
            const auto word = raw.substr(tokens[chunk].start, tokens[k].end - tokens[chunk].start);
            if (cfg.abbreviations.find(word) != cfg.abbreviations.end()) split = false;
        }
        for (std::size_t t = k; t <= last; ++t) current.push_back(std::move(tokens[t]));
        k = last + 1;
        if (split) {
            out.push_back(Sentence{std::move(current), out.size()});
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(Sentence{std::move(current), out.size()});
}

} // namespace detail

/// Segments raw text into sentences and paragraphs.
///
/// A sentence ends at ".", "!" or "?" (plus any adjacent closing quotes/brackets)
/// when whitespace follows and the next token starts with an uppercase letter or
/// digit, unless the whitespace-delimited chunk ending in "." is a listed
/// abbreviation. Lines containing only whitespace separate paragraphs.
inline Document segment_sentences(std::string_view text,
                                  const SegmenterConfig& cfg = SegmenterConfig::defaults()) {
    using namespace detail;
    if (!is_valid_utf8(text)) throw IngestionError("text is not valid UTF-8");

    Document doc;
    doc.raw = std::string(text);

    // Paragraph spans: maximal groups of non-blank lines.
    std::vector<std::pair<std::size_t, std::size_t>> paragraphs;
    std::size_t line_start = 0;
    std::size_t para_start = std::string_view::npos;
    std::size_t para_end = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        const auto line = text.substr(line_start, line_end - line_start);
        if (collapse_whitespace(line).empty()) {
            if (para_start != std::string_view::npos) paragraphs.emplace_back(para_start, para_end);
            para_start = std::string_view::npos;
        } else {
            if (para_start == std::string_view::npos) para_start = line_start;
            para_end = line_end;
        }
        line_start = line_end + 1;
    }
    if (para_start != std::string_view::npos) paragraphs.emplace_back(para_start, para_end);

    for (const auto& [begin, end] : paragraphs) {
        auto tokens = tokenize(text.substr(begin, end - begin), begin);
        if (tokens.empty()) continue;
        doc.paragraph_breaks.push_back(doc.sentences.size());
        split_paragraph(text, std::move(tokens), cfg, doc.sentences);
    }
    if (doc.sentences.empty()) throw IngestionError("text is empty or whitespace-only");
    return doc;
}

/// Builds a document from pre-split sentences. Sentences inside a paragraph are
/// joined with one space, paragraphs with a blank line.
inline Document from_sentences(const std::vector<std::string>& sentences,
                               std::vector<std::size_t> paragraph_breaks = {}) {
    if (sentences.empty()) throw IngestionError("document has no sentences");
    if (paragraph_breaks.empty()) paragraph_breaks.push_back(0);
    if (paragraph_breaks.front() != 0) throw IngestionError("paragraph_breaks must start at 0");
    for (std::size_t i = 0; i < paragraph_breaks.size(); ++i) {
        if (paragraph_breaks[i] >= sentences.size() ||
            (i > 0 && paragraph_breaks[i] <= paragraph_breaks[i - 1])) {
            throw IngestionError("paragraph_breaks must be strictly increasing and < sentence count");
        }
    }
    Document doc;
    doc.paragraph_breaks = std::move(paragraph_breaks);
    std::size_t next_break = 1;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!detail::is_valid_utf8(sentences[i])) {
            throw IngestionError("sentence " + std::to_string(i) + " is not valid UTF-8");
        }
        if (i > 0) {
            const bool new_para = next_break < doc.paragraph_breaks.size() &&
                                  doc.paragraph_breaks[next_break] == i;
            if (new_para) ++next_break;
            doc.raw += new_para ? "\n\n" : " ";
        }
        const std::size_t base = doc.raw.size();
        doc.raw += sentences[i];
        auto tokens = tokenize(sentences[i], base);
        if (tokens.empty()) throw IngestionError("sentence " + std::to_string(i) + " is empty");
        doc.sentences.push_back(Sentence{std::move(tokens), i});
    }
    return doc;
}

inline std::string Document::sentence_text(std::size_t i) const {
    const auto& toks = sentences.at(i).tokens;
    return detail::collapse_whitespace(
        std::string_view(raw).substr(toks.front().start, toks.back().end - toks.front().start));
}

inline std::string Document::text() const {
    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += sentence_text(i);
    }
    return out;
}

/// Vowel-group syllable estimate: groups of a/e/i/o/u/y after lowercasing, minus a
/// lone trailing silent "e" unless the word ends consonant + "le"; never below 1.
inline int syllable_count(std::string_view word) {
    std::string s;
    std::size_t pos = 0;
    while (pos < word.size()) {
        const auto cp = detail::decode_at(word, pos);
        const UChar32 lower = u_tolower(cp.value);
        s.push_back(lower < 0x80 && detail::is_letter(lower) ? static_cast<char>(lower) : ' ');
        pos = cp.end;
    }
    const auto vowel = [](char c) {
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    const auto consonant = [&](char c) { return c != ' ' && !vowel(c); };

    int count = 0;
    bool in_group = false;
    for (char c : s) {
        if (vowel(c) && !in_group) ++count;
        in_group = vowel(c);
    }
    const std::size_t n = s.size();
    if (count > 1 && n >= 2 && s[n - 1] == 'e' && consonant(s[n - 2])) {
        const bool consonant_le = s[n - 2] == 'l' && n >= 3 && consonant(s[n - 3]);
        if (!consonant_le) --count;
    }
    return std::max(count, 1);
}

inline DocStats doc_stats(const Document& doc) {
    DocStats st;
    st.sentence_count = doc.sentences.size();
    for (const auto& sent : doc.sentences) {
        for (const auto& tok : sent.tokens) {
            ++st.token_count;
            if (tok.kind != TokenKind::punctuation) ++st.word_count;
            if (tok.kind == TokenKind::word) st.syllable_count += syllable_count(tok.surface);
        }
    }
    return st;
}

/// Appends `b` after `a` as new paragraphs.
inline Document concat(const Document& a, const Document& b) {
    Document out = a;
    const std::size_t shift = a.raw.size() + 2;
    out.raw += "\n\n";
    out.raw += b.raw;
    const std::size_t first = a.sentences.size();
    for (std::size_t br : b.paragraph_breaks) out.paragraph_breaks.push_back(first + br);
    if (b.paragraph_breaks.empty()) out.paragraph_breaks.push_back(first);
    for (const auto& sent : b.sentences) {
        Sentence s = sent;
        s.index += first;
        for (auto& t : s.tokens) {
            t.start += shift;
            t.end += shift;
        }
        out.sentences.push_back(std::move(s));
    }
    return out;
}

/// All token surfaces of a document in order.
inline std::vector<std::string> token_surfaces(const Document& doc) {
    std::vector<std::string> out;
    for (const auto& s : doc.sentences)
        for (const auto& t : s.tokens) out.push_back(t.surface);
    return out;
}

} // namespace simpeval
