#include <gtest/gtest.h>

#include <random>

#include "support/test_util.hpp"

using namespace simpeval;

namespace {

std::vector<std::pair<std::string, TokenKind>> kinds(const std::vector<Token>& toks) {
    std::vector<std::pair<std::string, TokenKind>> out;
    for (const auto& t : toks) out.emplace_back(t.surface, t.kind);
    return out;
}

} // namespace

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, WordsAndPunctuation) {
    const auto toks = tokenize("Dogs bark.");
    using K = TokenKind;
    EXPECT_EQ(kinds(toks), (std::vector<std::pair<std::string, K>>{{"Dogs", K::word}, {"bark", K::word}, {".", K::punctuation}}));
    EXPECT_EQ(toks[0].start, 0u);
    EXPECT_EQ(toks[0].end, 4u);
    EXPECT_EQ(toks[2].start, 9u);
}

TEST(Tokenize, DecimalNumber) {
    using K = TokenKind;
    EXPECT_EQ(kinds(tokenize("3.5 km")), (std::vector<std::pair<std::string, K>>{{"3.5", K::number}, {"km", K::word}}));
}

TEST(Tokenize, JoinersAndOrdinals) {
    using K = TokenKind;
    EXPECT_EQ(kinds(tokenize("don't well-known 3rd 1,000.")),
              (std::vector<std::pair<std::string, K>>{
                  {"don't", K::word}, {"well-known", K::word}, {"3rd", K::word}, {"1,000", K::number}, {".", K::punctuation}}));
    EXPECT_EQ(kinds(tokenize("end-")), (std::vector<std::pair<std::string, K>>{{"end", K::word}, {"-", K::punctuation}}));
}

TEST(Tokenize, NonAsciiLetters) {
    const auto toks = tokenize("Café “Zürich” naïve");
    ASSERT_EQ(toks.size(), 5u);
    EXPECT_EQ(toks[0].surface, "Café");
    EXPECT_EQ(toks[1].kind, TokenKind::punctuation);
    EXPECT_EQ(toks[2].surface, "Zürich");
    EXPECT_EQ(toks[4].surface, "naïve");
}

TEST(Tokenize, SpansRoundTrip) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const auto text = testutil::random_text(rng, 2, 3) + " “quoted”, 4.5% (x-y)";
        for (const auto& t : tokenize(text)) EXPECT_EQ(text.substr(t.start, t.end - t.start), t.surface);
    }
}

TEST(Segment, AbbreviationFreeSplit) {
    const auto doc = segment_sentences("A. B.", SegmenterConfig::without_abbreviations());
    EXPECT_EQ(doc.sentence_count(), 2u);
}

TEST(Segment, AbbreviationSuppressesSplit) {
    const auto doc = segment_sentences("Mr. Smith left.");
    EXPECT_EQ(doc.sentence_count(), 1u);
    EXPECT_EQ(segment_sentences("Mr. Smith left.", SegmenterConfig::without_abbreviations()).sentence_count(), 2u);
}

TEST(Segment, BlankLineParagraphs) {
    const auto doc = segment_sentences("One.\n\nTwo.");
    EXPECT_EQ(doc.sentence_count(), 2u);
    EXPECT_EQ(doc.paragraph_breaks, (std::vector<std::size_t>{0, 1}));
    const auto spaced = segment_sentences("One. Two.\n   \n\nThree.\nFour.");
    EXPECT_EQ(spaced.sentence_count(), 4u);
    EXPECT_EQ(spaced.paragraph_breaks, (std::vector<std::size_t>{0, 2}));
}

TEST(Segment, LowercaseContinuationAndQuotes) {
    EXPECT_EQ(segment_sentences("It costs 3.5 dollars. then more.").sentence_count(), 1u);
    const auto doc = segment_sentences("He said \"Stop.\" Then he left! \"Why?\" she asked.");
    ASSERT_EQ(doc.sentence_count(), 3u);
    EXPECT_EQ(doc.sentence_text(0), "He said \"Stop.\"");
    EXPECT_EQ(doc.sentence_text(1), "Then he left!");
}

TEST(Segment, Errors) {
    EXPECT_THROW(segment_sentences(""), IngestionError);
    EXPECT_THROW(segment_sentences(" \n\t\n"), IngestionError);
    EXPECT_THROW(segment_sentences("bad \xff byte"), IngestionError);
}

TEST(Segment, SentenceTextCollapsesWhitespace) {
    const auto doc = segment_sentences("Line  one\ncontinues here.  Next.");
    EXPECT_EQ(doc.sentence_text(0), "Line one continues here.");
    EXPECT_EQ(doc.text(), "Line one continues here. Next.");
}

TEST(FromSentences, BuildsRawAndBreaks) {
    const auto doc = from_sentences({"One.", "Two.", "Three."}, {0, 2});
    EXPECT_EQ(doc.raw, "One. Two.\n\nThree.");
    EXPECT_EQ(doc.paragraph_count(), 2u);
    EXPECT_EQ(doc.sentences[2].tokens[0].start, 11u);
    EXPECT_THROW(from_sentences({}), IngestionError);
    EXPECT_THROW(from_sentences({"a", " "}), IngestionError);
    EXPECT_THROW(from_sentences({"a", "b"}, {1}), IngestionError);
    EXPECT_THROW(from_sentences({"a", "b"}, {0, 0}), IngestionError);
    EXPECT_THROW(from_sentences({"a", "b"}, {0, 2}), IngestionError);
}

TEST(FromSentences, ResegmentsToSameSentences) {
    const auto doc = from_sentences({"The cat sat.", "It was happy."}, {0, 1});
    const auto again = segment_sentences(doc.raw);
    EXPECT_EQ(again.sentence_count(), 2u);
    EXPECT_EQ(again.paragraph_breaks, doc.paragraph_breaks);
    EXPECT_EQ(token_surfaces(again), token_surfaces(doc));
}

TEST(Syllables, HeuristicExamples) {
    EXPECT_EQ(syllable_count("cat"), 1);
    EXPECT_EQ(syllable_count("university"), 5);
    EXPECT_EQ(syllable_count("make"), 1);
    EXPECT_EQ(syllable_count("table"), 2);
    EXPECT_EQ(syllable_count("the"), 1);
    EXPECT_EQ(syllable_count("tree"), 1);
    EXPECT_EQ(syllable_count("rhythm"), 1);
    EXPECT_EQ(syllable_count("MAKE"), 1);
    EXPECT_EQ(syllable_count("x"), 1);
    EXPECT_EQ(syllable_count("beautiful"), 3);
}

TEST(DocStats, HandCount) {
    const auto st = doc_stats(segment_sentences("Dogs bark."));
    EXPECT_EQ(st, (DocStats{3, 2, 1, 2}));
}

TEST(DocStats, NumbersCountAsWordsWithoutSyllables) {
    const auto st = doc_stats(segment_sentences("It costs 3.5 dollars."));
    EXPECT_EQ(st.token_count, 5u);
    EXPECT_EQ(st.word_count, 4u);
    EXPECT_EQ(st.syllable_count, 1u + 1u + 2u);
}

TEST(DocStats, ConcatenationIsAdditive) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto a = segment_sentences(testutil::random_text(rng, 1 + i % 3, 1 + i % 4));
        const auto b = segment_sentences(testutil::random_text(rng, 2, 2));
        const auto ab = concat(a, b);
        EXPECT_EQ(doc_stats(ab), doc_stats(a) + doc_stats(b));
        EXPECT_EQ(doc_stats(concat(a, a)), doc_stats(a) + doc_stats(a));
        EXPECT_EQ(ab.paragraph_count(), a.paragraph_count() + b.paragraph_count());
        EXPECT_EQ(token_surfaces(segment_sentences(ab.raw)), token_surfaces(ab));
    }
}

TEST(Corpus, ReadsBothRecordForms) {
    testutil::TempDir dir;
    const auto path = dir.file("c.jsonl");
    testutil::write_jsonl(path, {{{"id", "a"}, {"text", "One. Two.\n\nThree."}},
                                 {{"id", "b"}, {"sentences", {"x y.", "z."}}, {"paragraph_breaks", {0, 1}}, {"text", "ignored"}}});
    const auto recs = read_corpus(path);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].doc.sentence_count(), 3u);
    EXPECT_EQ(recs[1].doc.paragraph_count(), 2u);
    EXPECT_EQ(recs[1].doc.raw, "x y.\n\nz.");
}

TEST(Corpus, Errors) {
    testutil::TempDir dir;
    const auto path = dir.file("bad.jsonl");
    testutil::write_text(path, "{\"id\": \"a\", \"text\": \"ok.\"}\n{not json\n");
    EXPECT_THROW(read_corpus(path), IngestionError);
    testutil::write_text(path, "{\"id\": \"a\", \"text\": \"   \"}\n");
    EXPECT_THROW(read_corpus(path), IngestionError);
    testutil::write_text(path, "{\"text\": \"x.\"}\n");
    EXPECT_THROW(read_corpus(path), IngestionError);
    EXPECT_THROW(read_corpus(dir.file("missing.jsonl")), IngestionError);
}
