#include <gtest/gtest.h>

#include <random>

#include "oracles/bleu_oracle.hpp"
#include "support/test_util.hpp"

using namespace simpeval;

namespace {

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

} // namespace

TEST(Fkgl, FormulaPlugIn) {
    DocStats st;
    st.word_count = 10;
    st.sentence_count = 1;
    st.syllable_count = 10;
    EXPECT_NEAR(fkgl(st), 0.11, 1e-12);
}

TEST(Fkgl, ZeroCountsThrow) {
    EXPECT_THROW(fkgl(DocStats{}), MetricError);
    DocStats st;
    st.sentence_count = 1;
    EXPECT_THROW(fkgl(st), MetricError);
}

TEST(Fkgl, DuplicationInvariance) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
        const auto d = segment_sentences(testutil::random_text(rng, 2, 3));
        EXPECT_NEAR(fkgl(concat(d, d)), fkgl(d), 1e-12);
    }
}

TEST(Fkgl, FewerSentencesRaisesGrade) {
    const auto split_doc = segment_sentences("The cat sat. The dog ran. Birds sang.");
    const auto joined = segment_sentences("The cat sat, the dog ran, birds sang.");
    EXPECT_GT(fkgl(joined), fkgl(split_doc));
}

TEST(Bleu, IdentityIsHundred) {
    const auto d = segment_sentences("A small test. It has two sentences.");
    EXPECT_NEAR(bleu_c(d, d), 100.0, 1e-9);
    const auto one = segment_sentences("Hi.");
    EXPECT_NEAR(bleu_c(one, one), 100.0, 1e-9);
}

TEST(Bleu, DisjointIsZero) {
    EXPECT_EQ(bleu_c(segment_sentences("Alpha beta"), segment_sentences("Gamma delta")), 0.0);
}

TEST(Bleu, PrefixExampleMatchesOracle) {
    const auto hyp = split("a b c d");
    const auto ref = split("a b c d e");
    const auto st = bleu_stats(hyp, ref);
    const auto oc = oracle::bleu_counts(hyp, ref);
    for (std::size_t n = 0; n < 4; ++n) {
        EXPECT_EQ(st.matches[n], oc.matches[n]);
        EXPECT_EQ(st.totals[n], oc.totals[n]);
    }
    EXPECT_NEAR(bleu_score(st), oracle::bleu(hyp, ref, true), 1e-12);
    EXPECT_NEAR(bleu_score(st), 100.0 * std::exp(1.0 - 5.0 / 4.0), 1e-12);
}

TEST(Bleu, ClippingAndSmoothing) {
    const auto hyp = split("the the the the");
    const auto ref = split("the cat");
    const auto st = bleu_stats(hyp, ref);
    EXPECT_EQ(st.matches[0], 1u);
    EXPECT_EQ(st.totals[0], 4u);
    EXPECT_EQ(st.matches[1], 0u);
    EXPECT_GT(bleu_score(st), 0.0);
    EXPECT_EQ(bleu_score(st, BleuConfig{false}), 0.0);
    EXPECT_NEAR(bleu_score(st), oracle::bleu(hyp, ref, true), 1e-12);
}

TEST(Bleu, RelabelingInvariance) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> sym(0, 4), len(1, 15);
    const std::vector<std::string> a{"a", "b", "c", "d", "e"}, b{"q", "r", "s", "t", "u"};
    for (int i = 0; i < 200; ++i) {
        std::vector<std::string> h1, r1, h2, r2;
        for (int k = len(rng); k > 0; --k) {
            const int s = sym(rng);
            h1.push_back(a[s]);
            h2.push_back(b[(s + 2) % 5]);
        }
        for (int k = len(rng); k > 0; --k) {
            const int s = sym(rng);
            r1.push_back(a[s]);
            r2.push_back(b[(s + 2) % 5]);
        }
        EXPECT_EQ(bleu_stats(h1, r1), bleu_stats(h2, r2));
    }
}

TEST(Bleu, EmptyThrows) {
    const std::vector<std::string> none, some{"a"};
    EXPECT_THROW(bleu_score(bleu_stats(none, some)), MetricError);
}

TEST(LengthStats, Means) {
    // (10 tokens, 2 sentences) and (20 tokens, 4 sentences)
    const auto d1 = from_sentences({"a b c d.", "e f g h."});
    const auto d2 = from_sentences({"a b c d.", "e f g h.", "a b c d.", "e f g h."});
    ASSERT_EQ(doc_stats(d1).token_count, 10u);
    const std::vector<Document> batch{d1, d2};
    const auto ls = length_stats(batch);
    EXPECT_DOUBLE_EQ(ls.mean_tokens, 15.0);
    EXPECT_DOUBLE_EQ(ls.mean_sentences, 3.0);
    const std::vector<Document> single{d1};
    EXPECT_DOUBLE_EQ(length_stats(single).mean_tokens, 10.0);
    EXPECT_THROW(length_stats(std::vector<Document>{}), MetricError);
}
