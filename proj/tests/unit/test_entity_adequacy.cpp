#include <gtest/gtest.h>

#include <random>

#include "oracles/esa_oracle.hpp"
#include "support/test_util.hpp"

using namespace simpeval;

namespace {

std::set<std::string> ents(const std::string& text) { return extract_entities_heuristic(segment_sentences(text)).entities; }

EntitySet make(std::initializer_list<const char*> xs) {
    std::vector<std::string> v(xs.begin(), xs.end());
    return entity_set_from(v, EntityProvider::external_ner);
}

} // namespace

TEST(Entities, HeuristicExamples) {
    EXPECT_EQ(ents("Barack Obama visited Paris."), (std::set<std::string>{"barack obama", "paris"}));
    EXPECT_TRUE(ents("The the the.").empty());
    EXPECT_EQ(ents("Paris. Paris again."), (std::set<std::string>{"paris"}));
}

TEST(Entities, Normalization) {
    EXPECT_EQ(normalize_entity("  New   York! "), "new york");
    EXPECT_EQ(normalize_entity("“ZÜRICH”"), "zürich");
    EXPECT_EQ(normalize_entity("..."), "");
    const auto s = make({"Paris", "PARIS", " paris ", "", "!!"});
    EXPECT_EQ(s.entities, (std::set<std::string>{"paris"}));
}

TEST(Esa, SetArithmetic) {
    const auto same = esa(make({"a", "b"}), make({"a", "b"}));
    EXPECT_DOUBLE_EQ(same.precision, 1.0);
    EXPECT_DOUBLE_EQ(same.f1, 1.0);
    const auto partial = esa(make({"a", "b", "c"}), make({"a", "b", "d"}));
    EXPECT_DOUBLE_EQ(partial.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(partial.recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(partial.f1, 2.0 / 3.0);
    const auto empty_out = esa(make({"a"}), make({}));
    EXPECT_EQ(empty_out.precision, 0.0);
    EXPECT_EQ(empty_out.recall, 0.0);
    EXPECT_EQ(empty_out.f1, 0.0);
    const auto both_empty = esa(make({}), make({}));
    EXPECT_EQ(both_empty.f1, 1.0);
}

TEST(Esa, MatchesMembershipOracle) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> n(0, 6), sym(0, 7);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> a, b;
        for (int k = n(rng); k > 0; --k) a.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
        for (int k = n(rng); k > 0; --k) b.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
        const auto got = esa(entity_set_from(a, EntityProvider::heuristic), entity_set_from(b, EntityProvider::heuristic));
        const auto want = oracle::esa(a, b);
        EXPECT_DOUBLE_EQ(got.precision, want.p);
        EXPECT_DOUBLE_EQ(got.recall, want.r);
        EXPECT_DOUBLE_EQ(got.f1, want.f1);
    }
}

TEST(Esa, IdentityDocument) {
    const auto d = segment_sentences("Maria flew from London to Tokyo. Lee stayed in Paris.");
    const auto e = extract_entities_heuristic(d);
    const auto r = esa(e, e);
    EXPECT_EQ(r.f1, 1.0);
}

TEST(Prf, F1Combine) {
    EXPECT_DOUBLE_EQ(f1_combine(1, 1), 1.0);
    EXPECT_NEAR(f1_combine(0.66, 0.52), 0.58169491525, 1e-10);
    EXPECT_EQ(f1_combine(0.7, 0.0), 0.0);
    EXPECT_EQ(f1_combine(0.0, 0.0), 0.0);
}
