#pragma once

// Out-of-domain test-set construction: eligibility filter, semantic-type to
// category join, seeded stratified sampling.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/corpus.hpp"
#include "simpeval/errors.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

struct EligibilityRule {
    std::size_t min_sentences = 10;
    std::size_t min_paragraphs = 3;
};

inline bool eligibility_filter(const Document& doc, const EligibilityRule& rule = {}) {
    return doc.sentence_count() >= rule.min_sentences && doc.paragraph_count() >= rule.min_paragraphs;
}

/// Semantic type -> broad category. Type lookup ignores ASCII case.
class CategoryMap {
public:
    void add(const std::string& category, const std::string& semantic_type) {
        const auto key = fold(semantic_type);
        const auto [it, inserted] = by_type_.emplace(key, category);
        if (!inserted && it->second != category) {
            throw ConfigError("semantic type \"" + semantic_type + "\" maps to both " + it->second + " and " + category);
        }
        if (std::find(categories_.begin(), categories_.end(), category) == categories_.end()) {
            categories_.push_back(category);
        }
    }

    std::optional<std::string> category_of(const std::string& semantic_type) const {
        const auto it = by_type_.find(fold(semantic_type));
        if (it == by_type_.end()) return std::nullopt;
        return it->second;
    }

    /// Categories in declaration order.
    const std::vector<std::string>& categories() const { return categories_; }

    static CategoryMap from_json(const nlohmann::json& j) {
        CategoryMap m;
        if (!j.is_object() || !j.contains("categories") || !j["categories"].is_object()) {
            throw ConfigError("category map needs a \"categories\" object");
        }
        for (const auto& [category, types] : j["categories"].items()) {
            if (!types.is_array()) throw ConfigError("category " + category + " must list semantic types");
            for (const auto& t : types) m.add(category, t.get<std::string>());
        }
        return m;
    }

    static CategoryMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open category map " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("category map " + path + ": " + e.what());
        }
    }

    /// Nineteen Wikidata types grouped into five categories.
    static CategoryMap defaults() {
        CategoryMap m;
        for (const char* t : {"Human", "Musical Group", "Fictional Human"}) m.add("Biographical", t);
        for (const char* t : {"City", "Village", "Commune of France", "City in the United States"}) m.add("Location", t);
        for (const char* t : {"Film", "Video Game", "Literary Work", "Television Series"}) m.add("Media", t);
        for (const char* t : {"Taxon", "Class of Disease", "Chemical Compound", "Class of Anatomical Entity"})
            m.add("Science", t);
        for (const char* t : {"Business", "Profession", "Organization", "Automobile Model"}) m.add("Industry", t);
        return m;
    }

private:
    static std::string fold(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

    std::map<std::string, std::string> by_type_;
    std::vector<std::string> categories_;
};

struct ArticleMeta {
    std::string doc_id;
    std::string semantic_type;
    std::string category;
};

/// Reads the metadata sidecar: {"doc_id": str, "semantic_type": str} per line.
inline std::map<std::string, std::string> read_semantic_types(const std::string& path) {
    std::map<std::string, std::string> out;
    detail::for_each_jsonl_line(path, [&](std::size_t lineno, const std::string& line) {
        const auto j = detail::parse_json_line(path, lineno, line);
        if (!j.contains("doc_id") || !j.contains("semantic_type")) {
            throw IngestionError(path + ":" + std::to_string(lineno) + ": needs doc_id and semantic_type");
        }
        const auto id = j["doc_id"].get<std::string>();
        if (!out.emplace(id, j["semantic_type"].get<std::string>()).second) {
            throw IngestionError(path + ": duplicate doc_id " + id);
        }
    });
    return out;
}

/// Joins eligible documents with their semantic type and category. Documents
/// without metadata or with an unmapped type are left out.
inline std::vector<ArticleMeta> build_pool(const std::vector<CorpusRecord>& corpus,
                                           const std::map<std::string, std::string>& semantic_types,
                                           const CategoryMap& categories, const EligibilityRule& rule = {}) {
    std::vector<ArticleMeta> pool;
    for (const auto& rec : corpus) {
        if (!eligibility_filter(rec.doc, rule)) continue;
        const auto st = semantic_types.find(rec.id);
        if (st == semantic_types.end()) continue;
        const auto cat = categories.category_of(st->second);
        if (!cat) continue;
        pool.push_back({rec.id, st->second, *cat});
    }
    return pool;
}

namespace detail {

/// Uniform integer in [0, bound) from raw engine output; portable across standard libraries.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

} // namespace detail

/// Draws `quota` documents per category without replacement. Output is sorted by id.
inline std::vector<std::string> stratified_sample(const std::vector<ArticleMeta>& pool,
                                                  const std::vector<std::string>& categories, std::size_t quota,
                                                  std::size_t total, std::uint64_t seed) {
    if (total != categories.size() * quota) {
        throw ConfigError("total " + std::to_string(total) + " != " + std::to_string(categories.size()) +
                          " categories x quota " + std::to_string(quota));
    }
    std::map<std::string, std::vector<std::string>> members;
    for (const auto& cat : categories) members[cat];
    for (const auto& a : pool) {
        auto it = members.find(a.category);
        if (it != members.end()) it->second.push_back(a.doc_id);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    out.reserve(total);
    for (const auto& cat : categories) {
        auto ids = members[cat];
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        if (ids.size() < quota) {
            throw SamplingError("category \"" + cat + "\" has " + std::to_string(ids.size()) +
                                " eligible documents, quota is " + std::to_string(quota));
        }
        // Partial Fisher-Yates: the first `quota` slots become the sample.
        for (std::size_t i = 0; i < quota; ++i) {
            const auto j = i + static_cast<std::size_t>(detail::bounded_draw(rng, ids.size() - i));
            std::swap(ids[i], ids[j]);
        }
        out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(quota));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace simpeval
