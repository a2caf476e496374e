#pragma once

// JSON Lines corpus ingestion. One document per line, either
//   {"id": str, "text": str}
// or
//   {"id": str, "sentences": [str], "paragraph_breaks": [int]}
// Pre-split sentences win when both forms are present.

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/errors.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

struct CorpusRecord {
    std::string id;
    Document doc;
};

namespace detail {

/// Calls `fn(line_number, line)` for every non-empty line of a file.
template <typename Fn>
void for_each_jsonl_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        fn(lineno, line);
    }
}

inline nlohmann::json parse_json_line(const std::string& path, std::size_t lineno,
                                      const std::string& line) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestionError(path + ":" + std::to_string(lineno) + ": malformed JSON (" + e.what() + ")");
    }
}

} // namespace detail

/// Parses one corpus record. `where` prefixes error messages.
inline CorpusRecord parse_corpus_record(const nlohmann::json& j, const std::string& where,
                                        const SegmenterConfig& seg = SegmenterConfig::defaults()) {
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
        throw IngestionError(where + ": record needs a string \"id\"");
    }
    CorpusRecord rec;
    rec.id = j["id"].get<std::string>();
    try {
        if (j.contains("sentences")) {
            auto sents = j["sentences"].get<std::vector<std::string>>();
            std::vector<std::size_t> breaks;
            if (j.contains("paragraph_breaks")) breaks = j["paragraph_breaks"].get<std::vector<std::size_t>>();
            rec.doc = from_sentences(sents, std::move(breaks));
        } else if (j.contains("text") && j["text"].is_string()) {
            rec.doc = segment_sentences(j["text"].get<std::string>(), seg);
        } else {
            throw IngestionError("record has neither \"text\" nor \"sentences\"");
        }
    } catch (const IngestionError& e) {
        throw IngestionError(where + " (doc " + rec.id + "): " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(where + " (doc " + rec.id + "): " + e.what());
    }
    return rec;
}

inline std::vector<CorpusRecord> read_corpus(const std::string& path,
                                             const SegmenterConfig& seg = SegmenterConfig::defaults()) {
    std::vector<CorpusRecord> out;
    detail::for_each_jsonl_line(path, [&](std::size_t lineno, const std::string& line) {
        const auto where = path + ":" + std::to_string(lineno);
        out.push_back(parse_corpus_record(detail::parse_json_line(path, lineno, line), where, seg));
    });
    return out;
}

} // namespace simpeval
