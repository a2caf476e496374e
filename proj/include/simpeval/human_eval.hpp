#pragma once

// Binary human ratings: positive-rating proportions per system and dimension,
// and significance of each system against the top-rated one.

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "simpeval/corpus.hpp"
#include "simpeval/errors.hpp"
#include "simpeval/stats.hpp"

namespace simpeval {

enum class Dimension { fluency, faithfulness, simplicity };
inline constexpr std::array<Dimension, 3> kDimensions{Dimension::fluency, Dimension::faithfulness,
                                                      Dimension::simplicity};

inline const char* to_string(Dimension d) {
    switch (d) {
    case Dimension::fluency: return "fluency";
    case Dimension::faithfulness: return "faithfulness";
    case Dimension::simplicity: return "simplicity";
    }
    return "?";
}

inline Dimension parse_dimension(std::string_view s) {
    for (auto d : kDimensions)
        if (s == to_string(d)) return d;
    throw IngestionError("unknown rating dimension \"" + std::string(s) + "\"");
}

struct HumanRating {
    std::string system;
    std::string item_id;
    Dimension dimension = Dimension::fluency;
    bool rating = false;
    std::string annotator;
};

inline std::vector<HumanRating> read_ratings(const std::string& path) {
    std::vector<HumanRating> out;
    detail::for_each_jsonl_line(path, [&](std::size_t lineno, const std::string& line) {
        const auto j = detail::parse_json_line(path, lineno, line);
        try {
            out.push_back({j.at("system").get<std::string>(), j.at("item_id").get<std::string>(),
                           parse_dimension(j.at("dimension").get<std::string>()), j.at("rating").get<bool>(),
                           j.at("annotator").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw IngestionError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    return out;
}

struct Significance {
    bool is_best = false;
    bool testable = false;
    double p = 1.0;
    bool star = false;
};

struct HumanEvalRow {
    std::string system;
    std::array<std::optional<double>, 3> dims; ///< indexed like kDimensions
    std::optional<double> mean;                ///< mean of the dimension scores
    std::array<Significance, 3> dim_sig;
    Significance mean_sig;
};

namespace detail {

/// 0/1 vectors per system (first-appearance order) and dimension.
struct RatingVectors {
    std::vector<std::string> systems;
    std::map<std::string, std::array<std::vector<double>, 3>> values;
};

inline RatingVectors collect_ratings(const std::vector<HumanRating>& ratings) {
    if (ratings.empty()) throw ReportError("no ratings");
    RatingVectors rv;
    std::set<std::tuple<std::string, std::string, Dimension, std::string>> seen;
    for (const auto& r : ratings) {
        if (!seen.emplace(r.system, r.item_id, r.dimension, r.annotator).second) {
            throw ReportError("duplicate rating for system " + r.system + ", item " + r.item_id + ", " +
                              to_string(r.dimension) + ", annotator " + r.annotator);
        }
        if (!rv.values.contains(r.system)) rv.systems.push_back(r.system);
        rv.values[r.system][static_cast<std::size_t>(r.dimension)].push_back(r.rating ? 1.0 : 0.0);
    }
    return rv;
}

inline std::optional<double> proportion(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline Significance compare(const std::vector<double>& sample, const std::vector<double>& best) {
    Significance s;
    try {
        s.p = welch_t_test(sample, best).p;
        s.testable = true;
        s.star = s.p < 0.05;
    } catch (const ReportError&) {
        s.testable = false;
    }
    return s;
}

} // namespace detail

/// Proportion of positive ratings per (system, dimension); Mean averages the
/// available dimension scores.
inline std::vector<HumanEvalRow> human_eval_scores(const std::vector<HumanRating>& ratings) {
    const auto rv = detail::collect_ratings(ratings);
    std::vector<HumanEvalRow> rows;
    for (const auto& sys : rv.systems) {
        HumanEvalRow row;
        row.system = sys;
        double sum = 0.0;
        int present = 0;
        for (std::size_t d = 0; d < 3; ++d) {
            row.dims[d] = detail::proportion(rv.values.at(sys)[d]);
            if (row.dims[d]) {
                sum += *row.dims[d];
                ++present;
            }
        }
        if (present > 0) row.mean = sum / present;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Scores plus a Welch test of every system against the highest-scoring system
/// on each dimension (first system wins ties). The Mean column compares the
/// pooled ratings of all three dimensions.
inline std::vector<HumanEvalRow> significance_vs_best(const std::vector<HumanRating>& ratings) {
    const auto rv = detail::collect_ratings(ratings);
    auto rows = human_eval_scores(ratings);

    const auto best_of = [&](auto score) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto v = score(rows[i]);
            if (v && (!best || *v > *score(rows[*best]))) best = i;
        }
        return best;
    };

    for (std::size_t d = 0; d < 3; ++d) {
        const auto best = best_of([d](const HumanEvalRow& r) { return r.dims[d]; });
        if (!best) continue;
        const auto& best_vec = rv.values.at(rows[*best].system)[d];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == *best) {
                rows[i].dim_sig[d].is_best = true;
                continue;
            }
            const auto& v = rv.values.at(rows[i].system)[d];
            if (!v.empty()) rows[i].dim_sig[d] = detail::compare(v, best_vec);
        }
    }

    const auto pooled = [&](const std::string& sys) {
        std::vector<double> all;
        for (const auto& v : rv.values.at(sys)) all.insert(all.end(), v.begin(), v.end());
        return all;
    };
    if (const auto best = best_of([](const HumanEvalRow& r) { return r.mean; })) {
        const auto best_vec = pooled(rows[*best].system);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == *best) {
                rows[i].mean_sig.is_best = true;
            } else {
                rows[i].mean_sig = detail::compare(pooled(rows[i].system), best_vec);
            }
        }
    }
    return rows;
}

namespace detail {

inline std::string format_cell(const std::optional<double>& v, const Significance& s) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f%s", *v, s.star ? "*" : "");
    return buf;
}

} // namespace detail

inline std::string render_human_eval_markdown(const std::vector<HumanEvalRow>& rows) {
    std::string out = "| System | Flu | Faith | Simp | Mean |\n|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.system;
        for (std::size_t d = 0; d < 3; ++d) out += " | " + detail::format_cell(r.dims[d], r.dim_sig[d]);
        out += " | " + detail::format_cell(r.mean, r.mean_sig) + " |\n";
    }
    return out;
}

inline nlohmann::json human_eval_to_json(const std::vector<HumanEvalRow>& rows) {
    const auto sig = [](const Significance& s) {
        nlohmann::json j{{"is_best", s.is_best}, {"testable", s.testable}, {"star", s.star}};
        j["p"] = s.testable ? nlohmann::json(s.p) : nlohmann::json(nullptr);
        return j;
    };
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row{{"system", r.system}};
        for (std::size_t d = 0; d < 3; ++d) {
            row[to_string(kDimensions[d])] = {{"score", opt(r.dims[d])}, {"significance", sig(r.dim_sig[d])}};
        }
        row["mean"] = {{"score", opt(r.mean)}, {"significance", sig(r.mean_sig)}};
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace simpeval
