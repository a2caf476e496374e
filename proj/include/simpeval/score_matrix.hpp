#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "simpeval/errors.hpp"

namespace simpeval {

/// Row-major M x N grid of entailment scores: rows are input sentences,
/// columns are output sentences. Entries are finite and within [0, 1].
class ScoreMatrix {
public:
    ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (rows_ == 0 || cols_ == 0) throw MetricError("score matrix must be at least 1x1");
        if (values_.size() != rows_ * cols_) throw MetricError("score matrix size mismatch");
        for (double v : values_) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw MetricError("score matrix entry outside [0,1]: " + std::to_string(v));
            }
        }
    }

    ScoreMatrix(std::size_t rows, std::size_t cols, double fill)
        : ScoreMatrix(rows, cols, std::vector<double>(rows * cols, fill)) {}

    static ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty()) throw MetricError("score matrix must be at least 1x1");
        std::vector<double> flat;
        for (const auto& r : rows) {
            if (r.size() != rows.front().size()) throw MetricError("ragged score matrix");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return {rows.size(), rows.front().size(), std::move(flat)};
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    const std::vector<double>& values() const { return values_; }

    ScoreMatrix transpose() const {
        std::vector<double> t(values_.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t[j * rows_ + i] = (*this)(i, j);
        return {cols_, rows_, std::move(t)};
    }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

} // namespace simpeval
