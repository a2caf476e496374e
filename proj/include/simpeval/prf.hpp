#pragma once

namespace simpeval {

/// Harmonic mean of a precision- and a recall-oriented score; 0 when both are 0.
/// Works on any non-negative scale (the QA overlap scores are on 1-5).
inline double f1_combine(double p, double r) {
    const double s = p + r;
    return s > 0.0 ? 2.0 * p * r / s : 0.0;
}

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static PRF from(double p, double r) { return {p, r, f1_combine(p, r)}; }
    friend bool operator==(const PRF&, const PRF&) = default;
};

} // namespace simpeval
