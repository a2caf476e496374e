#pragma once

#include <cmath>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "simpeval/errors.hpp"

namespace simpeval {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0; ///< unbiased (n - 1)
    std::size_t n = 0;
};

inline SampleMoments moments(std::span<const double> xs) {
    SampleMoments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    if (m.n > 1) {
        for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
        m.variance /= static_cast<double>(m.n - 1);
    }
    return m;
}

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0; ///< two-sided
};

/// Two-sided unequal-variance two-sample t-test.
/// Throws ReportError when either sample has fewer than 2 values or both are constant.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    const auto ma = moments(a);
    const auto mb = moments(b);
    if (ma.n < 2 || mb.n < 2) throw ReportError("t-test needs at least 2 values per sample");
    const double sa = ma.variance / static_cast<double>(ma.n);
    const double sb = mb.variance / static_cast<double>(mb.n);
    const double se2 = sa + sb;
    if (!(se2 > 0.0)) throw ReportError("t-test undefined for two constant samples");

    WelchResult r;
    r.t = (ma.mean - mb.mean) / std::sqrt(se2);
    r.df = se2 * se2 / (sa * sa / static_cast<double>(ma.n - 1) + sb * sb / static_cast<double>(mb.n - 1));
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

} // namespace simpeval
