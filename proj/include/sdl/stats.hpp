// Copyright (c) the sdl authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef SDL_STATS_HPP
#define SDL_STATS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sdl {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("mean_se: need at least two samples");
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= static_cast<double>(v.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("percentile: empty");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1.0 - w) + v[lo + 1] * w;
}

namespace detail {

/// Regularized lower incomplete gamma P(a, x) by series / continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: domain");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // series
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction for Q, Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

} // namespace detail

/// Upper tail p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_pvalue(double stat, double df) {
    return 1.0 - detail::gamma_p(df / 2.0, stat / 2.0);
}

struct ChiSquare {
    double statistic = 0.0;
    double df = 0.0;
    double pvalue = 1.0;
};

/// Pearson chi-square against equal-probability bins.
inline ChiSquare chi_square_uniform(const std::vector<std::size_t>& counts) {
    if (counts.size() < 2) throw std::invalid_argument("chi_square_uniform: need bins");
    std::size_t total = 0;
    for (auto c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    ChiSquare out;
    out.statistic = stat;
    out.df = static_cast<double>(counts.size() - 1);
    out.pvalue = chi_square_pvalue(stat, out.df);
    return out;
}

/// One-dimensional Wasserstein-1 distance of two equal-size samples
/// (mean absolute difference of sorted samples).
inline double wasserstein1_sorted(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("wasserstein1_sorted: size mismatch");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares line through (x_i, y_i).
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: sizes");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return {sxy / sxx, my - sxy / sxx * mx};
}

} // namespace sdl

#endif
