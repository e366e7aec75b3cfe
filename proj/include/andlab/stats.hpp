#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "andlab/errors.hpp"

namespace andlab {

// 97.5% normal quantile, pinned so intervals are identical across platforms.
inline constexpr double kWilsonZ = 1.959963984540054;

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for a binomial proportion.
inline WilsonInterval wilson95(long long hits, long long n) {
    const double z = kWilsonZ;
    // exact boundary cases; the general formula leaves ~1e-19 fp residue
    if (hits == 0 || hits == n) {
        const double nn = static_cast<double>(n);
        WilsonInterval w;
        if (hits == 0) {
            w.lo = 0.0;
            w.hi = z * z / (nn + z * z);
        } else {
            w.lo = nn / (nn + z * z);
            w.hi = 1.0;
        }
        return w;
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2n = z * z / nn;
    const double denom = 1.0 + z2n;
    const double center = p + z2n / 2.0;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2n / (4.0 * nn));
    WilsonInterval w;
    w.lo = std::max(0.0, (center - half) / denom);
    w.hi = std::min(1.0, (center + half) / denom);
    return w;
}

inline double standard_error(long long hits, long long n) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Two-sided Kolmogorov-Smirnov distance of a sample against Exp(1),
// D = sup_s |F_n(s) - (1 - e^-s)| evaluated at both sides of every jump.
inline double ks_distance_exp1(std::vector<double> sample) {
    if (sample.empty()) throw InsufficientData("empty sample for KS distance");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = 1.0 - std::exp(-sample[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Maximum-likelihood rate of an exponential law: 1 / sample mean.
inline double exp_mle_rate(const std::vector<double>& sample) {
    if (sample.empty()) throw InsufficientData("empty sample for exponential fit");
    double s = 0.0;
    for (double v : sample) s += v;
    return static_cast<double>(sample.size()) / s;
}

struct Histogram {
    std::vector<double> edges;  // size bins + 1
    std::vector<long long> counts;
    long long total = 0;
};

// Equal-width bins spanning [0, max(sample)]; counts sum to the sample size.
inline Histogram histogram(const std::vector<double>& sample, int bins) {
    Histogram h;
    if (sample.empty() || bins < 1) return h;
    double top = *std::max_element(sample.begin(), sample.end());
    if (top <= 0.0) top = 1.0;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        h.edges[static_cast<std::size_t>(i)] = top * static_cast<double>(i) / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : sample) {
        int b = static_cast<int>(std::floor(v / top * bins));
        if (b < 0) b = 0;
        if (b >= bins) b = bins - 1;  // max lands in the last bin
        ++h.counts[static_cast<std::size_t>(b)];
        ++h.total;
    }
    return h;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw InsufficientData("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace andlab
