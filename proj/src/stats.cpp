#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dc {

double mean(const Vector& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty vector");
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double pearson_correlation(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("pearson_correlation: length mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("pearson_correlation: need at least 2 elements");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw std::invalid_argument("pearson_correlation: degenerate vector (zero variance)");
    }
    double r = sab / std::sqrt(saa * sbb);
    // Rounding can push |r| a hair past 1.
    return std::clamp(r, -1.0, 1.0);
}

double kth_largest(const Vector& values, std::size_t k) {
    if (k < 1 || k > values.size()) {
        throw std::invalid_argument("kth_largest: k=" + std::to_string(k) +
                                    " out of range for length " +
                                    std::to_string(values.size()));
    }
    Vector tmp(values);
    std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end(), std::greater<double>());
    return tmp[k - 1];
}

SummaryStats summary_stats(const Vector& v) {
    if (v.empty()) throw std::invalid_argument("summary_stats: empty vector");
    SummaryStats s;
    s.mean = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.stddev = v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
    Vector tmp(v);
    std::sort(tmp.begin(), tmp.end());
    const std::size_t n = tmp.size();
    s.median = (n % 2 == 1) ? tmp[n / 2] : 0.5 * (tmp[n / 2 - 1] + tmp[n / 2]);
    s.min = tmp.front();
    s.max = tmp.back();
    return s;
}

}  // namespace dc
