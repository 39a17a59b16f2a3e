// Scalar statistics: correlation, order statistics, summary stats.
#pragma once

#include "matrix.hpp"

namespace dc {

// Sample Pearson correlation coefficient in [-1, 1].
// Requires equal lengths >= 2 and non-constant inputs.
double pearson_correlation(const Vector& a, const Vector& b);

// k-th largest element, ties counted with multiplicity; 1 <= k <= len.
// kth_largest(v, 1) is the maximum, kth_largest(v, len) the minimum.
double kth_largest(const Vector& values, std::size_t k);

double mean(const Vector& v);

struct SummaryStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SummaryStats summary_stats(const Vector& v);

}  // namespace dc
