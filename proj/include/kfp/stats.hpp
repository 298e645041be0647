#pragma once

#include <cstddef>
#include <vector>

namespace kfp {

struct KsResult {
    double statistic = 0.0;  // sup |F1 - F2|
    double p_value = 1.0;    // asymptotic Kolmogorov p-value
};

// Two-sample Kolmogorov-Smirnov test; inputs need not be sorted.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Wilson score interval half-width for a binomial fraction at ~95%.
double binomial_ci_halfwidth(std::size_t successes, std::size_t n);

double median(std::vector<double> values);

// 95% order-statistic band [lo, hi] for the median of a sample.
struct MedianBand {
    double lo, hi;
};
MedianBand median_band(std::vector<double> values, double z = 3.0);

}  // namespace kfp
