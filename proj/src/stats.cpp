#include "kfp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kfp {

namespace {

double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double xa = a[i], xb = b[j];
        if (xa <= xb) ++i;
        if (xb <= xa) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    return {d, kolmogorov_q(lambda)};
}

double binomial_ci_halfwidth(std::size_t successes, std::size_t n) {
    if (n == 0) return 1.0;
    const double z = 1.96;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    return z / (1.0 + z * z / nn) *
           std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        const double lo = *std::max_element(values.begin(), values.begin() + mid);
        m = 0.5 * (m + lo);
    }
    return m;
}

MedianBand median_band(std::vector<double> values, double z) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    const double half = 0.5 * z * std::sqrt(n);
    const auto clampi = [&](double pos) {
        return std::min(values.size() - 1,
                        static_cast<std::size_t>(std::max(0.0, pos)));
    };
    const std::size_t lo = clampi(0.5 * n - half);
    const std::size_t hi = clampi(0.5 * n + half);
    return {values[lo], values[hi]};
}

}  // namespace kfp
