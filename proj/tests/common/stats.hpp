#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace ncpvi::testing {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov p-value of samples against N(mean, var).
inline double ks_pvalue(std::vector<double> samples, double mean, double var) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    const double sd = std::sqrt(var);
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = normal_cdf((samples[i] - mean) / sd);
        d = std::max(d, std::abs(cdf - (i + 1) / n));
        d = std::max(d, std::abs(cdf - i / n));
    }
    const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace ncpvi::testing
