#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace mppctl {

/// Sample mean with its standard error.
struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

/// Welford accumulation in index order; identical samples give a zero error exactly.
inline MeanEstimate summarize(std::span<const double> samples) {
    MeanEstimate out;
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double x : samples) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    out.mean = mean;
    out.count = k;
    if (k > 1) out.std_error = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
    return out;
}

}  // namespace mppctl
