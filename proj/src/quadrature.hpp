#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace mppctl::detail {

/// Gauss-Legendre rule on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendre() {
        for (std::size_t i = 0; i < N; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = pk;
                }
                dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    /// Integral of fn over [lo, hi].
    template <typename Fn>
    double integrate(double lo, double hi, Fn&& fn) const {
        const double half = 0.5 * (hi - lo);
        const double mid = 0.5 * (hi + lo);
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += weights[i] * fn(mid + half * nodes[i]);
        return half * s;
    }
};

inline const GaussLegendre<16>& gauss16() {
    static const GaussLegendre<16> rule;
    return rule;
}

/// Exact integral over [0, 1] of min_k of lines through (0, start[k]) and (1, end[k]).
inline double integrate_lower_envelope(std::span<const double> start, std::span<const double> end) {
    const std::size_t n = start.size();
    auto envelope = [&](double th) {
        double m = (1.0 - th) * start[0] + th * end[0];
        for (std::size_t k = 1; k < n; ++k) m = std::min(m, (1.0 - th) * start[k] + th * end[k]);
        return m;
    };
    std::vector<double> breaks{0.0, 1.0};
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d0 = start[a] - start[b];
            const double d1 = end[a] - end[b];
            if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) breaks.push_back(d0 / (d0 - d1));
        }
    }
    std::sort(breaks.begin(), breaks.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double w = breaks[i + 1] - breaks[i];
        if (w > 0.0) s += 0.5 * w * (envelope(breaks[i]) + envelope(breaks[i + 1]));
    }
    return s;
}

}  // namespace mppctl::detail
