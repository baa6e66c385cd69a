#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "mppctl/model.hpp"
#include "mppctl/simulate.hpp"

namespace mppctl {

/// Running density L_t recorded at each jump time and at the end time.
struct LikelihoodPath {
    std::vector<double> times;
    std::vector<double> values;
    double terminal = 1.0;
};

/// L_t = exp(int sum_y (1 - r(y,u)) phi(y) dA) * prod_{T_n <= t} r(xi_n, u_{T_n}),
/// evaluated on [traj.start_time, until]. The product is accumulated in log space
/// and a zero factor pins L to 0 from then on.
LikelihoodPath likelihood(const ModelSpec& model, const Policy& policy, const Trajectory& traj,
                          double until = std::numeric_limits<double>::quiet_NaN());

struct NormalizationReport {
    double estimate = 0.0;
    double std_error = 0.0;
};

struct MomentReport {
    double estimate_L2 = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
};

/// Per-mark comparison of controlled jump counts against likelihood-reweighted counts.
struct CompensatorReport {
    std::vector<double> direct;
    std::vector<double> direct_se;
    std::vector<double> reweighted;
    std::vector<double> reweighted_se;
    double total_direct = 0.0;
    double total_direct_se = 0.0;
    double total_reweighted = 0.0;
    double total_reweighted_se = 0.0;
    double z_max = 0.0;
};

/// Monte Carlo estimate of E L_T over reference paths started at (0, x0).
NormalizationReport verify_normalization(const ModelSpec& model, const Policy& policy,
                                         std::size_t n_paths, std::uint64_t seed,
                                         std::size_t x0 = 0);

/// E L_T^2 against the bound exp(beta A_T / 2), beta = 3 + C_r^4.
MomentReport verify_moment_bound(const ModelSpec& model, const Policy& policy,
                                 std::size_t n_paths, std::uint64_t seed, std::size_t x0 = 0);

CompensatorReport empirical_compensator_check(const ModelSpec& model, const Policy& policy,
                                              std::size_t n_paths, std::uint64_t seed,
                                              std::size_t x0 = 0);

}  // namespace mppctl
