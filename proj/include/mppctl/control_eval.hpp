#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mppctl/model.hpp"
#include "mppctl/simulate.hpp"

namespace mppctl {

enum class CostRoute { direct, reweighted };

std::string route_name(CostRoute route);

struct CostEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    CostRoute route = CostRoute::direct;
};

/// Pathwise cost int_{t0}^T l(X_s, u_s) dA_s + g(X_T); the dA integral is exact.
double path_cost(const ModelSpec& model, const Policy& policy, const Trajectory& traj);

/// Average of path_cost over paths simulated under P_u.
CostEstimate mc_cost_direct(const ModelSpec& model, const Policy& policy, double t0, std::size_t x0,
                            std::size_t n_paths, std::uint64_t seed);

/// Average of L_T * path_cost over reference paths.
CostEstimate mc_cost_reweighted(const ModelSpec& model, const Policy& policy, double t0,
                                std::size_t x0, std::size_t n_paths, std::uint64_t seed);

/// Per-jump cost table c_j(y, u), same layout as ModelSpec::rate_modifier.
using JumpCost = std::vector<double>;

/// Average of sum_n c(T_n, xi_n, u_{T_n}) over paths simulated under P_u.
CostEstimate mc_jump_cost(const ModelSpec& model, const Policy& policy, const JumpCost& c,
                          double t0, std::size_t x0, std::size_t n_paths, std::uint64_t seed);

struct BruteForceResult {
    ModelSpec fine_model;
    std::size_t coarse_cells = 0;
    std::size_t n_policies = 0;
    std::vector<double> costs;          // [policy][start_state]: value at t = 0
    std::vector<double> min_cost;       // per start state
    std::vector<std::size_t> argmin;    // policy id per start state

    double cost(std::size_t policy, std::size_t x) const { return costs[policy * fine_model.n_states() + x]; }
};

/// Model on a grid containing the coarse nodes k T / coarse_cells, refined to at least
/// `min_cells` cells.
ModelSpec oracle_grid(const ModelSpec& model, std::size_t coarse_cells, std::size_t min_cells = 1000);

/// Feedback policy with id `id` (base n_U digits over (coarse cell, state), lowest first),
/// expanded onto the cells of `fine`.
Policy coarse_policy(const ModelSpec& fine, std::size_t coarse_cells, std::size_t id);

/// Id of the coarse policy taking, on each coarse cell and state, the action used most
/// often by `policy` over that coarse cell. Ties go to the lowest action.
std::size_t restrict_policy(const ModelSpec& fine, const Policy& policy, std::size_t coarse_cells);

/// Exhaustive search over policies piecewise constant on coarse_cells equal cells,
/// each valued by policy_value on the fine grid. Throws TooManyPolicies when
/// n_U^(n_K * coarse_cells) > 1e6.
BruteForceResult brute_force_value(const ModelSpec& model, std::size_t coarse_cells);

/// Running cost l(x,u) * sum_y r(y,u) phi(y); C_l scaled by C_r.
ModelSpec transform_dAu_cost(const ModelSpec& model);

/// Running cost sum_y c(y,u) r(y,u) phi(y), terminal cost 0.
ModelSpec transform_jump_cost(const ModelSpec& model, const JumpCost& c);

}  // namespace mppctl
