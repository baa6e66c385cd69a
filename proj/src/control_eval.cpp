#include "mppctl/control_eval.hpp"

#include <algorithm>
#include <cmath>

#include "mppctl/errors.hpp"
#include "mppctl/girsanov.hpp"
#include "mppctl/hjb.hpp"
#include "mppctl/parallel.hpp"
#include "mppctl/rng.hpp"
#include "mppctl/stats.hpp"

namespace mppctl {

std::string route_name(CostRoute route) {
    return route == CostRoute::direct ? "direct" : "reweighted";
}

double path_cost(const ModelSpec& model, const Policy& policy, const Trajectory& traj) {
    // Pieces are merged while cell and running cost stay the same, so paths that differ
    // only in cost-neutral jumps give bit-identical integrals.
    double cost = 0.0;
    std::size_t state = traj.start_state;
    std::size_t seg_cell = model.n_cells();
    double seg_begin = 0.0, seg_end = 0.0, seg_l = 0.0;
    auto flush = [&] {
        if (seg_cell < model.n_cells()) cost += seg_l * model.base_rate[seg_cell] * (seg_end - seg_begin);
    };
    for (const auto& piece : path_pieces(model, traj)) {
        const double l = model.l(piece.cell, piece.state, policy(piece.cell, piece.state));
        if (piece.cell != seg_cell || l != seg_l) {
            flush();
            seg_cell = piece.cell;
            seg_begin = piece.begin;
            seg_l = l;
        }
        seg_end = piece.end;
        if (piece.jump_at_end) state = piece.jump_at_end->mark;
    }
    flush();
    return cost + model.g(state);
}

namespace {

CostEstimate finish(std::vector<double>& samples, CostRoute route) {
    const auto est = summarize(samples);
    return {est.mean, est.std_error, samples.size(), route};
}

void check_start(const ModelSpec& model, double t0, std::size_t x0) {
    if (x0 >= model.n_states()) throw OutOfRange("start state out of range");
    if (!(t0 >= 0.0 && t0 <= model.horizon)) throw OutOfHorizon("start time outside [0, T]");
}

}  // namespace

CostEstimate mc_cost_direct(const ModelSpec& model, const Policy& policy, double t0, std::size_t x0,
                            std::size_t n_paths, std::uint64_t seed) {
    check_policy(model, policy);
    check_start(model, t0, x0);
    const std::uint64_t s = derive_seed(seed, 1);
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        samples[i] = path_cost(model, policy, simulate_controlled(model, policy, t0, x0, i, s));
    });
    return finish(samples, CostRoute::direct);
}

CostEstimate mc_cost_reweighted(const ModelSpec& model, const Policy& policy, double t0,
                                std::size_t x0, std::size_t n_paths, std::uint64_t seed) {
    check_policy(model, policy);
    check_start(model, t0, x0);
    const std::uint64_t s = derive_seed(seed, 2);
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto traj = simulate_reference(model, t0, x0, i, s);
        const double l = likelihood(model, policy, traj).terminal;
        samples[i] = l == 0.0 ? 0.0 : l * path_cost(model, policy, traj);
    });
    return finish(samples, CostRoute::reweighted);
}

CostEstimate mc_jump_cost(const ModelSpec& model, const Policy& policy, const JumpCost& c,
                          double t0, std::size_t x0, std::size_t n_paths, std::uint64_t seed) {
    check_policy(model, policy);
    check_start(model, t0, x0);
    if (c.size() != model.rate_modifier.size()) throw ShapeMismatch("jump cost table has wrong size");
    const std::size_t nk = model.n_states();
    const std::size_t nu = model.n_actions();
    const std::uint64_t s = derive_seed(seed, 1);
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto traj = simulate_controlled(model, policy, t0, x0, i, s);
        double total = 0.0;
        std::size_t state = x0;
        for (const auto& jump : traj.jumps) {
            const std::size_t j = cell_index(model, jump.time);
            total += c[(j * nk + jump.mark) * nu + policy(j, state)];
            state = jump.mark;
        }
        samples[i] = total;
    });
    return finish(samples, CostRoute::direct);
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

ModelSpec oracle_grid(const ModelSpec& model, std::size_t coarse_cells, std::size_t min_cells) {
    if (coarse_cells == 0) throw OutOfRange("coarse_cells must be positive");
    std::vector<double> nodes = model.time_grid;
    for (std::size_t k = 1; k < coarse_cells; ++k)
        nodes.push_back(model.horizon * static_cast<double>(k) / static_cast<double>(coarse_cells));
    std::sort(nodes.begin(), nodes.end());
    const double eps = 1e-12 * std::max(1.0, model.horizon);
    std::vector<double> merged;
    for (double t : nodes)
        if (merged.empty() || t - merged.back() > eps) merged.push_back(t);
    merged.back() = model.horizon;

    const std::size_t nk = model.n_states();
    const std::size_t nu = model.n_actions();
    ModelSpec out = model;
    out.time_grid = merged;
    const std::size_t m = merged.size() - 1;
    out.base_rate.assign(m, 0.0);
    out.mark_dist.assign(m * nk, 0.0);
    out.rate_modifier.assign(m * nk * nu, 0.0);
    out.running_cost.assign(m * nk * nu, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t src = cell_index(model, 0.5 * (merged[j] + merged[j + 1]));
        out.base_rate[j] = model.base_rate[src];
        for (std::size_t y = 0; y < nk; ++y) {
            out.phi(j, y) = model.phi(src, y);
            for (std::size_t u = 0; u < nu; ++u) {
                out.r(j, y, u) = model.r(src, y, u);
                out.l(j, y, u) = model.l(src, y, u);
            }
        }
    }
    const std::size_t factor = m >= min_cells ? 1 : (min_cells + m - 1) / m;
    return refine_model(out, factor);
}

namespace {

std::size_t coarse_of(const ModelSpec& fine, std::size_t cell, std::size_t coarse_cells) {
    const double mid = 0.5 * (fine.cell_start(cell) + fine.cell_end(cell));
    const auto c = static_cast<std::size_t>(mid / fine.horizon * static_cast<double>(coarse_cells));
    return std::min(c, coarse_cells - 1);
}

}  // namespace

Policy coarse_policy(const ModelSpec& fine, std::size_t coarse_cells, std::size_t id) {
    const std::size_t nk = fine.n_states();
    const std::size_t nu = fine.n_actions();
    std::vector<std::size_t> digits(coarse_cells * nk);
    for (auto& d : digits) {
        d = id % nu;
        id /= nu;
    }
    Policy p(fine.n_cells(), nk);
    for (std::size_t j = 0; j < fine.n_cells(); ++j) {
        const std::size_t c = coarse_of(fine, j, coarse_cells);
        for (std::size_t x = 0; x < nk; ++x) p.at(j, x) = digits[c * nk + x];
    }
    return p;
}

std::size_t restrict_policy(const ModelSpec& fine, const Policy& policy, std::size_t coarse_cells) {
    check_policy(fine, policy);
    const std::size_t nk = fine.n_states();
    const std::size_t nu = fine.n_actions();
    std::vector<std::size_t> votes(coarse_cells * nk * nu, 0);
    for (std::size_t j = 0; j < fine.n_cells(); ++j) {
        const std::size_t c = coarse_of(fine, j, coarse_cells);
        for (std::size_t x = 0; x < nk; ++x) ++votes[(c * nk + x) * nu + policy(j, x)];
    }
    std::size_t id = 0;
    for (std::size_t k = coarse_cells * nk; k-- > 0;) {
        const auto* row = &votes[k * nu];
        const auto best = static_cast<std::size_t>(std::max_element(row, row + nu) - row);
        id = id * nu + best;
    }
    return id;
}

BruteForceResult brute_force_value(const ModelSpec& model, std::size_t coarse_cells) {
    if (coarse_cells == 0) throw OutOfRange("coarse_cells must be positive");
    const std::size_t nk = model.n_states();
    const std::size_t nu = model.n_actions();
    const double limit = 1e6;
    double count = 1.0;
    for (std::size_t k = 0; k < nk * coarse_cells; ++k) {
        count *= static_cast<double>(nu);
        if (count > limit) throw TooManyPolicies("policy enumeration exceeds 1e6 policies");
    }

    BruteForceResult res;
    res.fine_model = oracle_grid(model, coarse_cells);
    res.coarse_cells = coarse_cells;
    res.n_policies = static_cast<std::size_t>(count);
    res.costs.assign(res.n_policies * nk, 0.0);
    parallel_for(res.n_policies, [&](std::size_t id) {
        const auto v = policy_value(res.fine_model, coarse_policy(res.fine_model, coarse_cells, id));
        for (std::size_t x = 0; x < nk; ++x) res.costs[id * nk + x] = v(0, x);
    });
    res.min_cost.assign(nk, 0.0);
    res.argmin.assign(nk, 0);
    for (std::size_t x = 0; x < nk; ++x) {
        res.min_cost[x] = res.costs[x];
        for (std::size_t id = 1; id < res.n_policies; ++id) {
            if (res.cost(id, x) < res.min_cost[x]) {
                res.min_cost[x] = res.cost(id, x);
                res.argmin[x] = id;
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Cost transforms
// ---------------------------------------------------------------------------

ModelSpec transform_dAu_cost(const ModelSpec& model) {
    ModelSpec out = model;
    for (std::size_t j = 0; j < model.n_cells(); ++j)
        for (std::size_t u = 0; u < model.n_actions(); ++u) {
            double tilt = 0.0;
            for (std::size_t y = 0; y < model.n_states(); ++y) tilt += model.r(j, y, u) * model.phi(j, y);
            for (std::size_t x = 0; x < model.n_states(); ++x) out.l(j, x, u) = model.l(j, x, u) * tilt;
        }
    out.C_l = model.C_l * model.C_r;
    return out;
}

ModelSpec transform_jump_cost(const ModelSpec& model, const JumpCost& c) {
    if (c.size() != model.rate_modifier.size()) throw ShapeMismatch("jump cost table has wrong size");
    double bound = 0.0;
    for (double v : c) {
        if (!std::isfinite(v)) throw BoundViolation("jump cost must be finite");
        bound = std::max(bound, std::abs(v));
    }
    ModelSpec out = model;
    const std::size_t nk = model.n_states();
    const std::size_t nu = model.n_actions();
    for (std::size_t j = 0; j < model.n_cells(); ++j)
        for (std::size_t u = 0; u < nu; ++u) {
            double cost = 0.0;
            for (std::size_t y = 0; y < nk; ++y)
                cost += c[(j * nk + y) * nu + u] * model.r(j, y, u) * model.phi(j, y);
            for (std::size_t x = 0; x < nk; ++x) out.l(j, x, u) = cost;
        }
    std::fill(out.terminal_cost.begin(), out.terminal_cost.end(), 0.0);
    if (bound > 0.0) out.C_l = bound * model.C_r;
    return out;
}

}  // namespace mppctl
