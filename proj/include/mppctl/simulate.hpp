#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mppctl/model.hpp"

namespace mppctl {

struct Jump {
    double time = 0.0;
    std::size_t mark = 0;
};

/// One realized path: start (t0, x0) and the jumps (T_n, xi_n) in (t0, T].
struct Trajectory {
    double start_time = 0.0;
    std::size_t start_state = 0;
    std::vector<Jump> jumps;
    std::uint64_t stream = 0;
};

/// Feedback control u_j(x), one action per (cell, state) of the model grid.
class Policy {
public:
    Policy() = default;
    Policy(std::size_t cells, std::size_t states, std::size_t action = 0)
        : cells_(cells), states_(states), table_(cells * states, action) {}

    static Policy constant(const ModelSpec& model, std::size_t action) {
        return Policy(model.n_cells(), model.n_states(), action);
    }

    std::size_t operator()(std::size_t cell, std::size_t x) const { return table_[cell * states_ + x]; }
    std::size_t& at(std::size_t cell, std::size_t x) { return table_[cell * states_ + x]; }

    std::size_t n_cells() const { return cells_; }
    std::size_t n_states() const { return states_; }
    const std::vector<std::size_t>& table() const { return table_; }

    bool operator==(const Policy&) const = default;

private:
    std::size_t cells_ = 0;
    std::size_t states_ = 0;
    std::vector<std::size_t> table_;
};

/// Throws ShapeMismatch unless the policy matches the model grid and action set.
void check_policy(const ModelSpec& model, const Policy& policy);

/// Path under the reference measure: jump times by exact inversion of A, marks from phi.
Trajectory simulate_reference(const ModelSpec& model, double t0, std::size_t x0,
                              std::uint64_t stream, std::uint64_t seed = 0);

/// Path under the controlled measure P_u, by thinning a homogeneous stream at
/// rate C_r * max_j a_j. Each candidate consumes three uniforms in fixed order:
/// inter-arrival, acceptance, mark.
Trajectory simulate_controlled(const ModelSpec& model, const Policy& policy, double t0,
                               std::size_t x0, std::uint64_t stream, std::uint64_t seed = 0);

/// X_t with the right-continuous convention. Throws OutOfRange if t < start_time.
std::size_t state_at(const Trajectory& traj, double t);

/// X_{t-}: the state before any jump at exactly t.
std::size_t state_before(const Trajectory& traj, double t);

/// The family member X^{t,x}: starts from x at t, then follows the jumps of `traj` after t.
Trajectory restart(const Trajectory& traj, double t, std::size_t x);

/// One piece of [t0, T] on which the cell and the pre-jump state are fixed.
/// `jump_at_end` is set when a jump of the path occurs exactly at `end`.
struct PathPiece {
    double begin = 0.0;
    double end = 0.0;
    std::size_t cell = 0;
    std::size_t state = 0;
    double mass = 0.0;  // A_end - A_begin
    const Jump* jump_at_end = nullptr;
};

/// Splits the path at grid nodes and jump times, in time order.
std::vector<PathPiece> path_pieces(const ModelSpec& model, const Trajectory& traj);

}  // namespace mppctl
