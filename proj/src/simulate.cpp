#include "mppctl/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mppctl/errors.hpp"
#include "mppctl/rng.hpp"

namespace mppctl {

namespace {

/// Index of the category selected by uniform `u` among nonnegative weights.
std::size_t draw_categorical(const double* weights, std::size_t n, double u) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += weights[i];
    const double target = u * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] <= 0.0) continue;
        last_positive = i;
        acc += weights[i];
        if (target < acc) return i;
    }
    return last_positive;
}

double strictly_after(double t, double previous) {
    return t > previous ? t : std::nextafter(previous, std::numeric_limits<double>::infinity());
}

void check_start(const ModelSpec& model, double t0, std::size_t x0) {
    if (!(t0 >= 0.0 && t0 <= model.horizon)) throw OutOfHorizon("start time outside [0, T]");
    if (x0 >= model.n_states()) throw OutOfRange("start state out of range");
}

}  // namespace

void check_policy(const ModelSpec& model, const Policy& policy) {
    if (policy.n_cells() != model.n_cells() || policy.n_states() != model.n_states())
        throw ShapeMismatch("policy shape does not match the model grid");
    for (std::size_t a : policy.table())
        if (a >= model.n_actions()) throw ShapeMismatch("policy refers to an unknown action");
}

Trajectory simulate_reference(const ModelSpec& model, double t0, std::size_t x0,
                              std::uint64_t stream, std::uint64_t seed) {
    check_start(model, t0, x0);
    Trajectory traj{t0, x0, {}, stream};
    StreamRng rng(seed, stream);
    const std::size_t nk = model.n_states();

    std::size_t cell = cell_index(model, t0);
    // A measured from the start of `cell`.
    double target = model.base_rate[cell] * (t0 - model.cell_start(cell));
    double last_time = t0;
    for (;;) {
        target += rng.exponential();
        const double mark_u = rng.uniform();
        while (cell < model.n_cells() && target > model.cell_mass(cell)) {
            target -= model.cell_mass(cell);
            ++cell;
        }
        if (cell >= model.n_cells()) break;
        const double a = model.base_rate[cell];
        double t = model.cell_start(cell) + target / a;
        t = std::min(t, model.cell_end(cell));
        t = strictly_after(t, last_time);
        if (t > model.horizon) break;
        const std::size_t mark = draw_categorical(&model.mark_dist[cell * nk], nk, mark_u);
        traj.jumps.push_back({t, mark});
        last_time = t;
    }
    return traj;
}

Trajectory simulate_controlled(const ModelSpec& model, const Policy& policy, double t0,
                               std::size_t x0, std::uint64_t stream, std::uint64_t seed) {
    check_start(model, t0, x0);
    check_policy(model, policy);
    Trajectory traj{t0, x0, {}, stream};
    StreamRng rng(seed, stream);
    const std::size_t nk = model.n_states();

    const double max_rate = *std::max_element(model.base_rate.begin(), model.base_rate.end());
    const double envelope = model.C_r * max_rate;
    if (!(envelope > 0.0)) return traj;

    std::vector<double> weights(nk);
    std::size_t state = x0;
    double t = t0;
    for (;;) {
        const double gap = rng.exponential() / envelope;
        const double accept_u = rng.uniform();
        const double mark_u = rng.uniform();
        t += gap;
        if (t > model.horizon) break;
        const std::size_t cell = cell_index(model, t);
        const std::size_t action = policy(cell, state);
        double total = 0.0;
        for (std::size_t y = 0; y < nk; ++y) {
            weights[y] = model.r(cell, y, action) * model.phi(cell, y);
            total += weights[y];
        }
        const double intensity = model.base_rate[cell] * total;
        if (accept_u * envelope < intensity) {
            const double jt = traj.jumps.empty() ? strictly_after(t, t0)
                                                 : strictly_after(t, traj.jumps.back().time);
            state = draw_categorical(weights.data(), nk, mark_u);
            traj.jumps.push_back({jt, state});
        }
    }
    return traj;
}

std::size_t state_at(const Trajectory& traj, double t) {
    if (t < traj.start_time) throw OutOfRange("query time precedes trajectory start");
    auto it = std::upper_bound(traj.jumps.begin(), traj.jumps.end(), t,
                               [](double v, const Jump& j) { return v < j.time; });
    if (it == traj.jumps.begin()) return traj.start_state;
    return std::prev(it)->mark;
}

std::size_t state_before(const Trajectory& traj, double t) {
    if (t < traj.start_time) throw OutOfRange("query time precedes trajectory start");
    auto it = std::lower_bound(traj.jumps.begin(), traj.jumps.end(), t,
                               [](const Jump& j, double v) { return j.time < v; });
    if (it == traj.jumps.begin()) return traj.start_state;
    return std::prev(it)->mark;
}

Trajectory restart(const Trajectory& traj, double t, std::size_t x) {
    Trajectory out{t, x, {}, traj.stream};
    for (const auto& j : traj.jumps)
        if (j.time > t) out.jumps.push_back(j);
    return out;
}

std::vector<PathPiece> path_pieces(const ModelSpec& model, const Trajectory& traj) {
    std::vector<PathPiece> pieces;
    pieces.reserve(model.n_cells() + traj.jumps.size());
    std::size_t cell = cell_index(model, traj.start_time);
    std::size_t state = traj.start_state;
    double now = traj.start_time;
    auto jump = traj.jumps.begin();
    while (now < model.horizon || (jump != traj.jumps.end())) {
        double node = model.cell_end(cell);
        const bool jump_first = jump != traj.jumps.end() && jump->time <= node;
        const double end = jump_first ? jump->time : node;
        PathPiece p;
        p.begin = now;
        p.end = end;
        p.cell = cell;
        p.state = state;
        p.mass = model.base_rate[cell] * (end - now);
        if (jump_first) {
            p.jump_at_end = &*jump;
            state = jump->mark;
            ++jump;
        }
        pieces.push_back(p);
        now = end;
        if (now >= node) {
            if (cell + 1 >= model.n_cells()) {
                // Jumps at exactly T were already attached above.
                break;
            }
            ++cell;
        }
    }
    return pieces;
}

}  // namespace mppctl
