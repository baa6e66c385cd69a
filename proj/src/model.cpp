#include "mppctl/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mppctl/errors.hpp"

namespace mppctl {

namespace {

constexpr double kDistTolerance = 1e-12;

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

}  // namespace

ModelSpec ModelSpec::uniform(std::vector<std::string> states, std::vector<std::string> actions,
                             double horizon, std::size_t cells) {
    ModelSpec m;
    m.states = std::move(states);
    m.actions = std::move(actions);
    m.horizon = horizon;
    m.time_grid.resize(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j)
        m.time_grid[j] = horizon * static_cast<double>(j) / static_cast<double>(cells);
    m.time_grid[cells] = horizon;
    const std::size_t nk = m.n_states();
    const std::size_t nu = m.n_actions();
    m.base_rate.assign(cells, 0.0);
    m.mark_dist.assign(cells * nk, 0.0);
    m.rate_modifier.assign(cells * nk * nu, 1.0);
    m.running_cost.assign(cells * nk * nu, 0.0);
    m.terminal_cost.assign(nk, 0.0);
    return m;
}

ModelSpec validate_model(ModelSpec raw) {
    const std::size_t nk = raw.n_states();
    const std::size_t nu = raw.n_actions();
    if (nk == 0) throw ShapeMismatch("model has no states");
    if (nu == 0) throw ShapeMismatch("model has no actions");
    if (!(raw.horizon > 0.0) || !std::isfinite(raw.horizon))
        throw BadGrid(concat("horizon must be positive and finite, got ", raw.horizon));
    if (raw.time_grid.size() < 2) throw BadGrid("time grid needs at least two nodes");
    const std::size_t m = raw.time_grid.size() - 1;
    if (raw.time_grid.front() != 0.0) throw BadGrid("time grid must start at 0");
    if (raw.time_grid.back() != raw.horizon)
        throw BadGrid(concat("time grid ends at ", raw.time_grid.back(), " but horizon is ",
                             raw.horizon));
    for (std::size_t j = 0; j < m; ++j) {
        if (!(raw.time_grid[j] < raw.time_grid[j + 1]))
            throw BadGrid(concat("time grid not strictly increasing at node ", j + 1));
    }

    if (raw.base_rate.size() != m) throw ShapeMismatch("base_rate needs one entry per cell");
    if (raw.mark_dist.size() != m * nk) throw ShapeMismatch("mark_dist has wrong shape");
    if (raw.rate_modifier.size() != m * nk * nu)
        throw ShapeMismatch("rate_modifier has wrong shape");
    if (raw.running_cost.size() != m * nk * nu)
        throw ShapeMismatch("running_cost has wrong shape");
    if (raw.terminal_cost.size() != nk) throw ShapeMismatch("terminal_cost has wrong shape");

    if (!(raw.C_r > 1.0)) throw BoundViolation(concat("C_r must exceed 1, got ", raw.C_r));
    if (!(raw.C_l > 0.0)) throw BoundViolation(concat("C_l must be positive, got ", raw.C_l));

    double total_mass = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double a = raw.base_rate[j];
        if (!(a >= 0.0) || !std::isfinite(a))
            throw BoundViolation(concat("base rate of cell ", j, " is not a finite nonnegative number"));
        total_mass += raw.cell_mass(j);

        double sum = 0.0;
        for (std::size_t y = 0; y < nk; ++y) {
            const double p = raw.phi(j, y);
            if (!(p >= 0.0) || !std::isfinite(p))
                throw MalformedDistribution(concat("mark_dist[", j, "][", y, "] = ", p));
            sum += p;
        }
        if (std::abs(sum - 1.0) > kDistTolerance)
            throw MalformedDistribution(concat("mark_dist row ", j, " sums to ", sum));

        for (std::size_t y = 0; y < nk; ++y) {
            for (std::size_t u = 0; u < nu; ++u) {
                const double rv = raw.r(j, y, u);
                if (!(rv >= 0.0 && rv <= raw.C_r))
                    throw BoundViolation(concat("rate_modifier[", j, "][", y, "][", u, "] = ", rv,
                                                " outside [0, C_r]"));
                const double lv = raw.l(j, y, u);
                if (!(std::abs(lv) <= raw.C_l))
                    throw BoundViolation(concat("running_cost[", j, "][", y, "][", u, "] = ", lv,
                                                " exceeds C_l"));
            }
        }
    }
    if (!std::isfinite(total_mass)) throw BoundViolation("A_T is not finite");
    for (std::size_t x = 0; x < nk; ++x)
        if (!std::isfinite(raw.terminal_cost[x]))
            throw BoundViolation(concat("terminal_cost[", x, "] is not finite"));
    return raw;
}

LipschitzConstants lipschitz_constants(const ModelSpec& model) {
    LipschitzConstants out;
    for (double rv : model.rate_modifier) out.L = std::max(out.L, std::abs(rv - 1.0));
    return out;
}

double hjb_weight_criterion(double L, double beta) {
    const auto c = contraction_constants(L, beta);
    return c.total();
}

ContractionConstants contraction_constants(double L, double beta) {
    const double k = 2.0 * L * L + 3.0;
    return {2.0 * k / (beta - 1.0), 8.0 * k / beta * (1.0 + 1.0 / beta)};
}

BetaReport beta_thresholds(const ModelSpec& model) {
    const auto lc = lipschitz_constants(model);
    BetaReport rep;
    rep.beta_bsde = lc.L * lc.L + 2.0 * lc.L_prime + 1.0;
    rep.beta_girsanov = 3.0 + std::pow(model.C_r, 4);

    constexpr double kUpper = 1e6;
    if (!(hjb_weight_criterion(lc.L, kUpper) < 1.0))
        throw NoRoot("no admissible HJB weight below 1e6");
    // Criterion is decreasing on (1, inf): keep lo failing and hi passing.
    double lo = 1.0;
    double hi = kUpper;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (hjb_weight_criterion(lc.L, mid) < 1.0)
            hi = mid;
        else
            lo = mid;
    }
    rep.beta_hjb = hi;
    return rep;
}

std::vector<double> compensator_at_nodes(const ModelSpec& model) {
    std::vector<double> a(model.time_grid.size(), 0.0);
    for (std::size_t j = 0; j < model.n_cells(); ++j) a[j + 1] = a[j] + model.cell_mass(j);
    return a;
}

std::size_t cell_index(const ModelSpec& model, double t) {
    const auto& grid = model.time_grid;
    if (t >= grid.back()) return model.n_cells() - 1;
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 0;
    return static_cast<std::size_t>(it - grid.begin()) - 1;
}

double cumulative_A(const ModelSpec& model, double t) {
    if (!(t >= 0.0 && t <= model.horizon))
        throw OutOfHorizon("time outside [0, T]");
    double acc = 0.0;
    for (std::size_t j = 0; j < model.n_cells(); ++j) {
        const double lo = model.cell_start(j);
        const double hi = model.cell_end(j);
        if (t >= hi) {
            acc += model.cell_mass(j);
        } else {
            if (t > lo) acc += model.base_rate[j] * (t - lo);
            break;
        }
    }
    return acc;
}

ModelSpec refine_model(const ModelSpec& model, std::size_t factor) {
    if (factor <= 1) return model;
    const std::size_t nk = model.n_states();
    const std::size_t nu = model.n_actions();
    const std::size_t m = model.n_cells();
    ModelSpec out = model;
    out.time_grid.assign(m * factor + 1, 0.0);
    out.base_rate.assign(m * factor, 0.0);
    out.mark_dist.assign(m * factor * nk, 0.0);
    out.rate_modifier.assign(m * factor * nk * nu, 0.0);
    out.running_cost.assign(m * factor * nk * nu, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double lo = model.cell_start(j);
        const double width = model.cell_end(j) - lo;
        for (std::size_t s = 0; s < factor; ++s) {
            const std::size_t k = j * factor + s;
            out.time_grid[k] = lo + width * static_cast<double>(s) / static_cast<double>(factor);
            out.base_rate[k] = model.base_rate[j];
            for (std::size_t y = 0; y < nk; ++y) {
                out.phi(k, y) = model.phi(j, y);
                for (std::size_t u = 0; u < nu; ++u) {
                    out.r(k, y, u) = model.r(j, y, u);
                    out.l(k, y, u) = model.l(j, y, u);
                }
            }
        }
    }
    out.time_grid.back() = model.horizon;
    return out;
}

}  // namespace mppctl
