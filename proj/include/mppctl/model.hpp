#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mppctl {

/// Problem data for a controlled marked point process on a finite mark space.
///
/// All time-dependent data are piecewise constant on the cells
/// [t_j, t_{j+1}) of `time_grid`. Tables are stored flat in row-major order:
///   mark_dist      [cell][y]
///   rate_modifier  [cell][y][u]
///   running_cost   [cell][x][u]
struct ModelSpec {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    double horizon = 1.0;
    std::vector<double> time_grid;
    std::vector<double> base_rate;
    std::vector<double> mark_dist;
    std::vector<double> rate_modifier;
    std::vector<double> running_cost;
    std::vector<double> terminal_cost;
    double C_r = 2.0;
    double C_l = 1.0;

    std::size_t n_states() const { return states.size(); }
    std::size_t n_actions() const { return actions.size(); }
    std::size_t n_cells() const { return base_rate.size(); }

    double phi(std::size_t cell, std::size_t y) const { return mark_dist[cell * n_states() + y]; }
    double& phi(std::size_t cell, std::size_t y) { return mark_dist[cell * n_states() + y]; }

    double r(std::size_t cell, std::size_t y, std::size_t u) const {
        return rate_modifier[(cell * n_states() + y) * n_actions() + u];
    }
    double& r(std::size_t cell, std::size_t y, std::size_t u) {
        return rate_modifier[(cell * n_states() + y) * n_actions() + u];
    }

    double l(std::size_t cell, std::size_t x, std::size_t u) const {
        return running_cost[(cell * n_states() + x) * n_actions() + u];
    }
    double& l(std::size_t cell, std::size_t x, std::size_t u) {
        return running_cost[(cell * n_states() + x) * n_actions() + u];
    }

    double g(std::size_t x) const { return terminal_cost[x]; }

    double cell_start(std::size_t cell) const { return time_grid[cell]; }
    double cell_end(std::size_t cell) const { return time_grid[cell + 1]; }
    /// Compensator mass a_j (t_{j+1} - t_j) of one cell.
    double cell_mass(std::size_t cell) const {
        return base_rate[cell] * (time_grid[cell + 1] - time_grid[cell]);
    }

    /// Allocates zeroed tables for the given sizes on a uniform grid.
    static ModelSpec uniform(std::vector<std::string> states, std::vector<std::string> actions,
                             double horizon, std::size_t cells);
};

struct LipschitzConstants {
    double L = 0.0;
    double L_prime = 0.0;
};

struct BetaReport {
    double beta_bsde = 0.0;
    double beta_hjb = 0.0;
    double beta_girsanov = 0.0;
};

/// Checks every structural invariant and the declared bounds; returns the model unchanged.
/// Throws ShapeMismatch, BadGrid, MalformedDistribution or BoundViolation.
ModelSpec validate_model(ModelSpec raw);

LipschitzConstants lipschitz_constants(const ModelSpec& model);

/// Left side of the strict inequality that defines the minimal HJB weight:
/// 2(2L^2+3)/(beta-1) + 8(2L^2+3)/beta * (1 + 1/beta).
double hjb_weight_criterion(double L, double beta);

/// The two contraction constants c1 = 2(2L^2+3)/(beta-1), c2 = 8(2L^2+3)/beta (1+1/beta).
struct ContractionConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double total() const { return c1 + c2; }
};
ContractionConstants contraction_constants(double L, double beta);

BetaReport beta_thresholds(const ModelSpec& model);

/// A_t = int_0^t a(s) ds, exact for the piecewise constant rate. Throws OutOfHorizon.
double cumulative_A(const ModelSpec& model, double t);

/// A at every grid node t_0..t_M.
std::vector<double> compensator_at_nodes(const ModelSpec& model);

/// Index j of the cell [t_j, t_{j+1}) holding t; t = T maps to the last cell.
std::size_t cell_index(const ModelSpec& model, double t);

/// Splits every cell into `factor` equal sub-cells carrying the same data.
ModelSpec refine_model(const ModelSpec& model, std::size_t factor);

}  // namespace mppctl
