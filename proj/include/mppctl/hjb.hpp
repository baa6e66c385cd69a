#pragma once

#include <cstddef>
#include <vector>

#include "mppctl/model.hpp"
#include "mppctl/simulate.hpp"

namespace mppctl {

/// v(t_k, x) at the nodes of a time grid, read as piecewise linear in t.
class ValueField {
public:
    ValueField() = default;
    ValueField(std::vector<double> times, std::size_t states)
        : times_(std::move(times)), states_(states), values_(times_.size() * states, 0.0) {}

    std::size_t n_nodes() const { return times_.size(); }
    std::size_t n_states() const { return states_; }
    const std::vector<double>& times() const { return times_; }

    double& operator()(std::size_t node, std::size_t x) { return values_[node * states_ + x]; }
    double operator()(std::size_t node, std::size_t x) const { return values_[node * states_ + x]; }

    /// Linear interpolation between nodes; clamps to the end nodes.
    double at(double t, std::size_t x) const;

    const std::vector<double>& raw() const { return values_; }

private:
    std::vector<double> times_;
    std::size_t states_ = 0;
    std::vector<double> values_;
};

/// max over nodes and states of |a - b|.
double sup_distance(const ValueField& a, const ValueField& b);

/// max over nodes and states of exp(beta A_{t_k} / 2) |a - b|, on the model grid.
double weighted_sup_distance(const ModelSpec& model, const ValueField& a, const ValueField& b,
                             double beta);

struct ConvergenceReport {
    std::vector<double> deltas;
    double ratio = 0.0;
    std::size_t iterations = 0;
    double beta = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double theoretical_ratio = 0.0;
};

/// Cost-to-go of a fixed feedback policy, by explicit backward Euler in the A clock
/// with `substeps` sub-steps per cell. Throws StepTooLarge if dA * C_r > 1.
ValueField policy_value(const ModelSpec& model, const Policy& policy, std::size_t substeps = 1);

/// HJB solution by explicit backward Euler:
/// v(t - dA, x) = v(t, x) + dA * min_u [ l(x,u) + sum_y (v(t,y) - v(t,x)) r(y,u) phi(y) ].
ValueField hjb_march(const ModelSpec& model, std::size_t substeps = 1);

/// One application of the contraction map with the input field frozen inside the
/// integral; trapezoidal rule on each cell.
ValueField picard_step(const ModelSpec& model, const ValueField& v_in);

/// Picard iteration from v0 = g until the weighted sup distance drops below tol.
/// Throws NoConvergence after max_iter steps.
std::pair<ValueField, ConvergenceReport> hjb_picard(const ModelSpec& model, double beta,
                                                    double tol, std::size_t max_iter);

/// v(t, x) = g(x) on every node of the model grid.
ValueField terminal_field(const ModelSpec& model);

}  // namespace mppctl
