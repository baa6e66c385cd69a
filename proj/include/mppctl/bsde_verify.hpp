#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mppctl/hjb.hpp"
#include "mppctl/model.hpp"
#include "mppctl/simulate.hpp"

namespace mppctl {

/// Deterministic drift fhat(t_j, x), piecewise constant on the model cells.
class DriftField {
public:
    DriftField() = default;
    DriftField(std::size_t cells, std::size_t states, double fill = 0.0)
        : cells_(cells), states_(states), values_(cells * states, fill) {}

    double operator()(std::size_t cell, std::size_t x) const { return values_[cell * states_ + x]; }
    double& operator()(std::size_t cell, std::size_t x) { return values_[cell * states_ + x]; }
    std::size_t n_cells() const { return cells_; }
    std::size_t n_states() const { return states_; }

private:
    std::size_t cells_ = 0;
    std::size_t states_ = 0;
    std::vector<double> values_;
};

/// Deterministic kernel V(t_j, x, y), piecewise constant on the model cells.
class KernelField {
public:
    KernelField() = default;
    KernelField(std::size_t cells, std::size_t states, double fill = 0.0)
        : cells_(cells), states_(states), values_(cells * states * states, fill) {}

    double operator()(std::size_t cell, std::size_t x, std::size_t y) const {
        return values_[(cell * states_ + x) * states_ + y];
    }
    double& operator()(std::size_t cell, std::size_t x, std::size_t y) {
        return values_[(cell * states_ + x) * states_ + y];
    }
    std::size_t n_cells() const { return cells_; }
    std::size_t n_states() const { return states_; }

private:
    std::size_t cells_ = 0;
    std::size_t states_ = 0;
    std::vector<double> values_;
};

struct ItoResiduals {
    double residual_prima = 0.0;
    double residual_seconda = 0.0;
    std::size_t jumps = 0;
};

struct ItoFields {
    DriftField fhat;
    KernelField V;
    std::vector<double> v0;
};

/// Drift, kernel and initial values with entries uniform on [-1, 1], from one RNG stream.
ItoFields random_ito_fields(const ModelSpec& model, std::uint64_t stream, std::uint64_t seed);

/// Builds v(t,x) = v0(x) + int fhat dA + int int V dq along the path and returns the
/// absolute gaps in both forms of the change-of-variables formula for v(t, X_t) at T.
ItoResiduals ito_identity_check(const ModelSpec& model, const DriftField& fhat,
                                const KernelField& V, const std::vector<double>& v0,
                                const Trajectory& traj);

/// |Y_t0 + int int Z dq - g(X_T) - int f(r, X_r, Z_r) dA_r| with Y = v(s, X_s),
/// Z(y) = v(s, y) - v(s, X_{s-}). All integrals exact for piecewise linear v.
double bsde_residual(const ModelSpec& model, const ValueField& v, const Trajectory& traj);

/// Pathwise residual tolerance: 10 * (max cell dA)^2 * (cells + jumps).
double bsde_residual_tolerance(const ModelSpec& model, std::size_t jumps);

/// Closed-form solution of the linear backward equation
/// w(t,x) = g(x) + int_t^T [ fhat(s,x) + sum_y (w(s,y) - w(s,x)) phi_s(y) ] dA_s.
class LinearSolution {
public:
    LinearSolution(const ModelSpec& model, const DriftField& fhat);
    double operator()(double t, std::size_t x) const;
    /// w(t_k, x) at grid node k.
    double at_node(std::size_t node, std::size_t x) const { return nodes_[node * states_ + x]; }

private:
    const ModelSpec* model_;
    const DriftField* fhat_;
    std::size_t states_;
    std::vector<double> nodes_;
};

struct EnergyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_error = 0.0;
    double combined_se = 0.0;
    // Linear estimate: weighted Y and Z norms against c1 E e^{beta A_T} xi^2 + c2 E int e^{beta A} f^2 dA.
    double estimate_lhs = 0.0;
    double estimate_rhs = 0.0;
    double estimate_se = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Both sides of the energy identity at t = 0 for the linear equation with terminal
/// g(X_T) and drift fhat, averaged over reference paths from (0, x0).
EnergyReport energy_identity_check(const ModelSpec& model, const DriftField& fhat, double beta,
                                   std::size_t n_paths, std::uint64_t seed, std::size_t x0 = 0);

struct AprioriReport {
    double beta = 0.0;
    double beta_l = 0.0;
    double y_norm = 0.0;       // |Ybar|^2_beta
    double y_norm_se = 0.0;
    double z_norm = 0.0;       // ||Zbar||^2_beta
    double z_norm_se = 0.0;
    double xi_term = 0.0;      // E e^{beta A_T} |xibar|^2
    double f_term = 0.0;       // E int e^{beta A} |fbar|^2 dA
    double y_bound = 0.0;
    double z_bound = 0.0;
    double y_gap_se = 0.0;     // SE of the pathwise (lhs - rhs) for each inequality
    double z_gap_se = 0.0;
    bool y_holds = false;
    bool z_holds = false;
};

/// Differences of the two HJB/BSDE solutions along reference paths and the
/// right-hand sides of the a priori estimates. Both models must share grid, K,
/// base rate and mark law. Throws BetaTooSmall if beta <= L^2.
AprioriReport apriori_check(const ModelSpec& model1, const ModelSpec& model2, double beta,
                            std::size_t n_paths, std::uint64_t seed, std::size_t x0 = 0,
                            std::size_t substeps = 1);

}  // namespace mppctl
