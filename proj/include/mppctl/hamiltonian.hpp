#pragma once

#include <cstddef>
#include <span>

#include "mppctl/model.hpp"
#include "mppctl/simulate.hpp"

namespace mppctl {

class ValueField;

struct HamiltonianResult {
    double value = 0.0;
    std::size_t argmin_action = 0;
};

/// min over u of l_j(x,u) + sum_y z(y) (r_j(y,u) - 1) phi_j(y).
/// Ties go to the lowest action index.
HamiltonianResult hamiltonian(const ModelSpec& model, std::size_t cell, std::size_t x,
                              std::span<const double> z);

/// Bracket of the hamiltonian for one fixed action.
double hamiltonian_term(const ModelSpec& model, std::size_t cell, std::size_t x, std::size_t u,
                        std::span<const double> z);

/// Feedback selector: on cell j, u*(j,x) minimizes the hamiltonian at
/// z(y) = v(t_j, y) - v(t_j, x).
Policy policy_from_value(const ModelSpec& model, const ValueField& v);

}  // namespace mppctl
