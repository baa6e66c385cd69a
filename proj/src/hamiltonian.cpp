#include "mppctl/hamiltonian.hpp"

#include <vector>

#include "mppctl/errors.hpp"
#include "mppctl/hjb.hpp"

namespace mppctl {

double hamiltonian_term(const ModelSpec& model, std::size_t cell, std::size_t x, std::size_t u,
                        std::span<const double> z) {
    double s = model.l(cell, x, u);
    for (std::size_t y = 0; y < model.n_states(); ++y)
        s += z[y] * (model.r(cell, y, u) - 1.0) * model.phi(cell, y);
    return s;
}

HamiltonianResult hamiltonian(const ModelSpec& model, std::size_t cell, std::size_t x,
                              std::span<const double> z) {
    if (z.size() != model.n_states()) throw ShapeMismatch("z must have one entry per state");
    HamiltonianResult best{hamiltonian_term(model, cell, x, 0, z), 0};
    for (std::size_t u = 1; u < model.n_actions(); ++u) {
        const double v = hamiltonian_term(model, cell, x, u, z);
        if (v < best.value) best = {v, u};
    }
    return best;
}

Policy policy_from_value(const ModelSpec& model, const ValueField& v) {
    if (v.n_states() != model.n_states()) throw ShapeMismatch("value field has wrong state count");
    const std::size_t nk = model.n_states();
    Policy policy(model.n_cells(), nk);
    std::vector<double> node(nk);
    std::vector<double> z(nk);
    for (std::size_t j = 0; j < model.n_cells(); ++j) {
        const double t = model.cell_start(j);
        for (std::size_t y = 0; y < nk; ++y) node[y] = v.at(t, y);
        for (std::size_t x = 0; x < nk; ++x) {
            for (std::size_t y = 0; y < nk; ++y) z[y] = node[y] - node[x];
            policy.at(j, x) = hamiltonian(model, j, x, z).argmin_action;
        }
    }
    return policy;
}

}  // namespace mppctl
