#include "mppctl/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mppctl/errors.hpp"
#include "mppctl/hamiltonian.hpp"

namespace mppctl {

double ValueField::at(double t, std::size_t x) const {
    if (t <= times_.front()) return (*this)(0, x);
    if (t >= times_.back()) return (*this)(times_.size() - 1, x);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double lo = times_[k];
    const double hi = times_[k + 1];
    if (t == lo) return (*this)(k, x);
    const double w = (t - lo) / (hi - lo);
    return (1.0 - w) * (*this)(k, x) + w * (*this)(k + 1, x);
}

double sup_distance(const ValueField& a, const ValueField& b) {
    if (a.raw().size() != b.raw().size()) throw ShapeMismatch("value fields differ in shape");
    double d = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) d = std::max(d, std::abs(a.raw()[i] - b.raw()[i]));
    return d;
}

double weighted_sup_distance(const ModelSpec& model, const ValueField& a, const ValueField& b,
                             double beta) {
    if (a.n_nodes() != model.time_grid.size() || b.n_nodes() != model.time_grid.size())
        throw ShapeMismatch("value field is not on the model grid");
    const auto comp = compensator_at_nodes(model);
    double d = 0.0;
    for (std::size_t k = 0; k < a.n_nodes(); ++k) {
        const double w = std::exp(beta * comp[k] / 2.0);
        for (std::size_t x = 0; x < a.n_states(); ++x)
            d = std::max(d, w * std::abs(a(k, x) - b(k, x)));
    }
    return d;
}

ValueField terminal_field(const ModelSpec& model) {
    ValueField v(model.time_grid, model.n_states());
    for (std::size_t k = 0; k < v.n_nodes(); ++k)
        for (std::size_t x = 0; x < model.n_states(); ++x) v(k, x) = model.g(x);
    return v;
}

namespace {

void check_step(const ModelSpec& model, std::size_t cell, double step_mass) {
    if (step_mass * model.C_r > 1.0) {
        std::ostringstream os;
        os << "step mass " << step_mass << " on cell " << cell
           << " violates dA * C_r <= 1; increase substeps";
        throw StepTooLarge(os.str());
    }
}

/// Shared backward Euler driver; `rate(cell, x, w)` is the generator at state x.
template <typename Generator>
ValueField march(const ModelSpec& model, std::size_t substeps, Generator&& rate) {
    if (substeps == 0) throw OutOfRange("substeps must be at least 1");
    const std::size_t nk = model.n_states();
    ValueField v = terminal_field(model);
    std::vector<double> w(model.terminal_cost);
    std::vector<double> next(nk);
    for (std::size_t j = model.n_cells(); j-- > 0;) {
        const double step = model.cell_mass(j) / static_cast<double>(substeps);
        check_step(model, j, step);
        for (std::size_t s = 0; s < substeps; ++s) {
            for (std::size_t x = 0; x < nk; ++x) next[x] = w[x] + step * rate(j, x, w);
            w.swap(next);
        }
        for (std::size_t x = 0; x < nk; ++x) v(j, x) = w[x];
    }
    return v;
}

}  // namespace

ValueField policy_value(const ModelSpec& model, const Policy& policy, std::size_t substeps) {
    check_policy(model, policy);
    return march(model, substeps, [&](std::size_t j, std::size_t x, const std::vector<double>& w) {
        const std::size_t u = policy(j, x);
        double s = model.l(j, x, u);
        for (std::size_t y = 0; y < model.n_states(); ++y)
            s += (w[y] - w[x]) * model.r(j, y, u) * model.phi(j, y);
        return s;
    });
}

ValueField hjb_march(const ModelSpec& model, std::size_t substeps) {
    return march(model, substeps, [&](std::size_t j, std::size_t x, const std::vector<double>& w) {
        double best = 0.0;
        for (std::size_t u = 0; u < model.n_actions(); ++u) {
            double s = model.l(j, x, u);
            for (std::size_t y = 0; y < model.n_states(); ++y)
                s += (w[y] - w[x]) * model.r(j, y, u) * model.phi(j, y);
            if (u == 0 || s < best) best = s;
        }
        return best;
    });
}

ValueField picard_step(const ModelSpec& model, const ValueField& v_in) {
    if (v_in.n_nodes() != model.time_grid.size() || v_in.n_states() != model.n_states())
        throw ShapeMismatch("input field is not on the model grid");
    const std::size_t nk = model.n_states();
    ValueField out = terminal_field(model);
    std::vector<double> acc(model.terminal_cost);
    std::vector<double> z(nk);

    // sum_y (w(y) - w(x)) phi(y) + f(x, w - w(x)) at one node, with cell j data.
    auto integrand = [&](std::size_t j, std::size_t node, std::size_t x) {
        double jump = 0.0;
        for (std::size_t y = 0; y < nk; ++y) {
            z[y] = v_in(node, y) - v_in(node, x);
            jump += z[y] * model.phi(j, y);
        }
        return jump + hamiltonian(model, j, x, z).value;
    };

    for (std::size_t j = model.n_cells(); j-- > 0;) {
        const double mass = model.cell_mass(j);
        for (std::size_t x = 0; x < nk; ++x)
            acc[x] += 0.5 * mass * (integrand(j, j, x) + integrand(j, j + 1, x));
        for (std::size_t x = 0; x < nk; ++x) out(j, x) = acc[x];
    }
    return out;
}

std::pair<ValueField, ConvergenceReport> hjb_picard(const ModelSpec& model, double beta,
                                                    double tol, std::size_t max_iter) {
    if (!(tol > 0.0)) throw OutOfRange("tolerance must be positive");
    const auto lc = lipschitz_constants(model);
    const auto cc = contraction_constants(lc.L, beta);
    ConvergenceReport rep;
    rep.beta = beta;
    rep.c1 = cc.c1;
    rep.c2 = cc.c2;
    rep.theoretical_ratio = cc.total();

    ValueField v = terminal_field(model);
    for (std::size_t k = 1; k <= max_iter; ++k) {
        ValueField next = picard_step(model, v);
        const double delta = weighted_sup_distance(model, next, v, beta);
        rep.deltas.push_back(delta);
        rep.iterations = k;
        // Ratios are monitored from the third delta on.
        if (k >= 3 && rep.deltas[k - 2] > 0.0)
            rep.ratio = std::max(rep.ratio, delta / rep.deltas[k - 2]);
        v = std::move(next);
        if (delta < tol) return {std::move(v), rep};
    }
    std::ostringstream os;
    os << "Picard iteration did not reach tolerance " << tol << " in " << max_iter
       << " steps (last delta " << rep.deltas.back() << ")";
    throw NoConvergence(os.str());
}

}  // namespace mppctl
