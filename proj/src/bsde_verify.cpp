#include "mppctl/bsde_verify.hpp"

#include <algorithm>
#include <cmath>

#include "mppctl/errors.hpp"
#include "mppctl/hamiltonian.hpp"
#include "mppctl/parallel.hpp"
#include "mppctl/rng.hpp"
#include "mppctl/stats.hpp"
#include "quadrature.hpp"

namespace mppctl {

// ---------------------------------------------------------------------------
// Change of variables for v(t, X_t)
// ---------------------------------------------------------------------------

ItoFields random_ito_fields(const ModelSpec& model, std::uint64_t stream, std::uint64_t seed) {
    const std::size_t nk = model.n_states();
    const std::size_t nc = model.n_cells();
    StreamRng rng(seed, stream);
    auto draw = [&] { return 2.0 * rng.uniform() - 1.0; };
    ItoFields out{DriftField(nc, nk), KernelField(nc, nk), std::vector<double>(nk)};
    for (auto& v : out.v0) v = draw();
    for (std::size_t j = 0; j < nc; ++j)
        for (std::size_t x = 0; x < nk; ++x) {
            out.fhat(j, x) = draw();
            for (std::size_t y = 0; y < nk; ++y) out.V(j, x, y) = draw();
        }
    return out;
}

ItoResiduals ito_identity_check(const ModelSpec& model, const DriftField& fhat,
                                const KernelField& V, const std::vector<double>& v0,
                                const Trajectory& traj) {
    const std::size_t nk = model.n_states();
    if (fhat.n_cells() != model.n_cells() || fhat.n_states() != nk || V.n_cells() != model.n_cells() ||
        V.n_states() != nk || v0.size() != nk)
        throw ShapeMismatch("drift, kernel or initial field does not match the model");

    // d v(., x) / dA on cell j: fhat_j(x) - sum_y V_j(x, y) phi_j(y)
    auto slope = [&](std::size_t j, std::size_t x) {
        double s = fhat(j, x);
        for (std::size_t y = 0; y < nk; ++y) s -= V(j, x, y) * model.phi(j, y);
        return s;
    };

    // v(T, .) straight from its defining integrals, cell by cell.
    std::vector<double> v_end(v0);
    const std::size_t first = cell_index(model, traj.start_time);
    for (std::size_t j = first; j < model.n_cells(); ++j) {
        const double lo = std::max(model.cell_start(j), traj.start_time);
        const double mass = model.base_rate[j] * (model.cell_end(j) - lo);
        for (std::size_t x = 0; x < nk; ++x) v_end[x] += slope(j, x) * mass;
    }
    for (const auto& jump : traj.jumps) {
        const std::size_t jc = cell_index(model, jump.time);
        for (std::size_t x = 0; x < nk; ++x) v_end[x] += V(jc, x, jump.mark);
    }

    double drift_int = 0.0;   // int fhat(s, X_s) dA
    double jump_sum = 0.0;    // int (v(s-,y) - v(s-,X_{s-}) + V(s,y,y)) p(ds dy)
    double comp_first = 0.0;  // int sum_y V(s, X_s, y) phi dA
    double comp_q = 0.0;      // int sum_y (v(s-,y) - v(s-,X_{s-}) + V(s,y,y)) phi dA
    double comp_second = 0.0; // int sum_y (v(s,y) - v(s,X_s) + V(s,y,y) - V(s,X_s,y)) phi dA

    std::vector<double> v(v0);
    std::vector<double> v_next(nk);
    std::size_t state = traj.start_state;
    for (const auto& piece : path_pieces(model, traj)) {
        const std::size_t j = piece.cell;
        const std::size_t X = piece.state;
        const double m = piece.mass;
        for (std::size_t x = 0; x < nk; ++x) v_next[x] = v[x] + slope(j, x) * m;

        drift_int += fhat(j, X) * m;
        const double sx_slope = slope(j, X);
        for (std::size_t y = 0; y < nk; ++y) {
            const double p = model.phi(j, y);
            comp_first += V(j, X, y) * p * m;
            // Affine in A on the piece: midpoint form here, trapezoid below.
            const double diff_mid = (v[y] - v[X]) * m + (slope(j, y) - sx_slope) * m * m / 2.0;
            comp_q += p * (diff_mid + V(j, y, y) * m);
            const double diff_trap = 0.5 * m * ((v[y] - v[X]) + (v_next[y] - v_next[X]));
            comp_second += p * (diff_trap + (V(j, y, y) - V(j, X, y)) * m);
        }
        v.swap(v_next);

        if (piece.jump_at_end) {
            const std::size_t mark = piece.jump_at_end->mark;
            const std::size_t jc = cell_index(model, piece.jump_at_end->time);
            jump_sum += v[mark] - v[X] + V(jc, mark, mark);
            for (std::size_t x = 0; x < nk; ++x) v[x] += V(jc, x, mark);
            state = mark;
        }
    }

    const double lhs = v_end[state] - v0[traj.start_state];
    ItoResiduals out;
    out.jumps = traj.jumps.size();
    out.residual_prima = std::abs(lhs - (drift_int + jump_sum - comp_first));
    // q-integral (jump_sum - comp_q) plus comp_second, grouped so equal compensators cancel exactly.
    out.residual_seconda = std::abs(lhs - (drift_int + jump_sum - (comp_q - comp_second)));
    return out;
}

// ---------------------------------------------------------------------------
// Pathwise BSDE residual
// ---------------------------------------------------------------------------

double bsde_residual(const ModelSpec& model, const ValueField& v, const Trajectory& traj) {
    const std::size_t nk = model.n_states();
    const std::size_t nu = model.n_actions();
    if (v.n_states() != nk) throw ShapeMismatch("value field has wrong state count");

    double comp = 0.0;
    double jumps = 0.0;
    double gen = 0.0;
    std::vector<double> vb(nk), ve(nk), zb(nk), ze(nk), hb(nu), he(nu);
    std::size_t state = traj.start_state;
    for (const auto& piece : path_pieces(model, traj)) {
        const std::size_t j = piece.cell;
        const std::size_t X = piece.state;
        for (std::size_t y = 0; y < nk; ++y) {
            vb[y] = v.at(piece.begin, y);
            ve[y] = v.at(piece.end, y);
        }
        double zphi = 0.0;
        for (std::size_t y = 0; y < nk; ++y) {
            zb[y] = vb[y] - vb[X];
            ze[y] = ve[y] - ve[X];
            zphi += model.phi(j, y) * 0.5 * (zb[y] + ze[y]);
        }
        comp += zphi * piece.mass;
        for (std::size_t u = 0; u < nu; ++u) {
            hb[u] = hamiltonian_term(model, j, X, u, zb);
            he[u] = hamiltonian_term(model, j, X, u, ze);
        }
        gen += piece.mass * detail::integrate_lower_envelope(hb, he);
        if (piece.jump_at_end) {
            const std::size_t mark = piece.jump_at_end->mark;
            jumps += ve[mark] - ve[X];
            state = mark;
        }
    }
    const double y0 = v.at(traj.start_time, traj.start_state);
    return std::abs(y0 + (jumps - comp) - model.g(state) - gen);
}

double bsde_residual_tolerance(const ModelSpec& model, std::size_t jumps) {
    double max_mass = 0.0;
    for (std::size_t j = 0; j < model.n_cells(); ++j) max_mass = std::max(max_mass, model.cell_mass(j));
    return 10.0 * max_mass * max_mass * static_cast<double>(model.n_cells() + jumps);
}

// ---------------------------------------------------------------------------
// Linear equation and the energy identity
// ---------------------------------------------------------------------------

namespace {

/// Backward closed form on one cell: w at A-distance tau before the right node,
/// from the right-node values `right`.
double linear_backward(const ModelSpec& model, const DriftField& fhat, std::size_t j,
                       const double* right, double tau, std::size_t x) {
    double m0 = 0.0;
    double c = 0.0;
    for (std::size_t y = 0; y < model.n_states(); ++y) {
        m0 += model.phi(j, y) * right[y];
        c += model.phi(j, y) * fhat(j, y);
    }
    const double one_minus_e = -std::expm1(-tau);
    return (1.0 - one_minus_e) * right[x] + (fhat(j, x) + m0) * one_minus_e + c * (tau - one_minus_e);
}

}  // namespace

LinearSolution::LinearSolution(const ModelSpec& model, const DriftField& fhat)
    : model_(&model), fhat_(&fhat), states_(model.n_states()),
      nodes_(model.time_grid.size() * model.n_states(), 0.0) {
    if (fhat.n_cells() != model.n_cells() || fhat.n_states() != states_)
        throw ShapeMismatch("drift field does not match the model");
    const std::size_t m = model.n_cells();
    for (std::size_t x = 0; x < states_; ++x) nodes_[m * states_ + x] = model.g(x);
    for (std::size_t j = m; j-- > 0;) {
        for (std::size_t x = 0; x < states_; ++x)
            nodes_[j * states_ + x] =
                linear_backward(model, fhat, j, &nodes_[(j + 1) * states_], model.cell_mass(j), x);
    }
}

double LinearSolution::operator()(double t, std::size_t x) const {
    const std::size_t j = cell_index(*model_, t);
    const double tau = model_->base_rate[j] * (model_->cell_end(j) - t);
    return linear_backward(*model_, *fhat_, j, &nodes_[(j + 1) * states_], tau, x);
}

EnergyReport energy_identity_check(const ModelSpec& model, const DriftField& fhat, double beta,
                                   std::size_t n_paths, std::uint64_t seed, std::size_t x0) {
    if (!(beta > 0.0)) throw OutOfRange("beta must be positive");
    const LinearSolution w(model, fhat);
    const std::size_t nk = model.n_states();
    const auto& gl = detail::gauss16();
    const double a_total = cumulative_A(model, model.horizon);

    struct PathTerms {
        double lhs, rhs, est_lhs, est_rhs;
    };
    std::vector<PathTerms> terms(n_paths);
    const double c1 = 4.0 * (1.0 + 1.0 / beta);
    const double c2 = 8.0 / beta * (1.0 + 1.0 / beta);

    parallel_for(n_paths, [&](std::size_t i) {
        const auto traj = simulate_reference(model, 0.0, x0, i, seed);
        double y_norm = 0.0;   // int e^{bA} Y^2 dA
        double z_norm = 0.0;   // int e^{bA} sum_y Z^2 phi dA
        double cross = 0.0;    // int e^{bA} Y f dA
        double f_norm = 0.0;   // int e^{bA} f^2 dA
        double a_begin = 0.0;
        std::size_t state = x0;
        for (const auto& piece : path_pieces(model, traj)) {
            const std::size_t j = piece.cell;
            const std::size_t X = piece.state;
            const double rate = model.base_rate[j];
            if (piece.mass > 0.0) {
                const double f = fhat(j, X);
                auto weight = [&](double s) { return rate * std::exp(beta * (a_begin + rate * (s - piece.begin))); };
                y_norm += gl.integrate(piece.begin, piece.end, [&](double s) {
                    const double y = w(s, X);
                    return weight(s) * y * y;
                });
                z_norm += gl.integrate(piece.begin, piece.end, [&](double s) {
                    const double y = w(s, X);
                    double acc = 0.0;
                    for (std::size_t k = 0; k < nk; ++k) {
                        const double z = w(s, k) - y;
                        acc += z * z * model.phi(j, k);
                    }
                    return weight(s) * acc;
                });
                cross += gl.integrate(piece.begin, piece.end, [&](double s) { return weight(s) * w(s, X) * f; });
                f_norm += f * f * (std::exp(beta * (a_begin + piece.mass)) - std::exp(beta * a_begin)) / beta;
            }
            a_begin += piece.mass;
            if (piece.jump_at_end) state = piece.jump_at_end->mark;
        }
        const double y0 = w(0.0, x0);
        const double xi = model.g(state);
        const double terminal = std::exp(beta * a_total) * xi * xi;
        terms[i].lhs = y0 * y0 + beta * y_norm + z_norm;
        terms[i].rhs = terminal + 2.0 * cross;
        terms[i].est_lhs = y_norm + z_norm;
        terms[i].est_rhs = c1 * terminal + c2 * f_norm;
    });

    std::vector<double> col(n_paths);
    auto mean_of = [&](auto pick) {
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = pick(terms[i]);
        return summarize(col);
    };
    EnergyReport rep;
    rep.c1 = c1;
    rep.c2 = c2;
    rep.lhs = mean_of([](const PathTerms& t) { return t.lhs; }).mean;
    rep.rhs = mean_of([](const PathTerms& t) { return t.rhs; }).mean;
    rep.combined_se = mean_of([](const PathTerms& t) { return t.lhs - t.rhs; }).std_error;
    const double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
    rep.rel_error = scale > 0.0 ? std::abs(rep.lhs - rep.rhs) / scale : 0.0;
    rep.estimate_lhs = mean_of([](const PathTerms& t) { return t.est_lhs; }).mean;
    rep.estimate_rhs = mean_of([](const PathTerms& t) { return t.est_rhs; }).mean;
    rep.estimate_se = mean_of([](const PathTerms& t) { return t.est_lhs - t.est_rhs; }).std_error;
    return rep;
}

// ---------------------------------------------------------------------------
// A priori estimates for two controlled equations
// ---------------------------------------------------------------------------

AprioriReport apriori_check(const ModelSpec& model1, const ModelSpec& model2, double beta,
                            std::size_t n_paths, std::uint64_t seed, std::size_t x0,
                            std::size_t substeps) {
    if (model1.time_grid != model2.time_grid || model1.n_states() != model2.n_states() ||
        model1.n_actions() != model2.n_actions() || model1.base_rate != model2.base_rate ||
        model1.mark_dist != model2.mark_dist)
        throw ShapeMismatch("a priori check needs models sharing grid, K, A and phi");
    const double L = std::max(lipschitz_constants(model1).L, lipschitz_constants(model2).L);
    if (!(beta > L * L)) throw BetaTooSmall("beta must exceed L^2 + 2L'");

    const ValueField v1 = hjb_march(model1, substeps);
    const ValueField v2 = hjb_march(model2, substeps);
    const std::size_t nk = model1.n_states();
    const auto& gl = detail::gauss16();
    const double a_total = cumulative_A(model1, model1.horizon);
    const double bl = beta - L * L;

    struct PathTerms {
        double y, z, xi, f;
    };
    std::vector<PathTerms> terms(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto traj = simulate_reference(model1, 0.0, x0, i, seed);
        std::vector<double> b1(nk), e1(nk), b2(nk), e2(nk), z1(nk), z2(nk);
        PathTerms t{0.0, 0.0, 0.0, 0.0};
        double a_begin = 0.0;
        std::size_t state = x0;
        for (const auto& piece : path_pieces(model1, traj)) {
            const std::size_t j = piece.cell;
            const std::size_t X = piece.state;
            const double rate = model1.base_rate[j];
            if (piece.mass > 0.0) {
                for (std::size_t y = 0; y < nk; ++y) {
                    b1[y] = v1.at(piece.begin, y);
                    e1[y] = v1.at(piece.end, y);
                    b2[y] = v2.at(piece.begin, y);
                    e2[y] = v2.at(piece.end, y);
                }
                const double len = piece.end - piece.begin;
                auto eval = [&](double s, auto&& body) {
                    const double th = (s - piece.begin) / len;
                    for (std::size_t y = 0; y < nk; ++y) {
                        z1[y] = (1.0 - th) * b1[y] + th * e1[y];
                        z2[y] = (1.0 - th) * b2[y] + th * e2[y];
                    }
                    const double w = rate * std::exp(beta * (a_begin + rate * (s - piece.begin)));
                    return w * body();
                };
                t.y += gl.integrate(piece.begin, piece.end, [&](double s) {
                    return eval(s, [&] {
                        const double d = z1[X] - z2[X];
                        return d * d;
                    });
                });
                t.z += gl.integrate(piece.begin, piece.end, [&](double s) {
                    return eval(s, [&] {
                        double acc = 0.0;
                        for (std::size_t y = 0; y < nk; ++y) {
                            const double d = (z1[y] - z1[X]) - (z2[y] - z2[X]);
                            acc += d * d * model1.phi(j, y);
                        }
                        return acc;
                    });
                });
                t.f += gl.integrate(piece.begin, piece.end, [&](double s) {
                    return eval(s, [&] {
                        // Generator difference along the second solution.
                        std::vector<double> zz(nk);
                        for (std::size_t y = 0; y < nk; ++y) zz[y] = z2[y] - z2[X];
                        const double d = hamiltonian(model1, j, X, zz).value -
                                         hamiltonian(model2, j, X, zz).value;
                        return d * d;
                    });
                });
            }
            a_begin += piece.mass;
            if (piece.jump_at_end) state = piece.jump_at_end->mark;
        }
        const double xi = model1.g(state) - model2.g(state);
        t.xi = std::exp(beta * a_total) * xi * xi;
        terms[i] = t;
    });

    AprioriReport rep;
    rep.beta = beta;
    rep.beta_l = bl;
    const double ky_xi = 2.0 / bl;
    const double ky_f = 4.0 / (bl * bl);
    const double kz_xi = 2.0 + 16.0 / bl;
    const double kz_f = 2.0 / bl * (1.0 + 16.0 / bl);

    std::vector<double> col(n_paths);
    auto stat = [&](auto pick) {
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = pick(terms[i]);
        return summarize(col);
    };
    const auto y = stat([](const PathTerms& t) { return t.y; });
    const auto z = stat([](const PathTerms& t) { return t.z; });
    rep.y_norm = y.mean;
    rep.y_norm_se = y.std_error;
    rep.z_norm = z.mean;
    rep.z_norm_se = z.std_error;
    rep.xi_term = stat([](const PathTerms& t) { return t.xi; }).mean;
    rep.f_term = stat([](const PathTerms& t) { return t.f; }).mean;
    rep.y_bound = ky_xi * rep.xi_term + ky_f * rep.f_term;
    rep.z_bound = kz_xi * rep.xi_term + kz_f * rep.f_term;
    rep.y_gap_se = stat([&](const PathTerms& t) { return t.y - ky_xi * t.xi - ky_f * t.f; }).std_error;
    rep.z_gap_se = stat([&](const PathTerms& t) { return t.z - kz_xi * t.xi - kz_f * t.f; }).std_error;
    rep.y_holds = rep.y_norm <= rep.y_bound + 3.0 * rep.y_gap_se;
    rep.z_holds = rep.z_norm <= rep.z_bound + 3.0 * rep.z_gap_se;
    return rep;
}

}  // namespace mppctl
