#include "mppctl/girsanov.hpp"

#include <algorithm>
#include <cmath>

#include "mppctl/parallel.hpp"
#include "mppctl/rng.hpp"
#include "mppctl/stats.hpp"

namespace mppctl {

namespace {

/// sum_y (1 - r(y,u)) phi(y) on one cell.
double drift_rate(const ModelSpec& model, std::size_t cell, std::size_t action) {
    double s = 0.0;
    for (std::size_t y = 0; y < model.n_states(); ++y)
        s += (1.0 - model.r(cell, y, action)) * model.phi(cell, y);
    return s;
}

}  // namespace

LikelihoodPath likelihood(const ModelSpec& model, const Policy& policy, const Trajectory& traj,
                          double until) {
    check_policy(model, policy);
    const double stop = std::isnan(until) ? model.horizon : until;
    LikelihoodPath out;
    double log_l = 0.0;
    bool zero = false;
    for (const auto& piece : path_pieces(model, traj)) {
        if (piece.begin >= stop) break;
        const double end = std::min(piece.end, stop);
        const std::size_t action = policy(piece.cell, piece.state);
        log_l += drift_rate(model, piece.cell, action) * model.base_rate[piece.cell] * (end - piece.begin);
        if (piece.jump_at_end && piece.jump_at_end->time <= stop) {
            const std::size_t jcell = cell_index(model, piece.jump_at_end->time);
            const double factor =
                model.r(jcell, piece.jump_at_end->mark, policy(jcell, piece.state));
            if (factor <= 0.0)
                zero = true;
            else
                log_l += std::log(factor);
            out.times.push_back(piece.jump_at_end->time);
            out.values.push_back(zero ? 0.0 : std::exp(log_l));
        }
    }
    out.terminal = zero ? 0.0 : std::exp(log_l);
    if (out.times.empty() || out.times.back() < stop) {
        out.times.push_back(stop);
        out.values.push_back(out.terminal);
    }
    return out;
}

NormalizationReport verify_normalization(const ModelSpec& model, const Policy& policy,
                                         std::size_t n_paths, std::uint64_t seed, std::size_t x0) {
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto traj = simulate_reference(model, 0.0, x0, i, seed);
        samples[i] = likelihood(model, policy, traj).terminal;
    });
    const auto est = summarize(samples);
    return {est.mean, est.std_error};
}

MomentReport verify_moment_bound(const ModelSpec& model, const Policy& policy,
                                 std::size_t n_paths, std::uint64_t seed, std::size_t x0) {
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto traj = simulate_reference(model, 0.0, x0, i, seed);
        const double l = likelihood(model, policy, traj).terminal;
        samples[i] = l * l;
    });
    const auto est = summarize(samples);
    const double beta = 3.0 + std::pow(model.C_r, 4);
    const double a_total = cumulative_A(model, model.horizon);
    return {est.mean, est.std_error, std::exp(beta * a_total / 2.0)};
}

CompensatorReport empirical_compensator_check(const ModelSpec& model, const Policy& policy,
                                              std::size_t n_paths, std::uint64_t seed,
                                              std::size_t x0) {
    const std::size_t nk = model.n_states();
    // Row i holds nk per-mark values followed by the total.
    std::vector<double> direct(n_paths * (nk + 1), 0.0);
    std::vector<double> reweighted(n_paths * (nk + 1), 0.0);
    const std::uint64_t seed_direct = derive_seed(seed, 1);
    const std::uint64_t seed_ref = derive_seed(seed, 2);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto controlled = simulate_controlled(model, policy, 0.0, x0, i, seed_direct);
        double* row = &direct[i * (nk + 1)];
        for (const auto& j : controlled.jumps) row[j.mark] += 1.0;
        row[nk] = static_cast<double>(controlled.jumps.size());

        const auto ref = simulate_reference(model, 0.0, x0, i, seed_ref);
        const double l = likelihood(model, policy, ref).terminal;
        double* rrow = &reweighted[i * (nk + 1)];
        for (const auto& j : ref.jumps) rrow[j.mark] += l;
        rrow[nk] = l * static_cast<double>(ref.jumps.size());
    });

    CompensatorReport rep;
    std::vector<double> column(n_paths);
    auto column_estimate = [&](const std::vector<double>& table, std::size_t c) {
        for (std::size_t i = 0; i < n_paths; ++i) column[i] = table[i * (nk + 1) + c];
        return summarize(column);
    };
    auto z_score = [](const MeanEstimate& a, const MeanEstimate& b) {
        const double se = std::hypot(a.std_error, b.std_error);
        const double diff = std::abs(a.mean - b.mean);
        if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return diff / se;
    };
    for (std::size_t c = 0; c <= nk; ++c) {
        const auto d = column_estimate(direct, c);
        const auto w = column_estimate(reweighted, c);
        rep.z_max = std::max(rep.z_max, z_score(d, w));
        if (c < nk) {
            rep.direct.push_back(d.mean);
            rep.direct_se.push_back(d.std_error);
            rep.reweighted.push_back(w.mean);
            rep.reweighted_se.push_back(w.std_error);
        } else {
            rep.total_direct = d.mean;
            rep.total_direct_se = d.std_error;
            rep.total_reweighted = w.mean;
            rep.total_reweighted_se = w.std_error;
        }
    }
    return rep;
}

}  // namespace mppctl
