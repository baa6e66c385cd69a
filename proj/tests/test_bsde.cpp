#include <cmath>
#include <vector>

#include "doctest.h"
#include "mppctl/bsde_verify.hpp"
#include "mppctl/errors.hpp"
#include "mppctl/hjb.hpp"
#include "mppctl/instances.hpp"
#include "mppctl/rng.hpp"

using namespace mppctl;

namespace {

ModelSpec single_state(std::size_t cells) {
    auto m = ModelSpec::uniform({"x"}, {"u0", "u1"}, 1.0, cells);
    for (std::size_t j = 0; j < cells; ++j) {
        m.base_rate[j] = 0.5 + 0.1 * double(j);
        m.phi(j, 0) = 1.0;
        m.l(j, 0, 0) = 0.9;
        m.l(j, 0, 1) = 0.4 - 0.05 * double(j);
    }
    m.terminal_cost = {0.3};
    m.C_l = 2.0;
    return validate_model(m);
}

/// RK4 on the linear backward system, many steps per cell.
std::vector<double> rk4_linear(const ModelSpec& m, const DriftField& f, std::size_t steps) {
    const std::size_t nk = m.n_states();
    std::vector<double> w(m.terminal_cost);
    auto rhs = [&](std::size_t j, const std::vector<double>& v) {
        std::vector<double> d(nk);
        for (std::size_t x = 0; x < nk; ++x) {
            double s = f(j, x);
            for (std::size_t y = 0; y < nk; ++y) s += (v[y] - v[x]) * m.phi(j, y);
            d[x] = s;
        }
        return d;
    };
    for (std::size_t j = m.n_cells(); j-- > 0;) {
        const double h = m.cell_mass(j) / double(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            auto k1 = rhs(j, w);
            std::vector<double> t(nk);
            for (std::size_t x = 0; x < nk; ++x) t[x] = w[x] + 0.5 * h * k1[x];
            auto k2 = rhs(j, t);
            for (std::size_t x = 0; x < nk; ++x) t[x] = w[x] + 0.5 * h * k2[x];
            auto k3 = rhs(j, t);
            for (std::size_t x = 0; x < nk; ++x) t[x] = w[x] + h * k3[x];
            auto k4 = rhs(j, t);
            for (std::size_t x = 0; x < nk; ++x) w[x] += h / 6.0 * (k1[x] + 2 * k2[x] + 2 * k3[x] + k4[x]);
        }
    }
    return w;
}

}  // namespace

TEST_CASE("change of variables identity") {
    const auto m = instance_d2(6);
    SUBCASE("zero fields") {
        const DriftField f(m.n_cells(), 2);
        const KernelField V(m.n_cells(), 2);
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto r = ito_identity_check(m, f, V, {0.3, -0.2}, simulate_reference(m, 0.0, 0, s));
            CHECK(r.residual_prima == 0.0);
            CHECK(r.residual_seconda == 0.0);
        }
    }
    SUBCASE("no jumps") {
        auto quiet = m;
        quiet.base_rate.assign(m.n_cells(), 0.0);
        const auto fields = random_ito_fields(m, 0, 1);
        const KernelField V(m.n_cells(), 2);
        const auto r = ito_identity_check(quiet, fields.fhat, V, fields.v0, simulate_reference(quiet, 0.0, 1, 0));
        CHECK(r.jumps == 0);
        CHECK(r.residual_prima <= 1e-12);
        CHECK(r.residual_seconda <= 1e-12);
    }
    SUBCASE("random fields, busy paths") {
        auto busy = m;
        busy.base_rate.assign(m.n_cells(), 20.0);
        for (std::uint64_t s = 0; s < 300; ++s) {
            const auto f = random_ito_fields(busy, s, 2);
            const auto t = simulate_reference(busy, 0.0, s % 2, s, 3);
            const auto r = ito_identity_check(busy, f.fhat, f.V, f.v0, t);
            const double tol = 1e-9 * (1.0 + double(r.jumps));
            CHECK(r.residual_prima <= tol);
            CHECK(r.residual_seconda <= tol);
        }
    }
    SUBCASE("shape checks") {
        const DriftField f(m.n_cells() + 1, 2);
        const KernelField V(m.n_cells(), 2);
        CHECK_THROWS_AS(ito_identity_check(m, f, V, {0.0, 0.0}, Trajectory{}), ShapeMismatch);
    }
}

TEST_CASE("BSDE residual") {
    SUBCASE("single state is exact") {
        const auto m = single_state(4);
        const auto v = hjb_march(m);
        for (std::uint64_t s = 0; s < 50; ++s)
            CHECK(bsde_residual(m, v, simulate_reference(m, 0.0, 0, s)) <= 1e-12);
    }
    SUBCASE("D1 is exact") {
        const auto m = instance_d1(10);
        const auto v = hjb_march(m);
        for (std::uint64_t s = 0; s < 200; ++s)
            CHECK(bsde_residual(m, v, simulate_reference(m, 0.0, s % 2, s)) <= 1e-10);
    }
    SUBCASE("D2 fine grid") {
        const auto m = instance_d2(1000);
        const auto v = hjb_march(m);
        for (std::uint64_t s = 0; s < 1000; ++s) {
            const auto t = simulate_reference(m, 0.0, s % 2, s, 4);
            const double r = bsde_residual(m, v, t);
            CHECK(r <= 1e-3);
            CHECK(r <= bsde_residual_tolerance(m, t.jumps.size()));
        }
    }
}

TEST_CASE("linear backward solution") {
    SUBCASE("agrees with an RK4 oracle") {
        const auto m = instance_d2(6);
        DriftField f(m.n_cells(), 2);
        StreamRng rng(9, 0);
        for (std::size_t j = 0; j < m.n_cells(); ++j)
            for (std::size_t x = 0; x < 2; ++x) f(j, x) = 2.0 * rng.uniform() - 1.0;
        const LinearSolution w(m, f);
        const auto oracle = rk4_linear(m, f, 2000);
        CHECK(w(0.0, 0) == doctest::Approx(oracle[0]).epsilon(1e-11));
        CHECK(w(0.0, 1) == doctest::Approx(oracle[1]).epsilon(1e-11));
        CHECK(w.at_node(0, 1) == doctest::Approx(w(0.0, 1)).epsilon(1e-15));
        CHECK(w(1.0, 1) == m.g(1));
    }
    SUBCASE("single state") {
        const auto m = single_state(3);
        DriftField f(3, 1, 0.7);
        const LinearSolution w(m, f);
        for (double t : {0.0, 0.2, 0.5, 0.9})
            CHECK(w(t, 0) == doctest::Approx(0.3 + 0.7 * (cumulative_A(m, 1.0) - cumulative_A(m, t))).epsilon(1e-14));
    }
}

TEST_CASE("energy identity") {
    SUBCASE("zero data") {
        auto m = instance_d2(2);
        m.terminal_cost = {0.0, 0.0};
        const auto rep = energy_identity_check(m, DriftField(2, 2), 2.0, 1000, 1);
        CHECK(rep.lhs == 0.0);
        CHECK(rep.rhs == 0.0);
    }
    SUBCASE("single state is deterministic") {
        const auto m = single_state(3);
        const auto rep = energy_identity_check(m, DriftField(3, 1, 0.6), 2.0, 100, 1);
        CHECK(rep.rel_error <= 1e-10);
        CHECK(rep.estimate_lhs <= rep.estimate_rhs);
    }
    SUBCASE("D2") {
        const auto m = instance_d2(2);
        DriftField f(2, 2);
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t x = 0; x < 2; ++x) f(j, x) = m.l(j, x, 0);
        const auto rep = energy_identity_check(m, f, 2.0, 50000, 2);
        CHECK(std::abs(rep.lhs - rep.rhs) <= 3.0 * rep.combined_se + 1e-3);
        CHECK(rep.c1 == doctest::Approx(6.0));
        CHECK(rep.c2 == doctest::Approx(6.0));
    }
}

TEST_CASE("a priori estimates") {
    const auto m = instance_d2(20);
    SUBCASE("identical models") {
        const auto rep = apriori_check(m, m, 2.0, 500, 1);
        CHECK(rep.y_norm == 0.0);
        CHECK(rep.z_norm == 0.0);
        CHECK(rep.xi_term == 0.0);
        CHECK(rep.f_term == 0.0);
        CHECK(rep.y_holds);
        CHECK(rep.z_holds);
    }
    SUBCASE("terminal shift by c") {
        const double c = 0.2, beta = 3.0;
        auto shifted = m;
        shifted.terminal_cost = {m.g(0) - c, m.g(1) - c};
        const auto rep = apriori_check(m, shifted, beta, 2000, 1);
        const double a_t = cumulative_A(m, 1.0);
        CHECK(rep.y_norm == doctest::Approx(c * c * std::expm1(beta * a_t) / beta).epsilon(1e-8));
        CHECK(rep.z_norm <= 1e-20);
        CHECK(rep.xi_term == doctest::Approx(c * c * std::exp(beta * a_t)));
        CHECK(rep.y_holds);
        CHECK(rep.z_holds);
    }
    SUBCASE("beta too small") {
        CHECK_THROWS_AS(apriori_check(m, m, 1.0, 10, 1), BetaTooSmall);
    }
}
