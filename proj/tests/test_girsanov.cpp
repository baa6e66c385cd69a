#include <cmath>

#include "doctest.h"
#include "mppctl/girsanov.hpp"
#include "mppctl/hamiltonian.hpp"
#include "mppctl/hjb.hpp"
#include "mppctl/instances.hpp"

using namespace mppctl;

TEST_CASE("likelihood closed forms") {
    SUBCASE("r = 1 gives L = 1 on every path") {
        const auto m = constant_model(1.0, 3.0);
        const auto p = Policy::constant(m, 0);
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto lp = likelihood(m, p, simulate_reference(m, 0.0, 0, s));
            CHECK(lp.terminal == 1.0);
            for (double v : lp.values) CHECK(v == 1.0);
        }
    }
    SUBCASE("r = rho: L_T = e^{1-rho} rho^N") {
        const double rho = 1.5;
        const auto m = constant_model(rho);
        const auto p = Policy::constant(m, 0);
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto t = simulate_reference(m, 0.0, 0, s, 3);
            const double expect = std::exp(1.0 - rho) * std::pow(rho, double(t.jumps.size()));
            CHECK(likelihood(m, p, t).terminal == doctest::Approx(expect).epsilon(1e-13));
        }
    }
    SUBCASE("zero factor pins L to 0 after the jump") {
        auto m = constant_model(1.0);
        m.r(0, 1, 0) = 0.0;
        const auto p = Policy::constant(m, 0);
        Trajectory t{0.0, 0, {{0.2, 0}, {0.4, 1}, {0.7, 0}}, 0};
        const auto lp = likelihood(m, p, t);
        REQUIRE(lp.values.size() == 4);
        CHECK(lp.values[0] > 0.0);
        CHECK(lp.values[1] == 0.0);
        CHECK(lp.values[2] == 0.0);
        CHECK(lp.terminal == 0.0);
    }
}

TEST_CASE("likelihood is multiplicative over subintervals") {
    const auto m = instance_d2(10);
    const auto p = policy_from_value(m, hjb_march(m));
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto t = simulate_reference(m, 0.0, s % 2, s, 9);
        const double mid = 0.43;
        const double head = likelihood(m, p, t, mid).terminal;
        const double tail = likelihood(m, p, restart(t, mid, state_at(t, mid))).terminal;
        const double whole = likelihood(m, p, t).terminal;
        CHECK(head * tail == doctest::Approx(whole).epsilon(1e-12));
    }
}

TEST_CASE("normalization") {
    SUBCASE("r = 1: exactly one, zero error") {
        const auto m = constant_model(1.0);
        const auto rep = verify_normalization(m, Policy::constant(m, 0), 1000, 1);
        CHECK(rep.estimate == 1.0);
        CHECK(rep.std_error == 0.0);
    }
    SUBCASE("D2 under the optimal policy") {
        const auto m = instance_d2(10);
        const auto p = policy_from_value(m, hjb_march(m));
        const auto rep = verify_normalization(m, p, 100000, 2);
        CHECK(std::abs(rep.estimate - 1.0) <= 3.0 * rep.std_error);
    }
}

TEST_CASE("second moment bound") {
    SUBCASE("r = 1") {
        const auto m = constant_model(1.0);
        const auto rep = verify_moment_bound(m, Policy::constant(m, 0), 1000, 1);
        CHECK(rep.estimate_L2 == 1.0);
        CHECK(rep.bound == doctest::Approx(std::exp(19.0 / 2.0)));
    }
    SUBCASE("r = 2: E L_T^2 = e") {
        const auto m = constant_model(2.0);
        const std::size_t n = 100000;
        const auto rep = verify_moment_bound(m, Policy::constant(m, 0), n, 3);
        // L_T^2 = e^{-2} 4^N is heavy tailed and the sample SE runs low; use the exact
        // variance e^{-4} E 16^N - e^2 = e^{11} - e^2 instead.
        const double se = std::sqrt((std::exp(11.0) - std::exp(2.0)) / double(n));
        CHECK(std::abs(rep.estimate_L2 - std::exp(1.0)) <= 3.0 * se);
        CHECK(rep.estimate_L2 <= rep.bound);
    }
    SUBCASE("D2") {
        const auto m = instance_d2(2);
        const auto rep = verify_moment_bound(m, Policy::constant(m, 1), 20000, 3);
        CHECK(rep.estimate_L2 <= rep.bound + 3.0 * rep.std_error);
    }
}

TEST_CASE("compensator check") {
    SUBCASE("r = 1 reproduces mark frequencies") {
        const auto m = constant_model(1.0, 2.0);
        const auto rep = empirical_compensator_check(m, Policy::constant(m, 0), 50000, 4);
        CHECK(rep.z_max <= 3.0);
        CHECK(std::abs(rep.direct[0] - 1.0) <= 3.0 * rep.direct_se[0]);
    }
    SUBCASE("D2 under the optimal policy") {
        const auto m = instance_d2(10);
        const auto p = policy_from_value(m, hjb_march(m));
        const auto rep = empirical_compensator_check(m, p, 50000, 5);
        CHECK(rep.z_max <= 3.0);
    }
}
