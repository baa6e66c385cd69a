#include <cmath>

#include "doctest.h"
#include "mppctl/errors.hpp"
#include "mppctl/instances.hpp"
#include "mppctl/model.hpp"

using namespace mppctl;

namespace {

ModelSpec two_cell_rates(double a0, double a1) {
    auto m = ModelSpec::uniform({"x"}, {"u"}, 1.0, 2);
    m.base_rate = {a0, a1};
    m.mark_dist = {1.0, 1.0};
    return validate_model(m);
}

}  // namespace

TEST_CASE("validate_model accepts D1 and D2") {
    CHECK_NOTHROW(instance_d2(2));
    CHECK_NOTHROW(instance_d2(1000));
    CHECK_NOTHROW(instance_d1(10));
}

TEST_CASE("validate_model rejects malformed data") {
    auto m = instance_d2(2);
    SUBCASE("mark law summing to 1.2") {
        m.phi(0, 0) = 0.6;
        m.phi(0, 1) = 0.6;
        CHECK_THROWS_AS(validate_model(m), MalformedDistribution);
    }
    SUBCASE("negative mark probability") {
        m.phi(0, 0) = -0.5;
        m.phi(0, 1) = 1.5;
        CHECK_THROWS_AS(validate_model(m), MalformedDistribution);
    }
    SUBCASE("rate modifier above C_r") {
        m.r(1, 0, 1) = m.C_r + 1.0;
        CHECK_THROWS_AS(validate_model(m), BoundViolation);
    }
    SUBCASE("negative rate modifier") {
        m.r(1, 0, 1) = -0.1;
        CHECK_THROWS_AS(validate_model(m), BoundViolation);
    }
    SUBCASE("running cost above C_l") {
        m.l(0, 1, 0) = m.C_l * 1.5;
        CHECK_THROWS_AS(validate_model(m), BoundViolation);
    }
    SUBCASE("C_r not above 1") {
        m.C_r = 1.0;
        CHECK_THROWS_AS(validate_model(m), BoundViolation);
    }
    SUBCASE("non-increasing grid") {
        m.time_grid = {0.0, 0.5, 0.5};
        CHECK_THROWS_AS(validate_model(m), BadGrid);
    }
    SUBCASE("grid not ending at T") {
        m.time_grid = {0.0, 0.5, 0.9};
        CHECK_THROWS_AS(validate_model(m), BadGrid);
    }
    SUBCASE("table shape") {
        m.running_cost.pop_back();
        CHECK_THROWS_AS(validate_model(m), ShapeMismatch);
    }
}

TEST_CASE("lipschitz constants") {
    CHECK(lipschitz_constants(constant_model(1.0)).L == 0.0);
    CHECK(lipschitz_constants(instance_d2(2)).L == 1.0);
    CHECK(lipschitz_constants(instance_d2(2)).L_prime == 0.0);

    auto m = ModelSpec::uniform({"a", "b"}, {"u", "w"}, 1.0, 1);
    m.base_rate = {1.0};
    m.mark_dist = {0.5, 0.5};
    m.rate_modifier = {0.5, 2.0, 2.0, 0.5};
    m.C_r = 2.0;
    CHECK(lipschitz_constants(validate_model(m)).L == 1.0);

    SUBCASE("invariant under action permutation") {
        auto d2 = instance_d2(4);
        auto swapped = d2;
        for (std::size_t j = 0; j < d2.n_cells(); ++j)
            for (std::size_t y = 0; y < 2; ++y) {
                swapped.r(j, y, 0) = d2.r(j, y, 1);
                swapped.r(j, y, 1) = d2.r(j, y, 0);
            }
        CHECK(lipschitz_constants(swapped).L == lipschitz_constants(d2).L);
    }
}

TEST_CASE("beta thresholds") {
    SUBCASE("L = 0: largest root of beta^3 - 31 beta^2 + 24") {
        // 6/(b-1) + 24/b (1 + 1/b) = 1 cleared of denominators.
        double b = 31.0;
        for (int i = 0; i < 60; ++i) b -= (b * b * b - 31.0 * b * b + 24.0) / (3.0 * b * b - 62.0 * b);
        const auto rep = beta_thresholds(constant_model(1.0));
        CHECK(rep.beta_hjb == doctest::Approx(b).epsilon(1e-9));
        CHECK(hjb_weight_criterion(0.0, rep.beta_hjb) < 1.0);
        CHECK(hjb_weight_criterion(0.0, rep.beta_hjb - 1e-6) >= 1.0);
    }
    SUBCASE("L = 1") {
        const auto rep = beta_thresholds(instance_d2(2));
        CHECK(rep.beta_bsde == 2.0);
        CHECK(rep.beta_girsanov == 19.0);
        CHECK(hjb_weight_criterion(1.0, rep.beta_hjb) < 1.0);
        CHECK(hjb_weight_criterion(1.0, rep.beta_hjb - 1e-6) >= 1.0);
        const auto cc = contraction_constants(1.0, rep.beta_hjb);
        CHECK(cc.total() == doctest::Approx(hjb_weight_criterion(1.0, rep.beta_hjb)));
        CHECK(cc.c1 == doctest::Approx(10.0 / (rep.beta_hjb - 1.0)));
    }
    SUBCASE("no root for huge L") {
        auto m = constant_model(1.0);
        m.C_r = 5000.0;
        m.rate_modifier.assign(m.rate_modifier.size(), 4000.0);
        CHECK_THROWS_AS(beta_thresholds(validate_model(m)), NoRoot);
    }
}

TEST_CASE("cumulative compensator") {
    const auto unit = constant_model(1.0);
    CHECK(cumulative_A(unit, 0.7) == doctest::Approx(0.7));
    CHECK(cumulative_A(unit, 0.0) == 0.0);
    const auto m = two_cell_rates(2.0, 1.0);
    CHECK(cumulative_A(m, 0.75) == doctest::Approx(1.25));
    CHECK(cumulative_A(m, 1.0) == 1.5);
    CHECK_THROWS_AS(cumulative_A(m, 1.01), OutOfHorizon);
    CHECK_THROWS_AS(cumulative_A(m, -0.01), OutOfHorizon);

    double prev = 0.0;
    for (int k = 1; k <= 1000; ++k) {
        const double a = cumulative_A(m, k / 1000.0);
        CHECK(a >= prev);
        CHECK(a - prev <= 2.0 / 1000.0 + 1e-12);
        prev = a;
    }
}

TEST_CASE("cell index and refinement") {
    const auto m = instance_d2(2);
    CHECK(cell_index(m, 0.0) == 0);
    CHECK(cell_index(m, 0.5) == 1);
    CHECK(cell_index(m, 1.0) == 1);
    const auto fine = refine_model(m, 7);
    CHECK(fine.n_cells() == 14);
    CHECK_NOTHROW(validate_model(fine));
    CHECK(fine.time_grid[7] == 0.5);
    CHECK(cumulative_A(fine, 1.0) == doctest::Approx(cumulative_A(m, 1.0)).epsilon(1e-14));
    const auto nodes = compensator_at_nodes(fine);
    CHECK(nodes.back() == doctest::Approx(0.7));
}
