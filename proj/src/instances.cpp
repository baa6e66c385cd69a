#include "mppctl/instances.hpp"

#include <algorithm>
#include <string>

#include "mppctl/errors.hpp"

namespace mppctl {

ModelSpec instance_d1(std::size_t cells) {
    ModelSpec m = ModelSpec::uniform({"s0", "s1"}, {"a0", "a1"}, 1.0, cells);
    const double r[2][2] = {{1.0, 2.0}, {0.5, 1.5}};
    for (std::size_t j = 0; j < cells; ++j) {
        m.base_rate[j] = 1.0;
        for (std::size_t y = 0; y < 2; ++y) {
            m.phi(j, y) = 0.5;
            for (std::size_t u = 0; u < 2; ++u) m.r(j, y, u) = r[y][u];
            m.l(j, y, 0) = 1.0;
            m.l(j, y, 1) = 0.5;
        }
    }
    m.C_r = 2.0;
    m.C_l = 1.0;
    return validate_model(std::move(m));
}

ModelSpec instance_d2(std::size_t cells) {
    if (cells == 0 || cells % 2 != 0) throw BadGrid("instance D2 needs an even number of cells");
    ModelSpec m = ModelSpec::uniform({"s0", "s1"}, {"a0", "a1"}, 1.0, cells);
    for (std::size_t j = 0; j < cells; ++j) {
        const bool late = j >= cells / 2;
        m.base_rate[j] = late ? 0.8 : 0.6;
        m.phi(j, 0) = late ? 0.3 : 0.5;
        m.phi(j, 1) = late ? 0.7 : 0.5;
        m.r(j, 0, 0) = 1.0;
        m.r(j, 1, 0) = 1.0;
        m.r(j, 0, 1) = 2.0;
        m.r(j, 1, 1) = 0.5;
        m.l(j, 0, 0) = 0.0;
        m.l(j, 0, 1) = 0.6;
        m.l(j, 1, 0) = 1.0;
        m.l(j, 1, 1) = late ? 1.5 : 1.2;
    }
    m.terminal_cost = {0.0, 1.0};
    m.C_r = 2.0;
    m.C_l = 2.0;
    return validate_model(std::move(m));
}

ModelSpec constant_model(double modifier, double rate, double horizon, std::size_t marks,
                         std::size_t cells) {
    std::vector<std::string> states;
    for (std::size_t k = 0; k < marks; ++k) states.push_back("k" + std::to_string(k));
    ModelSpec m = ModelSpec::uniform(std::move(states), {"u0"}, horizon, cells);
    std::fill(m.base_rate.begin(), m.base_rate.end(), rate);
    std::fill(m.mark_dist.begin(), m.mark_dist.end(), 1.0 / static_cast<double>(marks));
    std::fill(m.rate_modifier.begin(), m.rate_modifier.end(), modifier);
    m.C_r = std::max(2.0, modifier);
    m.C_l = 1.0;
    return validate_model(std::move(m));
}

}  // namespace mppctl
