#pragma once

#include <cstddef>

#include "mppctl/model.hpp"

namespace mppctl {

/// Two states, two actions, a = 1, T = 1, l(x, a0) = 1, l(x, a1) = 0.5, g = 0.
/// v(t, x) = 0.5 (1 - t).
ModelSpec instance_d1(std::size_t cells = 10);

/// Two states, two actions, T = 1, data constant on [0, 0.5) and [0.5, 1];
/// `cells` must be even.
ModelSpec instance_d2(std::size_t cells = 2);

/// Single action, `marks` equally likely marks, a = rate, r = modifier, l = 0, g = 0.
ModelSpec constant_model(double modifier, double rate = 1.0, double horizon = 1.0,
                         std::size_t marks = 2, std::size_t cells = 1);

}  // namespace mppctl
