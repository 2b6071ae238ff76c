#pragma once

#include <vector>

namespace ordbo {

/// Physicists' Gauss-Hermite rule: sum_k w_k g(x_k) ~ int exp(-x^2) g(x) dx.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rule of the given order (>= 2), computed once per order and cached.
const GaussHermite& gauss_hermite(int order);

}  // namespace ordbo
