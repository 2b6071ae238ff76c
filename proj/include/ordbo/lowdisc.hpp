#pragma once

#include <Eigen/Dense>

#include "ordbo/random.hpp"

namespace ordbo {

/// Radical inverse of `index` in `base`.
double radical_inverse(unsigned long long index, unsigned base);

/// `count` x `d` Halton points in [0, 1)^d (prime bases, index starting at 1), shifted
/// modulo 1 by a random Cranley-Patterson offset when `rng` is given.
Eigen::MatrixXd halton_points(int count, int d, Rng* rng = nullptr);

}  // namespace ordbo
