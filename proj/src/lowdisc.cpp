#include "ordbo/lowdisc.hpp"

#include <cmath>

#include "ordbo/errors.hpp"

namespace ordbo {
namespace {

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

double radical_inverse(unsigned long long index, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

Eigen::MatrixXd halton_points(int count, int d, Rng* rng) {
    if (d < 1 || d > static_cast<int>(std::size(kPrimes))) throw DomainError("halton_points: unsupported dimension");
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
    if (rng) {
        for (int k = 0; k < d; ++k) shift(k) = rng->uniform();
    }
    Eigen::MatrixXd out(count, d);
    for (int i = 0; i < count; ++i) {
        for (int k = 0; k < d; ++k) {
            double v = radical_inverse(static_cast<unsigned long long>(i) + 1, kPrimes[k]) + shift(k);
            out(i, k) = v - std::floor(v);
        }
    }
    return out;
}

}  // namespace ordbo
