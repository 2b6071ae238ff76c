#include "ordbo/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Dense>

#include "ordbo/errors.hpp"

namespace ordbo {
namespace {

// Golub-Welsch for the initial guesses, then Newton polish on the Hermite
// recurrence so nodes and weights are accurate to machine precision.
GaussHermite compute_rule(int order) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussHermite rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double pi_quarter = std::pow(std::numbers::pi, -0.25);
    for (int i = 0; i < order; ++i) {
        double x = eig.eigenvalues()(i);
        double dp = 0.0;
        for (int iter = 0; iter < 10; ++iter) {
            // orthonormal Hermite functions: p_k = x sqrt(2/k) p_{k-1} - sqrt((k-1)/k) p_{k-2}
            double p1 = pi_quarter;
            double p2 = 0.0;
            for (int k = 1; k <= order; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0 / k) * p2 - std::sqrt((k - 1.0) / k) * p3;
            }
            dp = std::sqrt(2.0 * order) * p2;
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / (dp * dp);
    }
    return rule;
}

}  // namespace

const GaussHermite& gauss_hermite(int order) {
    if (order < 2) throw DomainError("gauss_hermite: order must be >= 2");
    static std::mutex mutex;
    static std::map<int, GaussHermite> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

}  // namespace ordbo
