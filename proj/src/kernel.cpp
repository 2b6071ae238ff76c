#include "ordbo/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ordbo/errors.hpp"

namespace ordbo {
namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

}  // namespace

double kernel_value(const KernelSpec& spec, double r) {
    if (!(r >= 0.0)) throw DomainError("kernel_value: distance must be non-negative, got " + std::to_string(r));
    switch (spec.family) {
        case KernelFamily::Matern32:
            return (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
        case KernelFamily::SquaredExponential:
            return std::exp(-0.5 * r * r);
    }
    throw InternalError("kernel_value: unknown kernel family");
}

double kernel_dr_over_r(const KernelSpec& spec, double r) {
    switch (spec.family) {
        case KernelFamily::Matern32:
            return -3.0 * std::exp(-kSqrt3 * r);
        case KernelFamily::SquaredExponential:
            return -std::exp(-0.5 * r * r);
    }
    throw InternalError("kernel_dr_over_r: unknown kernel family");
}

Eigen::MatrixXd cross_cov(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw DomainError("cross_cov: dimension mismatch");
    if (!a.allFinite() || !b.allFinite()) throw DomainError("cross_cov: non-finite coordinates");
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            out(i, j) = kernel_value(spec, (a.row(i) - b.row(j)).norm());
        }
    }
    return out;
}

Eigen::MatrixXd cov_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points) {
    if (!points.allFinite()) throw DomainError("cov_matrix: non-finite coordinates");
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double k = kernel_value(spec, (points.row(i) - points.row(j)).norm());
            out(i, j) = k;
            out(j, i) = k;
        }
    }
    return out;
}

CholeskyResult chol_factor(const Eigen::MatrixXd& m, double jitter) {
    if (m.rows() != m.cols()) throw DomainError("chol_factor: matrix must be square");
    if (jitter < 0.0) throw DomainError("chol_factor: jitter must be non-negative");
    const Eigen::Index n = m.rows();
    double attempt = jitter;
    while (true) {
        Eigen::MatrixXd shifted = m;
        shifted.diagonal().array() += attempt;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd lower = llt.matrixL();
            if (lower.allFinite() && (lower.diagonal().array() > 0.0).all()) {
                return {std::move(lower), attempt};
            }
        }
        const double next = std::max(attempt * 10.0, kMinJitter);
        if (next > kMaxJitter * (1.0 + 1e-12) || n == 0) {
            throw NumericalError("chol_factor: matrix not positive definite after jitter " +
                                     std::to_string(attempt),
                                 attempt);
        }
        attempt = std::min(next, kMaxJitter);
    }
}

double log_det_from_chol(const Eigen::MatrixXd& lower) {
    return 2.0 * lower.diagonal().array().log().sum();
}

}  // namespace ordbo
