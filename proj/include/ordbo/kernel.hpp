#pragma once

#include <Eigen/Dense>

namespace ordbo {

enum class KernelFamily { Matern32, SquaredExponential };

/// Unit-variance, unit-lengthscale stationary kernel. Amplitude lives in the
/// bin edges and distances in the warp increments, so neither is a field.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern32;
    double jitter = 1e-10;  ///< added to matrix diagonals before factorisation, in (0, 1e-4]
};

constexpr double kMinJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;

/// k(r) for a non-negative Euclidean distance r.
double kernel_value(const KernelSpec& spec, double r);

/// k'(r) / r, finite at r = 0 for both families. Used for gradients with respect to locations.
double kernel_dr_over_r(const KernelSpec& spec, double r);

/// Covariance between every row of `a` and every row of `b`.
Eigen::MatrixXd cross_cov(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Symmetric covariance matrix of the rows of `points` (unit diagonal, no jitter).
Eigen::MatrixXd cov_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points);

struct CholeskyResult {
    Eigen::MatrixXd lower;  ///< L with L * L^T = m + jitter * I
    double jitter = 0.0;    ///< jitter actually used
};

/// Cholesky factor of m + jitter*I. On failure the jitter escalates x10 (starting no lower
/// than 1e-10) up to 1e-4, then throws NumericalError carrying the last attempted jitter.
CholeskyResult chol_factor(const Eigen::MatrixXd& m, double jitter);

/// log det of (L L^T) from its factor.
double log_det_from_chol(const Eigen::MatrixXd& lower);

}  // namespace ordbo
