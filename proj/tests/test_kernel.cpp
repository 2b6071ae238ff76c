#include <catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "ordbo/errors.hpp"
#include "ordbo/kernel.hpp"
#include "ordbo/normal.hpp"
#include "ordbo/random.hpp"

using namespace ordbo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd random_points(Rng& rng, int n, int d, double scale = 3.0) {
    Eigen::MatrixXd p(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) p(i, k) = rng.uniform(0.0, scale);
    return p;
}

}  // namespace

TEST_CASE("kernel values at reference distances") {
    KernelSpec m32;
    KernelSpec se{KernelFamily::SquaredExponential};
    CHECK(kernel_value(m32, 0.0) == 1.0);
    CHECK(kernel_value(se, 0.0) == 1.0);
    // 50-digit reference values
    CHECK_THAT(kernel_value(m32, 1.0), WithinRel(0.4833577245965076506, 1e-14));
    CHECK_THAT(kernel_value(se, 1.0), WithinRel(0.6065306597126334236, 1e-14));
    CHECK_THROWS_AS(kernel_value(m32, -1e-3), DomainError);
}

TEST_CASE("kernel is monotone non-increasing on random pairs") {
    Rng rng(11);
    for (auto fam : {KernelFamily::Matern32, KernelFamily::SquaredExponential}) {
        KernelSpec spec{fam};
        for (int t = 0; t < 2000; ++t) {
            double a = rng.uniform(0.0, 8.0), b = rng.uniform(0.0, 8.0);
            if (a > b) std::swap(a, b);
            CHECK(kernel_value(spec, a) >= kernel_value(spec, b));
        }
    }
}

TEST_CASE("derivative helper matches finite differences") {
    for (auto fam : {KernelFamily::Matern32, KernelFamily::SquaredExponential}) {
        KernelSpec spec{fam};
        for (double r : {0.05, 0.3, 1.0, 2.5}) {
            const double h = 1e-6;
            const double fd = (kernel_value(spec, r + h) - kernel_value(spec, r - h)) / (2 * h);
            CHECK_THAT(kernel_dr_over_r(spec, r) * r, WithinRel(fd, 1e-7));
        }
    }
}

TEST_CASE("covariance matrix assembly") {
    KernelSpec spec;
    Eigen::MatrixXd one(1, 2);
    one << 0.3, 0.4;
    CHECK(cov_matrix(spec, one)(0, 0) == 1.0);

    Eigen::MatrixXd twin(2, 1);
    twin << 0.7, 0.7;
    CHECK(cov_matrix(spec, twin).isConstant(1.0));

    Rng rng(3);
    const auto p = random_points(rng, 3, 2);
    const auto K = cov_matrix(spec, p);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double r2 = 0.0;
            for (int k = 0; k < 2; ++k) r2 += (p(i, k) - p(j, k)) * (p(i, k) - p(j, k));
            const double r = std::sqrt(r2);
            const double expected = (1.0 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r);
            CHECK_THAT(K(i, j), WithinAbs(expected, 1e-15));
        }
    }

    Eigen::MatrixXd bad(2, 1);
    bad << 0.0, std::nan("");
    CHECK_THROWS_AS(cov_matrix(spec, bad), DomainError);
}

TEST_CASE("covariance matrices are positive semi-definite") {
    Rng rng(5);
    for (auto fam : {KernelFamily::Matern32, KernelFamily::SquaredExponential}) {
        KernelSpec spec{fam};
        for (int t = 0; t < 20; ++t) {
            const int n = 2 + static_cast<int>(rng.uniform() * 49);
            const int d = 1 + static_cast<int>(rng.uniform() * 3);
            const auto K = cov_matrix(spec, random_points(rng, n, d));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
            CHECK(es.eigenvalues().minCoeff() >= -1e-8);
            CHECK((K - K.transpose()).norm() == 0.0);
        }
    }
}

TEST_CASE("cholesky reconstruction and jitter escalation") {
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    auto r0 = chol_factor(id, 0.0);
    CHECK(r0.lower.isIdentity(0.0));

    Eigen::MatrixXd m(2, 2);
    m << 1, 0.5, 0.5, 1;
    auto r1 = chol_factor(m, 0.0);
    CHECK((r1.lower * r1.lower.transpose() - m).norm() < 1e-10);

    Eigen::MatrixXd sing(2, 2);
    sing << 1, 1, 1, 1;
    auto r2 = chol_factor(sing, 0.0);
    CHECK(r2.jitter > 0.0);
    CHECK(r2.jitter <= kMaxJitter);
    Eigen::MatrixXd target = sing;
    target.diagonal().array() += r2.jitter;
    CHECK((r2.lower * r2.lower.transpose() - target).norm() / sing.norm() < 1e-8);

    Eigen::MatrixXd neg(2, 2);
    neg << 1, 0, 0, -1;
    try {
        chol_factor(neg, 0.0);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(e.jitter() == Catch::Approx(kMaxJitter));
    }
}

TEST_CASE("cholesky round trip on random kernel matrices") {
    Rng rng(7);
    KernelSpec spec;
    for (int t = 0; t < 30; ++t) {
        const int n = 2 + static_cast<int>(rng.uniform() * 30);
        const auto K = cov_matrix(spec, random_points(rng, n, 2, 1.0));
        const auto c = chol_factor(K, spec.jitter);
        Eigen::MatrixXd target = K;
        target.diagonal().array() += c.jitter;
        CHECK((c.lower * c.lower.transpose() - target).norm() / K.norm() < 1e-8);
    }
}

TEST_CASE("normal helpers") {
    CHECK_THAT(normal::pdf(0.0), WithinRel(0.39894228040143267794, 1e-15));
    CHECK_THAT(normal::log_cdf(0.0), WithinRel(std::log(0.5), 1e-15));
    CHECK_THAT(normal::log_cdf_diff(0.5, -0.5), WithinRel(-0.95991633369562231933, 1e-14));
    // deep tails stay finite
    CHECK(std::isfinite(normal::log_cdf(-60.0)));
    CHECK(std::isfinite(normal::log_cdf_diff(-40.0, -41.0)));
    CHECK(std::isfinite(normal::log_cdf_diff(41.0, 40.0)));
    // reflection symmetry
    CHECK_THAT(normal::log_cdf_diff(9.0, 8.0), WithinRel(normal::log_cdf_diff(-8.0, -9.0), 1e-12));
    CHECK(normal::log_cdf_diff(std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity()) == 0.0);
}
