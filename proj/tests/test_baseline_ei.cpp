#include <catch_amalgamated.hpp>

#include <cmath>

#include "ordbo/baseline_ei.hpp"
#include "ordbo/kernel.hpp"

using namespace ordbo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd uniform_points(Rng& rng, int n, int d) {
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) X(i, k) = rng.uniform();
    return X;
}

// Matern 3/2 draw with the given lengthscale and variance at the rows of X.
Eigen::VectorXd gp_draw(Rng& rng, const Eigen::MatrixXd& X, double lengthscale, double var) {
    const Eigen::MatrixXd K = var * cov_matrix(KernelSpec{}, X / lengthscale);
    const auto chol = chol_factor(K, 1e-10);
    Eigen::VectorXd z(X.rows());
    for (int i = 0; i < X.rows(); ++i) z(i) = rng.normal();
    return chol.lower * z;
}

}  // namespace

TEST_CASE("expected improvement values") {
    CHECK(expected_improvement(-1.0, 0.0, 0.0) == 1.0);
    CHECK(expected_improvement(1.0, 0.0, 0.0) == 0.0);
    CHECK_THAT(expected_improvement(0.0, 1.0, 0.0), WithinRel(0.3989422804014327, 1e-14));
    // scipy-style reference: z = 0.5, sd = 2 -> 1 * Phi(0.5) + 2 * phi(0.5)
    CHECK_THAT(expected_improvement(-1.0, 2.0, 0.0), WithinRel(0.6914624612740131 + 2.0 * 0.3520653267642995, 1e-13));
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const double mu = rng.uniform(-3, 3), sd = rng.uniform(0, 2), best = rng.uniform(-3, 3);
        CHECK(expected_improvement(mu, sd, best) >= std::max(best - mu, 0.0) - 1e-15);
        if (mu < best) {
            CHECK(expected_improvement(mu, sd + 0.1, best) >= expected_improvement(mu, sd, best));
            if (best - mu < 3.0 * sd) CHECK(expected_improvement(mu, sd + 0.1, best) > expected_improvement(mu, sd, best));
        }
    }
}

TEST_CASE("log marginal gradient matches finite differences") {
    Rng rng(2);
    for (int t = 0; t < 10; ++t) {
        const int d = 1 + t % 3;
        auto X = uniform_points(rng, 12, d);
        Eigen::VectorXd y(12);
        for (int i = 0; i < 12; ++i) y(i) = std::sin(3.0 * X.row(i).sum()) + 0.1 * rng.normal();
        GpHyperparams hp{rng.uniform(0.1, 1.0), rng.uniform(0.5, 2.0), rng.uniform(0.01, 0.2)};
        Eigen::Vector3d g;
        gp_log_marginal(X, y, hp, &g);
        const double h = 1e-5;
        auto at = [&](int which, double e) {
            auto q = hp;
            double* p = which == 0 ? &q.lengthscale : which == 1 ? &q.signal_var : &q.noise_var;
            *p *= std::exp(e);
            return gp_log_marginal(X, y, q);
        };
        Eigen::Vector3d fd;
        for (int j = 0; j < 3; ++j) fd(j) = (at(j, h) - at(j, -h)) / (2 * h);
        CHECK((g - fd).norm() / std::max(fd.norm(), 1e-6) < 1e-4);
    }
}

TEST_CASE("fitted hyperparameters reach the generating likelihood") {
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        auto X = uniform_points(rng, 20, 2);
        const GpHyperparams truth{0.4, 1.5, kGpHyperMin};
        const Eigen::VectorXd y = gp_draw(rng, X, truth.lengthscale, truth.signal_var);
        Rng fit_rng(100 + t);
        const auto hp = fit_hyperparameters(X, y, fit_rng);
        CHECK(gp_log_marginal(X, y, hp) >= gp_log_marginal(X, y, truth) - 1e-3);
        for (double v : {hp.lengthscale, hp.signal_var, hp.noise_var}) {
            CHECK(v >= kGpHyperMin);
            CHECK(v <= kGpHyperMax);
        }
    }
}

TEST_CASE("GP posterior interpolates and ignores ordering") {
    Rng rng(4);
    auto X = uniform_points(rng, 10, 2);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y(i) = 100.0 * X(i, 0) * X(i, 0) - 30.0 * X(i, 1);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    const GpModel m(X, y, lo, hi, GpHyperparams{0.5, 1.0, 1e-8});
    Eigen::VectorXd mean, sd;
    m.predict(X, mean, sd);
    for (int i = 0; i < 10; ++i) CHECK_THAT(mean(i), WithinAbs(y(i), 1e-3));

    Eigen::VectorXi perm(10);
    for (int i = 0; i < 10; ++i) perm(i) = (i * 3 + 1) % 10;
    Eigen::MatrixXd Xp(10, 2);
    Eigen::VectorXd yp(10);
    for (int i = 0; i < 10; ++i) {
        Xp.row(i) = X.row(perm(i));
        yp(i) = y(perm(i));
    }
    const GpModel mp(Xp, yp, lo, hi, GpHyperparams{0.5, 1.0, 1e-3});
    const GpModel mo(X, y, lo, hi, GpHyperparams{0.5, 1.0, 1e-3});
    auto Q = uniform_points(rng, 50, 2);
    Eigen::VectorXd m1, s1, m2, s2;
    mo.predict(Q, m1, s1);
    mp.predict(Q, m2, s2);
    CHECK((m1 - m2).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, m1.cwiseAbs().maxCoeff()));
    CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("constant outputs still fit") {
    Rng rng(5);
    auto X = uniform_points(rng, 6, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 2.5);
    const auto m = GpModel::fit(X, y, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), rng);
    Eigen::VectorXd mean, sd;
    m.predict(X, mean, sd);
    CHECK(mean.allFinite());
    CHECK_THAT(mean(0), WithinAbs(2.5, 1e-6));
}

TEST_CASE("EI selection") {
    Rng rng(6);
    auto X = uniform_points(rng, 8, 2);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) y(i) = (X.row(i).array() - 0.3).square().sum();
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    const auto m = GpModel::fit(X, y, lo, hi, rng);

    Eigen::MatrixXd one(1, 2);
    one << 0.25, 0.75;
    CHECK(argmax_ei(m, one) == one.row(0).transpose());

    Rng a(9), b(9);
    const auto xa = select_ei(m, a);
    const auto xb = select_ei(m, b);
    CHECK(xa == xb);
    CHECK((xa.array() >= 0.0).all());
    CHECK((xa.array() <= 1.0).all());

    // dense 100 x 100 grid oracle
    Eigen::MatrixXd grid(10000, 2);
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) grid.row(i * 100 + j) << (i + 0.5) / 100.0, (j + 0.5) / 100.0;
    Eigen::VectorXd mean, sd;
    m.predict(grid, mean, sd);
    double best_ei = 0.0;
    for (int i = 0; i < 10000; ++i) best_ei = std::max(best_ei, expected_improvement(mean(i), sd(i), m.best_observed()));
    Eigen::VectorXd ms, ss;
    m.predict(xa.transpose(), ms, ss);
    CHECK(expected_improvement(ms(0), ss(0), m.best_observed()) >= 0.9 * best_ei);
}
