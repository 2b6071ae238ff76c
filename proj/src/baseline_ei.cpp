#include "ordbo/baseline_ei.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

#include "ordbo/errors.hpp"
#include "ordbo/kernel.hpp"
#include "ordbo/lowdisc.hpp"
#include "ordbo/normal.hpp"

namespace ordbo {
namespace {

const double kLogMin = std::log(kGpHyperMin);
const double kLogMax = std::log(kGpHyperMax);

Eigen::MatrixXd matern_scaled(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double ell, double sf2) {
    return sf2 * cross_cov(KernelSpec{}, A / ell, B / ell);
}

// theta in R^3 -> log hyperparameters inside the box
Eigen::Vector3d to_log(const Eigen::Vector3d& theta) {
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) out(i) = kLogMin + (kLogMax - kLogMin) / (1.0 + std::exp(-theta(i)));
    return out;
}

Eigen::Vector3d dlog_dtheta(const Eigen::Vector3d& theta) {
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-theta(i)));
        out(i) = (kLogMax - kLogMin) * s * (1.0 - s);
    }
    return out;
}

Eigen::Vector3d to_theta(const Eigen::Vector3d& logp) {
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) {
        const double f = std::clamp((logp(i) - kLogMin) / (kLogMax - kLogMin), 1e-9, 1.0 - 1e-9);
        out(i) = std::log(f / (1.0 - f));
    }
    return out;
}

GpHyperparams from_log(const Eigen::Vector3d& l) { return {std::exp(l(0)), std::exp(l(1)), std::exp(l(2))}; }

// objective to minimise: negative LML in theta space
double neg_lml(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::Vector3d& theta, Eigen::Vector3d& g) {
    Eigen::Vector3d gl;
    double v;
    try {
        v = gp_log_marginal(X, y, from_log(to_log(theta)), &gl);
    } catch (const NumericalError&) {
        g.setZero();
        return std::numeric_limits<double>::infinity();
    }
    g = -gl.cwiseProduct(dlog_dtheta(theta));
    return -v;
}

Eigen::Vector3d bfgs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::Vector3d x, double& fx) {
    Eigen::Vector3d g;
    fx = neg_lml(X, y, x, g);
    Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
    for (int it = 0; it < 100; ++it) {
        if (!std::isfinite(fx) || g.norm() < 1e-8) break;
        Eigen::Vector3d p = -H * g;
        if (p.dot(g) >= 0) {
            H.setIdentity();
            p = -g;
        }
        double step = 1.0;
        Eigen::Vector3d xn, gn;
        double fn = fx;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            xn = (x + step * p).cwiseMax(-30.0).cwiseMin(30.0);
            fn = neg_lml(X, y, xn, gn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * step * g.dot(p)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const Eigen::Vector3d s = xn - x;
        const Eigen::Vector3d yk = gn - g;
        const double sy = s.dot(yk);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
            H = (I - rho * s * yk.transpose()) * H * (I - rho * yk * s.transpose()) + rho * s * s.transpose();
        }
        const double improvement = fx - fn;
        x = xn;
        fx = fn;
        g = gn;
        if (improvement < 1e-10 * (1.0 + std::abs(fx))) break;
    }
    return x;
}

}  // namespace

double gp_log_marginal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyperparams& hp,
                       Eigen::Vector3d* grad) {
    const Eigen::Index n = X.rows();
    if (n != y.size() || n == 0) throw DomainError("gp_log_marginal: shape mismatch");
    if (!(hp.lengthscale > 0 && hp.signal_var > 0 && hp.noise_var > 0)) {
        throw DomainError("gp_log_marginal: hyperparameters must be positive");
    }
    const Eigen::MatrixXd Kf = matern_scaled(X, X, hp.lengthscale, hp.signal_var);
    Eigen::MatrixXd K = Kf;
    K.diagonal().array() += hp.noise_var;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) throw NumericalError("gp_log_marginal: factorisation failed", hp.noise_var);
    const Eigen::VectorXd alpha = llt.solve(y);
    const Eigen::MatrixXd L = llt.matrixL();
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    const double value = -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (grad) {
        const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd A = alpha * alpha.transpose() - Kinv;
        // dK / dlog ell: for Matern 3/2, k = sf2 (1 + a) e^-a, a = sqrt3 r / ell, dk/dlog ell = sf2 a^2 e^-a
        Eigen::MatrixXd dEll(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double a = std::sqrt(3.0) * (X.row(i) - X.row(j)).norm() / hp.lengthscale;
                dEll(i, j) = hp.signal_var * a * a * std::exp(-a);
            }
        }
        (*grad)(0) = 0.5 * (A.cwiseProduct(dEll)).sum();
        (*grad)(1) = 0.5 * (A.cwiseProduct(Kf)).sum();
        (*grad)(2) = 0.5 * hp.noise_var * A.trace();
    }
    return value;
}

GpHyperparams fit_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng, int starts) {
    if (X.rows() < 2) throw DomainError("gp_fit: need at least two observations");
    if (starts < 1) throw DomainError("gp_fit: need at least one start");
    Eigen::Vector3d best_theta;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        Eigen::Vector3d logp;
        if (s == 0) {
            logp << std::log(0.3), std::log(1.0), std::log(1e-2);
        } else {
            logp << rng.uniform(std::log(0.02), std::log(3.0)), rng.uniform(std::log(0.1), std::log(10.0)),
                rng.uniform(std::log(1e-3), std::log(0.3));
        }
        double f;
        const Eigen::Vector3d theta = bfgs(X, y, to_theta(logp), f);
        if (f < best) {
            best = f;
            best_theta = theta;
        }
    }
    if (!std::isfinite(best)) throw NumericalError("gp_fit: no start produced a finite marginal likelihood");
    return from_log(to_log(best_theta));
}

GpModel::GpModel(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& lower,
                 const Eigen::VectorXd& upper, const GpHyperparams& hp)
    : X_raw_(X), y_raw_(y), lower_(lower), upper_(upper), hp_(hp) {
    if (X.rows() != y.size() || X.rows() < 1) throw DomainError("GpModel: shape mismatch");
    if (lower.size() != X.cols() || upper.size() != X.cols() || !((upper - lower).array() > 0).all()) {
        throw DomainError("GpModel: invalid domain");
    }
    for (double v : {hp.lengthscale, hp.signal_var, hp.noise_var}) {
        if (!(v > 0.0 && std::isfinite(v))) {
            throw DomainError("GpModel: hyperparameters must be positive and finite");
        }
    }
    Xu_ = (X.rowwise() - lower.transpose()).array().rowwise() / (upper - lower).transpose().array();
    y_mean_ = y.mean();
    const double var = (y.array() - y_mean_).square().sum() / static_cast<double>(y.size());
    y_scale_ = var > 0 ? std::sqrt(var) : 1.0;
    ys_ = (y.array() - y_mean_) / y_scale_;
    Eigen::MatrixXd K = matern_scaled(Xu_, Xu_, hp_.lengthscale, hp_.signal_var);
    K.diagonal().array() += hp_.noise_var;
    auto chol = chol_factor(K, 0.0);
    L_ = std::move(chol.lower);
    alpha_ = L_.triangularView<Eigen::Lower>().solve(ys_);
    alpha_ = L_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
}

GpModel GpModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& lower,
                     const Eigen::VectorXd& upper, Rng& rng) {
    GpModel probe(X, y, lower, upper, GpHyperparams{});
    const auto hp = fit_hyperparameters(probe.Xu_, probe.ys_, rng);
    return GpModel(X, y, lower, upper, hp);
}

double GpModel::log_marginal() const { return gp_log_marginal(Xu_, ys_, hp_); }

void GpModel::predict(const Eigen::MatrixXd& Xq, Eigen::VectorXd& mean, Eigen::VectorXd& sd) const {
    const Eigen::MatrixXd Qu = (Xq.rowwise() - lower_.transpose()).array().rowwise() / (upper_ - lower_).transpose().array();
    const Eigen::MatrixXd Kq = matern_scaled(Qu, Xu_, hp_.lengthscale, hp_.signal_var);
    mean = (Kq * alpha_).array() * y_scale_ + y_mean_;
    const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Kq.transpose());
    const Eigen::VectorXd var = (hp_.signal_var - V.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
    sd = var.cwiseSqrt() * y_scale_;
}

double expected_improvement(double mu, double sd, double best) {
    if (!(sd >= 0.0)) throw DomainError("expected_improvement: sd must be non-negative");
    const double diff = best - mu;
    if (sd == 0.0) return std::max(diff, 0.0);
    const double z = diff / sd;
    return std::max(diff * normal::cdf(z) + sd * normal::pdf(z), 0.0);
}

Eigen::VectorXd argmax_ei(const GpModel& model, const Eigen::MatrixXd& candidates) {
    if (candidates.rows() == 0) throw DomainError("select_ei: no candidates");
    Eigen::VectorXd mean, sd;
    model.predict(candidates, mean, sd);
    const double best = model.best_observed();
    Eigen::Index arg = 0;
    double top = -1.0;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
        const double ei = expected_improvement(mean(i), sd(i), best);
        if (ei > top) {
            top = ei;
            arg = i;
        }
    }
    return candidates.row(arg).transpose();
}

Eigen::VectorXd select_ei(const GpModel& model, Rng& rng, int n_low_discrepancy) {
    const Eigen::VectorXd& lo = model.lower();
    const Eigen::VectorXd& hi = model.upper();
    const int d = static_cast<int>(lo.size());
    const Eigen::MatrixXd unit = halton_points(n_low_discrepancy, d, &rng);
    constexpr int kPerturbations = 8;
    const Eigen::MatrixXd& X = model.inputs();
    Eigen::MatrixXd cand(n_low_discrepancy + X.rows() * kPerturbations, d);
    for (int i = 0; i < n_low_discrepancy; ++i) {
        cand.row(i) = (lo.array() + unit.row(i).transpose().array() * (hi - lo).array()).transpose();
    }
    Eigen::Index row = n_low_discrepancy;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (int p = 0; p < kPerturbations; ++p) {
            for (int k = 0; k < d; ++k) {
                const double v = X(i, k) + 0.02 * (hi(k) - lo(k)) * rng.normal();
                cand(row, k) = std::clamp(v, lo(k), hi(k));
            }
            ++row;
        }
    }
    return argmax_ei(model, cand);
}

}  // namespace ordbo
