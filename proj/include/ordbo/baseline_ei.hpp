#pragma once

#include <Eigen/Dense>

#include "ordbo/random.hpp"

namespace ordbo {

/// Matern 3/2 GP hyperparameters, each within [1e-3, 1e3].
struct GpHyperparams {
    double lengthscale = 0.3;
    double signal_var = 1.0;
    double noise_var = 1e-2;
};

constexpr double kGpHyperMin = 1e-3;
constexpr double kGpHyperMax = 1e3;

/// Log marginal likelihood of (X, y) under a zero-mean GP; `grad` (optional) receives the
/// derivatives with respect to (log lengthscale, log signal_var, log noise_var).
double gp_log_marginal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyperparams& hp,
                       Eigen::Vector3d* grad = nullptr);

/// Multi-start quasi-Newton ascent of gp_log_marginal on (X, y) as given.
GpHyperparams fit_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng, int starts = 4);

/// GP regression on the unit-cube image of a box with standardised outputs.
class GpModel {
public:
    /// Fits hyperparameters by maximum marginal likelihood.
    static GpModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, Rng& rng);

    /// Fixed hyperparameters (in scaled units); any positive values are accepted here.
    GpModel(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& lower,
            const Eigen::VectorXd& upper, const GpHyperparams& hp);

    /// Posterior mean and standard deviation of the latent function, in original y units.
    void predict(const Eigen::MatrixXd& Xq, Eigen::VectorXd& mean, Eigen::VectorXd& sd) const;

    [[nodiscard]] const GpHyperparams& hyperparams() const { return hp_; }
    [[nodiscard]] double best_observed() const { return y_raw_.minCoeff(); }
    [[nodiscard]] double log_marginal() const;
    [[nodiscard]] const Eigen::MatrixXd& inputs() const { return X_raw_; }
    [[nodiscard]] const Eigen::VectorXd& lower() const { return lower_; }
    [[nodiscard]] const Eigen::VectorXd& upper() const { return upper_; }

private:
    Eigen::MatrixXd X_raw_;
    Eigen::VectorXd y_raw_;
    Eigen::VectorXd lower_, upper_;
    Eigen::MatrixXd Xu_;
    Eigen::VectorXd ys_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    GpHyperparams hp_;
    Eigen::MatrixXd L_;
    Eigen::VectorXd alpha_;
};

/// EI for minimisation: (best - mu) Phi(z) + sd phi(z), z = (best - mu) / sd.
double expected_improvement(double mu, double sd, double best);

/// Argmax of EI over the rows of `candidates` (first index wins ties).
Eigen::VectorXd argmax_ei(const GpModel& model, const Eigen::MatrixXd& candidates);

/// EI maximiser over 2048 shifted Halton points plus Gaussian perturbations of the observations.
Eigen::VectorXd select_ei(const GpModel& model, Rng& rng, int n_low_discrepancy = 2048);

}  // namespace ordbo
