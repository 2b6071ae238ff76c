#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ordbo/kernel.hpp"
#include "ordbo/warp.hpp"

namespace ordbo {

/// q(f_n) = N(mu_f, diag(sigma_diag)), parameterised directly at the n inputs.
struct VariationalState {
    Eigen::VectorXd mu_f;
    Eigen::VectorXd sigma_diag;  ///< variances, strictly positive
};

struct PosteriorGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

constexpr int kDefaultQuadOrder = 40;
constexpr double kLogLikFloor = -700.0;

/// Latent GP over the warped inputs plus its variational posterior. Immutable:
/// every update returns a new model with a freshly built cache.
class LatentModel {
public:
    LatentModel(KernelSpec kernel, WarpState warp, VariationalState variational, RankedDataset data,
                int quad_order = kDefaultQuadOrder);

    /// Default warp and variational state for a fresh dataset.
    static LatentModel initial(KernelSpec kernel, RankedDataset data, double movement_constant = 1.0,
                               int quad_order = kDefaultQuadOrder);

    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
    [[nodiscard]] const WarpState& warp() const { return warp_; }
    [[nodiscard]] const VariationalState& variational() const { return variational_; }
    [[nodiscard]] const RankedDataset& data() const { return data_; }
    [[nodiscard]] int quad_order() const { return quad_order_; }
    [[nodiscard]] int size() const { return data_.size(); }
    [[nodiscard]] int dim() const { return data_.dim(); }

    /// Cached latent locations, bins, prior covariance (without jitter) and its factor.
    [[nodiscard]] const Eigen::MatrixXd& locations() const { return latent_.S; }
    [[nodiscard]] const std::vector<int>& bins() const { return latent_.bins; }
    [[nodiscard]] const Eigen::MatrixXd& prior_cov() const { return K_; }
    [[nodiscard]] const Eigen::MatrixXd& chol() const { return L_; }
    [[nodiscard]] double jitter_used() const { return jitter_; }

    /// Posterior mean and variance at each row of `queries` (variance floored at 0).
    void marginals(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean, Eigen::VectorXd& var) const;

private:
    KernelSpec kernel_;
    WarpState warp_;
    VariationalState variational_;
    RankedDataset data_;
    int quad_order_;

    LatentCoordinates latent_;
    Eigen::MatrixXd K_;
    Eigen::MatrixXd L_;
    double jitter_ = 0.0;
    Eigen::VectorXd alpha_;        // K^-1 mu_f
    Eigen::MatrixXd correction_;   // K^-1 (Sigma - K) K^-1
};

/// log P(f in bin) = log(Phi((b_bin - f)/sigma) - Phi((b_{bin-1} - f)/sigma)), floored at -700.
/// `edges` is the full edge list including the infinite sentinels.
double ordinal_log_lik(double f, int bin, const std::vector<double>& edges, double sigma);

/// Gauss-Hermite estimate of E_{f ~ N(mu, var)}[ordinal_log_lik(f)].
double expected_log_lik(double mu, double var, int bin, const std::vector<double>& edges, double sigma,
                        int quad_order);

/// KL[N(mu_f, diag(sigma_diag)) || N(0, K)]. K is factorised with `jitter` escalation.
double kl_term(const VariationalState& v, const Eigen::MatrixXd& K, double jitter = kMinJitter);

double elbo(const LatentModel& model);

/// ELBO value with its gradient for every parameter group.
struct ElboGradient {
    double value = 0.0;
    Eigen::VectorXd mu_f;
    Eigen::VectorXd sigma_diag;
    std::vector<std::vector<double>> input_deltas;  ///< [dimension][rank position]
    std::vector<double> bin_increments;
    double noise_sigma = 0.0;
    Eigen::MatrixXd locations;  ///< d ELBO / d S, n x d
    std::vector<double> edges;  ///< d ELBO / d b_i for the finite edges b_1 .. b_{n-1}
};

ElboGradient elbo_gradient(const LatentModel& model);

PosteriorGaussian posterior_at(const LatentModel& model, const Eigen::MatrixXd& queries);

/// Closed-form posterior for a full q covariance `sigma`. `chol` factors the (jittered)
/// prior covariance of `locations`; `prior` is that covariance without jitter.
PosteriorGaussian posterior_from(const KernelSpec& kernel, const Eigen::MatrixXd& locations,
                                 const Eigen::MatrixXd& prior, const Eigen::MatrixXd& chol,
                                 const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 const Eigen::MatrixXd& queries);

/// Per-refit constraint on retained latent locations. Observation i with an anchor may
/// move at most `half_width` per coordinate away from anchors.row(i); observations with
/// index >= anchors.rows() are free within their ordering bounds.
struct MovementBox {
    Eigen::MatrixXd anchors;
    double half_width = 0.0;
};

struct TrainOptions {
    int steps = 200;
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Full-batch Adam on the ELBO over (mu_f, log sigma_diag, input increments, bin increments,
/// noise), with box constraints through scaled logistic maps. Returns the best iterate seen.
LatentModel train(const LatentModel& model, const TrainOptions& options,
                  const std::optional<MovementBox>& movement = std::nullopt);

/// Adds one observation: ranks are recomputed, the containing input increment is split in
/// half in every dimension, a bin increment is spliced at the output rank, and q(f) grows by
/// one entry. Throws DomainError if x_new lies outside the hull of the existing inputs.
LatentModel insert_observation(const LatentModel& model, const Eigen::VectorXd& x_new, double y_new);

/// Structured text checkpoint (warp + variational state + rank data).
std::string serialize(const LatentModel& model);
LatentModel parse_model(std::string_view text);

}  // namespace ordbo
