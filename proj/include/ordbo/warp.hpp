#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ordbo {

/// 1-based ranks, rank(u_j) = #{i : u_i <= u_j}; exact ties are broken by position
/// so the result is always a permutation of 1..n.
std::vector<int> rank_vector(std::span<const double> values);

/// s_j = sum_{i <= rank_j} delta_i. Ranks must be a permutation of 1..n.
std::vector<double> warp_values(std::span<const int> ranks, std::span<const double> deltas);

/// (-inf, b1, b1 + d1, ..., +inf): m + 1 finite edges plus the two infinite sentinels.
std::vector<double> bin_edges(double anchor, std::span<const double> increments);

/// Per-refit movement cap C*d/n.
double movement_radius(int n, double C, int d);

/// Observations plus their per-dimension and output ranks. Everything downstream of
/// this type sees only the ranks.
struct RankedDataset {
    Eigen::MatrixXd X;            ///< n x d raw inputs
    Eigen::VectorXd y;            ///< raw outputs
    Eigen::MatrixXi input_ranks;  ///< n x d, 1-based
    Eigen::VectorXi output_ranks; ///< 1-based

    static RankedDataset from(Eigen::MatrixXd X, Eigen::VectorXd y);

    [[nodiscard]] int size() const { return static_cast<int>(X.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(X.cols()); }
};

/// Full ordinal warping: input increments per dimension, output bin increments,
/// bin anchor, likelihood noise and the boxes every parameter lives in.
struct WarpState {
    std::vector<std::vector<double>> input_deltas;  ///< [dimension][rank position]
    std::vector<double> bin_increments;             ///< n - 2 increments between finite edges
    double bin_anchor = -2.0;
    double noise_sigma = 0.1;

    double delta_min = 1e-3;
    double delta_max = 5.0;
    double bin_increment_min = 1e-3;
    double bin_increment_max = 4.0;
    double noise_min = 1e-4;
    double noise_max = 1.0;
    double movement_constant = 1.0;

    /// Default state for n observations in d dimensions: input increments 1/n,
    /// edges evenly spread over [-2, 2], sigma = 0.1, delta_min = 1e-3 / n.
    static WarpState initial(int n, int d, double movement_constant = 1.0);

    [[nodiscard]] int size() const { return input_deltas.empty() ? 0 : static_cast<int>(input_deltas.front().size()); }
    [[nodiscard]] int dim() const { return static_cast<int>(input_deltas.size()); }
    [[nodiscard]] std::vector<double> edges() const { return bin_edges(bin_anchor, bin_increments); }

    /// Throws DomainError if any increment or sigma leaves its box.
    void validate() const;
};

std::string serialize(const WarpState& w);
WarpState parse_warp_state(std::string_view text);

struct LatentCoordinates {
    Eigen::MatrixXd S;      ///< n x d warped inputs
    std::vector<int> bins;  ///< 1-based bin index per observation (= output rank)
};

LatentCoordinates latent_coordinates(const RankedDataset& ds, const WarpState& w);

}  // namespace ordbo
