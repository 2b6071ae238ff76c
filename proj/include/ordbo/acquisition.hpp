#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ordbo/partition.hpp"
#include "ordbo/vgp.hpp"

namespace ordbo {

enum class AcquisitionRule { CellLCB, CellTS };

struct AcquisitionConfig {
    AcquisitionRule rule = AcquisitionRule::CellLCB;
    double beta = 3.0;
    int ts_samples = 100;
    int candidates_per_cell = 16;
    std::uint64_t rng_seed = 0;
    bool ts_argmax = false;  ///< pick the most frequent cell instead of sampling (ablation only)

    void validate() const;
};

struct CellScore {
    int cell = -1;
    double score = 0.0;
    Eigen::VectorXd witness;  ///< latent point achieving the score
};

/// mu(s) - beta * sd(s) under the model's posterior.
double lcb_point(const LatentModel& model, const Eigen::VectorXd& s, double beta);

/// Candidate latent points for a box: its 2^d corners, its centre, the 2d face centres,
/// then the rows of `unit` (shifted Halton points in [0,1)^d) mapped into the box.
Eigen::MatrixXd lcb_candidates(const Box& box, const Eigen::MatrixXd& unit);

/// Minimum lcb over the candidates of one latent box.
CellScore cell_lcb(const LatentModel& model, const Box& latent, const AcquisitionConfig& config, int cell_id = -1);

/// Scores for every cell of the partition (batched).
std::vector<CellScore> score_cells_lcb(const LatentModel& model, const Partition& partition,
                                       const AcquisitionConfig& config);

/// Cell with the smallest LCB score; ties go to the lowest id.
int select_lcb(const LatentModel& model, const Partition& partition, const AcquisitionConfig& config,
               std::vector<CellScore>* scores = nullptr);

/// Thompson counts over cells. Repetition k uses its own stream derived from
/// (config.rng_seed, iteration, k), so the result does not depend on execution order.
std::vector<int> ts_counts(const LatentModel& model, const Partition& partition, int M, std::uint64_t seed,
                           std::uint64_t iteration);

/// One multinomial draw with probabilities counts / sum(counts).
int select_ts(const std::vector<int>& counts, Rng& rng);

/// Most frequent cell, ties to the lowest id.
int select_ts_argmax(const std::vector<int>& counts);

}  // namespace ordbo
