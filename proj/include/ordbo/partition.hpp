#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordbo/random.hpp"

namespace ordbo {

enum class PartitionMode { Exhaustive, TreeSearch };

/// Rank-interval hyperrectangle. Bounds are observation indices, so the cell keeps its
/// identity when the warp moves the latent coordinates.
struct Cell {
    std::vector<int> lower;  ///< per dimension: index of the observation on the lower face
    std::vector<int> upper;  ///< per dimension: index of the observation on the upper face
};

struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

class Partition {
public:
    /// (n-1)^d cells from the per-dimension sorted grid of X's coordinates. X must contain
    /// each dimension's extremes; repeated coordinates in a dimension are rejected.
    static Partition build_exhaustive(const Eigen::MatrixXd& X, PartitionMode mode = PartitionMode::Exhaustive);

    [[nodiscard]] PartitionMode mode() const { return mode_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int size() const { return static_cast<int>(cells_.size()); }
    [[nodiscard]] const Cell& cell(int id) const { return cells_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
    /// Parent cell id at the time of the split that created each cell, -1 for initial cells.
    [[nodiscard]] const std::vector<int>& parents() const { return parents_; }

    /// Replaces cell `id` by its 2^d children around observation `new_index` of X.
    /// Child 0 (all lower halves) keeps `id`; the rest are appended in binary order.
    void split_cell(int id, const Eigen::MatrixXd& X, int new_index);

    /// Original-space box of a cell.
    [[nodiscard]] Box x_box(int id, const Eigen::MatrixXd& X) const;

    /// Half-open containment (lower faces inclusive; upper faces inclusive only on the domain top).
    [[nodiscard]] bool contains(int id, const Eigen::MatrixXd& X, const Eigen::VectorXd& x) const;

    /// Id of the unique cell containing x, or -1 outside the domain.
    [[nodiscard]] int locate(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) const;

    /// Flat table: id, per-dimension lower/upper bounds, per-dimension bounding indices.
    [[nodiscard]] std::string export_table(const Eigen::MatrixXd& X) const;

private:
    PartitionMode mode_ = PartitionMode::Exhaustive;
    int dim_ = 0;
    std::vector<Cell> cells_;
    std::vector<int> parents_;
    Eigen::VectorXd domain_hi_;
};

/// Latent box from the rows of S (latent coordinates) of the cell's bounding observations.
Box latent_box(const Cell& cell, const Eigen::MatrixXd& S);

/// (n_init - 1)^d + (n - n_init)(2^d - 1).
long long tree_cell_count(int n_init, int n, int d);

/// Uniform point strictly inside the cell's original-space box. `u`, if given, receives the
/// relative coordinates used. Throws NumericalError after 100 draws landing on a face.
Eigen::VectorXd sample_in_cell(const Box& box, Rng& rng, Eigen::VectorXd* u = nullptr);

}  // namespace ordbo
