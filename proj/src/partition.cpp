#include "ordbo/partition.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ordbo/errors.hpp"
#include "ordbo/text_doc.hpp"
#include "ordbo/warp.hpp"

namespace ordbo {

Partition Partition::build_exhaustive(const Eigen::MatrixXd& X, PartitionMode mode) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (n < 2 || d < 1) throw DomainError("partition: need at least two points");
    if (!X.allFinite()) throw DomainError("partition: non-finite coordinates");

    std::vector<std::vector<int>> order(d);
    for (int k = 0; k < d; ++k) {
        const Eigen::VectorXd col = X.col(k);
        const auto ranks = rank_vector(std::span<const double>(col.data(), col.size()));
        order[k].resize(n);
        for (int i = 0; i < n; ++i) order[k][ranks[i] - 1] = i;
        for (int p = 1; p < n; ++p) {
            if (!(X(order[k][p], k) > X(order[k][p - 1], k))) {
                throw DomainError("partition: repeated coordinate in dimension " + std::to_string(k));
            }
        }
    }

    Partition part;
    part.mode_ = mode;
    part.dim_ = d;
    part.domain_hi_ = X.colwise().maxCoeff().transpose();
    long long total = 1;
    for (int k = 0; k < d; ++k) total *= (n - 1);
    part.cells_.reserve(static_cast<std::size_t>(total));
    // dimension 0 varies slowest
    std::vector<int> pos(d, 0);
    for (long long c = 0; c < total; ++c) {
        Cell cell;
        cell.lower.resize(d);
        cell.upper.resize(d);
        for (int k = 0; k < d; ++k) {
            cell.lower[k] = order[k][pos[k]];
            cell.upper[k] = order[k][pos[k] + 1];
        }
        part.cells_.push_back(std::move(cell));
        for (int k = d - 1; k >= 0; --k) {
            if (++pos[k] < n - 1) break;
            pos[k] = 0;
        }
    }
    part.parents_.assign(part.cells_.size(), -1);
    return part;
}

void Partition::split_cell(int id, const Eigen::MatrixXd& X, int new_index) {
    if (id < 0 || id >= size()) throw DomainError("split_cell: unknown cell");
    if (new_index < 0 || new_index >= X.rows()) throw DomainError("split_cell: unknown observation");
    const Cell parent = cells_[id];
    for (int k = 0; k < dim_; ++k) {
        const double v = X(new_index, k);
        if (!(v > X(parent.lower[k], k) && v < X(parent.upper[k], k))) {
            throw DomainError("split_cell: new point is not strictly inside the cell");
        }
    }
    const int children = 1 << dim_;
    for (int c = 0; c < children; ++c) {
        Cell child = parent;
        for (int k = 0; k < dim_; ++k) {
            if (c & (1 << k)) {
                child.lower[k] = new_index;
            } else {
                child.upper[k] = new_index;
            }
        }
        if (c == 0) {
            cells_[id] = std::move(child);
        } else {
            cells_.push_back(std::move(child));
            parents_.push_back(id);
        }
    }
}

Box Partition::x_box(int id, const Eigen::MatrixXd& X) const {
    const Cell& c = cell(id);
    Box b{Eigen::VectorXd(dim_), Eigen::VectorXd(dim_)};
    for (int k = 0; k < dim_; ++k) {
        if (c.lower[k] >= X.rows() || c.upper[k] >= X.rows()) throw InternalError("partition: stale observation index");
        b.lo(k) = X(c.lower[k], k);
        b.hi(k) = X(c.upper[k], k);
    }
    return b;
}

bool Partition::contains(int id, const Eigen::MatrixXd& X, const Eigen::VectorXd& x) const {
    const Box b = x_box(id, X);
    for (int k = 0; k < dim_; ++k) {
        if (x(k) < b.lo(k)) return false;
        const bool top = b.hi(k) == domain_hi_(k);
        if (top ? x(k) > b.hi(k) : x(k) >= b.hi(k)) return false;
    }
    return true;
}

int Partition::locate(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) const {
    for (int id = 0; id < size(); ++id) {
        if (contains(id, X, x)) return id;
    }
    return -1;
}

std::string Partition::export_table(const Eigen::MatrixXd& X) const {
    std::ostringstream os;
    os << "cell_id";
    for (int k = 0; k < dim_; ++k) os << ",x_lo_" << k << ",x_hi_" << k;
    for (int k = 0; k < dim_; ++k) os << ",lower_index_" << k << ",upper_index_" << k;
    os << '\n';
    for (int id = 0; id < size(); ++id) {
        const Box b = x_box(id, X);
        os << id;
        for (int k = 0; k < dim_; ++k) os << ',' << format_double(b.lo(k)) << ',' << format_double(b.hi(k));
        for (int k = 0; k < dim_; ++k) os << ',' << cells_[id].lower[k] << ',' << cells_[id].upper[k];
        os << '\n';
    }
    return os.str();
}

Box latent_box(const Cell& cell, const Eigen::MatrixXd& S) {
    const int d = static_cast<int>(cell.lower.size());
    if (S.cols() != d) throw DomainError("latent_box: dimension mismatch");
    Box b{Eigen::VectorXd(d), Eigen::VectorXd(d)};
    for (int k = 0; k < d; ++k) {
        if (cell.lower[k] >= S.rows() || cell.upper[k] >= S.rows()) {
            throw InternalError("latent_box: stale observation index");
        }
        b.lo(k) = S(cell.lower[k], k);
        b.hi(k) = S(cell.upper[k], k);
    }
    return b;
}

long long tree_cell_count(int n_init, int n, int d) {
    long long base = 1;
    for (int k = 0; k < d; ++k) base *= (n_init - 1);
    return base + static_cast<long long>(n - n_init) * ((1LL << d) - 1);
}

Eigen::VectorXd sample_in_cell(const Box& box, Rng& rng, Eigen::VectorXd* u) {
    const Eigen::Index d = box.lo.size();
    if (!((box.hi - box.lo).array() > 0.0).all()) throw DomainError("sample_in_cell: cell has zero volume");
    Eigen::VectorXd rel(d), x(d);
    for (int attempt = 0; attempt < 100; ++attempt) {
        bool on_face = false;
        for (Eigen::Index k = 0; k < d; ++k) {
            rel(k) = rng.uniform_open();
            x(k) = box.lo(k) + rel(k) * (box.hi(k) - box.lo(k));
            on_face = on_face || !(x(k) > box.lo(k) && x(k) < box.hi(k));
        }
        if (!on_face) {
            if (u) *u = rel;
            return x;
        }
    }
    throw NumericalError("sample_in_cell: every draw landed on a cell face");
}

}  // namespace ordbo
