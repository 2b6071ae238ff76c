#include "ordbo/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "ordbo/errors.hpp"
#include "ordbo/kernel.hpp"
#include "ordbo/lowdisc.hpp"

namespace ordbo {
namespace {

constexpr std::uint64_t kHaltonStream = 0x4c43425f68616c74ULL;

Eigen::MatrixXd interior_unit_points(const AcquisitionConfig& config, int d) {
    Rng rng(derive_seed(config.rng_seed, kHaltonStream));
    return halton_points(config.candidates_per_cell, d, &rng);
}

}  // namespace

void AcquisitionConfig::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("acquisition: beta must be a non-negative number");
    if (ts_samples < 1) throw DomainError("acquisition: ts_samples must be >= 1");
    if (candidates_per_cell < 1) throw DomainError("acquisition: candidates_per_cell must be >= 1");
}

double lcb_point(const LatentModel& model, const Eigen::VectorXd& s, double beta) {
    Eigen::VectorXd mean, var;
    model.marginals(s.transpose(), mean, var);
    return mean(0) - beta * std::sqrt(var(0));
}

Eigen::MatrixXd lcb_candidates(const Box& box, const Eigen::MatrixXd& unit) {
    const int d = static_cast<int>(box.lo.size());
    const int corners = 1 << d;
    const int fixed = corners + 1 + 2 * d;
    Eigen::MatrixXd out(fixed + unit.rows(), d);
    for (int c = 0; c < corners; ++c) {
        for (int k = 0; k < d; ++k) out(c, k) = (c & (1 << k)) ? box.hi(k) : box.lo(k);
    }
    const Eigen::RowVectorXd centre = (0.5 * (box.lo + box.hi)).transpose();
    out.row(corners) = centre;
    for (int k = 0; k < d; ++k) {
        out.row(corners + 1 + 2 * k) = centre;
        out(corners + 1 + 2 * k, k) = box.lo(k);
        out.row(corners + 2 + 2 * k) = centre;
        out(corners + 2 + 2 * k, k) = box.hi(k);
    }
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        out.row(fixed + i) =
            (box.lo.array() + unit.row(i).transpose().array() * (box.hi - box.lo).array()).transpose();
    }
    return out;
}

CellScore cell_lcb(const LatentModel& model, const Box& latent, const AcquisitionConfig& config, int cell_id) {
    config.validate();
    const auto cand = lcb_candidates(latent, interior_unit_points(config, model.dim()));
    Eigen::VectorXd mean, var;
    model.marginals(cand, mean, var);
    const Eigen::VectorXd lcb = mean - config.beta * var.cwiseSqrt();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < lcb.size(); ++i) {
        if (lcb(i) < lcb(best)) best = i;
    }
    return {cell_id, lcb(best), cand.row(best).transpose()};
}

std::vector<CellScore> score_cells_lcb(const LatentModel& model, const Partition& partition,
                                       const AcquisitionConfig& config) {
    config.validate();
    if (partition.size() == 0) throw DomainError("select_lcb: empty partition");
    const auto unit = interior_unit_points(config, model.dim());
    const int per_cell = (1 << model.dim()) + 1 + 2 * model.dim() + static_cast<int>(unit.rows());
    Eigen::MatrixXd all(static_cast<Eigen::Index>(per_cell) * partition.size(), model.dim());
    for (int id = 0; id < partition.size(); ++id) {
        all.middleRows(static_cast<Eigen::Index>(id) * per_cell, per_cell) =
            lcb_candidates(latent_box(partition.cell(id), model.locations()), unit);
    }
    Eigen::VectorXd mean, var;
    model.marginals(all, mean, var);
    const Eigen::VectorXd lcb = mean - config.beta * var.cwiseSqrt();
    std::vector<CellScore> scores(partition.size());
    for (int id = 0; id < partition.size(); ++id) {
        const Eigen::Index start = static_cast<Eigen::Index>(id) * per_cell;
        Eigen::Index best = start;
        for (Eigen::Index i = start + 1; i < start + per_cell; ++i) {
            if (lcb(i) < lcb(best)) best = i;
        }
        scores[id] = {id, lcb(best), all.row(best).transpose()};
    }
    return scores;
}

int select_lcb(const LatentModel& model, const Partition& partition, const AcquisitionConfig& config,
               std::vector<CellScore>* scores) {
    auto s = score_cells_lcb(model, partition, config);
    int best = 0;
    for (int id = 1; id < static_cast<int>(s.size()); ++id) {
        if (s[id].score < s[best].score) best = id;
    }
    if (scores) *scores = std::move(s);
    return best;
}

std::vector<int> ts_counts(const LatentModel& model, const Partition& partition, int M, std::uint64_t seed,
                           std::uint64_t iteration) {
    if (M < 1) throw DomainError("ts_counts: M must be >= 1");
    const int C = partition.size();
    if (C == 0) throw DomainError("ts_counts: empty partition");
    const int d = model.dim();
    std::vector<Box> boxes;
    boxes.reserve(C);
    for (int id = 0; id < C; ++id) boxes.push_back(latent_box(partition.cell(id), model.locations()));

    std::vector<int> counts(C, 0);
    Eigen::MatrixXd pts(C, d);
    Eigen::VectorXd z(C);
    for (int k = 0; k < M; ++k) {
        Rng rng(derive_seed(seed, iteration, static_cast<std::uint64_t>(k)));
        for (int id = 0; id < C; ++id) {
            for (int j = 0; j < d; ++j) pts(id, j) = rng.uniform(boxes[id].lo(j), boxes[id].hi(j));
        }
        const auto post = posterior_at(model, pts);
        const auto chol = chol_factor(post.cov, kMinJitter);
        for (int id = 0; id < C; ++id) z(id) = rng.normal();
        const Eigen::VectorXd f = post.mean + chol.lower.triangularView<Eigen::Lower>() * z;
        int best = 0;
        for (int id = 1; id < C; ++id) {
            if (f(id) < f(best)) best = id;
        }
        ++counts[best];
    }
    return counts;
}

int select_ts(const std::vector<int>& counts, Rng& rng) {
    long long total = 0;
    for (int c : counts) {
        if (c < 0) throw DomainError("select_ts: negative count");
        total += c;
    }
    if (total == 0) throw DomainError("select_ts: all counts are zero");
    const auto target = static_cast<long long>(rng.uniform() * static_cast<double>(total));
    long long acc = 0;
    for (std::size_t id = 0; id < counts.size(); ++id) {
        acc += counts[id];
        if (target < acc) return static_cast<int>(id);
    }
    return static_cast<int>(counts.size()) - 1;
}

int select_ts_argmax(const std::vector<int>& counts) {
    if (counts.empty()) throw DomainError("select_ts: empty counts");
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace ordbo
