#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "ordbo/errors.hpp"
#include "ordbo/partition.hpp"
#include "ordbo/random.hpp"
#include "ordbo/warp.hpp"

using namespace ordbo;
using Catch::Matchers::WithinAbs;

namespace {

// Corners of [0,1]^d plus n - 2 random interior points.
Eigen::MatrixXd design(Rng& rng, int n, int d) {
    Eigen::MatrixXd X(n, d);
    X.row(0).setZero();
    X.row(1).setOnes();
    for (int i = 2; i < n; ++i)
        for (int k = 0; k < d; ++k) X(i, k) = rng.uniform(0.01, 0.99);
    return X;
}

double volume(const Box& b) { return (b.hi - b.lo).prod(); }

// Brute-force containment from per-dimension ranks of x among the cell bounds.
int locate_by_scan(const Partition& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& x) {
    int found = -1;
    for (int c = 0; c < p.size(); ++c) {
        if (p.contains(c, X, x)) {
            if (found != -1) return -2;
            found = c;
        }
    }
    return found;
}

Eigen::MatrixXd append(const Eigen::MatrixXd& X, const Eigen::VectorXd& x) {
    Eigen::MatrixXd out(X.rows() + 1, X.cols());
    out.topRows(X.rows()) = X;
    out.row(X.rows()) = x.transpose();
    return out;
}

}  // namespace

TEST_CASE("exhaustive partition sizes") {
    Rng rng(1);
    CHECK(Partition::build_exhaustive(design(rng, 5, 2)).size() == 16);
    Eigen::MatrixXd two(2, 1);
    two << 0.0, 1.0;
    auto p = Partition::build_exhaustive(two);
    REQUIRE(p.size() == 1);
    auto b = p.x_box(0, two);
    CHECK(b.lo(0) == 0.0);
    CHECK(b.hi(0) == 1.0);
}

TEST_CASE("n = 4, d = 3 grid tiles the cube on a 50^3 probe grid") {
    Rng rng(2);
    auto X = design(rng, 4, 3);
    auto p = Partition::build_exhaustive(X);
    REQUIRE(p.size() == 27);
    double vol = 0.0;
    for (int c = 0; c < p.size(); ++c) vol += volume(p.x_box(c, X));
    CHECK_THAT(vol, WithinAbs(1.0, 1e-12));
    std::vector<int> hits(27, 0);
    Eigen::VectorXd x(3);
    for (int a = 0; a < 50; ++a)
        for (int b = 0; b < 50; ++b)
            for (int c = 0; c < 50; ++c) {
                x << (a + 0.5) / 50.0, (b + 0.5) / 50.0, (c + 0.5) / 50.0;
                const int id = locate_by_scan(p, X, x);
                REQUIRE(id >= 0);
                CHECK(p.locate(X, x) == id);
                ++hits[id];
            }
    int total = 0;
    for (int h : hits) total += h;
    CHECK(total == 50 * 50 * 50);
}

TEST_CASE("repeated coordinates are rejected") {
    Eigen::MatrixXd X(3, 1);
    X << 0.0, 1.0, 1.0;
    CHECK_THROWS_AS(Partition::build_exhaustive(X), DomainError);
}

TEST_CASE("split_cell adds 2^d - 1 children tiling the parent") {
    for (int d = 1; d <= 3; ++d) {
        Rng rng(10 + d);
        auto X = design(rng, 4, d);
        auto p = Partition::build_exhaustive(X, PartitionMode::TreeSearch);
        const int before = p.size();
        const int id = before / 2;
        const auto parent = p.x_box(id, X);
        Eigen::VectorXd u(d);
        auto x = sample_in_cell(parent, rng, &u);
        X = append(X, x);
        p.split_cell(id, X, static_cast<int>(X.rows()) - 1);
        CHECK(p.size() == before + (1 << d) - 1);
        double vol = volume(p.x_box(id, X));
        for (int c = before; c < p.size(); ++c) {
            vol += volume(p.x_box(c, X));
            CHECK(p.parents()[c] == id);
        }
        CHECK_THAT(vol, WithinAbs(volume(parent), 1e-12));
    }
}

TEST_CASE("split on a face is rejected") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.0;
    auto p = Partition::build_exhaustive(X, PartitionMode::TreeSearch);
    Eigen::MatrixXd Y(3, 1);
    Y << 0.0, 1.0, 1.0;
    CHECK_THROWS_AS(p.split_cell(0, Y, 2), DomainError);
}

TEST_CASE("cell counts along random insertion sequences") {
    Rng rng(3);
    for (int d = 1; d <= 3; ++d) {
        for (int seq = 0; seq < 5; ++seq) {
            const int n_init = 5;
            auto X = design(rng, n_init, d);
            auto tree = Partition::build_exhaustive(X, PartitionMode::TreeSearch);
            for (int n = n_init + 1; n <= (d == 3 ? 25 : 40); ++n) {
                const int id = static_cast<int>(rng.uniform() * tree.size());
                auto x = sample_in_cell(tree.x_box(id, X), rng);
                X = append(X, x);
                tree.split_cell(id, X, n - 1);
                REQUIRE(tree.size() == tree_cell_count(n_init, n, d));
                auto full = Partition::build_exhaustive(X);
                REQUIRE(full.size() == static_cast<long long>(std::pow(n - 1, d)));
            }
        }
    }
}

TEST_CASE("tree partition tiles the domain after splits") {
    Rng rng(4);
    auto X = design(rng, 5, 2);
    auto p = Partition::build_exhaustive(X, PartitionMode::TreeSearch);
    for (int n = 6; n <= 20; ++n) {
        const int id = static_cast<int>(rng.uniform() * p.size());
        X = append(X, sample_in_cell(p.x_box(id, X), rng));
        p.split_cell(id, X, n - 1);
    }
    for (int t = 0; t < 10000; ++t) {
        Eigen::VectorXd x(2);
        x << rng.uniform(), rng.uniform();
        REQUIRE(locate_by_scan(p, X, x) >= 0);
    }
    // faces: the domain top is owned by the topmost cell
    Eigen::VectorXd top(2);
    top << 1.0, 1.0;
    CHECK(locate_by_scan(p, X, top) >= 0);
    Eigen::VectorXd outside(2);
    outside << 1.5, 0.5;
    CHECK(p.locate(X, outside) == -1);
}

TEST_CASE("containing cell follows from ranks alone") {
    Rng rng(5);
    auto X = design(rng, 7, 2);
    auto p = Partition::build_exhaustive(X);
    for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd x(2);
        x << rng.uniform(), rng.uniform();
        const int id = p.locate(X, x);
        // rank of x among the existing coordinates picks the bounding pair
        for (int k = 0; k < 2; ++k) {
            std::vector<double> col(X.col(k).data(), X.col(k).data() + X.rows());
            std::sort(col.begin(), col.end());
            const auto r = std::upper_bound(col.begin(), col.end(), x(k)) - col.begin();
            const auto& c = p.cell(id);
            CHECK(X(c.lower[k], k) == col[r - 1]);
            CHECK(X(c.upper[k], k) == col[r]);
        }
        // the same ranks under a monotone map of the coordinates give the same cell
        Eigen::MatrixXd Xm = X.array().cube();
        Eigen::VectorXd xm = x.array().cube();
        CHECK(p.locate(Xm, xm) == id);
    }
}

TEST_CASE("latent boxes follow the warp") {
    Rng rng(6);
    auto X = design(rng, 6, 2);
    auto ds = RankedDataset::from(X, Eigen::VectorXd::LinSpaced(6, 0.0, 1.0));
    auto p = Partition::build_exhaustive(X);
    auto w = WarpState::initial(6, 2);
    for (auto& dim : w.input_deltas) std::fill(dim.begin(), dim.end(), 1.0);
    auto S = latent_coordinates(ds, w).S;
    for (int c = 0; c < p.size(); ++c) {
        auto b = latent_box(p.cell(c), S);
        for (int k = 0; k < 2; ++k) {
            CHECK(b.lo(k) == ds.input_ranks(p.cell(c).lower[k], k));
            CHECK(b.hi(k) == ds.input_ranks(p.cell(c).upper[k], k));
        }
    }
    // refreshed warp: same rank intervals, recomputed faces
    for (auto& dim : w.input_deltas)
        for (auto& v : dim) v = rng.uniform(0.1, 2.0);
    S = latent_coordinates(ds, w).S;
    for (int c = 0; c < p.size(); ++c) {
        auto b = latent_box(p.cell(c), S);
        for (int k = 0; k < 2; ++k) {
            double lo = 0.0, hi = 0.0;
            for (int q = 0; q < ds.input_ranks(p.cell(c).lower[k], k); ++q) lo += w.input_deltas[k][q];
            for (int q = 0; q < ds.input_ranks(p.cell(c).upper[k], k); ++q) hi += w.input_deltas[k][q];
            CHECK_THAT(b.lo(k), WithinAbs(lo, 1e-12));
            CHECK_THAT(b.hi(k), WithinAbs(hi, 1e-12));
            CHECK(b.lo(k) < b.hi(k));
        }
    }
    // rank-adjacent cells share exactly one face
    for (int a = 0; a < p.size(); ++a)
        for (int c = a + 1; c < p.size(); ++c) {
            const auto& ca = p.cell(a);
            const auto& cc = p.cell(c);
            int same = 0, adjacent = 0;
            for (int k = 0; k < 2; ++k) {
                if (ca.lower[k] == cc.lower[k] && ca.upper[k] == cc.upper[k]) ++same;
                if (ca.upper[k] == cc.lower[k] || cc.upper[k] == ca.lower[k]) ++adjacent;
            }
            if (same != 1 || adjacent != 1) continue;
            auto A = latent_box(ca, S), B = latent_box(cc, S);
            int faces = 0;
            for (int k = 0; k < 2; ++k)
                if (A.hi(k) == B.lo(k) || B.hi(k) == A.lo(k)) ++faces;
            CHECK(faces == 1);
        }
}

TEST_CASE("sample_in_cell statistics") {
    Box b{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
    Rng r1(99), r2(99);
    CHECK(sample_in_cell(b, r1)(0) == sample_in_cell(b, r2)(0));

    Box box{Eigen::Vector2d(-1.0, 2.0), Eigen::Vector2d(3.0, 2.5)};
    Rng rng(7);
    const int N = 100000;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int i = 0; i < N; ++i) {
        auto x = sample_in_cell(box, rng);
        REQUIRE((x.array() > box.lo.array()).all());
        REQUIRE((x.array() < box.hi.array()).all());
        sum += x;
    }
    const Eigen::Vector2d mean = sum / N;
    for (int k = 0; k < 2; ++k) {
        const double width = box.hi(k) - box.lo(k);
        const double se = width / std::sqrt(12.0 * N);
        CHECK(std::abs(mean(k) - 0.5 * (box.lo(k) + box.hi(k))) < 3.0 * se);
    }
}

TEST_CASE("tree cell count closed form") {
    CHECK(tree_cell_count(5, 5, 2) == 16);
    CHECK(tree_cell_count(4, 5, 2) == 12);
    CHECK(tree_cell_count(5, 25, 2) == 16 + 20 * 3);
    CHECK(tree_cell_count(3, 10, 3) == 8 + 7 * 7);
}

TEST_CASE("exported table has one row per cell") {
    Rng rng(8);
    auto X = design(rng, 4, 2);
    auto p = Partition::build_exhaustive(X);
    const auto table = p.export_table(X);
    CHECK(std::count(table.begin(), table.end(), '\n') == p.size() + 1);
}
