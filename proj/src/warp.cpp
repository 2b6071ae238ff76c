#include "ordbo/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ordbo/errors.hpp"
#include "ordbo/text_doc.hpp"

namespace ordbo {

std::vector<int> rank_vector(std::span<const double> values) {
    if (values.empty()) throw DomainError("rank_vector: empty input");
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("rank_vector: non-finite value");
    }
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<int> ranks(values.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = static_cast<int>(pos) + 1;
    return ranks;
}

std::vector<double> warp_values(std::span<const int> ranks, std::span<const double> deltas) {
    const std::size_t n = ranks.size();
    if (deltas.size() != n) throw DomainError("warp_values: need one delta per value");
    for (double d : deltas) {
        if (!(d > 0.0)) throw DomainError("warp_values: deltas must be strictly positive");
    }
    std::vector<double> prefix(n);
    std::partial_sum(deltas.begin(), deltas.end(), prefix.begin());
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const int r = ranks[j];
        if (r < 1 || r > static_cast<int>(n)) throw DomainError("warp_values: rank out of range");
        out[j] = prefix[r - 1];
    }
    return out;
}

std::vector<double> bin_edges(double anchor, std::span<const double> increments) {
    std::vector<double> edges;
    edges.reserve(increments.size() + 3);
    edges.push_back(-std::numeric_limits<double>::infinity());
    edges.push_back(anchor);
    for (double inc : increments) {
        if (!(inc > 0.0)) throw DomainError("bin_edges: increments must be strictly positive");
        edges.push_back(edges.back() + inc);
    }
    edges.push_back(std::numeric_limits<double>::infinity());
    return edges;
}

double movement_radius(int n, double C, int d) {
    if (n < 1) throw DomainError("movement_radius: n must be >= 1");
    if (!(C > 0.0)) throw DomainError("movement_radius: C must be positive");
    return C * d / n;
}

RankedDataset RankedDataset::from(Eigen::MatrixXd X, Eigen::VectorXd y) {
    if (X.rows() != y.size()) throw DomainError("RankedDataset: X and y row counts differ");
    if (X.rows() == 0 || X.cols() == 0) throw DomainError("RankedDataset: empty dataset");
    RankedDataset ds;
    ds.input_ranks.resize(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const Eigen::VectorXd col = X.col(j);
        const auto r = rank_vector(std::span<const double>(col.data(), col.size()));
        for (Eigen::Index i = 0; i < X.rows(); ++i) ds.input_ranks(i, j) = r[i];
    }
    const auto ry = rank_vector(std::span<const double>(y.data(), y.size()));
    ds.output_ranks = Eigen::Map<const Eigen::VectorXi>(ry.data(), static_cast<Eigen::Index>(ry.size()));
    ds.X = std::move(X);
    ds.y = std::move(y);
    return ds;
}

WarpState WarpState::initial(int n, int d, double movement_constant) {
    if (n < 1 || d < 1) throw DomainError("WarpState::initial: need n >= 1 and d >= 1");
    WarpState w;
    w.input_deltas.assign(d, std::vector<double>(n, 1.0 / n));
    const int m = std::max(n - 2, 0);
    w.bin_increments.assign(m, m > 0 ? 4.0 / m : 0.0);
    w.delta_min = 1e-3 / n;
    w.movement_constant = movement_constant;
    return w;
}

void WarpState::validate() const {
    if (!(delta_min > 0.0 && delta_min < delta_max)) throw DomainError("WarpState: need 0 < delta_min < delta_max");
    const auto n = input_deltas.empty() ? 0 : input_deltas.front().size();
    for (const auto& dim : input_deltas) {
        if (dim.size() != n) throw DomainError("WarpState: ragged input increments");
        for (double v : dim) {
            if (!(v >= delta_min && v <= delta_max)) throw DomainError("WarpState: input increment outside [delta_min, delta_max]");
        }
    }
    for (double v : bin_increments) {
        if (!(v >= bin_increment_min && v <= bin_increment_max)) throw DomainError("WarpState: bin increment outside its bounds");
    }
    if (n >= 2 && bin_increments.size() != n - 2) throw DomainError("WarpState: expected n - 2 bin increments");
    if (!(noise_sigma >= noise_min && noise_sigma <= noise_max)) throw DomainError("WarpState: noise sigma outside its bounds");
    if (!(movement_constant > 0.0)) throw DomainError("WarpState: movement constant must be positive");
}

std::string serialize(const WarpState& w) {
    TextDocument doc;
    doc.set("warp", "dimension", std::to_string(w.dim()));
    doc.set("warp", "noise_sigma", w.noise_sigma);
    doc.set("warp", "noise_min", w.noise_min);
    doc.set("warp", "noise_max", w.noise_max);
    doc.set("warp", "delta_min", w.delta_min);
    doc.set("warp", "delta_max", w.delta_max);
    doc.set("warp", "movement_constant", w.movement_constant);
    for (int j = 0; j < w.dim(); ++j) {
        doc.set("dim." + std::to_string(j), "deltas", w.input_deltas[j]);
    }
    doc.set("bins", "anchor", w.bin_anchor);
    doc.set("bins", "increment_min", w.bin_increment_min);
    doc.set("bins", "increment_max", w.bin_increment_max);
    doc.set("bins", "increments", w.bin_increments);
    return doc.str();
}

WarpState parse_warp_state(std::string_view text) {
    const auto doc = TextDocument::parse(text);
    WarpState w;
    const int d = std::stoi(doc.get("warp", "dimension"));
    w.noise_sigma = doc.get_double("warp", "noise_sigma");
    w.noise_min = doc.get_double("warp", "noise_min");
    w.noise_max = doc.get_double("warp", "noise_max");
    w.delta_min = doc.get_double("warp", "delta_min");
    w.delta_max = doc.get_double("warp", "delta_max");
    w.movement_constant = doc.get_double("warp", "movement_constant");
    for (int j = 0; j < d; ++j) w.input_deltas.push_back(doc.get_doubles("dim." + std::to_string(j), "deltas"));
    w.bin_anchor = doc.get_double("bins", "anchor");
    w.bin_increment_min = doc.get_double("bins", "increment_min");
    w.bin_increment_max = doc.get_double("bins", "increment_max");
    w.bin_increments = doc.get_doubles("bins", "increments");
    return w;
}

LatentCoordinates latent_coordinates(const RankedDataset& ds, const WarpState& w) {
    const int n = ds.size();
    const int d = ds.dim();
    if (w.dim() != d || w.size() != n || ds.input_ranks.rows() != n || ds.output_ranks.size() != n) {
        throw DomainError("latent_coordinates: dataset and warp state shapes differ");
    }
    LatentCoordinates out;
    out.S.resize(n, d);
    for (int j = 0; j < d; ++j) {
        std::vector<int> ranks(n);
        for (int i = 0; i < n; ++i) ranks[i] = ds.input_ranks(i, j);
        const auto s = warp_values(ranks, w.input_deltas[j]);
        for (int i = 0; i < n; ++i) out.S(i, j) = s[i];
    }
    out.bins.assign(ds.output_ranks.data(), ds.output_ranks.data() + n);
    return out;
}

}  // namespace ordbo
