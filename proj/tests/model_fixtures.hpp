#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ordbo/random.hpp"
#include "ordbo/vgp.hpp"

namespace fixtures {

// Random dataset plus a random warp and variational state inside all boxes.
inline ordbo::LatentModel random_model(ordbo::Rng& rng, int n, int d, double sigma_lo = 0.2, double sigma_hi = 1.0) {
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) X(i, k) = rng.uniform();
        y(i) = rng.uniform(-1.0, 1.0);
    }
    auto data = ordbo::RankedDataset::from(X, y);
    auto w = ordbo::WarpState::initial(n, d);
    for (auto& dim : w.input_deltas)
        for (auto& v : dim) v = rng.uniform(0.2, 1.0);
    for (auto& b : w.bin_increments) b = rng.uniform(0.3, 1.5);
    w.bin_anchor = rng.uniform(-1.5, -0.5);
    w.noise_sigma = rng.uniform(sigma_lo, sigma_hi);
    ordbo::VariationalState v;
    v.mu_f.resize(n);
    v.sigma_diag.resize(n);
    for (int i = 0; i < n; ++i) {
        v.mu_f(i) = rng.uniform(-1.5, 1.5);
        v.sigma_diag(i) = rng.uniform(0.05, 0.8);
    }
    return ordbo::LatentModel(ordbo::KernelSpec{}, w, v, data);
}

// Central finite differences of the ELBO over every parameter group.
inline ordbo::ElboGradient numeric_gradient(const ordbo::LatentModel& m, double h = 1e-5) {
    using ordbo::LatentModel;
    auto eval = [&](const ordbo::WarpState& w, const ordbo::VariationalState& v) {
        return ordbo::elbo(LatentModel(m.kernel(), w, v, m.data(), m.quad_order()));
    };
    auto central = [&](auto&& perturb) {
        auto wp = m.warp();
        auto vp = m.variational();
        perturb(wp, vp, h);
        const double up = eval(wp, vp);
        auto wm = m.warp();
        auto vm = m.variational();
        perturb(wm, vm, -h);
        return (up - eval(wm, vm)) / (2.0 * h);
    };
    const int n = m.size();
    ordbo::ElboGradient g;
    g.value = ordbo::elbo(m);
    g.mu_f.resize(n);
    g.sigma_diag.resize(n);
    for (int i = 0; i < n; ++i) {
        g.mu_f(i) = central([i](auto&, auto& v, double e) { v.mu_f(i) += e; });
        g.sigma_diag(i) = central([i](auto&, auto& v, double e) { v.sigma_diag(i) += e; });
    }
    g.input_deltas.assign(m.dim(), std::vector<double>(n));
    for (int k = 0; k < m.dim(); ++k)
        for (int p = 0; p < n; ++p)
            g.input_deltas[k][p] = central([k, p](auto& w, auto&, double e) { w.input_deltas[k][p] += e; });
    g.bin_increments.resize(m.warp().bin_increments.size());
    for (std::size_t l = 0; l < g.bin_increments.size(); ++l)
        g.bin_increments[l] = central([l](auto& w, auto&, double e) { w.bin_increments[l] += e; });
    g.noise_sigma = central([](auto& w, auto&, double e) { w.noise_sigma += e; });
    return g;
}

// ||a - b|| / ||b|| with an absolute floor for groups whose gradient vanishes.
inline double group_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-6);
}

inline std::vector<double> flat(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline std::vector<double> flat(const std::vector<std::vector<double>>& v) {
    std::vector<double> out;
    for (const auto& r : v) out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace fixtures
