#include "ordbo/vgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ordbo/errors.hpp"
#include "ordbo/normal.hpp"
#include "ordbo/quadrature.hpp"
#include "ordbo/text_doc.hpp"

namespace ordbo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogitClamp = 30.0;
constexpr double kLogVarMin = -18.420680743952367;  // log 1e-8
constexpr double kLogVarMax = 4.605170185988092;    // log 1e2

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

// One observation needs n + 1 edges including the sentinels; a single observation
// lives in the one unbounded bin.
std::vector<double> model_edges(const WarpState& w, int n) {
    if (n <= 1) return {-kInf, kInf};
    return w.edges();
}

struct CoreResult {
    double value = 0.0;
    Eigen::VectorXd g_mu;
    Eigen::VectorXd g_var;
    Eigen::MatrixXd g_S;
    std::vector<double> g_edges;  // finite edges b_1 .. b_{n-1}
    double g_noise = 0.0;
    double jitter = 0.0;
};

// Expected log-likelihood of one observation; accumulates gradients when requested.
struct EllTerm {
    double value = 0.0;
    double d_mu = 0.0;
    double d_var = 0.0;
    double d_upper = 0.0;
    double d_lower = 0.0;
    double d_sigma = 0.0;
};

EllTerm expected_log_lik_term(double mu, double var, double upper, double lower, double sigma, int quad_order,
                              bool want_grad) {
    const auto& rule = gauss_hermite(quad_order);
    const double scale = std::sqrt(2.0 * var);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    EllTerm out;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double w = rule.weights[k] * inv_sqrt_pi;
        const double f = mu + scale * rule.nodes[k];
        const double a = (upper - f) / sigma;
        const double c = (lower - f) / sigma;
        const double log_z = normal::log_cdf_diff(a, c);
        if (!(log_z >= kLogLikFloor)) {
            out.value += w * kLogLikFloor;
            continue;
        }
        out.value += w * log_z;
        if (!want_grad) continue;
        const double pa = std::isfinite(a) ? std::exp(normal::log_pdf(a) - log_z) : 0.0;
        const double pc = std::isfinite(c) ? std::exp(normal::log_pdf(c) - log_z) : 0.0;
        const double d_f = (pc - pa) / sigma;
        out.d_mu += w * d_f;
        out.d_var += w * d_f * rule.nodes[k] / scale;
        out.d_upper += w * pa / sigma;
        out.d_lower -= w * pc / sigma;
        const double ta = std::isfinite(a) ? a * pa : 0.0;
        const double tc = std::isfinite(c) ? c * pc : 0.0;
        out.d_sigma += w * (tc - ta) / sigma;
    }
    return out;
}

CoreResult elbo_core(const KernelSpec& kernel, const Eigen::MatrixXd& S, const std::vector<int>& bins,
                     const std::vector<double>& edges, double noise, const Eigen::VectorXd& mu,
                     const Eigen::VectorXd& var, int quad_order, bool want_grad) {
    const Eigen::Index n = S.rows();
    CoreResult out;
    if (want_grad) {
        out.g_mu = Eigen::VectorXd::Zero(n);
        out.g_var = Eigen::VectorXd::Zero(n);
        out.g_S = Eigen::MatrixXd::Zero(n, S.cols());
        out.g_edges.assign(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)), 0.0);
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = bins[i];
        const auto term = expected_log_lik_term(mu(i), var(i), edges[r], edges[r - 1], noise, quad_order, want_grad);
        out.value += term.value;
        if (!want_grad) continue;
        out.g_mu(i) += term.d_mu;
        out.g_var(i) += term.d_var;
        out.g_noise += term.d_sigma;
        if (r <= n - 1) out.g_edges[r - 1] += term.d_upper;
        if (r >= 2) out.g_edges[r - 2] += term.d_lower;
    }

    const Eigen::MatrixXd K = cov_matrix(kernel, S);
    const auto chol = chol_factor(K, kernel.jitter);
    out.jitter = chol.jitter;
    const Eigen::MatrixXd Kinv = [&] {
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        const auto Lv = chol.lower.triangularView<Eigen::Lower>();
        Lv.solveInPlace(id);
        return Eigen::MatrixXd(id.transpose() * id);
    }();
    const Eigen::VectorXd alpha = Kinv * mu;
    const double kl = 0.5 * ((Kinv.diagonal().array() * var.array()).sum() + mu.dot(alpha) - static_cast<double>(n) +
                             log_det_from_chol(chol.lower) - var.array().log().sum());
    out.value -= kl;
    if (!want_grad) return out;

    out.g_mu -= alpha;
    out.g_var.array() -= 0.5 * (Kinv.diagonal().array() - var.array().inverse());
    const Eigen::MatrixXd G = 0.5 * (Kinv - Kinv * var.asDiagonal() * Kinv - alpha * alpha.transpose());
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == a) continue;
            const Eigen::RowVectorXd diff = S.row(a) - S.row(j);
            const double h = kernel_dr_over_r(kernel, diff.norm());
            out.g_S.row(a) -= 2.0 * G(a, j) * h * diff;
        }
    }
    return out;
}

// --- constrained parameterisation ------------------------------------------------------

// Sorted latent coordinates of one dimension, t_1 < t_2 < ... < t_n. t_1 is fixed; every
// later coordinate is lo_p + (hi_p - lo_p) * sigmoid(theta_p) with bounds depending on
// t_{p-1}, the increment box and (optionally) the movement box around its anchor.
struct ChainTransform {
    double t1 = 0.0;
    double delta_min = 0.0;
    double delta_max = 0.0;
    double half_width = 0.0;
    std::vector<bool> anchored;      // per position
    std::vector<double> anchor;      // per position, valid when anchored
    std::vector<int> next_anchored;  // per position: next anchored position, or -1

    struct Bounds {
        double lo, hi;
        bool lo_moves, hi_moves;  // whether each bound tracks t_{p-1}
    };

    [[nodiscard]] Bounds bounds(int p, double prev) const {
        Bounds b{prev + delta_min, prev + delta_max, true, true};
        if (anchored[p]) {
            const double alo = anchor[p] - half_width;
            const double ahi = anchor[p] + half_width;
            if (alo > b.lo) b = {alo, b.hi, false, b.hi_moves};
            if (ahi < b.hi) b = {b.lo, ahi, b.lo_moves, false};
        } else if (next_anchored[p] >= 0) {
            const int q = next_anchored[p];
            const double gap = q - p;
            const double ahi = anchor[q] + half_width - gap * delta_min;
            const double alo = anchor[q] - half_width - gap * delta_max;
            if (alo > b.lo) b = {alo, b.hi, false, b.hi_moves};
            if (ahi < b.hi) b = {b.lo, ahi, b.lo_moves, false};
        }
        return b;
    }

    [[nodiscard]] std::vector<double> forward(const double* theta) const {
        const int n = static_cast<int>(anchored.size());
        std::vector<double> t(n);
        t[0] = t1;
        for (int p = 1; p < n; ++p) {
            const auto b = bounds(p, t[p - 1]);
            if (b.hi <= b.lo) {
                t[p] = 0.5 * (b.lo + b.hi);
            } else {
                t[p] = b.lo + (b.hi - b.lo) * sigmoid(theta[p - 1]);
            }
        }
        return t;
    }

    void init(const std::vector<double>& t, double* theta) const {
        const int n = static_cast<int>(anchored.size());
        double prev = t1;
        for (int p = 1; p < n; ++p) {
            const auto b = bounds(p, prev);
            double frac = b.hi > b.lo ? (t[p] - b.lo) / (b.hi - b.lo) : 0.5;
            frac = std::clamp(frac, 1e-6, 1.0 - 1e-6);
            theta[p - 1] = std::clamp(logit(frac), -kLogitClamp, kLogitClamp);
            prev = b.hi > b.lo ? b.lo + (b.hi - b.lo) * sigmoid(theta[p - 1]) : 0.5 * (b.lo + b.hi);
        }
    }

    // g_t holds dL/dt_p on entry; writes dL/dtheta.
    void backward(const double* theta, const std::vector<double>& t, std::vector<double> g_t, double* g_theta) const {
        const int n = static_cast<int>(anchored.size());
        for (int p = n - 1; p >= 1; --p) {
            const auto b = bounds(p, t[p - 1]);
            if (b.hi <= b.lo) {
                g_theta[p - 1] = 0.0;
                const double carry = 0.5 * ((b.lo_moves ? 1.0 : 0.0) + (b.hi_moves ? 1.0 : 0.0));
                g_t[p - 1] += g_t[p] * carry;
                continue;
            }
            const double s = sigmoid(theta[p - 1]);
            g_theta[p - 1] = g_t[p] * (b.hi - b.lo) * s * (1.0 - s);
            const double carry = (b.lo_moves ? 1.0 - s : 0.0) + (b.hi_moves ? s : 0.0);
            g_t[p - 1] += g_t[p] * carry;
        }
    }
};

struct ScaledLogistic {
    double lo, hi;
    [[nodiscard]] double forward(double theta) const { return lo + (hi - lo) * sigmoid(theta); }
    [[nodiscard]] double grad(double theta) const {
        const double s = sigmoid(theta);
        return (hi - lo) * s * (1.0 - s);
    }
    [[nodiscard]] double init(double value) const {
        const double frac = std::clamp((value - lo) / (hi - lo), 1e-6, 1.0 - 1e-6);
        return std::clamp(logit(frac), -kLogitClamp, kLogitClamp);
    }
};

class ParameterMap {
public:
    ParameterMap(const LatentModel& model, const std::optional<MovementBox>& movement)
        : n_(model.size()), d_(model.dim()), kernel_(model.kernel()), warp_(model.warp()),
          bins_(model.bins()), quad_order_(model.quad_order()) {
        const auto& ranks = model.data().input_ranks;
        order_.assign(d_, std::vector<int>(n_));
        for (int k = 0; k < d_; ++k) {
            for (int i = 0; i < n_; ++i) order_[k][ranks(i, k) - 1] = i;
        }
        const auto& S = model.locations();
        chains_.resize(d_);
        for (int k = 0; k < d_; ++k) {
            auto& c = chains_[k];
            c.t1 = S(order_[k][0], k);
            c.delta_min = warp_.delta_min;
            c.delta_max = warp_.delta_max;
            c.anchored.assign(n_, false);
            c.anchor.assign(n_, 0.0);
            c.next_anchored.assign(n_, -1);
            if (movement) {
                c.half_width = movement->half_width;
                for (int p = 0; p < n_; ++p) {
                    const int obs = order_[k][p];
                    if (obs < movement->anchors.rows()) {
                        c.anchored[p] = true;
                        c.anchor[p] = movement->anchors(obs, k);
                    }
                }
                int next = -1;
                for (int p = n_ - 1; p >= 0; --p) {
                    c.next_anchored[p] = next;
                    if (c.anchored[p]) next = p;
                }
            }
        }
        bin_map_ = {warp_.bin_increment_min, warp_.bin_increment_max};
        noise_map_ = {warp_.noise_min, warp_.noise_max};
        n_bin_ = static_cast<int>(warp_.bin_increments.size());
        size_ = 2 * n_ + d_ * (n_ - 1) + n_bin_ + 1;
    }

    [[nodiscard]] int size() const { return size_; }

    [[nodiscard]] Eigen::VectorXd encode(const LatentModel& model) const {
        Eigen::VectorXd theta(size_);
        theta.segment(0, n_) = model.variational().mu_f;
        theta.segment(n_, n_) = model.variational().sigma_diag.array().log().cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
        const auto& S = model.locations();
        for (int k = 0; k < d_; ++k) {
            std::vector<double> t(n_);
            for (int p = 0; p < n_; ++p) t[p] = S(order_[k][p], k);
            chains_[k].init(t, theta.data() + loc_offset(k));
        }
        for (int l = 0; l < n_bin_; ++l) theta(bin_offset() + l) = bin_map_.init(warp_.bin_increments[l]);
        theta(size_ - 1) = noise_map_.init(warp_.noise_sigma);
        return theta;
    }

    void clamp(Eigen::VectorXd& theta) const {
        theta.segment(n_, n_) = theta.segment(n_, n_).cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
        const int start = 2 * n_;
        theta.segment(start, size_ - start) =
            theta.segment(start, size_ - start).cwiseMax(-kLogitClamp).cwiseMin(kLogitClamp);
    }

    struct Decoded {
        Eigen::VectorXd mu, var;
        Eigen::MatrixXd S;
        std::vector<std::vector<double>> t;  // per dimension, by rank position
        std::vector<double> increments;
        std::vector<double> edges;
        double noise = 0.0;
    };

    [[nodiscard]] Decoded decode(const Eigen::VectorXd& theta) const {
        Decoded out;
        out.mu = theta.segment(0, n_);
        out.var = theta.segment(n_, n_).array().exp();
        out.S.resize(n_, d_);
        out.t.resize(d_);
        for (int k = 0; k < d_; ++k) {
            out.t[k] = chains_[k].forward(theta.data() + loc_offset(k));
            for (int p = 0; p < n_; ++p) out.S(order_[k][p], k) = out.t[k][p];
        }
        out.increments.resize(n_bin_);
        for (int l = 0; l < n_bin_; ++l) out.increments[l] = bin_map_.forward(theta(bin_offset() + l));
        out.noise = noise_map_.forward(theta(size_ - 1));
        WarpState w;
        w.bin_anchor = warp_.bin_anchor;
        w.bin_increments = out.increments;
        out.edges = model_edges(w, n_);
        return out;
    }

    // Value and gradient with respect to theta.
    double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
        const auto dec = decode(theta);
        const auto core = elbo_core(kernel_, dec.S, bins_, dec.edges, dec.noise, dec.mu, dec.var, quad_order_, true);
        grad.resize(size_);
        grad.segment(0, n_) = core.g_mu;
        check_finite(core.g_mu, "mu_f");
        grad.segment(n_, n_) = core.g_var.array() * dec.var.array();
        check_finite(core.g_var, "sigma_diag");
        check_finite(core.g_S, "input_deltas");
        for (int k = 0; k < d_; ++k) {
            std::vector<double> g_t(n_);
            for (int p = 0; p < n_; ++p) g_t[p] = core.g_S(order_[k][p], k);
            chains_[k].backward(theta.data() + loc_offset(k), dec.t[k], std::move(g_t), grad.data() + loc_offset(k));
        }
        // b_i = anchor + sum_{l < i} inc_l, so d/d inc_l collects every edge above it
        double suffix = 0.0;
        for (int l = n_bin_ - 1; l >= 0; --l) {
            suffix += core.g_edges[l + 1];
            grad(bin_offset() + l) = suffix * bin_map_.grad(theta(bin_offset() + l));
        }
        if (!std::isfinite(suffix)) throw NumericalError("train: non-finite gradient", 0.0, "bin_increments");
        if (!std::isfinite(core.g_noise)) throw NumericalError("train: non-finite gradient", 0.0, "noise_sigma");
        grad(size_ - 1) = core.g_noise * noise_map_.grad(theta(size_ - 1));
        if (!std::isfinite(core.value)) throw NumericalError("train: non-finite ELBO", 0.0, "elbo");
        return core.value;
    }

    [[nodiscard]] LatentModel rebuild(const LatentModel& model, const Eigen::VectorXd& theta) const {
        const auto dec = decode(theta);
        WarpState w = warp_;
        for (int k = 0; k < d_; ++k) {
            w.input_deltas[k][0] = dec.t[k][0];
            for (int p = 1; p < n_; ++p) {
                w.input_deltas[k][p] = std::clamp(dec.t[k][p] - dec.t[k][p - 1], w.delta_min, w.delta_max);
            }
        }
        for (int l = 0; l < n_bin_; ++l) {
            w.bin_increments[l] = std::clamp(dec.increments[l], w.bin_increment_min, w.bin_increment_max);
        }
        w.noise_sigma = std::clamp(dec.noise, w.noise_min, w.noise_max);
        VariationalState v{dec.mu, dec.var};
        return LatentModel(model.kernel(), std::move(w), std::move(v), model.data(), model.quad_order());
    }

private:
    static void check_finite(const Eigen::MatrixXd& m, const char* name) {
        if (!m.allFinite()) throw NumericalError(std::string("train: non-finite gradient in ") + name, 0.0, name);
    }
    [[nodiscard]] int loc_offset(int k) const { return 2 * n_ + k * (n_ - 1); }
    [[nodiscard]] int bin_offset() const { return 2 * n_ + d_ * (n_ - 1); }

    int n_;
    int d_;
    KernelSpec kernel_;
    WarpState warp_;
    std::vector<int> bins_;
    int quad_order_;
    std::vector<std::vector<int>> order_;
    std::vector<ChainTransform> chains_;
    ScaledLogistic bin_map_{};
    ScaledLogistic noise_map_{};
    int n_bin_ = 0;
    int size_ = 0;
};

bool within_boxes(const WarpState& w) {
    try {
        w.validate();
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

}  // namespace

// --- LatentModel ------------------------------------------------------------------------

LatentModel::LatentModel(KernelSpec kernel, WarpState warp, VariationalState variational, RankedDataset data,
                         int quad_order)
    : kernel_(kernel), warp_(std::move(warp)), variational_(std::move(variational)), data_(std::move(data)),
      quad_order_(quad_order) {
    const int n = data_.size();
    if (quad_order_ < 2) throw DomainError("LatentModel: quadrature order must be >= 2");
    if (variational_.mu_f.size() != n || variational_.sigma_diag.size() != n) {
        throw DomainError("LatentModel: variational state length differs from the number of observations");
    }
    if (!(variational_.sigma_diag.array() > 0.0).all()) throw DomainError("LatentModel: sigma_diag must be positive");
    if (n >= 2 && static_cast<int>(warp_.bin_increments.size()) != n - 2) {
        throw DomainError("LatentModel: expected n - 2 bin increments");
    }
    latent_ = latent_coordinates(data_, warp_);
    K_ = cov_matrix(kernel_, latent_.S);
    auto chol = chol_factor(K_, kernel_.jitter);
    L_ = std::move(chol.lower);
    jitter_ = chol.jitter;
    const auto Lv = L_.triangularView<Eigen::Lower>();
    Eigen::MatrixXd Kinv = Eigen::MatrixXd::Identity(n, n);
    Lv.solveInPlace(Kinv);
    Kinv = Kinv.transpose() * Kinv;
    alpha_ = Kinv * variational_.mu_f;
    Eigen::MatrixXd middle = -K_;
    middle.diagonal() += variational_.sigma_diag;
    correction_ = Kinv * middle * Kinv;
}

LatentModel LatentModel::initial(KernelSpec kernel, RankedDataset data, double movement_constant, int quad_order) {
    const int n = data.size();
    auto warp = WarpState::initial(n, data.dim(), movement_constant);
    const auto edges = model_edges(warp, n);
    VariationalState v;
    v.mu_f.resize(n);
    v.sigma_diag = Eigen::VectorXd::Constant(n, 0.5);
    for (int i = 0; i < n; ++i) {
        const int r = data.output_ranks(i);
        const double lo = edges[r - 1];
        const double hi = edges[r];
        if (std::isfinite(lo) && std::isfinite(hi)) {
            v.mu_f(i) = 0.5 * (lo + hi);
        } else if (std::isfinite(hi)) {
            v.mu_f(i) = hi - 1.0;
        } else if (std::isfinite(lo)) {
            v.mu_f(i) = lo + 1.0;
        } else {
            v.mu_f(i) = 0.0;
        }
    }
    return LatentModel(kernel, std::move(warp), std::move(v), std::move(data), quad_order);
}

void LatentModel::marginals(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean, Eigen::VectorXd& var) const {
    const Eigen::MatrixXd Kq = cross_cov(kernel_, queries, latent_.S);
    mean = Kq * alpha_;
    const Eigen::MatrixXd B = Kq * correction_;
    var = (1.0 + (B.array() * Kq.array()).rowwise().sum()).cwiseMax(0.0);
}

// --- likelihood pieces ------------------------------------------------------------------

double ordinal_log_lik(double f, int bin, const std::vector<double>& edges, double sigma) {
    if (bin < 1 || bin >= static_cast<int>(edges.size())) throw DomainError("ordinal_log_lik: bin out of range");
    if (!(sigma > 0.0)) throw DomainError("ordinal_log_lik: sigma must be positive");
    const double a = (edges[bin] - f) / sigma;
    const double c = (edges[bin - 1] - f) / sigma;
    return std::max(normal::log_cdf_diff(a, c), kLogLikFloor);
}

double expected_log_lik(double mu, double var, int bin, const std::vector<double>& edges, double sigma,
                        int quad_order) {
    if (!(var > 0.0)) throw DomainError("expected_log_lik: variance must be positive");
    if (quad_order < 2) throw DomainError("expected_log_lik: quadrature order must be >= 2");
    if (bin < 1 || bin >= static_cast<int>(edges.size())) throw DomainError("expected_log_lik: bin out of range");
    if (!(sigma > 0.0)) throw DomainError("expected_log_lik: sigma must be positive");
    return expected_log_lik_term(mu, var, edges[bin], edges[bin - 1], sigma, quad_order, false).value;
}

double kl_term(const VariationalState& v, const Eigen::MatrixXd& K, double jitter) {
    const Eigen::Index n = K.rows();
    if (v.mu_f.size() != n || v.sigma_diag.size() != n) throw DomainError("kl_term: shape mismatch");
    const auto chol = chol_factor(K, jitter);
    const auto Lv = chol.lower.triangularView<Eigen::Lower>();
    Eigen::MatrixXd Linv = Eigen::MatrixXd::Identity(n, n);
    Lv.solveInPlace(Linv);
    const Eigen::VectorXd z = Linv * v.mu_f;
    const double trace = (Linv.array().square().colwise().sum().transpose() * v.sigma_diag.array()).sum();
    return 0.5 * (trace + z.squaredNorm() - static_cast<double>(n) + log_det_from_chol(chol.lower) -
                  v.sigma_diag.array().log().sum());
}

double elbo(const LatentModel& model) {
    const auto edges = model_edges(model.warp(), model.size());
    return elbo_core(model.kernel(), model.locations(), model.bins(), edges, model.warp().noise_sigma,
                     model.variational().mu_f, model.variational().sigma_diag, model.quad_order(), false)
        .value;
}

ElboGradient elbo_gradient(const LatentModel& model) {
    const int n = model.size();
    const int d = model.dim();
    const auto edges = model_edges(model.warp(), n);
    const auto core = elbo_core(model.kernel(), model.locations(), model.bins(), edges, model.warp().noise_sigma,
                                model.variational().mu_f, model.variational().sigma_diag, model.quad_order(), true);
    ElboGradient g;
    g.value = core.value;
    g.mu_f = core.g_mu;
    g.sigma_diag = core.g_var;
    g.noise_sigma = core.g_noise;
    g.locations = core.g_S;
    g.edges = core.g_edges;
    // s at rank position p sums deltas 1..p, so d/d delta_l collects every position >= l
    const auto& ranks = model.data().input_ranks;
    g.input_deltas.assign(d, std::vector<double>(n, 0.0));
    for (int k = 0; k < d; ++k) {
        std::vector<double> by_pos(n);
        for (int i = 0; i < n; ++i) by_pos[ranks(i, k) - 1] = core.g_S(i, k);
        double suffix = 0.0;
        for (int p = n - 1; p >= 0; --p) {
            suffix += by_pos[p];
            g.input_deltas[k][p] = suffix;
        }
    }
    const int m = static_cast<int>(model.warp().bin_increments.size());
    g.bin_increments.assign(m, 0.0);
    double suffix = 0.0;
    for (int l = m - 1; l >= 0; --l) {
        suffix += core.g_edges[l + 1];
        g.bin_increments[l] = suffix;
    }
    return g;
}

PosteriorGaussian posterior_from(const KernelSpec& kernel, const Eigen::MatrixXd& locations,
                                 const Eigen::MatrixXd& prior, const Eigen::MatrixXd& chol,
                                 const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 const Eigen::MatrixXd& queries) {
    const Eigen::Index n = locations.rows();
    if (queries.cols() != locations.cols()) throw DomainError("posterior: query dimension mismatch");
    if (mu.size() != n || sigma.rows() != n || sigma.cols() != n || prior.rows() != n || chol.rows() != n) {
        throw DomainError("posterior: shape mismatch");
    }
    const Eigen::MatrixXd Kq = cross_cov(kernel, queries, locations);
    const auto Lv = chol.triangularView<Eigen::Lower>();
    Eigen::MatrixXd W = Kq.transpose();
    Lv.solveInPlace(W);
    Lv.transpose().solveInPlace(W);
    PosteriorGaussian post;
    post.mean = W.transpose() * mu;
    const Eigen::MatrixXd middle = sigma - prior;
    post.cov = cov_matrix(kernel, queries) + W.transpose() * middle * W;
    post.cov = (0.5 * (post.cov + post.cov.transpose())).eval();
    return post;
}

PosteriorGaussian posterior_at(const LatentModel& model, const Eigen::MatrixXd& queries) {
    const Eigen::MatrixXd sigma = model.variational().sigma_diag.asDiagonal();
    return posterior_from(model.kernel(), model.locations(), model.prior_cov(), model.chol(),
                          model.variational().mu_f, sigma, queries);
}

// --- training ---------------------------------------------------------------------------

LatentModel train(const LatentModel& model, const TrainOptions& options, const std::optional<MovementBox>& movement) {
    if (options.steps < 0) throw DomainError("train: steps must be non-negative");
    if (options.steps == 0) return model;
    if (model.size() < 2) return model;
    if (movement && !(movement->half_width > 0.0)) throw DomainError("train: movement half-width must be positive");

    const ParameterMap map(model, movement);
    Eigen::VectorXd theta = map.encode(model);
    Eigen::VectorXd grad;
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(map.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(map.size());
    Eigen::VectorXd best = theta;
    double best_value = -kInf;

    for (int step = 1; step <= options.steps + 1; ++step) {
        const double value = map.evaluate(theta, grad);
        if (value > best_value) {
            best_value = value;
            best = theta;
        }
        if (step > options.steps) break;
        // ascent on the ELBO
        m1 = options.beta1 * m1 + (1.0 - options.beta1) * grad;
        m2 = options.beta2 * m2 + (1.0 - options.beta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(options.beta1, step);
        const double c2 = 1.0 - std::pow(options.beta2, step);
        theta.array() += options.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + options.epsilon);
        map.clamp(theta);
    }

    LatentModel trained = map.rebuild(model, best);
    if (within_boxes(model.warp()) && elbo(trained) < elbo(model)) return model;
    return trained;
}

// --- insertion --------------------------------------------------------------------------

LatentModel insert_observation(const LatentModel& model, const Eigen::VectorXd& x_new, double y_new) {
    const auto& old = model.data();
    const int n = old.size();
    const int d = old.dim();
    if (x_new.size() != d) throw DomainError("insert_observation: dimension mismatch");
    if (!x_new.allFinite() || !std::isfinite(y_new)) throw DomainError("insert_observation: non-finite observation");
    for (int k = 0; k < d; ++k) {
        if (!(x_new(k) > old.X.col(k).minCoeff() && x_new(k) < old.X.col(k).maxCoeff())) {
            throw DomainError("insert_observation: x_new outside the domain spanned by the observations");
        }
    }

    Eigen::MatrixXd X(n + 1, d);
    X.topRows(n) = old.X;
    X.row(n) = x_new.transpose();
    Eigen::VectorXd y(n + 1);
    y.head(n) = old.y;
    y(n) = y_new;
    auto data = RankedDataset::from(std::move(X), std::move(y));

    WarpState w = model.warp();
    for (int k = 0; k < d; ++k) {
        // the new point's rank p (1-based) falls inside old increment p, which is halved
        const int p = data.input_ranks(n, k);
        auto& deltas = w.input_deltas[k];
        const double half = 0.5 * deltas[p - 1];
        deltas[p - 1] = half;
        deltas.insert(deltas.begin() + (p - 1), half);
    }
    w.delta_min = 1e-3 / (n + 1);

    const int r_y = data.output_ranks(n);
    auto& incs = w.bin_increments;
    double fresh = 0.5 * w.bin_increment_max;
    if (!incs.empty()) {
        std::vector<double> sorted = incs;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
        fresh = std::min(median, 0.5 * w.bin_increment_max);
    }
    fresh = std::clamp(fresh, w.bin_increment_min, w.bin_increment_max);
    double shift = 0.0;
    if (n + 1 >= 3) {
        const int at = std::clamp(r_y - 2, 0, static_cast<int>(incs.size()));
        incs.insert(incs.begin() + at, fresh);
        shift = fresh;
    }

    const auto edges = model_edges(w, n + 1);
    const double lo = edges[r_y - 1];
    const double hi = edges[r_y];
    double mu_new;
    if (std::isfinite(lo) && std::isfinite(hi)) {
        mu_new = 0.5 * (lo + hi);
    } else if (std::isfinite(hi)) {
        mu_new = hi - 1.0;
    } else {
        mu_new = lo + 1.0;
    }

    VariationalState v;
    v.mu_f.resize(n + 1);
    v.mu_f.head(n) = model.variational().mu_f;
    // keep retained means inside their (shifted) bins
    for (int i = 0; i < n; ++i) {
        if (data.output_ranks(i) > r_y) v.mu_f(i) += shift;
    }
    v.mu_f(n) = mu_new;
    v.sigma_diag.resize(n + 1);
    v.sigma_diag.head(n) = model.variational().sigma_diag;
    v.sigma_diag(n) = 0.5;
    return LatentModel(model.kernel(), std::move(w), std::move(v), std::move(data), model.quad_order());
}

// --- checkpoints ------------------------------------------------------------------------

std::string serialize(const LatentModel& model) {
    auto doc = TextDocument::parse(serialize(model.warp()));
    doc.set("model", "kernel", model.kernel().family == KernelFamily::Matern32 ? "matern32" : "squared_exponential");
    doc.set("model", "jitter", model.kernel().jitter);
    doc.set("model", "quad_order", std::to_string(model.quad_order()));
    const auto& v = model.variational();
    doc.set("variational", "mu_f", std::vector<double>(v.mu_f.data(), v.mu_f.data() + v.mu_f.size()));
    doc.set("variational", "sigma_diag",
            std::vector<double>(v.sigma_diag.data(), v.sigma_diag.data() + v.sigma_diag.size()));
    const auto& data = model.data();
    doc.set("data", "n", std::to_string(data.size()));
    for (int k = 0; k < data.dim(); ++k) {
        const Eigen::VectorXd col = data.X.col(k);
        doc.set("data", "x" + std::to_string(k), std::vector<double>(col.data(), col.data() + col.size()));
        const Eigen::VectorXi rk = data.input_ranks.col(k);
        doc.set("data", "rank_x" + std::to_string(k), std::vector<int>(rk.data(), rk.data() + rk.size()));
    }
    doc.set("data", "y", std::vector<double>(data.y.data(), data.y.data() + data.y.size()));
    doc.set("data", "rank_y",
            std::vector<int>(data.output_ranks.data(), data.output_ranks.data() + data.output_ranks.size()));
    return doc.str();
}

LatentModel parse_model(std::string_view text) {
    const auto doc = TextDocument::parse(text);
    const auto warp = parse_warp_state(text);
    KernelSpec kernel;
    kernel.family = doc.get("model", "kernel") == "matern32" ? KernelFamily::Matern32 : KernelFamily::SquaredExponential;
    kernel.jitter = doc.get_double("model", "jitter");
    const int quad = std::stoi(doc.get("model", "quad_order"));
    const int n = std::stoi(doc.get("data", "n"));
    const int d = warp.dim();
    Eigen::MatrixXd X(n, d);
    for (int k = 0; k < d; ++k) {
        const auto col = doc.get_doubles("data", "x" + std::to_string(k));
        if (static_cast<int>(col.size()) != n) throw DomainError("parse_model: column length mismatch");
        for (int i = 0; i < n; ++i) X(i, k) = col[i];
    }
    const auto yv = doc.get_doubles("data", "y");
    const auto mu = doc.get_doubles("variational", "mu_f");
    const auto sd = doc.get_doubles("variational", "sigma_diag");
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
    VariationalState v{Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size())),
                       Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()))};
    return LatentModel(kernel, warp, std::move(v), RankedDataset::from(std::move(X), std::move(y)), quad);
}

}  // namespace ordbo
