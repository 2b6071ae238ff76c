#include "ordbo/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ordbo/errors.hpp"
#include "ordbo/text_doc.hpp"

namespace ordbo {

double info_gain(const Eigen::MatrixXd& K, double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("info_gain: sigma2 must be positive");
    if (K.rows() != K.cols()) throw DomainError("info_gain: K must be square");
    if (std::isinf(sigma2)) return 0.0;
    // det(I + K / s2) = det(s2 I + K) / s2^n
    Eigen::MatrixXd A = K;
    A.diagonal().array() += sigma2;
    const auto chol = chol_factor(A, 0.0);
    return 0.5 * (log_det_from_chol(chol.lower) - static_cast<double>(K.rows()) * std::log(sigma2));
}

double gp_posterior_variance(const KernelSpec& kernel, const Eigen::MatrixXd& points, const Eigen::VectorXd& query,
                             double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("gp_posterior_variance: sigma2 must be positive");
    if (points.rows() == 0) return 1.0;
    Eigen::MatrixXd A = cov_matrix(kernel, points);
    A.diagonal().array() += sigma2;
    const auto chol = chol_factor(A, 0.0);
    const Eigen::VectorXd k = cross_cov(kernel, points, query.transpose());
    const Eigen::VectorXd v = chol.lower.triangularView<Eigen::Lower>().solve(k);
    return std::max(1.0 - v.squaredNorm(), 0.0);
}

void BetaSchedule::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("beta schedule: delta must lie in (0, 1)");
    if (!(c1 > 0.0 && c2 > 0.0)) throw DomainError("beta schedule: c1 and c2 must be positive");
    if (d < 1) throw DomainError("beta schedule: d must be >= 1");
    if (!(2.0 * d * c1 / delta > 1.0)) throw DomainError("beta schedule: log(2 d c1 / delta) must be positive");
}

double beta_n(long long n, const BetaSchedule& s) {
    if (n < 1) throw DomainError("beta_n: n must be >= 1");
    s.validate();
    const double nn = static_cast<double>(n);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double inner = std::log(2.0 * s.d * s.c1 / s.delta);
    return 2.0 * std::log(2.0 * pi2 * nn * nn / (3.0 * s.delta)) +
           4.0 * s.d * std::log(s.d * s.c2 * nn * std::sqrt(inner));
}

Lemma2Constants lemma2_constants(double sigma2, double C, int d) {
    if (!(sigma2 > 0.0)) throw DomainError("lemma2_constants: sigma2 must be positive");
    const double l = std::log1p(1.0 / sigma2);
    return {2.0 / l, C * d / l};
}

double theorem1_bound(long long N, double beta_N, double gamma, double C1, double C2) {
    if (N < 0 || beta_N < 0 || gamma < 0 || C1 < 0 || C2 < 0) throw DomainError("theorem1_bound: negative input");
    const double nn = static_cast<double>(N);
    const double root = std::sqrt(4.0 * nn * beta_N * (C1 * gamma + C2 * std::log(nn + 1.0)));
    return root + std::numbers::pi * std::numbers::pi / 6.0;
}

std::string AnalysisTrace::to_csv() const {
    std::ostringstream os;
    os << "iteration,sigma2_obs,V_n,I_n,beta_n,delta_n_bound,max_movement,cum_regret_orig,cum_regret_latent_proxy,"
          "bound_rhs\n";
    for (std::size_t i = 0; i < size(); ++i) {
        os << (i + 1) << ',' << format_double(sigma2_obs[i]) << ',' << format_double(V[i]) << ','
           << format_double(I[i]) << ',' << format_double(beta[i]) << ',' << format_double(delta_bound[i]) << ','
           << format_double(max_movement[i]) << ',' << format_double(cum_regret_orig[i]) << ','
           << format_double(cum_regret_latent[i]) << ',' << format_double(bound_rhs[i]) << '\n';
    }
    return os.str();
}

Lemma2Report lemma2_check(const AnalysisTrace& t) {
    Lemma2Report r;
    r.N = static_cast<int>(t.size());
    const auto c = lemma2_constants(t.sigma2, t.C, t.d);
    r.C1 = c.C1;
    r.C2 = c.C2;
    if (r.N == 0) {
        r.holds = true;
        return r;
    }
    r.V_N = t.V.back();
    r.I_N = t.I.back();
    r.rhs = c.C1 * r.I_N + c.C2 * std::log(r.N + 1.0);
    r.slack = r.rhs - r.V_N;
    r.holds = r.V_N <= r.rhs;
    const double scale = 1.0 / std::log1p(1.0 / t.sigma2);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double z2 = t.sigma2_obs[i];
        if (z2 > 1.0) ++r.unit_variance_breaches;
        if (z2 > scale * std::log1p(z2 / t.sigma2) * (1.0 + 1e-12)) ++r.step_violations;
        if (i < t.max_movement.size() && t.max_movement[i] > t.delta_bound[i] * (1.0 + 1e-12)) ++r.movement_violations;
    }
    return r;
}

RegretSeries regret_traces(const std::vector<double>& y, double f_star, double prior_best) {
    RegretSeries s;
    double cum = 0.0;
    double best = prior_best;
    for (double v : y) {
        const double inst = v - f_star;
        cum += inst;
        best = std::min(best, v);
        s.instant.push_back(inst);
        s.cumulative.push_back(cum);
        s.simple.push_back(best - f_star);
    }
    return s;
}

}  // namespace ordbo
