#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordbo/kernel.hpp"

namespace ordbo {

/// 0.5 * log det(I + K / sigma2).
double info_gain(const Eigen::MatrixXd& K, double sigma2);

/// Noisy-GP posterior variance at `query` given observations at `points` (unit prior variance).
double gp_posterior_variance(const KernelSpec& kernel, const Eigen::MatrixXd& points, const Eigen::VectorXd& query,
                             double sigma2);

struct BetaSchedule {
    double delta = 0.1;
    double c1 = 1.0;
    double c2 = 1.0;
    int d = 1;

    void validate() const;
};

/// 2 log(2 pi^2 n^2 / (3 delta)) + 4 d log(d c2 n sqrt(log(2 d c1 / delta))).
double beta_n(long long n, const BetaSchedule& sched);

struct Lemma2Constants {
    double C1 = 0.0;
    double C2 = 0.0;
};

/// C1 = 2 / log(1 + 1/sigma2), C2 = C d / log(1 + 1/sigma2).
Lemma2Constants lemma2_constants(double sigma2, double C, int d);

/// sqrt(4 N beta_N (C1 gamma + C2 log(N + 1))) + pi^2 / 6.
double theorem1_bound(long long N, double beta_N, double gamma, double C1, double C2);

/// Per-acquisition analysis quantities (index n - 1 holds acquisition n).
struct AnalysisTrace {
    std::vector<double> sigma2_obs;    ///< sigma^2_{n-1}(s_n)
    std::vector<double> V;             ///< running sum of sigma2_obs
    std::vector<double> I;             ///< information gain of all points after step n
    std::vector<double> beta;          ///< beta_n
    std::vector<double> delta_bound;   ///< movement radius C d / n
    std::vector<double> max_movement;  ///< largest retained-point movement at refit n
    std::vector<double> cum_regret_orig;
    std::vector<double> cum_regret_latent;
    std::vector<double> bound_rhs;     ///< theorem1_bound at step n
    double sigma2 = 0.0;               ///< analysis noise variance
    double C = 1.0;
    int d = 1;

    [[nodiscard]] std::size_t size() const { return sigma2_obs.size(); }
    /// CSV with the diagnostics column set.
    [[nodiscard]] std::string to_csv() const;
};

struct Lemma2Report {
    int N = 0;
    double V_N = 0.0;
    double I_N = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double rhs = 0.0;
    double slack = 0.0;            ///< rhs - V_N
    bool holds = false;
    int step_violations = 0;       ///< steps where the per-step inequality fails
    int unit_variance_breaches = 0;  ///< steps with sigma2_obs > 1 (outside the proof's hypothesis)
    int movement_violations = 0;
};

Lemma2Report lemma2_check(const AnalysisTrace& trace);

struct RegretSeries {
    std::vector<double> instant;     ///< y_n - f*
    std::vector<double> cumulative;  ///< running sum of instant
    std::vector<double> simple;      ///< best y so far - f*
};

/// Regret over a sequence of acquired values. `prior_best` seeds the simple-regret minimum
/// (e.g. the best initial-design value; +inf for none).
RegretSeries regret_traces(const std::vector<double>& y, double f_star,
                           double prior_best = std::numeric_limits<double>::infinity());

}  // namespace ordbo
