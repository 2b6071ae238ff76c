#include "ordbo/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ordbo::normal {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Asymptotic expansion of Mills' ratio; used where erfc would underflow.
double log_cdf_lower_tail(double z) {
    const double inv2 = 1.0 / (z * z);
    double term = 1.0;
    double series = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -(2.0 * k - 1.0) * inv2;
        series += term;
    }
    return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

}  // namespace

double pdf(double z) { return std::exp(log_pdf(z)); }

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_cdf(double z) {
    if (z == std::numeric_limits<double>::infinity()) return 0.0;
    if (z == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
    if (z > 5.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
    if (z > -37.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
    return log_cdf_lower_tail(z);
}

double log_cdf_diff(double upper, double lower) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!(upper > lower)) return -inf;
    if (lower == -inf) return log_cdf(upper);
    if (upper == inf) return log_cdf(-lower);
    if (lower < 0.0 && upper > 0.0) {
        // straddles zero: erf difference has no cancellation
        return std::log(0.5 * (std::erf(upper * kInvSqrt2) - std::erf(lower * kInvSqrt2)));
    }
    // reflect so both arguments are non-positive
    double hi = upper;
    double lo = lower;
    if (lower >= 0.0) {
        hi = -lower;
        lo = -upper;
    }
    const double log_hi = log_cdf(hi);
    const double log_lo = log_cdf(lo);
    return log_hi + std::log1p(-std::exp(log_lo - log_hi));
}

}  // namespace ordbo::normal
