#include "ordbo/benchfns.hpp"

#include <cmath>

#include "ordbo/errors.hpp"

namespace ordbo {
namespace {

void require_box(const Eigen::VectorXd& x, double lo, double hi, const char* who) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!(x(i) >= lo && x(i) <= hi)) throw DomainError(std::string(who) + ": point outside the domain");
    }
}

// many-steps base: two Gaussian wells plus a weak bowl
constexpr double kWellWidth = 0.15;
constexpr double kBasinLevel = -0.05;
constexpr double kStep = 0.05;
constexpr double kManyStepsBaseMin = -1.1994349741398256;

double many_steps_base(double x0, double x1) {
    const double two_w2 = 2.0 * kWellWidth * kWellWidth;
    const double a = (x0 - 0.2) * (x0 - 0.2) + (x1 - 0.8) * (x1 - 0.8);
    const double b = (x0 - 0.7) * (x0 - 0.7) + (x1 - 0.3) * (x1 - 0.3);
    return -1.0 * std::exp(-a / two_w2) - 1.2 * std::exp(-b / two_w2) + 1e-3 * (x0 * x0 + x1 * x1);
}

double quantise(double scaled, double base) {
    return base < kBasinLevel ? kStep * std::floor(scaled / kStep) : scaled;
}

const double kHartA[4][4] = {{10, 3, 17, 3.5}, {0.05, 10, 17, 0.1}, {3, 3.5, 1.7, 10}, {17, 8, 0.05, 10}};
const double kHartP[4][4] = {{0.1312, 0.1696, 0.5569, 0.0124},
                             {0.2329, 0.4135, 0.8307, 0.3736},
                             {0.2348, 0.1451, 0.3522, 0.2883},
                             {0.4047, 0.8828, 0.8732, 0.5743}};
const double kHartAlpha[4] = {1.0, 1.2, 3.0, 3.2};

Eigen::VectorXd box(int d, double v) { return Eigen::VectorXd::Constant(d, v); }

}  // namespace

double eval_step1d(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("step1d: point outside [0, 1]");
    const double q = (x - 0.6) * (x - 0.6);
    return x >= 0.6 ? q : q + 0.8 - 0.5 * x;
}

double eval_bent_cigar(const Eigen::VectorXd& x) {
    require_box(x, -5.0, 5.0, "bent-cigar");
    if (x.size() == 0) throw DomainError("bent-cigar: empty point");
    return x(0) * x(0) + 1e6 * x.tail(x.size() - 1).squaredNorm();
}

double eval_diff_powers(const Eigen::VectorXd& x) {
    require_box(x, -5.0, 5.0, "diff-powers");
    const Eigen::Index d = x.size();
    if (d == 0) throw DomainError("diff-powers: empty point");
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double p = d > 1 ? 2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(d - 1) : 2.0;
        s += std::pow(std::abs(x(i)), p);
    }
    return std::sqrt(s);
}

double eval_many_steps(const Eigen::VectorXd& x) {
    if (x.size() != 2) throw DomainError("many-steps: expects a 2-d point");
    require_box(x, 0.0, 1.0, "many-steps");
    const double r = many_steps_base(x(0), x(1));
    return quantise(100.0 * r, r);
}

double eval_hartmann4(const Eigen::VectorXd& x) {
    if (x.size() != 4) throw DomainError("hartmann4: expects a 4-d point");
    require_box(x, 0.0, 1.0, "hartmann4");
    double f = 0.0;
    for (int i = 0; i < 4; ++i) {
        double e = 0.0;
        for (int j = 0; j < 4; ++j) e += kHartA[i][j] * (x(j) - kHartP[i][j]) * (x(j) - kHartP[i][j]);
        f -= kHartAlpha[i] * std::exp(-e);
    }
    return f;
}

const std::vector<std::string>& objective_names() {
    static const std::vector<std::string> names{"step1d", "many-steps", "bent-cigar", "diff-powers", "hartmann4"};
    return names;
}

ObjectiveSpec make_objective(const std::string& name, int dim) {
    ObjectiveSpec s;
    s.name = name;
    if (name == "step1d") {
        s.dim = 1;
        s.lower = box(1, 0.0);
        s.upper = box(1, 1.0);
        s.evaluate = [](const Eigen::VectorXd& x) {
            if (x.size() != 1) throw DomainError("step1d: expects a 1-d point");
            return eval_step1d(x(0));
        };
        s.f_star = 0.0;
        s.argmin = box(1, 0.6);
    } else if (name == "bent-cigar" || name == "diff-powers") {
        s.dim = dim > 0 ? dim : 2;
        s.lower = box(s.dim, -5.0);
        s.upper = box(s.dim, 5.0);
        const int d = s.dim;
        if (name == "bent-cigar") {
            s.evaluate = [d](const Eigen::VectorXd& x) {
                if (x.size() != d) throw DomainError("bent-cigar: dimension mismatch");
                return eval_bent_cigar(x);
            };
        } else {
            s.evaluate = [d](const Eigen::VectorXd& x) {
                if (x.size() != d) throw DomainError("diff-powers: dimension mismatch");
                return eval_diff_powers(x);
            };
        }
        s.f_star = 0.0;
        s.argmin = Eigen::VectorXd::Zero(s.dim);
    } else if (name == "many-steps") {
        s.dim = 2;
        s.lower = box(2, 0.0);
        s.upper = box(2, 1.0);
        s.evaluate = eval_many_steps;
        s.f_star = quantise(100.0 * kManyStepsBaseMin, kManyStepsBaseMin);
        s.argmin = (Eigen::VectorXd(2) << 0.69996752, 0.29999498).finished();
    } else if (name == "hartmann4") {
        s.dim = 4;
        s.lower = box(4, 0.0);
        s.upper = box(4, 1.0);
        s.evaluate = eval_hartmann4;
        s.f_star = -3.7298405844855926;
        s.argmin = (Eigen::VectorXd(4) << 0.18739527, 0.19415153, 0.55791778, 0.26477962).finished();
    } else {
        throw DomainError("unknown objective '" + name + "'");
    }
    if (dim > 0 && dim != s.dim) throw DomainError("objective '" + name + "' has fixed dimension " + std::to_string(s.dim));
    return s;
}

}  // namespace ordbo
