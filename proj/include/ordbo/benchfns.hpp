#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ordbo {

/// Deterministic test objective on a bounded box, minimised.
struct ObjectiveSpec {
    std::string name;
    int dim = 0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::function<double(const Eigen::VectorXd&)> evaluate;
    double f_star = 0.0;       ///< known minimum value
    Eigen::VectorXd argmin;    ///< one minimiser
    double noise = 0.0;        ///< observation noise level; all suite members are noise-free
};

double eval_step1d(double x);
double eval_bent_cigar(const Eigen::VectorXd& x);
double eval_diff_powers(const Eigen::VectorXd& x);
double eval_many_steps(const Eigen::VectorXd& x);
double eval_hartmann4(const Eigen::VectorXd& x);

/// Registered names: step1d, many-steps, bent-cigar, diff-powers, hartmann4.
const std::vector<std::string>& objective_names();

/// Looks up an objective; `dim` only applies to the dimension-generic ones (0 = default 2).
ObjectiveSpec make_objective(const std::string& name, int dim = 0);

}  // namespace ordbo
