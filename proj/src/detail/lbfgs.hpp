#pragma once

#include <functional>

#include <Eigen/Dense>

namespace glekit::detail {

struct LbfgsOptions {
  int max_iters = 200;
  double f_tol = 1e-8;  // relative decrease termination
  double g_tol = 1e-6;  // projected gradient termination
  int history = 8;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Box-constrained limited-memory BFGS with projected backtracking line
// search. Objective returns f and fills the gradient. Deterministic.
LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, const LbfgsOptions& options = {});

}  // namespace glekit::detail
