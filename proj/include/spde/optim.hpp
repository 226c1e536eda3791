#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace spde {

/// Objective callback: fills the gradient and returns the value.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OptimOptions {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-7;  // on the infinity norm
  int memory = 10;                   // quasi-Newton curvature pairs
  double initial_step = 1.0;
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  int max_line_search = 50;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;  // infinity norm at exit
  int iterations = 0;
  bool converged = false;
  std::string exit_reason;
};

/// Limited-memory BFGS with Armijo backtracking.  The inverse-Hessian seed is
/// the standard s.y/y.y scaling, optionally composed with a fixed diagonal
/// preconditioner for badly scaled quadratics.
OptimResult lbfgs_minimize(const ObjectiveFn& objective, Eigen::VectorXd x0,
                           const OptimOptions& opts = {},
                           const Eigen::VectorXd* diagonal_seed = nullptr);

/// Projection onto a convex feasible set (in place).
using ProjectionFn = std::function<void(Eigen::VectorXd&)>;

/// Spectral projected gradient (Barzilai-Borwein step with Armijo safeguard)
/// for minimization over a convex set given by its projection.  Convergence
/// is measured on the projected gradient step |P(x - g) - x|_inf.
OptimResult projected_gradient_minimize(const ObjectiveFn& objective,
                                        const ProjectionFn& project,
                                        Eigen::VectorXd x0,
                                        const OptimOptions& opts = {});

}  // namespace spde
