#include "spde/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

namespace spde {

namespace {

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion for the product of the implicit inverse Hessian with g.
Eigen::VectorXd apply_inverse_hessian(const std::deque<CurvaturePair>& pairs,
                                      const Eigen::VectorXd& g,
                                      const Eigen::VectorXd* diagonal_seed) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  if (diagonal_seed) {
    q = q.cwiseProduct(*diagonal_seed);
  } else if (!pairs.empty()) {
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alpha[i] - beta) * pairs[i].s;
  }
  return q;
}

}  // namespace

OptimResult lbfgs_minimize(const ObjectiveFn& objective, Eigen::VectorXd x0,
                           const OptimOptions& opts,
                           const Eigen::VectorXd* diagonal_seed) {
  OptimResult res;
  res.x = std::move(x0);
  Eigen::VectorXd grad(res.x.size());
  res.value = objective(res.x, grad);
  res.gradient_norm = grad.lpNorm<Eigen::Infinity>();

  std::deque<CurvaturePair> pairs;
  Eigen::VectorXd x_new(res.x.size()), grad_new(res.x.size());

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (res.gradient_norm <= opts.gradient_tolerance) {
      res.converged = true;
      res.exit_reason = "gradient tolerance reached";
      return res;
    }
    Eigen::VectorXd direction =
        -apply_inverse_hessian(pairs, grad, diagonal_seed);
    double slope = direction.dot(grad);
    if (!(slope < 0.0)) {  // not a descent direction; restart from steepest
      pairs.clear();
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = opts.initial_step;
    bool accepted = false;
    double value_new = res.value;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      x_new = res.x + step * direction;
      value_new = objective(x_new, grad_new);
      if (std::isfinite(value_new) &&
          value_new <= res.value + opts.armijo_slope * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack_factor;
    }
    if (!accepted) {
      res.exit_reason = "line search failed";
      res.iterations = it;
      return res;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (int(pairs.size()) > opts.memory) pairs.pop_front();
    }

    res.x.swap(x_new);
    grad.swap(grad_new);
    res.value = value_new;
    res.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    res.iterations = it + 1;
  }
  res.exit_reason = "iteration limit";
  return res;
}

OptimResult projected_gradient_minimize(const ObjectiveFn& objective,
                                        const ProjectionFn& project,
                                        Eigen::VectorXd x0,
                                        const OptimOptions& opts) {
  OptimResult res;
  res.x = std::move(x0);
  project(res.x);
  Eigen::VectorXd grad(res.x.size());
  res.value = objective(res.x, grad);

  double bb_step = opts.initial_step;
  Eigen::VectorXd x_new(res.x.size()), grad_new(res.x.size());

  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXd probe = res.x - grad;
    project(probe);
    res.gradient_norm = (probe - res.x).lpNorm<Eigen::Infinity>();
    if (res.gradient_norm <= opts.gradient_tolerance) {
      res.converged = true;
      res.exit_reason = "projected gradient tolerance reached";
      return res;
    }

    double step = bb_step;
    bool accepted = false;
    double value_new = res.value;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      x_new = res.x - step * grad;
      project(x_new);
      value_new = objective(x_new, grad_new);
      const double decrease = grad.dot(res.x - x_new);
      if (std::isfinite(value_new) &&
          value_new <= res.value - opts.armijo_slope * decrease) {
        accepted = true;
        break;
      }
      step *= opts.backtrack_factor;
    }
    if (!accepted) {
      res.exit_reason = "line search failed";
      res.iterations = it;
      return res;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    bb_step = (sy > 0.0) ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10)
                         : opts.initial_step;

    res.x.swap(x_new);
    grad.swap(grad_new);
    res.value = value_new;
    res.iterations = it + 1;
  }
  res.exit_reason = "iteration limit";
  return res;
}

}  // namespace spde
