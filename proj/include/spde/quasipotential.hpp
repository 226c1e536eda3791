#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spde/model.hpp"
#include "spde/optim.hpp"
#include "spde/path.hpp"

namespace spde {

/// Closed-form quasipotential for F = 0 (or a linear diagonal drift absorbed
/// into the operator): V(u) = sum_i mu_i u_i^2 / q_i with mu_i = lambda_i - b_i.
/// Derived as the T -> infinity limit of the finite-horizon steering cost
/// below; the tests re-derive it through the path minimizer.
double quasipotential_linear(const ModelSpec& model, const Field& u);

/// Exact optimal cost of steering 0 -> u in time T for the decoupled linear
/// problems: sum_i mu_i u_i^2 / (q_i (1 - e^{-2 mu_i T})).
double quasipotential_linear_finite_horizon(const ModelSpec& model,
                                            const Field& u, double T);

struct ActionMinimum {
  double value = 0.0;
  SpectralPath path;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::string exit_reason;
};

/// Minimizes the discrete action over the interior nodes of a path with
/// z(0) = 0 and z(T) = u held fixed (eliminated variables, not penalties).
/// The gradient is analytic; descent is limited-memory quasi-Newton with
/// backtracking and a diagonal inverse-Hessian seed matching the F = 0
/// Hessian.  With frozen_tau set, the drift argument freezes at tau-nodes
/// (the fully discrete action); the path grid must then divide tau.
ActionMinimum minimize_action(const ModelSpec& model, const Field& u, double T,
                              Eigen::Index intervals, const OptimOptions& opts,
                              const SpectralPath* init = nullptr,
                              std::optional<double> frozen_tau = std::nullopt);

/// The objective behind minimize_action, exposed for gradient audits: value
/// of the discrete action on z (whose first node must be the origin) and its
/// analytic gradient with respect to the interior nodes, stacked column-major.
double action_value_and_gradient(const ModelSpec& model, const SpectralPath& z,
                                 Eigen::VectorXd& gradient,
                                 std::optional<double> frozen_tau = std::nullopt);

struct QuasipotentialOptions {
  std::vector<double> horizons = {0.25, 0.5, 1.0, 2.0, 4.0};
  Eigen::Index intervals = 400;  // grid policy: h = T / intervals
  OptimOptions optim;
  int multi_starts = 3;          // extra perturbed starts for nonlinear F
  std::uint64_t seed = 0x5eed;
  double domain_cap = 1e6;       // all ladder values above: flag the target
};

struct QuasipotentialResult {
  double value = 0.0;
  double best_horizon = 0.0;
  SpectralPath path;             // optimizer path at the best horizon
  int iterations = 0;            // at the best horizon
  double gradient_norm = 0.0;    // at exit of the best horizon
  double h = 0.0;
  std::vector<std::pair<double, double>> per_horizon;
  bool converged = false;
  bool monotone = true;          // per-horizon values non-increasing
  bool possibly_outside_domain = false;
  std::string exit_reason;
};

/// V^n(u): ladder of horizons, warm-started with the previous optimum
/// time-dilated onto the next grid; reports the ladder minimum.
QuasipotentialResult minimize_quasipotential(const ModelSpec& model,
                                             const Field& u,
                                             const QuasipotentialOptions& opts);

/// V^{n,tau}(u): the same machinery over the frozen-argument action.
/// tau must divide every ladder horizon and be a multiple of the grid step.
QuasipotentialResult minimize_quasipotential_full(
    const ModelSpec& model, const Field& u, double tau,
    const QuasipotentialOptions& opts);

}  // namespace spde
