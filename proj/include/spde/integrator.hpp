#pragma once

#include <cstdint>
#include <limits>

#include "spde/model.hpp"
#include "spde/path.hpp"
#include "spde/rng.hpp"

namespace spde {

/// Per-mode standard deviations of the one-step stochastic convolution
/// integral int_0^tau E_n(tau - s) Q_n^{1/2} dW_n(s): the exact Gaussian law
/// the accelerated scheme samples.  sigma_i -> sqrt(q_i tau) as tau -> 0.
struct NoiseIncrementPlan {
  double tau = 0.0;
  Eigen::ArrayXd sigma;  // sqrt(q_i (1 - e^{-2 lambda_i tau}) / (2 lambda_i))
};

NoiseIncrementPlan make_noise_plan(const OperatorSpec& op, double tau);

struct IntegratorConfig {
  double tau = 0.0;        // time step, > 0
  double eps = 0.0;        // noise scale; 0 skips RNG entirely
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;     // trajectory index within the seed
  Eigen::Index stride = 1;      // emit every stride-th step
  Eigen::Index substeps = 1;    // > 1: dense output on the sub-grid tau/substeps
  bool enforce_stability = true;
};

/// Largest time step with uniformly bounded second moments:
/// the unique positive root of (e^{lambda1 tau} - 1)/(lambda1 tau)
/// = (lambda1 + L_F)/(2 L_F), by bisection to relative tolerance 1e-12.
/// L_F = 0 poses no constraint and returns +infinity.
double max_stable_stepsize(double lambda1, double lipschitz);

/// Precomputed mode-wise factors of one step of size tau:
///   Y <- decay * Y + drift * F_n(Y) + eps * sigma * xi.
struct StepFactors {
  Eigen::ArrayXd decay;   // e^{-lambda_i tau}
  Eigen::ArrayXd drift;   // (1 - e^{-lambda_i tau}) / lambda_i, exactly
  NoiseIncrementPlan noise;
};

StepFactors make_step_factors(const OperatorSpec& op, double tau);

/// One step of the accelerated exponential Euler method.  Gaussian draws are
/// consumed mode-major from the supplied stream; eps = 0 consumes nothing.
Field exp_euler_step(const Field& y, const ModelSpec& model,
                     const StepFactors& factors, double eps,
                     RandomStream* stream);

/// Discrete trajectory from y over [0, T].  T/tau must be an integer to
/// within 1 ulp.  Nodes carry the exact law of the scheme: with substeps > 1
/// the drift argument stays frozen at the enclosing tau-node while the
/// convolution increments are sampled exactly on the sub-grid, which realises
/// the continuous-time interpolation of the scheme at every emitted point.
/// Deterministic given (seed, stream, config).
SpectralPath simulate_path(const Field& y, double T, const ModelSpec& model,
                           const IntegratorConfig& cfg);

/// Exact draw of the stochastic convolution Gamma^n(t); per-mode variance
/// q_i (1 - e^{-2 lambda_i t}) / (2 lambda_i).
Field stochastic_convolution_sample(double t, const OperatorSpec& op,
                                    RandomStream& stream);

/// Number of steps in [0, T]; rejects T that is not a step multiple.
Eigen::Index step_count(double T, double tau);

}  // namespace spde
