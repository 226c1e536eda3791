#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spde/integrator.hpp"
#include "spde/model.hpp"
#include "spde/optim.hpp"
#include "spde/path.hpp"

namespace spde {

struct MCEstimate {
  double p_hat = 0.0;
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double delta_effective = 0.0;
  double modulus_estimate = 0.0;  // grid gap backed out of delta
  double eps = 0.0;
};

struct MCOptions {
  std::int64_t samples = 10000;
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;  // offset separating independent studies
  int threads = 1;
};

/// Fraction of trajectories started at z(0) whose max-over-nodes L2 distance
/// to z stays below delta.  The integrator step tau must divide the path grid
/// step; distances are checked at the path nodes.  The sup-norm gap of the
/// grid approximation is estimated as eps sqrt(tau sum q_i) (one-step noise
/// scale) and backed out of delta before counting hits.
MCEstimate tube_probability(const ModelSpec& model, const SpectralPath& z,
                            double delta, double eps, double tau,
                            const MCOptions& opts);

/// Same trajectories evaluated against several radii at once; hit sets are
/// nested by construction, so the estimates are exactly monotone in delta.
std::vector<MCEstimate> tube_probabilities(const ModelSpec& model,
                                           const SpectralPath& z,
                                           const std::vector<double>& deltas,
                                           double eps, double tau,
                                           const MCOptions& opts);

struct SlopeEntry {
  double eps = 0.0;
  MCEstimate estimate;
  double value = 0.0;      // -eps^2 log p_hat
  double variance = 0.0;   // delta-method variance of `value`
  bool resolved = false;   // hits >= 10
  bool saturated = false;  // p_hat == 1, value pinned at 0
};

struct SlopeFit {
  std::vector<SlopeEntry> entries;
  double aggregate = 0.0;     // inverse-variance weighted mean
  double aggregate_se = 0.0;
  double trend_slope = 0.0;   // least-squares slope of value against eps
  bool inconclusive = false;  // no resolved entry entered the fit
};

/// -eps^2 log p_hat of the tube event along a decreasing eps ladder.
SlopeFit ldp_slope(const ModelSpec& model, const SpectralPath& z, double delta,
                   const std::vector<double>& eps_ladder,
                   std::int64_t samples_per_eps, std::uint64_t seed,
                   int threads = 1, double tau = 0.0);

/// Smallest discrete action over paths pinned to the tube: w(0) = z(0) fixed,
/// every node constrained to the L2 ball of radius delta around z, terminal
/// node free.  Solved with a spectral projected-gradient method; for F = 0
/// the problem is convex and the value is the tube infimum.
struct TubeInfimum {
  double value = 0.0;
  SpectralPath path;
  bool converged = false;
  int iterations = 0;
};

TubeInfimum tube_action_infimum(const ModelSpec& model, const SpectralPath& z,
                                double delta, const OptimOptions& opts = {});

/// Fernique exponential square moment of the stochastic convolution:
///   E exp(kappa |Gamma^n(t)|^2)
///     = prod_i (1 - kappa (q_i / lambda_i)(1 - e^{-2 lambda_i t}))^{-1/2},
/// finite iff kappa < min_i lambda_i / q_i.
double fernique_moment_exact(const OperatorSpec& op, double kappa, double t);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// Monte Carlo cross-check of the product formula over exact Gamma^n draws.
MomentEstimate fernique_moment_mc(const OperatorSpec& op, double kappa,
                                  double t, const MCOptions& opts);

/// Mean and variance of each mode of Y(T) over independent trajectories,
/// with standard errors; the verification target for the exact OU law.
struct TerminalMoments {
  Eigen::ArrayXd mean;
  Eigen::ArrayXd variance;
  Eigen::ArrayXd se_mean;
  Eigen::ArrayXd se_variance;
  std::int64_t samples = 0;
};

TerminalMoments terminal_state_moments(const ModelSpec& model, const Field& y,
                                       double T, const IntegratorConfig& base,
                                       const MCOptions& opts);

/// Time-average construction of the invariant measure: one long trajectory
/// from 0, burn-in discarded, states collected every `thin` steps.  Columns
/// are the retained states.
Eigen::MatrixXd empirical_invariant_measure(const ModelSpec& model, double eps,
                                            double tau, double burn_in,
                                            double window,
                                            Eigen::Index thin_steps,
                                            std::uint64_t seed);

struct TailEntry {
  double threshold = 0.0;
  double mu_hat = 0.0;
  std::int64_t exceedances = 0;
  bool below_resolution = false;  // no exceedance: mu_hat < 1/samples
  double value = 0.0;             // -eps^2 log mu_hat where defined
};

struct TailReport {
  std::vector<TailEntry> entries;
  bool quadratic_growth = false;  // value/K^2 non-decreasing over resolved K
  // For each alpha: the smallest tested K with mu_hat <= exp(-alpha/eps^2).
  std::vector<std::pair<double, std::optional<double>>> alpha_thresholds;
};

TailReport tail_check(const Eigen::MatrixXd& samples,
                      const std::vector<double>& thresholds, double eps,
                      const std::vector<double>& alphas = {});

}  // namespace spde
