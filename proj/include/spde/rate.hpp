#pragma once

#include <optional>
#include <string>

#include "spde/model.hpp"
#include "spde/path.hpp"

namespace spde {

/// Result of evaluating a rate functional on a discrete path.  `infinite`
/// marks exclusion from the effective domain: the initial node missed the
/// required anchor beyond tolerance, or a non-finite integrand occurred.
struct RateReport {
  double value = 0.0;
  bool infinite = false;
  double h = 0.0;
  double boundary_mismatch = 0.0;
  std::string rule = "midpoint";
  std::optional<double> frozen_tau;

  double as_double() const {
    return infinite ? std::numeric_limits<double>::infinity() : value;
  }
};

/// |z(0) - y| <= kBoundaryTolerance * (1 + |y|) decides effective-domain
/// membership; exact equality is not achievable in floating point.
inline constexpr double kBoundaryTolerance = 1e-9;

/// Discrete action of the semi-discrete rate functional
///   1/2 int_0^T | Q_n^{-1/2} ( dz/dt - A_n z - F_n(z) ) |^2 dt
/// on the piecewise-linear path through the nodes: forward difference per
/// interval, drift terms at the interval midpoint (second-order quadrature).
RateReport rate_semi(const ModelSpec& model, const SpectralPath& z,
                     const Field& y);

/// Frozen-argument variant matching the fully discrete scheme: the drift
/// nonlinearity is evaluated at z(tau floor(t/tau)) instead of the midpoint.
/// The path grid must divide tau.  For F = 0 the integrand coincides with
/// rate_semi term by term.
RateReport rate_full(const ModelSpec& model, const SpectralPath& z,
                     const Field& y, double tau);

/// Truncation surrogate for the continuous rate functional: rate_semi at the
/// reference dimension, plus the exact spectral tail 1/2 |(I-P_N) phi|^2 when
/// the driving control is known in closed spectral form at a dimension
/// above the reference model's.
RateReport rate_reference(const ModelSpec& reference_model,
                          const SpectralPath& z, const Field& x,
                          const Control* tail_control = nullptr);

/// The control whose skeleton solution the evaluator deems z to be:
///   psi_k = Q_n^{-1/2} ( (z_{k+1} - z_k)/h - A_n z_{k+1/2} - F_n(z_{k+1/2}) ).
/// By construction 1/2 |psi|^2_{L^2} equals rate_semi(z, z(0)).value exactly.
Control control_from_path(const ModelSpec& model, const SpectralPath& z);

}  // namespace spde
