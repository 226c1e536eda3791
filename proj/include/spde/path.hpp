#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace spde {

/// A candidate z in C([0,T]; H_n) on a uniform grid: column j holds the
/// coefficients of z(j h).  At least two nodes; piecewise-linear in time
/// wherever a continuous object is needed.
struct SpectralPath {
  double h = 0.0;
  Eigen::MatrixXd nodes;  // dim x (steps + 1)

  Eigen::Index dim() const { return nodes.rows(); }
  Eigen::Index steps() const { return nodes.cols() - 1; }
  double horizon() const { return h * double(steps()); }
  Eigen::ArrayXd node(Eigen::Index j) const { return nodes.col(j).array(); }

  void validate() const {
    if (h <= 0.0) throw std::domain_error("path: grid step must be positive");
    if (nodes.cols() < 2) throw std::domain_error("path: needs >= 2 nodes");
    if (!nodes.allFinite())
      throw std::domain_error("path: non-finite node values");
  }
};

/// Piecewise-constant control psi in L^2(0,T; H_n): column k is the value on
/// [k h, (k+1) h).  The squared L^2 norm is the exact finite sum h sum |psi_k|^2.
struct Control {
  double h = 0.0;
  Eigen::MatrixXd values;  // dim x intervals

  Eigen::Index dim() const { return values.rows(); }
  Eigen::Index intervals() const { return values.cols(); }
  double horizon() const { return h * double(intervals()); }
  double l2_norm_sq() const { return h * values.squaredNorm(); }
};

/// A control constant in time.
inline Control constant_control(const Eigen::ArrayXd& value, double horizon,
                                Eigen::Index intervals) {
  if (intervals < 1)
    throw std::domain_error("constant_control: needs >= 1 interval");
  Control psi;
  psi.h = horizon / double(intervals);
  psi.values = value.matrix().replicate(1, intervals);
  return psi;
}

/// Max-over-nodes L2 distance, the grid approximation of |.|_{C([0,T];H)}.
/// Paths of different spectral dimension are compared by zero-extension.
inline double path_distance(const SpectralPath& a, const SpectralPath& b) {
  if (a.steps() != b.steps() || std::abs(a.h - b.h) > 1e-12 * a.h)
    throw std::domain_error("path_distance: incompatible grids");
  const Eigen::Index lo = std::min(a.dim(), b.dim());
  double worst = 0.0;
  for (Eigen::Index j = 0; j <= a.steps(); ++j) {
    double d2 = (a.nodes.col(j).head(lo) - b.nodes.col(j).head(lo)).squaredNorm();
    if (a.dim() > lo) d2 += a.nodes.col(j).tail(a.dim() - lo).squaredNorm();
    if (b.dim() > lo) d2 += b.nodes.col(j).tail(b.dim() - lo).squaredNorm();
    worst = std::max(worst, d2);
  }
  return std::sqrt(worst);
}

}  // namespace spde
