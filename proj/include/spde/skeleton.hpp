#pragma once

#include "spde/model.hpp"
#include "spde/path.hpp"

namespace spde {

/// Mild solution of the controlled deterministic dynamics
///   dz/dt = A_n z + F_n(z) + Q_n^{1/2} psi(t),   z(0) = y,
/// marched with an exponential integrator on sub-intervals of width
/// h' = psi.h / substeps and emitted on the control grid.
///
/// The linear-diagonal drift is absorbed into the exponential, so for F zero
/// or linear diagonal every sub-interval is integrated exactly and the result
/// is substep-invariant; a Nemytskij drift is frozen at the sub-interval's
/// left endpoint (first order in h').
SpectralPath solve_skeleton(const Field& y, const Control& psi,
                            const ModelSpec& model, Eigen::Index substeps = 16);

/// Same dynamics with the drift argument frozen at the most recent tau-node,
///   dz/dt = A_n z + F_n(z(tau floor(t/tau))) + Q_n^{1/2} psi(t),
/// the skeleton of the fully discrete scheme.  psi.h must divide tau; each
/// control interval is then integrated exactly (affine ODE with constant
/// forcing), so with tau = psi.h this reproduces the deterministic part of
/// the accelerated exponential Euler map node for node.
SpectralPath solve_skeleton_frozen(const Field& y, const Control& psi,
                                   const ModelSpec& model, double tau);

/// The n-mode comparison path driven by the projected data: solves
///   dz_n/dt = A_n z_n + F_n(z_n) + Q_n^{1/2} P_n phi,  z_n(0) = P_n x,
/// where x and phi live at a reference dimension N >= n.
SpectralPath build_zn(const Field& x, const Control& phi,
                      const ModelSpec& reference_model, Eigen::Index n,
                      Eigen::Index substeps = 16);

/// Uncontrolled flow from y (psi = 0) on the given grid.
SpectralPath uncontrolled_flow(const Field& y, const ModelSpec& model,
                               double horizon, Eigen::Index intervals,
                               Eigen::Index substeps = 16);

}  // namespace spde
