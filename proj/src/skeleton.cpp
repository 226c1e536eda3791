#include "spde/skeleton.hpp"

#include <cmath>
#include <sstream>

#include "spde/errors.hpp"

namespace spde {

namespace {

double phi1(double x) {
  if (std::abs(x) < 1e-12) return 1.0 - 0.5 * x;
  return -std::expm1(-x) / x;
}

// Exponential-integrator factors for rates mu_i over an interval of width h:
// z <- e^{-mu h} z + h phi1(mu h) * forcing.  Valid for any sign of mu.
struct AffineFactors {
  Eigen::ArrayXd decay;
  Eigen::ArrayXd gain;
};

AffineFactors affine_factors(const Eigen::ArrayXd& mu, double h) {
  AffineFactors f;
  f.decay = (-h * mu).exp();
  f.gain.resize(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    f.gain[i] = h * phi1(h * mu[i]);
  return f;
}

void check_finite(const Field& state, Eigen::Index interval) {
  if (!state.allFinite()) {
    std::ostringstream msg;
    msg << "skeleton solve diverged on control interval " << interval;
    throw DivergenceError(std::size_t(interval), msg.str());
  }
}

}  // namespace

SpectralPath solve_skeleton(const Field& y, const Control& psi,
                            const ModelSpec& model, Eigen::Index substeps) {
  if (psi.dim() != model.dim() || y.size() != model.dim())
    throw std::domain_error("solve_skeleton: dimension mismatch");
  if (substeps < 1)
    throw std::domain_error("solve_skeleton: substeps must be >= 1");

  const bool linear =
      model.nonlinearity.kind == NonlinearityKind::LinearDiagonal;
  const bool nemytskij =
      model.nonlinearity.kind == NonlinearityKind::Nemytskij;
  const Eigen::ArrayXd mu =
      linear ? (model.op.lambda - model.nonlinearity.linear_coeffs).eval()
             : model.op.lambda;
  const double sub_h = psi.h / double(substeps);
  const AffineFactors f = affine_factors(mu, sub_h);
  const Eigen::ArrayXd q_sqrt = model.op.q.sqrt();

  SpectralPath path;
  path.h = psi.h;
  path.nodes.resize(model.dim(), psi.intervals() + 1);
  path.nodes.col(0) = y.matrix();

  Field state = y;
  for (Eigen::Index k = 0; k < psi.intervals(); ++k) {
    const Field forcing_control = q_sqrt * psi.values.col(k).array();
    for (Eigen::Index s = 0; s < substeps; ++s) {
      Field forcing = forcing_control;
      if (nemytskij) forcing += model.apply_f(state);
      state = f.decay * state + f.gain * forcing;
    }
    check_finite(state, k + 1);
    path.nodes.col(k + 1) = state.matrix();
  }
  return path;
}

SpectralPath solve_skeleton_frozen(const Field& y, const Control& psi,
                                   const ModelSpec& model, double tau) {
  if (psi.dim() != model.dim() || y.size() != model.dim())
    throw std::domain_error("solve_skeleton_frozen: dimension mismatch");
  const double ratio = tau / psi.h;
  const auto per_tau = Eigen::Index(std::llround(ratio));
  if (per_tau < 1 || std::abs(ratio - double(per_tau)) >
                         4.0 * std::numeric_limits<double>::epsilon() * ratio)
    throw ConfigError("solve_skeleton_frozen: control grid must divide tau");

  const AffineFactors f = affine_factors(model.op.lambda, psi.h);
  const Eigen::ArrayXd q_sqrt = model.op.q.sqrt();

  SpectralPath path;
  path.h = psi.h;
  path.nodes.resize(model.dim(), psi.intervals() + 1);
  path.nodes.col(0) = y.matrix();

  Field state = y;
  Field frozen_f = model.apply_f(state);
  for (Eigen::Index k = 0; k < psi.intervals(); ++k) {
    if (k % per_tau == 0) frozen_f = model.apply_f(state);
    state = f.decay * state +
            f.gain * (frozen_f + q_sqrt * psi.values.col(k).array());
    check_finite(state, k + 1);
    path.nodes.col(k + 1) = state.matrix();
  }
  return path;
}

SpectralPath build_zn(const Field& x, const Control& phi,
                      const ModelSpec& reference_model, Eigen::Index n,
                      Eigen::Index substeps) {
  if (n > reference_model.dim())
    throw std::domain_error("build_zn: n exceeds reference dimension");
  if (x.size() != reference_model.dim() ||
      phi.dim() != reference_model.dim())
    throw std::domain_error("build_zn: data must live at reference dimension");
  const ModelSpec sub = project(reference_model, n);
  Control projected;
  projected.h = phi.h;
  projected.values = phi.values.topRows(n);
  return solve_skeleton(project(x, n), projected, sub, substeps);
}

SpectralPath uncontrolled_flow(const Field& y, const ModelSpec& model,
                               double horizon, Eigen::Index intervals,
                               Eigen::Index substeps) {
  Control zero;
  zero.h = horizon / double(intervals);
  zero.values = Eigen::MatrixXd::Zero(model.dim(), intervals);
  return solve_skeleton(y, zero, model, substeps);
}

}  // namespace spde
