#include "spde/rate.hpp"

#include <cmath>

#include "spde/errors.hpp"

namespace spde {

namespace {

// Residual of interval k against the drift with the given F argument,
// already weighted by Q^{-1/2}.
Field interval_residual(const ModelSpec& model, const SpectralPath& z,
                        Eigen::Index k, const Field& f_argument) {
  const Field zk = z.node(k);
  const Field zk1 = z.node(k + 1);
  const Field mid = 0.5 * (zk + zk1);
  const Field resid = (zk1 - zk) / z.h + model.op.lambda * mid -
                      model.apply_f(f_argument);
  return resid / model.op.q.sqrt();
}

RateReport evaluate(const ModelSpec& model, const SpectralPath& z,
                    const Field& y, std::optional<double> frozen_tau) {
  if (z.dim() != model.dim() || y.size() != model.dim())
    throw std::domain_error("rate: dimension mismatch");
  z.validate();

  RateReport report;
  report.h = z.h;
  report.boundary_mismatch = std::sqrt((z.node(0) - y).square().sum());
  report.frozen_tau = frozen_tau;
  if (report.boundary_mismatch >
      kBoundaryTolerance * (1.0 + std::sqrt(y.square().sum()))) {
    report.infinite = true;
    return report;
  }

  Eigen::Index per_tau = 1;
  if (frozen_tau) {
    const double ratio = *frozen_tau / z.h;
    per_tau = Eigen::Index(std::llround(ratio));
    if (per_tau < 1 ||
        std::abs(ratio - double(per_tau)) >
            4.0 * std::numeric_limits<double>::epsilon() * ratio)
      throw ConfigError("rate_full: path grid must divide tau");
  }

  double sum = 0.0;
  try {
    for (Eigen::Index k = 0; k < z.steps(); ++k) {
      const Field f_arg = frozen_tau
                              ? z.node(per_tau * (k / per_tau))
                              : Field(0.5 * (z.node(k) + z.node(k + 1)));
      const Field r = interval_residual(model, z, k, f_arg);
      const double term = r.square().sum();
      if (!std::isfinite(term)) {
        report.infinite = true;
        return report;
      }
      sum += term;
    }
  } catch (const EvaluationError&) {
    report.infinite = true;
    return report;
  }
  report.value = 0.5 * z.h * sum;
  return report;
}

}  // namespace

RateReport rate_semi(const ModelSpec& model, const SpectralPath& z,
                     const Field& y) {
  return evaluate(model, z, y, std::nullopt);
}

RateReport rate_full(const ModelSpec& model, const SpectralPath& z,
                     const Field& y, double tau) {
  return evaluate(model, z, y, tau);
}

RateReport rate_reference(const ModelSpec& reference_model,
                          const SpectralPath& z, const Field& x,
                          const Control* tail_control) {
  RateReport report = rate_semi(reference_model, z, x);
  report.rule = "midpoint+tail";
  if (tail_control && !report.infinite) {
    const Eigen::Index n_ref = reference_model.dim();
    if (tail_control->dim() > n_ref) {
      const Eigen::Index extra = tail_control->dim() - n_ref;
      report.value += 0.5 * tail_control->h *
                      tail_control->values.bottomRows(extra).squaredNorm();
    }
  }
  return report;
}

Control control_from_path(const ModelSpec& model, const SpectralPath& z) {
  if (z.dim() != model.dim())
    throw std::domain_error("control_from_path: dimension mismatch");
  z.validate();
  Control psi;
  psi.h = z.h;
  psi.values.resize(model.dim(), z.steps());
  for (Eigen::Index k = 0; k < z.steps(); ++k) {
    const Field mid = 0.5 * (z.node(k) + z.node(k + 1));
    psi.values.col(k) = interval_residual(model, z, k, mid).matrix();
  }
  return psi;
}

}  // namespace spde
