#include "spde/experiments.hpp"

#include <cmath>

#include "spde/rate.hpp"
#include "spde/skeleton.hpp"

namespace spde {

std::optional<double> fit_order(const std::vector<double>& parameters,
                                const std::vector<double>& errors) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (!(errors[i] > 0.0) || !(parameters[i] > 0.0)) continue;
    const double lx = std::log(parameters[i]);
    const double ly = std::log(errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 3) return std::nullopt;
  return (double(m) * sxy - sx * sy) / (double(m) * sxx - sx * sx);
}

namespace {

bool non_increasing(const std::vector<double>& values, double band = 0.05) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[i - 1] * (1.0 + band) + 1e-15) return false;
  return true;
}

}  // namespace

LadderReport spatial_preservation_study(
    const ModelSpec& reference_model, const Field& x, const Control& phi,
    const std::vector<Eigen::Index>& n_ladder, Eigen::Index substeps) {
  LadderReport report;
  report.variable = "n";
  if (!std::isfinite(sobolev_norm_sq(x, 2.0)))
    report.notes.push_back("initial state has no finite H^2 norm");

  const SpectralPath z = solve_skeleton(x, phi, reference_model, substeps);
  const RateReport reference_rate = rate_reference(reference_model, z, x);

  for (Eigen::Index n : n_ladder) {
    report.ladder.push_back(double(n));
    const SpectralPath z_n = build_zn(x, phi, reference_model, n, substeps);
    report.path_errors.push_back(path_distance(z, z_n));

    // Exact spectral identity: the rate gap of the constructed comparison
    // path is the control tail 1/2 |(I - P_n) phi|^2 when F is zero or
    // linear diagonal.
    const Eigen::Index extra = phi.dim() - n;
    const double tail =
        (extra > 0)
            ? 0.5 * phi.h * phi.values.bottomRows(extra).squaredNorm()
            : 0.0;
    report.rate_errors.push_back(tail);

    const ModelSpec sub = project(reference_model, n);
    const RateReport semi = rate_semi(sub, z_n, project(x, n));
    report.cross_checks.push_back(
        std::abs(reference_rate.as_double() - semi.as_double()));
  }

  // Order against 1/n.
  std::vector<double> inverse_n;
  for (double n : report.ladder) inverse_n.push_back(1.0 / n);
  report.fitted_order = fit_order(inverse_n, report.path_errors);
  report.monotone = non_increasing(report.path_errors) &&
                    non_increasing(report.rate_errors);
  return report;
}

LadderReport temporal_gap_study(const ModelSpec& model, const SpectralPath& z,
                                const Field& y,
                                const std::vector<double>& tau_ladder) {
  LadderReport report;
  report.variable = "tau";
  const RateReport semi = rate_semi(model, z, y);
  for (double tau : tau_ladder) {
    report.ladder.push_back(tau);
    const RateReport full = rate_full(model, z, y, tau);
    report.rate_errors.push_back(
        std::abs(semi.as_double() - full.as_double()));
  }
  report.fitted_order = fit_order(report.ladder, report.rate_errors);
  report.monotone = non_increasing(report.rate_errors);
  return report;
}

QuasipotentialPreservationReport quasipotential_preservation_study(
    const ModelSpec& reference_model, const Field& u,
    const std::vector<Eigen::Index>& n_ladder,
    const std::vector<double>& tau_ladder, const QuasipotentialOptions& opts) {
  if (reference_model.nonlinearity.kind == NonlinearityKind::Nemytskij)
    throw std::invalid_argument(
        "quasipotential preservation: drift must be zero or linear diagonal");
  if (n_ladder.empty())
    throw std::invalid_argument("quasipotential preservation: empty ladder");

  QuasipotentialPreservationReport report;
  report.reference_value = quasipotential_linear(reference_model, u);

  report.spatial.variable = "n";
  for (Eigen::Index n : n_ladder) {
    report.spatial.ladder.push_back(double(n));
    const ModelSpec sub = project(reference_model, n);
    const double value = quasipotential_linear(sub, project(u, n));
    report.spatial.rate_errors.push_back(report.reference_value - value);
  }
  {
    std::vector<double> inverse_n;
    for (double n : report.spatial.ladder) inverse_n.push_back(1.0 / n);
    report.spatial.fitted_order =
        fit_order(inverse_n, report.spatial.rate_errors);
  }
  report.spatial.monotone = non_increasing(report.spatial.rate_errors);

  // Minimizer cross-check at the smallest dimension of the ladder.
  report.cross_check_dim = n_ladder.front();
  const ModelSpec cross = project(reference_model, report.cross_check_dim);
  const Field u_cross = project(u, report.cross_check_dim);
  const QuasipotentialResult minimized =
      minimize_quasipotential(cross, u_cross, opts);
  report.minimizer_value = minimized.value;
  report.closed_form_value = quasipotential_linear(cross, u_cross);

  report.temporal.variable = "tau";
  for (double tau : tau_ladder) {
    report.temporal.ladder.push_back(tau);
    const QuasipotentialResult frozen =
        minimize_quasipotential_full(cross, u_cross, tau, opts);
    report.temporal.rate_errors.push_back(
        std::abs(minimized.value - frozen.value));
  }
  report.temporal.fitted_order =
      fit_order(report.temporal.ladder, report.temporal.rate_errors);
  report.temporal.monotone = non_increasing(report.temporal.rate_errors);
  return report;
}

}  // namespace spde
