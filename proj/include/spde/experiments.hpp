#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spde/model.hpp"
#include "spde/path.hpp"
#include "spde/quasipotential.hpp"

namespace spde {

/// Convergence ladder of one discretization study.  `fitted_order` is the
/// least-squares slope of log(error) against log(tau) (temporal ladders) or
/// log(1/n) (spatial ladders), over entries with positive error; omitted
/// below three usable points.
struct LadderReport {
  std::string variable;  // "n" or "tau"
  std::vector<double> ladder;
  std::vector<double> path_errors;
  std::vector<double> rate_errors;
  std::vector<double> cross_checks;
  std::optional<double> fitted_order;
  bool monotone = false;  // errors non-increasing within a 5% noise band
  std::vector<std::string> notes;
};

std::optional<double> fit_order(const std::vector<double>& parameters,
                                const std::vector<double>& errors);

/// Spatial path-rate preservation: reference skeleton path z at the reference
/// dimension against the projected constructions z_n.  Rate errors are the
/// exact spectral tails 1/2 |(I - P_n) phi|^2; cross_checks hold the
/// quadrature-evaluated |I_ref(z) - I_n(z_n)| for comparison.
LadderReport spatial_preservation_study(const ModelSpec& reference_model,
                                        const Field& x, const Control& phi,
                                        const std::vector<Eigen::Index>& n_ladder,
                                        Eigen::Index substeps = 16);

/// Temporal rate gap |I^{n}(z) - I^{n,tau}(z)| on a fixed path over a tau
/// ladder; exact zeros when F = 0.
LadderReport temporal_gap_study(const ModelSpec& model, const SpectralPath& z,
                                const Field& y,
                                const std::vector<double>& tau_ladder);

/// Quasipotential preservation in the linear case: spatial tail errors
/// |V(u) - V^n(P_n u)| in closed form with a minimizer cross-check at the
/// smallest ladder entry, and temporal errors |V^n - V^{n,tau}| from the
/// minimizer pair at that same dimension.
struct QuasipotentialPreservationReport {
  LadderReport spatial;
  LadderReport temporal;
  double reference_value = 0.0;
  Eigen::Index cross_check_dim = 0;
  double minimizer_value = 0.0;    // ladder minimum at cross_check_dim
  double closed_form_value = 0.0;  // closed form at cross_check_dim
};

QuasipotentialPreservationReport quasipotential_preservation_study(
    const ModelSpec& reference_model, const Field& u,
    const std::vector<Eigen::Index>& n_ladder,
    const std::vector<double>& tau_ladder, const QuasipotentialOptions& opts);

}  // namespace spde
