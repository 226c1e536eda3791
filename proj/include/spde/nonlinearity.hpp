#pragma once

#include <functional>
#include <memory>
#include <string>

#include "spde/spectral.hpp"

namespace spde {

enum class NonlinearityKind { Zero, LinearDiagonal, Nemytskij };

/// Drift nonlinearity F and its Galerkin projection F_n = P_n F.
///
/// Three shapes cover the study: F = 0, a mode-wise linear map u_i -> b_i u_i,
/// and the composition operator F(u)(xi) = f(u(xi)) evaluated pseudospectrally
/// (collocate on an M-point sine grid, apply f pointwise, transform back).
/// The Lipschitz bound L_F is user-declared for Nemytskij f and audited on
/// random samples in the tests, not inferred.
struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::Zero;
  Eigen::ArrayXd linear_coeffs;            // LinearDiagonal: b_i
  std::function<double(double)> f;         // Nemytskij: scalar map, f(0) = 0
  std::function<double(double)> f_prime;   // Nemytskij: derivative of f
  double lipschitz = 0.0;                  // L_F = sup |f'| (declared)
  Eigen::Index collocation_size = 0;       // Nemytskij grid size M
  std::string label = "zero";              // for metadata and config echo

  bool is_zero() const { return kind == NonlinearityKind::Zero; }
};

inline NonlinearitySpec zero_nonlinearity() { return {}; }

inline NonlinearitySpec linear_diagonal(const Eigen::ArrayXd& b) {
  NonlinearitySpec spec;
  spec.kind = NonlinearityKind::LinearDiagonal;
  spec.linear_coeffs = b;
  spec.lipschitz = b.size() ? b.abs().maxCoeff() : 0.0;
  spec.label = "linear_diagonal";
  return spec;
}

/// Composition operator with scalar map f.  f(0) = 0 is enforced unless
/// audit_origin is false (the dissipativity theory needs a fixed point at 0).
NonlinearitySpec nemytskij(std::function<double(double)> f,
                           std::function<double(double)> f_prime,
                           double lipschitz, Eigen::Index collocation_size,
                           std::string label = "nemytskij",
                           bool audit_origin = true);

/// lambda_1 - L_F; positive iff the uncontrolled flow contracts.
inline double dissipativity_constant(const NonlinearitySpec& f,
                                     const OperatorSpec& op) {
  return op.lambda1() - f.lipschitz;
}

/// F_n(u).  The transform argument is required for Nemytskij specs and must
/// match (dim(u), spec.collocation_size); pass nullptr otherwise.
Field apply_nonlinearity(const NonlinearitySpec& spec, const SineTransform* dst,
                         const Field& u);

/// Directional derivative F_n'(u) v.  For all three kinds F'(u) is
/// self-adjoint on H_n (a diagonal map or a pointwise multiplication), a fact
/// the action gradient relies on.
Field apply_nonlinearity_derivative(const NonlinearitySpec& spec,
                                    const SineTransform* dst, const Field& u,
                                    const Field& v);

}  // namespace spde
