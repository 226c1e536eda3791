#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace spde {

/// Coefficient vector of u = sum_i u_i e_i against the Dirichlet sine basis
/// e_i(xi) = sqrt(2) sin(i pi xi) on (0,1).  All operators used here are
/// diagonal in this basis, so a field is just its coefficient array.
using Field = Eigen::ArrayXd;

/// i-th eigenvalue of the negative Dirichlet Laplacian on (0,1): pi^2 i^2.
inline double eigenvalue(int i) {
  if (i < 1) throw std::domain_error("eigenvalue: index must be >= 1");
  return M_PI * M_PI * double(i) * double(i);
}

/// Eigenvalues lambda_1..lambda_n as an array.
inline Eigen::ArrayXd eigenvalues(Eigen::Index n) {
  Eigen::ArrayXd lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam[i] = eigenvalue(int(i) + 1);
  return lam;
}

/// Diagonal data of the linear part: -A with spectrum {pi^2 i^2} and the
/// noise covariance Q with spectrum {q_i}, truncated to the first n modes.
///
/// q_i = lambda_i^{-delta} when built from a decay exponent; an explicit
/// spectrum may be supplied instead.  delta outside (3/2, 2] only clears
/// `assumption_compliant` -- exploratory runs are allowed, but the flag is
/// carried into output metadata.
struct OperatorSpec {
  Eigen::Index n = 0;
  Eigen::ArrayXd lambda;              // pi^2 i^2, derived, never approximated
  Eigen::ArrayXd q;                   // q_i > 0
  std::optional<double> delta;        // set iff q_i = lambda_i^{-delta}
  bool assumption_compliant = true;   // delta in (3/2, 2], or explicit spectrum

  double lambda1() const { return lambda[0]; }
  double min_lambda_over_q() const { return (lambda / q).minCoeff(); }
};

inline OperatorSpec make_operator_spec(Eigen::Index n, double delta) {
  if (n < 1) throw std::domain_error("make_operator_spec: n must be >= 1");
  OperatorSpec spec;
  spec.n = n;
  spec.lambda = eigenvalues(n);
  spec.q = spec.lambda.pow(-delta);
  spec.delta = delta;
  spec.assumption_compliant = (delta > 1.5 && delta <= 2.0);
  return spec;
}

inline OperatorSpec make_operator_spec(Eigen::Index n,
                                       const Eigen::ArrayXd& q_spectrum) {
  if (n < 1) throw std::domain_error("make_operator_spec: n must be >= 1");
  if (q_spectrum.size() != n)
    throw std::invalid_argument("make_operator_spec: q spectrum length != n");
  if ((q_spectrum <= 0.0).any())
    throw std::invalid_argument("make_operator_spec: q_i must be positive");
  OperatorSpec spec;
  spec.n = n;
  spec.lambda = eigenvalues(n);
  spec.q = q_spectrum;
  return spec;
}

/// Truncation to the leading n modes.
inline OperatorSpec project(const OperatorSpec& spec, Eigen::Index n) {
  if (n > spec.n) throw std::domain_error("project: n exceeds spec dimension");
  OperatorSpec out;
  out.n = n;
  out.lambda = spec.lambda.head(n);
  out.q = spec.q.head(n);
  out.delta = spec.delta;
  out.assumption_compliant = spec.assumption_compliant;
  return out;
}

/// Squared fractional Sobolev norm |u|^2_{H^gamma} = sum_i lambda_i^gamma u_i^2.
/// gamma = 0 is Parseval: the plain squared L2 norm of the coefficients.
inline double sobolev_norm_sq(const Field& u, double gamma) {
  if (gamma == 0.0) return u.square().sum();
  return (eigenvalues(u.size()).pow(gamma) * u.square()).sum();
}

/// P_n: keep the first n coefficients.  Idempotent.
inline Field project(const Field& u, Eigen::Index n) {
  if (n > u.size()) throw std::domain_error("project: n exceeds field length");
  return u.head(n);
}

/// Zero-pad a field to dimension n >= length(u); the adjoint of project.
inline Field embed(const Field& u, Eigen::Index n) {
  if (n < u.size()) throw std::domain_error("embed: n below field length");
  Field out = Field::Zero(n);
  out.head(u.size()) = u;
  return out;
}

/// Semigroup E_n(t) = e^{tA_n}: coefficient-wise decay e^{-lambda_i t}.
/// A contraction for t >= 0 with |E_n(t)| <= e^{-lambda_1 t}.
inline Field semigroup_apply(const Field& u, double t) {
  if (t < 0.0) throw std::domain_error("semigroup_apply: t must be >= 0");
  return u * (-t * eigenvalues(u.size())).exp();
}

inline Field q_sqrt_apply(const OperatorSpec& spec, const Field& u) {
  return u * spec.q.sqrt();
}

inline Field q_inv_sqrt_apply(const OperatorSpec& spec, const Field& u) {
  return u / spec.q.sqrt();
}

/// Type-I discrete sine transform between the first n sine coefficients and
/// point values at the interior collocation nodes xi_k = k/(M+1), k = 1..M.
///
/// S has entries sqrt(2) sin(i pi xi_k); S^T S = (M+1) I exactly for n <= M,
/// so synthesize . evaluate is the identity on band-limited data.  The matrix
/// is dense; at desk scale (M <= 4096) that is cheaper than maintaining an
/// FFT dependency.
class SineTransform {
 public:
  SineTransform(Eigen::Index n, Eigen::Index grid_size) : n_(n), m_(grid_size) {
    if (grid_size < n)
      throw std::domain_error("SineTransform: grid size below mode count");
    matrix_.resize(m_, n_);
    const double step = 1.0 / double(m_ + 1);
    for (Eigen::Index k = 0; k < m_; ++k)
      for (Eigen::Index i = 0; i < n_; ++i)
        matrix_(k, i) = std::sqrt(2.0) * std::sin(double(i + 1) * M_PI *
                                                  double(k + 1) * step);
  }

  Eigen::Index modes() const { return n_; }
  Eigen::Index grid_size() const { return m_; }

  /// Point values u(xi_k), k = 1..M.
  Eigen::ArrayXd evaluate(const Field& u) const {
    if (u.size() != n_)
      throw std::domain_error("SineTransform::evaluate: dimension mismatch");
    return (matrix_ * u.matrix()).array();
  }

  /// First n sine coefficients of the sampled function; exact inverse of
  /// evaluate on inputs band-limited to M modes.
  Field synthesize(const Eigen::ArrayXd& grid_values) const {
    if (grid_values.size() != m_)
      throw std::domain_error("SineTransform::synthesize: dimension mismatch");
    return (matrix_.transpose() * grid_values.matrix()).array() /
           double(m_ + 1);
  }

 private:
  Eigen::Index n_;
  Eigen::Index m_;
  Eigen::MatrixXd matrix_;
};

/// One-shot helpers mirroring the transform pair.
inline Eigen::ArrayXd evaluate_on_grid(const Field& u, Eigen::Index grid_size) {
  return SineTransform(u.size(), grid_size).evaluate(u);
}

inline Field synthesize_from_grid(const Eigen::ArrayXd& grid_values,
                                  Eigen::Index n) {
  return SineTransform(n, grid_values.size()).synthesize(grid_values);
}

}  // namespace spde
