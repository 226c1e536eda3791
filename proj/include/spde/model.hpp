#pragma once

#include <memory>

#include "spde/nonlinearity.hpp"
#include "spde/spectral.hpp"

namespace spde {

/// A full problem instance: the diagonal operator pair (A_n, Q_n), the drift
/// nonlinearity, and the default noise scale.  The sine transform backing a
/// Nemytskij drift is built once here so every downstream evaluation shares
/// it; the struct is immutable after construction and safe to share across
/// threads.
struct ModelSpec {
  OperatorSpec op;
  NonlinearitySpec nonlinearity;
  double eps = 0.0;
  std::shared_ptr<const SineTransform> transform;  // null unless Nemytskij

  Eigen::Index dim() const { return op.n; }

  Field apply_f(const Field& u) const {
    return apply_nonlinearity(nonlinearity, transform.get(), u);
  }
  Field apply_f_derivative(const Field& u, const Field& v) const {
    return apply_nonlinearity_derivative(nonlinearity, transform.get(), u, v);
  }
  double dissipativity() const {
    return dissipativity_constant(nonlinearity, op);
  }
};

inline ModelSpec make_model(OperatorSpec op, NonlinearitySpec nonlinearity,
                            double eps = 0.0) {
  ModelSpec model;
  model.op = std::move(op);
  model.nonlinearity = std::move(nonlinearity);
  model.eps = eps;
  if (model.nonlinearity.kind == NonlinearityKind::Nemytskij) {
    if (model.nonlinearity.collocation_size < model.op.n)
      throw std::domain_error("make_model: collocation size below dimension");
    model.transform = std::make_shared<SineTransform>(
        model.op.n, model.nonlinearity.collocation_size);
  }
  if (model.nonlinearity.kind == NonlinearityKind::LinearDiagonal &&
      model.nonlinearity.linear_coeffs.size() != model.op.n)
    throw std::domain_error("make_model: linear coefficients != dimension");
  return model;
}

/// The n-mode Galerkin restriction of a reference model (truncates Q and
/// linear coefficients, rebuilds the collocation transform at dimension n).
inline ModelSpec project(const ModelSpec& model, Eigen::Index n) {
  NonlinearitySpec f = model.nonlinearity;
  if (f.kind == NonlinearityKind::LinearDiagonal)
    f.linear_coeffs = f.linear_coeffs.head(n).eval();
  return make_model(project(model.op, n), std::move(f), model.eps);
}

}  // namespace spde
