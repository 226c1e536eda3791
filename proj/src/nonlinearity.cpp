#include "spde/nonlinearity.hpp"

#include <cmath>

#include "spde/errors.hpp"

namespace spde {

NonlinearitySpec nemytskij(std::function<double(double)> f,
                           std::function<double(double)> f_prime,
                           double lipschitz, Eigen::Index collocation_size,
                           std::string label, bool audit_origin) {
  if (!f || !f_prime)
    throw std::invalid_argument("nemytskij: f and f' are both required");
  if (lipschitz < 0.0)
    throw std::invalid_argument("nemytskij: Lipschitz bound must be >= 0");
  if (collocation_size < 1)
    throw std::invalid_argument("nemytskij: collocation size must be >= 1");
  if (audit_origin && std::abs(f(0.0)) > 1e-14)
    throw std::invalid_argument("nemytskij: f(0) != 0");
  NonlinearitySpec spec;
  spec.kind = NonlinearityKind::Nemytskij;
  spec.f = std::move(f);
  spec.f_prime = std::move(f_prime);
  spec.lipschitz = lipschitz;
  spec.collocation_size = collocation_size;
  spec.label = std::move(label);
  return spec;
}

namespace {

const SineTransform& checked_transform(const NonlinearitySpec& spec,
                                       const SineTransform* dst,
                                       const Field& u) {
  if (!dst)
    throw std::invalid_argument("nemytskij evaluation needs a sine transform");
  if (dst->modes() != u.size() || dst->grid_size() != spec.collocation_size)
    throw std::domain_error("nemytskij transform does not match (n, M)");
  return *dst;
}

Eigen::ArrayXd apply_pointwise(const std::function<double(double)>& f,
                               const Eigen::ArrayXd& values,
                               const SineTransform& dst) {
  Eigen::ArrayXd out(values.size());
  const double step = 1.0 / double(dst.grid_size() + 1);
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    out[k] = f(values[k]);
    if (!std::isfinite(out[k]))
      throw EvaluationError(double(k + 1) * step,
                            "nonlinearity returned a non-finite value");
  }
  return out;
}

}  // namespace

Field apply_nonlinearity(const NonlinearitySpec& spec, const SineTransform* dst,
                         const Field& u) {
  switch (spec.kind) {
    case NonlinearityKind::Zero:
      return Field::Zero(u.size());
    case NonlinearityKind::LinearDiagonal:
      if (spec.linear_coeffs.size() != u.size())
        throw std::domain_error("linear diagonal coefficients != field size");
      return spec.linear_coeffs * u;
    case NonlinearityKind::Nemytskij: {
      const SineTransform& t = checked_transform(spec, dst, u);
      return t.synthesize(apply_pointwise(spec.f, t.evaluate(u), t));
    }
  }
  throw std::logic_error("unreachable nonlinearity kind");
}

Field apply_nonlinearity_derivative(const NonlinearitySpec& spec,
                                    const SineTransform* dst, const Field& u,
                                    const Field& v) {
  if (u.size() != v.size())
    throw std::domain_error("derivative: u and v dimensions differ");
  switch (spec.kind) {
    case NonlinearityKind::Zero:
      return Field::Zero(u.size());
    case NonlinearityKind::LinearDiagonal:
      if (spec.linear_coeffs.size() != u.size())
        throw std::domain_error("linear diagonal coefficients != field size");
      return spec.linear_coeffs * v;
    case NonlinearityKind::Nemytskij: {
      const SineTransform& t = checked_transform(spec, dst, u);
      const Eigen::ArrayXd slope = apply_pointwise(spec.f_prime, t.evaluate(u), t);
      return t.synthesize(slope * t.evaluate(v));
    }
  }
  throw std::logic_error("unreachable nonlinearity kind");
}

}  // namespace spde
