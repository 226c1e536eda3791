#include "spde/integrator.hpp"

#include <cmath>
#include <sstream>

#include "spde/errors.hpp"

namespace spde {

namespace {

// (1 - e^{-x}) / x, continuous through x = 0.
double phi1(double x) {
  if (std::abs(x) < 1e-12) return 1.0 - 0.5 * x;
  return -std::expm1(-x) / x;
}

}  // namespace

NoiseIncrementPlan make_noise_plan(const OperatorSpec& op, double tau) {
  if (tau <= 0.0) throw std::domain_error("noise plan: tau must be positive");
  NoiseIncrementPlan plan;
  plan.tau = tau;
  plan.sigma =
      (op.q * (1.0 - (-2.0 * tau * op.lambda).exp()) / (2.0 * op.lambda))
          .sqrt();
  return plan;
}

double max_stable_stepsize(double lambda1, double lipschitz) {
  if (lambda1 <= 0.0)
    throw std::domain_error("max_stable_stepsize: lambda1 must be positive");
  if (lipschitz == 0.0) return std::numeric_limits<double>::infinity();
  if (lipschitz < 0.0 || lipschitz >= lambda1)
    throw std::domain_error(
        "max_stable_stepsize: requires 0 <= L_F < lambda1");
  // Solve (e^x - 1)/x = (lambda1 + L_F)/(2 L_F) for x = lambda1 tau0.
  const double target = (lambda1 + lipschitz) / (2.0 * lipschitz);
  auto g = [](double x) { return std::expm1(x) / x; };
  double lo = 1e-12, hi = 1.0;
  while (g(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / lambda1;
}

StepFactors make_step_factors(const OperatorSpec& op, double tau) {
  StepFactors f;
  f.decay = (-tau * op.lambda).exp();
  f.drift.resize(op.n);
  for (Eigen::Index i = 0; i < op.n; ++i)
    f.drift[i] = tau * phi1(tau * op.lambda[i]);
  f.noise = make_noise_plan(op, tau);
  return f;
}

Field exp_euler_step(const Field& y, const ModelSpec& model,
                     const StepFactors& factors, double eps,
                     RandomStream* stream) {
  Field next = factors.decay * y + factors.drift * model.apply_f(y);
  if (eps != 0.0) {
    if (!stream)
      throw std::invalid_argument("exp_euler_step: eps != 0 needs a stream");
    for (Eigen::Index i = 0; i < next.size(); ++i)
      next[i] += eps * factors.noise.sigma[i] * stream->next_normal();
  }
  return next;
}

Eigen::Index step_count(double T, double tau) {
  if (tau <= 0.0) throw std::domain_error("step_count: tau must be positive");
  if (T <= 0.0) throw std::domain_error("step_count: T must be positive");
  const double ratio = T / tau;
  const auto m = Eigen::Index(std::llround(ratio));
  if (m < 1 || std::abs(ratio - double(m)) >
                   4.0 * std::numeric_limits<double>::epsilon() * ratio)
    throw ConfigError("horizon is not an integer multiple of the time step");
  return m;
}

SpectralPath simulate_path(const Field& y, double T, const ModelSpec& model,
                           const IntegratorConfig& cfg) {
  if (y.size() != model.dim())
    throw std::domain_error("simulate_path: state dimension mismatch");
  if (cfg.eps < 0.0) throw std::domain_error("simulate_path: eps must be >= 0");
  if (cfg.stride < 1 || cfg.substeps < 1)
    throw ConfigError("simulate_path: stride and substeps must be >= 1");
  if (cfg.substeps > 1 && cfg.stride != 1)
    throw ConfigError("simulate_path: dense output is incompatible with stride");
  if (cfg.enforce_stability && model.nonlinearity.lipschitz > 0.0) {
    const double tau0 =
        max_stable_stepsize(model.op.lambda1(), model.nonlinearity.lipschitz);
    if (cfg.tau > tau0) {
      std::ostringstream msg;
      msg << "time step " << cfg.tau << " exceeds the stability threshold "
          << tau0 << " solving (e^{lambda1 tau0}-1)/(lambda1 tau0) = "
          << "(lambda1+L_F)/(2 L_F)";
      throw ConfigError(msg.str());
    }
  }

  const Eigen::Index macro_steps = step_count(T, cfg.tau);
  if (macro_steps % cfg.stride != 0)
    throw ConfigError("simulate_path: stride must divide the step count");
  const double sub_tau = cfg.tau / double(cfg.substeps);
  const StepFactors factors = make_step_factors(model.op, sub_tau);

  RandomStream stream(cfg.seed, cfg.stream);
  RandomStream* rng = (cfg.eps != 0.0) ? &stream : nullptr;

  const Eigen::Index emitted =
      (cfg.substeps > 1) ? macro_steps * cfg.substeps : macro_steps / cfg.stride;
  SpectralPath path;
  path.h = (cfg.substeps > 1) ? sub_tau : cfg.tau * double(cfg.stride);
  path.nodes.resize(model.dim(), emitted + 1);
  path.nodes.col(0) = y.matrix();

  Field state = y;
  Eigen::Index out = 1;
  for (Eigen::Index m = 0; m < macro_steps; ++m) {
    const Field frozen_drift = factors.drift * model.apply_f(state);
    for (Eigen::Index s = 0; s < cfg.substeps; ++s) {
      state = factors.decay * state + frozen_drift;
      if (rng)
        for (Eigen::Index i = 0; i < state.size(); ++i)
          state[i] += cfg.eps * factors.noise.sigma[i] * rng->next_normal();
      if (!state.allFinite()) {
        std::ostringstream msg;
        msg << "trajectory diverged at step " << m + 1;
        throw DivergenceError(std::size_t(m + 1), msg.str());
      }
      if (cfg.substeps > 1) path.nodes.col(out++) = state.matrix();
    }
    if (cfg.substeps == 1 && (m + 1) % cfg.stride == 0)
      path.nodes.col(out++) = state.matrix();
  }
  return path;
}

Field stochastic_convolution_sample(double t, const OperatorSpec& op,
                                    RandomStream& stream) {
  if (t < 0.0)
    throw std::domain_error("stochastic_convolution_sample: t must be >= 0");
  Field draw(op.n);
  if (t == 0.0) return Field::Zero(op.n);
  const Eigen::ArrayXd sd =
      (op.q * (1.0 - (-2.0 * t * op.lambda).exp()) / (2.0 * op.lambda)).sqrt();
  for (Eigen::Index i = 0; i < op.n; ++i) draw[i] = sd[i] * stream.next_normal();
  return draw;
}

}  // namespace spde
