#include "spde/montecarlo.hpp"

#include <cmath>

#include "spde/errors.hpp"
#include "spde/parallel.hpp"
#include "spde/rng.hpp"

namespace spde {

namespace {

Eigen::Index nodes_per_comparison(const SpectralPath& z, double tau) {
  const double ratio = z.h / tau;
  const auto r = Eigen::Index(std::llround(ratio));
  if (r < 1 || std::abs(ratio - double(r)) >
                   4.0 * std::numeric_limits<double>::epsilon() * ratio)
    throw ConfigError("tube: integrator step must divide the path grid");
  return r;
}

// Max-over-nodes distance of one simulated trajectory to z.
double trajectory_max_distance(const ModelSpec& model, const SpectralPath& z,
                               double eps, double tau, Eigen::Index per_node,
                               const StepFactors& factors,
                               RandomStream* stream) {
  Field state = z.node(0);
  double worst = 0.0;
  for (Eigen::Index j = 1; j <= z.steps(); ++j) {
    for (Eigen::Index s = 0; s < per_node; ++s) {
      const Field drift = factors.drift * model.apply_f(state);
      state = factors.decay * state + drift;
      if (stream)
        for (Eigen::Index i = 0; i < state.size(); ++i)
          state[i] += eps * factors.noise.sigma[i] * stream->next_normal();
    }
    if (!state.allFinite())
      throw DivergenceError(std::size_t(j), "tube trajectory diverged");
    worst = std::max(worst, (state - z.node(j)).square().sum());
  }
  return std::sqrt(worst);
}

double grid_modulus_estimate(const ModelSpec& model, double eps, double tau) {
  return eps * std::sqrt(tau * model.op.q.sum());
}

}  // namespace

std::vector<MCEstimate> tube_probabilities(const ModelSpec& model,
                                           const SpectralPath& z,
                                           const std::vector<double>& deltas,
                                           double eps, double tau,
                                           const MCOptions& opts) {
  if (opts.samples <= 0) throw std::domain_error("tube: needs samples > 0");
  if (deltas.empty()) throw std::invalid_argument("tube: no radii given");
  z.validate();
  if (z.dim() != model.dim())
    throw std::domain_error("tube: path dimension mismatch");
  const Eigen::Index per_node = nodes_per_comparison(z, tau);
  const StepFactors factors = make_step_factors(model.op, tau);
  const double modulus = grid_modulus_estimate(model, eps, tau);

  std::vector<double> effective(deltas.size());
  for (std::size_t d = 0; d < deltas.size(); ++d)
    effective[d] = std::max(0.0, deltas[d] - modulus);

  const std::size_t count = std::size_t(opts.samples);
  const std::size_t blocks = (count + kDefaultBlockSize - 1) / kDefaultBlockSize;
  std::vector<std::vector<std::int64_t>> block_hits(
      blocks, std::vector<std::int64_t>(deltas.size(), 0));

  for_each_block(count, kDefaultBlockSize, opts.threads,
                 [&](std::size_t begin, std::size_t end, std::size_t b) {
                   auto& hits = block_hits[b];
                   for (std::size_t traj = begin; traj < end; ++traj) {
                     RandomStream stream(opts.seed, opts.stream_base + traj);
                     RandomStream* rng = (eps != 0.0) ? &stream : nullptr;
                     const double dist = trajectory_max_distance(
                         model, z, eps, tau, per_node, factors, rng);
                     for (std::size_t d = 0; d < deltas.size(); ++d)
                       if (dist < effective[d]) ++hits[d];
                   }
                 });

  std::vector<MCEstimate> out(deltas.size());
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    std::int64_t hits = 0;
    for (const auto& h : block_hits) hits += h[d];
    MCEstimate& e = out[d];
    e.samples = opts.samples;
    e.hits = hits;
    e.p_hat = double(hits) / double(opts.samples);
    e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / double(opts.samples));
    e.seed = opts.seed;
    e.delta = deltas[d];
    e.delta_effective = effective[d];
    e.modulus_estimate = modulus;
    e.eps = eps;
  }
  return out;
}

MCEstimate tube_probability(const ModelSpec& model, const SpectralPath& z,
                            double delta, double eps, double tau,
                            const MCOptions& opts) {
  return tube_probabilities(model, z, {delta}, eps, tau, opts).front();
}

SlopeFit ldp_slope(const ModelSpec& model, const SpectralPath& z, double delta,
                   const std::vector<double>& eps_ladder,
                   std::int64_t samples_per_eps, std::uint64_t seed,
                   int threads, double tau) {
  if (eps_ladder.empty()) throw std::invalid_argument("ldp_slope: empty ladder");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (eps_ladder[i] <= 0.0)
      throw std::domain_error("ldp_slope: eps must be positive");
    if (i > 0 && eps_ladder[i] >= eps_ladder[i - 1])
      throw std::invalid_argument("ldp_slope: ladder must decrease");
  }
  if (tau <= 0.0) tau = z.h;

  SlopeFit fit;
  for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
    MCOptions opts;
    opts.samples = samples_per_eps;
    opts.seed = seed;
    opts.stream_base = std::uint64_t(e) << 40;
    opts.threads = threads;
    SlopeEntry entry;
    entry.eps = eps_ladder[e];
    entry.estimate =
        tube_probability(model, z, delta, eps_ladder[e], tau, opts);
    const double p = entry.estimate.p_hat;
    entry.resolved = entry.estimate.hits >= 10;
    entry.saturated = entry.estimate.hits == entry.estimate.samples;
    if (p > 0.0) {
      entry.value = -entry.eps * entry.eps * std::log(p);
      entry.variance = std::pow(entry.eps, 4) * (1.0 - p) /
                       (p * double(entry.estimate.samples));
    }
    fit.entries.push_back(entry);
  }

  double weight_sum = 0.0, weighted_value = 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int fitted = 0;
  for (const auto& entry : fit.entries) {
    if (!entry.resolved || entry.saturated) continue;
    const double w = 1.0 / entry.variance;
    weight_sum += w;
    weighted_value += w * entry.value;
    sx += entry.eps;
    sy += entry.value;
    sxx += entry.eps * entry.eps;
    sxy += entry.eps * entry.value;
    ++fitted;
  }
  if (fitted == 0) {
    fit.inconclusive = true;
    return fit;
  }
  fit.aggregate = weighted_value / weight_sum;
  fit.aggregate_se = std::sqrt(1.0 / weight_sum);
  fit.trend_slope = (fitted >= 2)
                        ? (double(fitted) * sxy - sx * sy) /
                              (double(fitted) * sxx - sx * sx)
                        : 0.0;
  return fit;
}

TubeInfimum tube_action_infimum(const ModelSpec& model, const SpectralPath& z,
                                double delta, const OptimOptions& opts) {
  z.validate();
  if (z.dim() != model.dim())
    throw std::domain_error("tube infimum: path dimension mismatch");
  const Eigen::Index n = model.dim();
  const Eigen::Index K = z.steps();
  const double h = z.h;
  const Eigen::ArrayXd inv_q = model.op.q.inverse();
  const Field start = z.node(0);

  auto assemble = [&](const Eigen::VectorXd& x) {
    SpectralPath w;
    w.h = h;
    w.nodes.resize(n, K + 1);
    w.nodes.col(0) = start.matrix();
    for (Eigen::Index j = 1; j <= K; ++j)
      w.nodes.col(j) = x.segment((j - 1) * n, n);
    return w;
  };

  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const SpectralPath w = assemble(x);
    Eigen::MatrixXd node_grad = Eigen::MatrixXd::Zero(n, K + 1);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const Field wk = w.node(k);
      const Field wk1 = w.node(k + 1);
      const Field mid = 0.5 * (wk + wk1);
      const Field resid =
          (wk1 - wk) / h + model.op.lambda * mid - model.apply_f(mid);
      sum += (resid.square() * inv_q).sum();
      const Field wgt = resid * inv_q;
      const Field a_part = 0.5 * h * model.op.lambda * wgt;
      const Field f_pull = 0.5 * h * model.apply_f_derivative(mid, wgt);
      node_grad.col(k) += (-wgt + a_part - f_pull).matrix();
      node_grad.col(k + 1) += (wgt + a_part - f_pull).matrix();
    }
    grad.resize(n * K);
    for (Eigen::Index j = 1; j <= K; ++j)
      grad.segment((j - 1) * n, n) = node_grad.col(j);
    return 0.5 * h * sum;
  };

  auto project_tube = [&](Eigen::VectorXd& x) {
    for (Eigen::Index j = 1; j <= K; ++j) {
      auto seg = x.segment((j - 1) * n, n);
      const Eigen::VectorXd center = z.nodes.col(j);
      const double dist = (seg - center).norm();
      if (dist > delta) seg = center + (delta / dist) * (seg - center);
    }
  };

  // Start from z itself: feasible, and already optimal when the free flow
  // lies inside the tube.
  Eigen::VectorXd x0(n * K);
  for (Eigen::Index j = 1; j <= K; ++j)
    x0.segment((j - 1) * n, n) = z.nodes.col(j);

  const OptimResult res =
      projected_gradient_minimize(objective, project_tube, std::move(x0), opts);
  TubeInfimum out;
  out.value = res.value;
  out.path = assemble(res.x);
  out.converged = res.converged;
  out.iterations = res.iterations;
  return out;
}

double fernique_moment_exact(const OperatorSpec& op, double kappa, double t) {
  if (t < 0.0) throw std::domain_error("fernique: t must be >= 0");
  if (kappa >= op.min_lambda_over_q())
    throw std::domain_error("fernique: kappa >= min lambda_i/q_i diverges");
  double product = 1.0;
  for (Eigen::Index i = 0; i < op.n; ++i) {
    const double load =
        kappa * op.q[i] / op.lambda[i] * -std::expm1(-2.0 * op.lambda[i] * t);
    product *= 1.0 - load;
  }
  return 1.0 / std::sqrt(product);
}

MomentEstimate fernique_moment_mc(const OperatorSpec& op, double kappa,
                                  double t, const MCOptions& opts) {
  if (opts.samples <= 0) throw std::domain_error("fernique mc: samples > 0");
  const Eigen::ArrayXd sd =
      (op.q * (1.0 - (-2.0 * t * op.lambda).exp()) / (2.0 * op.lambda)).sqrt();
  const std::size_t count = std::size_t(opts.samples);
  const std::size_t blocks = (count + kDefaultBlockSize - 1) / kDefaultBlockSize;
  std::vector<double> block_sum(blocks, 0.0), block_sq(blocks, 0.0);

  for_each_block(count, kDefaultBlockSize, opts.threads,
                 [&](std::size_t begin, std::size_t end, std::size_t b) {
                   double sum = 0.0, sq = 0.0;
                   for (std::size_t i = begin; i < end; ++i) {
                     RandomStream stream(opts.seed, opts.stream_base + i);
                     double norm_sq = 0.0;
                     for (Eigen::Index m = 0; m < op.n; ++m) {
                       const double g = sd[m] * stream.next_normal();
                       norm_sq += g * g;
                     }
                     const double v = std::exp(kappa * norm_sq);
                     sum += v;
                     sq += v * v;
                   }
                   block_sum[b] = sum;
                   block_sq[b] = sq;
                 });

  double sum = 0.0, sq = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    sum += block_sum[b];
    sq += block_sq[b];
  }
  MomentEstimate est;
  est.samples = opts.samples;
  est.mean = sum / double(opts.samples);
  const double var =
      (sq / double(opts.samples) - est.mean * est.mean) *
      double(opts.samples) / double(opts.samples - 1);
  est.std_error = std::sqrt(std::max(0.0, var) / double(opts.samples));
  return est;
}

TerminalMoments terminal_state_moments(const ModelSpec& model, const Field& y,
                                       double T, const IntegratorConfig& base,
                                       const MCOptions& opts) {
  if (opts.samples <= 1)
    throw std::domain_error("terminal moments: needs samples > 1");
  const Eigen::Index n = model.dim();
  const std::size_t count = std::size_t(opts.samples);
  const std::size_t blocks = (count + kDefaultBlockSize - 1) / kDefaultBlockSize;
  Eigen::MatrixXd block_sum = Eigen::MatrixXd::Zero(n, blocks);
  Eigen::MatrixXd block_sq = Eigen::MatrixXd::Zero(n, blocks);

  const Eigen::Index steps = step_count(T, base.tau);
  const StepFactors factors = make_step_factors(model.op, base.tau);

  for_each_block(
      count, kDefaultBlockSize, opts.threads,
      [&](std::size_t begin, std::size_t end, std::size_t b) {
        Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(n);
        Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(n);
        for (std::size_t traj = begin; traj < end; ++traj) {
          RandomStream stream(base.seed, opts.stream_base + traj);
          RandomStream* rng = (base.eps != 0.0) ? &stream : nullptr;
          Field state = y;
          for (Eigen::Index m = 0; m < steps; ++m)
            state = exp_euler_step(state, model, factors, base.eps, rng);
          sum += state;
          sq += state.square();
        }
        block_sum.col(b) = sum.matrix();
        block_sq.col(b) = sq.matrix();
      });

  const Eigen::ArrayXd sum = block_sum.rowwise().sum().array();
  const Eigen::ArrayXd sq = block_sq.rowwise().sum().array();
  const double N = double(opts.samples);
  TerminalMoments tm;
  tm.samples = opts.samples;
  tm.mean = sum / N;
  tm.variance = (sq / N - tm.mean.square()) * N / (N - 1.0);
  tm.se_mean = (tm.variance / N).sqrt();
  tm.se_variance = tm.variance * std::sqrt(2.0 / (N - 1.0));
  return tm;
}

Eigen::MatrixXd empirical_invariant_measure(const ModelSpec& model, double eps,
                                            double tau, double burn_in,
                                            double window,
                                            Eigen::Index thin_steps,
                                            std::uint64_t seed) {
  if (burn_in < 0.0 || window <= 0.0)
    throw std::domain_error("invariant measure: bad burn-in or window");
  if (thin_steps < 1)
    throw std::domain_error("invariant measure: thinning must be >= 1 step");
  if (model.nonlinearity.lipschitz > 0.0) {
    const double tau0 =
        max_stable_stepsize(model.op.lambda1(), model.nonlinearity.lipschitz);
    if (tau > tau0)
      throw ConfigError("invariant measure: tau exceeds stability threshold");
  }
  const auto burn_steps = Eigen::Index(std::ceil(burn_in / tau));
  const auto window_steps = Eigen::Index(std::ceil(window / tau));
  const Eigen::Index samples = window_steps / thin_steps;
  if (samples < 1)
    throw std::domain_error("invariant measure: window too short");

  const StepFactors factors = make_step_factors(model.op, tau);
  RandomStream stream(seed, 0);
  RandomStream* rng = (eps != 0.0) ? &stream : nullptr;

  Field state = Field::Zero(model.dim());
  Eigen::MatrixXd out(model.dim(), samples);
  for (Eigen::Index m = 0; m < burn_steps; ++m)
    state = exp_euler_step(state, model, factors, eps, rng);
  for (Eigen::Index s = 0; s < samples; ++s) {
    for (Eigen::Index m = 0; m < thin_steps; ++m)
      state = exp_euler_step(state, model, factors, eps, rng);
    if (!state.allFinite())
      throw DivergenceError(std::size_t(s), "invariant-measure run diverged");
    out.col(s) = state.matrix();
  }
  return out;
}

TailReport tail_check(const Eigen::MatrixXd& samples,
                      const std::vector<double>& thresholds, double eps,
                      const std::vector<double>& alphas) {
  if (samples.cols() < 1)
    throw std::domain_error("tail_check: empty sample set");
  const Eigen::ArrayXd norms = samples.colwise().norm().array();
  const double N = double(samples.cols());

  TailReport report;
  for (double K : thresholds) {
    TailEntry entry;
    entry.threshold = K;
    entry.exceedances = (norms > K).count();
    entry.mu_hat = double(entry.exceedances) / N;
    entry.below_resolution = entry.exceedances == 0;
    if (entry.mu_hat > 0.0)
      entry.value = -eps * eps * std::log(entry.mu_hat);
    report.entries.push_back(entry);
  }

  // Gaussian-type consistency: -eps^2 log mu_hat should follow beta K^2.
  // Fit the quadratic through the origin and demand small relative residuals;
  // log-order corrections keep them well under the band on Gaussian data.
  double num = 0.0, den = 0.0;
  int checked = 0;
  for (const auto& entry : report.entries) {
    if (entry.threshold <= 0.0 || entry.below_resolution ||
        entry.mu_hat >= 1.0)
      continue;
    const double k2 = entry.threshold * entry.threshold;
    num += entry.value * k2;
    den += k2 * k2;
    ++checked;
  }
  report.quadratic_growth = checked >= 2;
  if (report.quadratic_growth) {
    const double beta = num / den;
    for (const auto& entry : report.entries) {
      if (entry.threshold <= 0.0 || entry.below_resolution ||
          entry.mu_hat >= 1.0)
        continue;
      const double fitted = beta * entry.threshold * entry.threshold;
      if (std::abs(entry.value - fitted) > 0.35 * entry.value)
        report.quadratic_growth = false;
    }
  }

  for (double alpha : alphas) {
    const double target = std::exp(-alpha / (eps * eps));
    std::optional<double> found;
    for (const auto& entry : report.entries)
      if (entry.mu_hat <= target) {
        found = entry.threshold;
        break;
      }
    report.alpha_thresholds.emplace_back(alpha, found);
  }
  return report;
}

}  // namespace spde
