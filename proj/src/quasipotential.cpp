#include "spde/quasipotential.hpp"

#include <cmath>

#include "spde/errors.hpp"
#include "spde/rng.hpp"

namespace spde {

namespace {

Eigen::ArrayXd effective_rates(const ModelSpec& model) {
  if (model.nonlinearity.kind == NonlinearityKind::Zero)
    return model.op.lambda;
  if (model.nonlinearity.kind == NonlinearityKind::LinearDiagonal)
    return model.op.lambda - model.nonlinearity.linear_coeffs;
  throw std::invalid_argument(
      "linear quasipotential oracle: drift must be zero or linear diagonal");
}

}  // namespace

double quasipotential_linear(const ModelSpec& model, const Field& u) {
  const Eigen::ArrayXd mu = effective_rates(model);
  if ((mu <= 0.0).any())
    throw std::domain_error(
        "quasipotential_linear: absorbed operator is not dissipative");
  if (u.size() != model.dim())
    throw std::domain_error("quasipotential_linear: dimension mismatch");
  return (mu / model.op.q * u.square()).sum();
}

double quasipotential_linear_finite_horizon(const ModelSpec& model,
                                            const Field& u, double T) {
  if (T <= 0.0)
    throw std::domain_error("finite-horizon oracle: T must be positive");
  if (u.size() != model.dim())
    throw std::domain_error("finite-horizon oracle: dimension mismatch");
  const Eigen::ArrayXd mu = effective_rates(model);
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    // Controllability Gramian of the scalar problem; mu = 0 degenerates to qT.
    const double gram =
        (std::abs(mu[i]) < 1e-12)
            ? model.op.q[i] * T
            : model.op.q[i] * -std::expm1(-2.0 * mu[i] * T) / (2.0 * mu[i]);
    total += 0.5 * u[i] * u[i] / gram;
  }
  return total;
}

namespace {

// Discrete action over interior nodes, endpoints fixed.  Layout: column j of
// the (K+1)-node path; unknowns are columns 1..K-1 stacked column-major.
class ActionProblem {
 public:
  ActionProblem(const ModelSpec& model, Field target, double T,
                Eigen::Index intervals, std::optional<double> frozen_tau)
      : model_(model),
        target_(std::move(target)),
        h_(T / double(intervals)),
        intervals_(intervals),
        per_tau_(1) {
    if (intervals < 2)
      throw std::domain_error("minimize_action: needs >= 2 intervals");
    if (frozen_tau) {
      const double ratio = *frozen_tau / h_;
      per_tau_ = Eigen::Index(std::llround(ratio));
      if (per_tau_ < 1 ||
          std::abs(ratio - double(per_tau_)) >
              4.0 * std::numeric_limits<double>::epsilon() * ratio)
        throw ConfigError("minimize_action: grid step must divide tau");
      frozen_ = true;
    }
  }

  Eigen::Index dim() const { return model_.dim(); }
  Eigen::Index unknowns() const { return dim() * (intervals_ - 1); }
  double h() const { return h_; }

  SpectralPath assemble(const Eigen::VectorXd& x) const {
    SpectralPath z;
    z.h = h_;
    z.nodes.resize(dim(), intervals_ + 1);
    z.nodes.col(0).setZero();
    for (Eigen::Index j = 1; j < intervals_; ++j)
      z.nodes.col(j) = x.segment((j - 1) * dim(), dim());
    z.nodes.col(intervals_) = target_.matrix();
    return z;
  }

  Eigen::VectorXd flatten_interior(const SpectralPath& z) const {
    Eigen::VectorXd x(unknowns());
    for (Eigen::Index j = 1; j < intervals_; ++j)
      x.segment((j - 1) * dim(), dim()) = z.nodes.col(j);
    return x;
  }

  double value_and_gradient(const Eigen::VectorXd& x,
                            Eigen::VectorXd& grad) const {
    const SpectralPath z = assemble(x);
    const Eigen::ArrayXd inv_q = model_.op.q.inverse();
    Eigen::MatrixXd node_grad = Eigen::MatrixXd::Zero(dim(), intervals_ + 1);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < intervals_; ++k) {
      const Field zk = z.node(k);
      const Field zk1 = z.node(k + 1);
      const Field mid = 0.5 * (zk + zk1);
      const Eigen::Index p = per_tau_ * (k / per_tau_);
      const Field f_arg = frozen_ ? z.node(p) : mid;
      const Field resid =
          (zk1 - zk) / h_ + model_.op.lambda * mid - model_.apply_f(f_arg);
      sum += (resid.square() * inv_q).sum();

      // w = Q^{-1} resid; the drift Jacobian is self-adjoint in every
      // supported drift kind, so transposes below are the maps themselves.
      const Field w = resid * inv_q;
      const Field a_part = 0.5 * h_ * model_.op.lambda * w;
      node_grad.col(k) += (-w + a_part).matrix();
      node_grad.col(k + 1) += (w + a_part).matrix();
      if (frozen_) {
        node_grad.col(p) -=
            h_ * model_.apply_f_derivative(z.node(p), w).matrix();
      } else {
        const Field f_pull = 0.5 * h_ * model_.apply_f_derivative(mid, w);
        node_grad.col(k) -= f_pull.matrix();
        node_grad.col(k + 1) -= f_pull.matrix();
      }
    }
    grad.resize(unknowns());
    for (Eigen::Index j = 1; j < intervals_; ++j)
      grad.segment((j - 1) * dim(), dim()) = node_grad.col(j);
    return 0.5 * h_ * sum;
  }

  // Inverse of the F = 0 Hessian diagonal, replicated over interior nodes.
  Eigen::VectorXd diagonal_seed() const {
    const Eigen::ArrayXd diag =
        (2.0 / h_ + 0.5 * h_ * model_.op.lambda.square()) / model_.op.q;
    Eigen::VectorXd seed(unknowns());
    for (Eigen::Index j = 0; j + 1 < intervals_; ++j)
      seed.segment(j * dim(), dim()) = diag.inverse().matrix();
    return seed;
  }

  SpectralPath straight_line() const {
    SpectralPath z;
    z.h = h_;
    z.nodes.resize(dim(), intervals_ + 1);
    for (Eigen::Index j = 0; j <= intervals_; ++j)
      z.nodes.col(j) =
          (double(j) / double(intervals_)) * target_.matrix();
    return z;
  }

 private:
  const ModelSpec& model_;
  Field target_;
  double h_;
  Eigen::Index intervals_;
  Eigen::Index per_tau_;
  bool frozen_ = false;
};

}  // namespace

double action_value_and_gradient(const ModelSpec& model, const SpectralPath& z,
                                 Eigen::VectorXd& gradient,
                                 std::optional<double> frozen_tau) {
  if (z.node(0).abs().maxCoeff() != 0.0)
    throw std::domain_error("action gradient: path must start at the origin");
  ActionProblem problem(model, z.node(z.steps()), z.horizon(), z.steps(),
                        frozen_tau);
  return problem.value_and_gradient(problem.flatten_interior(z), gradient);
}

ActionMinimum minimize_action(const ModelSpec& model, const Field& u, double T,
                              Eigen::Index intervals, const OptimOptions& opts,
                              const SpectralPath* init,
                              std::optional<double> frozen_tau) {
  if (u.size() != model.dim())
    throw std::domain_error("minimize_action: dimension mismatch");
  ActionProblem problem(model, u, T, intervals, frozen_tau);

  Eigen::VectorXd x0;
  if (init) {
    if (init->dim() != model.dim() || init->steps() != intervals)
      throw std::domain_error("minimize_action: init path grid mismatch");
    x0 = problem.flatten_interior(*init);
  } else {
    x0 = problem.flatten_interior(problem.straight_line());
  }

  const Eigen::VectorXd seed = problem.diagonal_seed();
  const OptimResult res = lbfgs_minimize(
      [&problem](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        return problem.value_and_gradient(x, g);
      },
      std::move(x0), opts, &seed);

  ActionMinimum out;
  out.value = res.value;
  out.path = problem.assemble(res.x);
  out.iterations = res.iterations;
  out.gradient_norm = res.gradient_norm;
  out.converged = res.converged;
  out.exit_reason = res.exit_reason;
  return out;
}

namespace {

QuasipotentialResult run_ladder(const ModelSpec& model, const Field& u,
                                const QuasipotentialOptions& opts,
                                std::optional<double> frozen_tau) {
  if (opts.horizons.empty())
    throw std::invalid_argument("quasipotential: empty horizon ladder");
  for (std::size_t i = 1; i < opts.horizons.size(); ++i)
    if (opts.horizons[i] <= opts.horizons[i - 1])
      throw std::invalid_argument("quasipotential: ladder must increase");

  QuasipotentialResult result;
  result.value = std::numeric_limits<double>::infinity();
  const bool nonlinear =
      model.nonlinearity.kind == NonlinearityKind::Nemytskij;

  SpectralPath warm;  // previous optimum; time-dilated by reusing its nodes
  bool have_warm = false;
  double prev_value = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < opts.horizons.size(); ++t) {
    const double T = opts.horizons[t];
    Eigen::Index intervals = opts.intervals;
    if (frozen_tau) {
      // The grid must resolve tau exactly and tau must divide the horizon.
      const double m_tau = T / *frozen_tau;
      const auto m = Eigen::Index(std::llround(m_tau));
      if (m < 1 || std::abs(m_tau - double(m)) > 1e-9 * m_tau)
        throw ConfigError("quasipotential: tau must divide every horizon");
      const auto per = Eigen::Index((opts.intervals + m - 1) / m);
      intervals = per * m;
    }

    if (have_warm && warm.steps() == intervals)
      warm.h = T / double(intervals);  // pure dilation: node values carry over
    const SpectralPath* init =
        (have_warm && warm.steps() == intervals) ? &warm : nullptr;
    ActionMinimum best =
        minimize_action(model, u, T, intervals, opts.optim, init, frozen_tau);

    if (nonlinear && opts.multi_starts > 0) {
      RandomStream stream(opts.seed, t);
      const double scale = 0.1 * std::max(1.0, u.abs().maxCoeff());
      for (int s = 0; s < opts.multi_starts; ++s) {
        ActionProblem perturbed(model, u, T, intervals, frozen_tau);
        SpectralPath start = perturbed.straight_line();
        for (Eigen::Index j = 1; j < intervals; ++j)
          for (Eigen::Index i = 0; i < model.dim(); ++i)
            start.nodes(i, j) += scale * stream.next_normal();
        const ActionMinimum trial = minimize_action(
            model, u, T, intervals, opts.optim, &start, frozen_tau);
        if (trial.value < best.value) best = trial;
      }
    }

    result.per_horizon.emplace_back(T, best.value);
    if (best.value > prev_value * (1.0 + 1e-9)) result.monotone = false;
    prev_value = best.value;
    if (best.value < result.value) {
      result.value = best.value;
      result.best_horizon = T;
      result.path = best.path;
      result.iterations = best.iterations;
      result.gradient_norm = best.gradient_norm;
      result.h = best.path.h;
      result.converged = best.converged;
      result.exit_reason = best.exit_reason;
    }
    warm = best.path;
    have_warm = true;
  }

  result.possibly_outside_domain = result.value > opts.domain_cap;
  return result;
}

}  // namespace

QuasipotentialResult minimize_quasipotential(
    const ModelSpec& model, const Field& u,
    const QuasipotentialOptions& opts) {
  return run_ladder(model, u, opts, std::nullopt);
}

QuasipotentialResult minimize_quasipotential_full(
    const ModelSpec& model, const Field& u, double tau,
    const QuasipotentialOptions& opts) {
  if (tau <= 0.0)
    throw std::domain_error("quasipotential: tau must be positive");
  return run_ladder(model, u, opts, tau);
}

}  // namespace spde
