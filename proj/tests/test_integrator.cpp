#include <doctest.h>

#include <cmath>

#include "spde/errors.hpp"
#include "spde/integrator.hpp"

using namespace spde;

namespace {

ModelSpec ou_model(Eigen::Index n, double delta = 2.0) {
  return make_model(make_operator_spec(n, delta), zero_nonlinearity());
}

}  // namespace

TEST_CASE("noise plan matches the convolution variance") {
  const OperatorSpec op = make_operator_spec(1, 2.0);
  const NoiseIncrementPlan plan = make_noise_plan(op, 0.1);
  const double lambda = eigenvalue(1);
  const double expected =
      op.q[0] * (1.0 - std::exp(-2.0 * lambda * 0.1)) / (2.0 * lambda);
  CHECK(plan.sigma[0] * plan.sigma[0] ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(4.436e-4).epsilon(1e-3));

  // Ito limit sigma_i -> sqrt(q_i tau).
  const NoiseIncrementPlan fine = make_noise_plan(op, 1e-8);
  CHECK(fine.sigma[0] ==
        doctest::Approx(std::sqrt(op.q[0] * 1e-8)).epsilon(1e-6));
  CHECK((fine.sigma > 0.0).all());
}

TEST_CASE("two half steps compose to one full step in law") {
  const OperatorSpec op = make_operator_spec(4, 2.0);
  const double tau = 0.07;
  const StepFactors half = make_step_factors(op, tau);
  const StepFactors full = make_step_factors(op, 2.0 * tau);
  for (Eigen::Index i = 0; i < op.n; ++i) {
    CHECK(full.decay[i] ==
          doctest::Approx(half.decay[i] * half.decay[i]).epsilon(1e-14));
    const double composed =
        half.decay[i] * half.decay[i] * half.noise.sigma[i] *
            half.noise.sigma[i] +
        half.noise.sigma[i] * half.noise.sigma[i];
    CHECK(full.noise.sigma[i] * full.noise.sigma[i] ==
          doctest::Approx(composed).epsilon(1e-14));
  }
}

TEST_CASE("exponential Euler step") {
  const ModelSpec model = ou_model(2);
  const StepFactors factors = make_step_factors(model.op, 0.05);
  Field e1 = Field::Zero(2);
  e1[0] = 1.0;
  SUBCASE("pure decay at eps = 0") {
    const Field next = exp_euler_step(e1, model, factors, 0.0, nullptr);
    CHECK(next[0] ==
          doctest::Approx(std::exp(-eigenvalue(1) * 0.05)).epsilon(1e-14));
    CHECK(next[1] == 0.0);
  }
  SUBCASE("origin is a fixed point") {
    const Field next =
        exp_euler_step(Field::Zero(2), model, factors, 0.0, nullptr);
    CHECK((next == 0.0).all());
  }
  SUBCASE("one-step variance matches the exact law") {
    RandomStream stream(37, 0);
    const int samples = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < samples; ++s) {
      const Field next =
          exp_euler_step(Field::Zero(2), model, factors, 1.0, &stream);
      sum += next[0];
      sum_sq += next[0] * next[0];
    }
    const double mean = sum / samples;
    const double var = sum_sq / samples - mean * mean;
    const double exact = factors.noise.sigma[0] * factors.noise.sigma[0];
    const double se = exact * std::sqrt(2.0 / (samples - 1.0));
    CHECK(std::abs(var - exact) < 3.0 * se);
  }
}

TEST_CASE("stability threshold") {
  const double tau0 = max_stable_stepsize(eigenvalue(1), 1.0);
  CHECK(tau0 == doctest::Approx(0.2816).epsilon(1e-3));
  // Defining equation residual.
  const double x = eigenvalue(1) * tau0;
  CHECK(std::abs(std::expm1(x) / x - (eigenvalue(1) + 1.0) / 2.0) < 1e-9);
  CHECK(std::isinf(max_stable_stepsize(eigenvalue(1), 0.0)));
  CHECK_THROWS_AS(max_stable_stepsize(eigenvalue(1), eigenvalue(1)),
                  std::domain_error);
  CHECK_THROWS_AS(max_stable_stepsize(eigenvalue(1), 50.0), std::domain_error);
}

TEST_CASE("simulate_path reproduces the linear flow") {
  const ModelSpec model = ou_model(1);
  IntegratorConfig cfg;
  cfg.tau = 0.1;
  Field y(1);
  y << 1.0;
  const SpectralPath path = simulate_path(y, 1.0, model, cfg);
  REQUIRE(path.steps() == 10);
  double worst = 0.0;
  for (Eigen::Index j = 0; j <= 10; ++j)
    worst = std::max(worst, std::abs(path.nodes(0, j) -
                                     std::exp(-eigenvalue(1) * 0.1 * j)));
  CHECK(worst < 1e-13);
}

TEST_CASE("simulate_path is deterministic in the seed") {
  const ModelSpec model = ou_model(3);
  IntegratorConfig cfg;
  cfg.tau = 0.05;
  cfg.eps = 0.7;
  cfg.seed = 99;
  const SpectralPath a = simulate_path(Field::Zero(3), 1.0, model, cfg);
  const SpectralPath b = simulate_path(Field::Zero(3), 1.0, model, cfg);
  CHECK(a.nodes == b.nodes);
  cfg.stream = 1;
  const SpectralPath c = simulate_path(Field::Zero(3), 1.0, model, cfg);
  CHECK(a.nodes != c.nodes);
}

TEST_CASE("frozen drift gives first order for a linear drift") {
  Eigen::ArrayXd b(1);
  b << -1.0;
  const ModelSpec model =
      make_model(make_operator_spec(1, 2.0), linear_diagonal(b));
  IntegratorConfig cfg;
  cfg.tau = 0.01;
  Field y(1);
  y << 1.0;
  const SpectralPath path = simulate_path(y, 1.0, model, cfg);
  const double exact = std::exp(-(eigenvalue(1) + 1.0));
  CHECK(std::abs(path.nodes(0, 100) - exact) < 5e-3);
}

TEST_CASE("stability enforcement and divergence reporting") {
  Eigen::ArrayXd b(1);
  b << 5.0;
  const ModelSpec model =
      make_model(make_operator_spec(1, 2.0), linear_diagonal(b));
  IntegratorConfig cfg;
  cfg.tau = 1.0;  // far beyond tau0 for L_F = 5
  Field y(1);
  y << 1e300;
  CHECK_THROWS_AS(simulate_path(y, 10.0, model, cfg), ConfigError);
  cfg.enforce_stability = false;
  Eigen::ArrayXd huge(1);
  huge << 1e6;
  const ModelSpec wild =
      make_model(make_operator_spec(1, 2.0), linear_diagonal(huge));
  CHECK_THROWS_AS(simulate_path(y, 10.0, wild, cfg), DivergenceError);
}

TEST_CASE("grid bookkeeping") {
  const ModelSpec model = ou_model(1);
  IntegratorConfig cfg;
  cfg.tau = 0.1;
  CHECK_THROWS_AS(simulate_path(Field::Zero(1), 1.05, model, cfg), ConfigError);
  cfg.stride = 3;
  CHECK_THROWS_AS(simulate_path(Field::Zero(1), 1.0, model, cfg), ConfigError);
  cfg.stride = 5;
  const SpectralPath thinned = simulate_path(Field::Zero(1), 1.0, model, cfg);
  CHECK(thinned.steps() == 2);
  CHECK(thinned.h == doctest::Approx(0.5));
  cfg.stride = 1;
  cfg.substeps = 4;
  const SpectralPath dense = simulate_path(Field::Zero(1), 1.0, model, cfg);
  CHECK(dense.steps() == 40);
  CHECK(dense.h == doctest::Approx(0.025));
}

TEST_CASE("dense output agrees with the coarse nodes in law and exactly at eps=0") {
  Field y(1);
  y << 0.8;
  const ModelSpec model = ou_model(1);
  IntegratorConfig coarse;
  coarse.tau = 0.2;
  IntegratorConfig dense = coarse;
  dense.substeps = 8;
  const SpectralPath a = simulate_path(y, 1.0, model, coarse);
  const SpectralPath b = simulate_path(y, 1.0, model, dense);
  for (Eigen::Index j = 0; j <= a.steps(); ++j)
    CHECK(std::abs(a.nodes(0, j) - b.nodes(0, 8 * j)) < 1e-14);
}

TEST_CASE("stochastic convolution sampling") {
  const OperatorSpec op = make_operator_spec(1, 2.0);
  RandomStream stream(41, 0);
  CHECK((stochastic_convolution_sample(0.0, op, stream) == 0.0).all());
  const double stationary = op.q[0] / (2.0 * eigenvalue(1));
  CHECK(stationary == doctest::Approx(5.1327e-4).epsilon(1e-3));
  const int samples = 100000;
  double sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Field draw = stochastic_convolution_sample(50.0, op, stream);
    sum_sq += draw[0] * draw[0];
  }
  const double var = sum_sq / samples;
  const double se = stationary * std::sqrt(2.0 / (samples - 1.0));
  CHECK(std::abs(var - stationary) < 3.0 * se);
}
