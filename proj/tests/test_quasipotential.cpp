#include <doctest.h>

#include <cmath>

#include "spde/quasipotential.hpp"
#include "spde/rng.hpp"

using namespace spde;

namespace {

ModelSpec zero_model(Eigen::Index n) {
  return make_model(make_operator_spec(n, 2.0), zero_nonlinearity());
}

}  // namespace

TEST_CASE("closed-form quasipotential") {
  const ModelSpec model = zero_model(2);
  CHECK(quasipotential_linear(model, Field::Zero(2)) == 0.0);

  Field u = Field::Zero(2);
  u[0] = 0.1;
  // delta = 2: lambda/q = lambda^3, so V = lambda_1^3 u^2 = pi^6 / 100.
  const double pi6 = std::pow(M_PI, 6.0);
  CHECK(quasipotential_linear(model, u) ==
        doctest::Approx(pi6 * 0.01).epsilon(1e-12));
  CHECK(pi6 * 0.01 == doctest::Approx(9.6139).epsilon(1e-4));

  Field uv(2);
  uv << 0.1, -0.2;
  const double expected = std::pow(eigenvalue(1), 3.0) * 0.01 +
                          std::pow(eigenvalue(2), 3.0) * 0.04;
  CHECK(quasipotential_linear(model, uv) ==
        doctest::Approx(expected).epsilon(1e-12));

  const ModelSpec nl = make_model(
      make_operator_spec(2, 2.0),
      nemytskij([](double s) { return std::sin(s); },
                [](double s) { return std::cos(s); }, 1.0, 8, "sin"));
  CHECK_THROWS_AS(quasipotential_linear(nl, u), std::invalid_argument);
}

TEST_CASE("finite-horizon steering cost") {
  const ModelSpec model = zero_model(1);
  Field u(1);
  u << 0.1;
  const double v_inf = quasipotential_linear(model, u);
  SUBCASE("long horizons recover the quasipotential") {
    CHECK(quasipotential_linear_finite_horizon(model, u, 50.0) ==
          doctest::Approx(v_inf).epsilon(1e-12));
    // T = 1 correction is ~2.6e-9 relative.
    const double at_1 = quasipotential_linear_finite_horizon(model, u, 1.0);
    CHECK((at_1 - v_inf) / v_inf == doctest::Approx(2.64e-9).epsilon(0.05));
  }
  SUBCASE("short horizons are more expensive") {
    const double at_short =
        quasipotential_linear_finite_horizon(model, u, 0.05);
    const double expected =
        v_inf / (1.0 - std::exp(-2.0 * eigenvalue(1) * 0.05));
    CHECK(at_short == doctest::Approx(expected).epsilon(1e-12));
    CHECK(at_short > v_inf);
  }
  SUBCASE("linear diagonal drifts are absorbed") {
    Eigen::ArrayXd b(1);
    b << 2.0;
    const ModelSpec shifted =
        make_model(make_operator_spec(1, 2.0), linear_diagonal(b));
    const double mu = eigenvalue(1) - 2.0;
    CHECK(quasipotential_linear(shifted, u) ==
          doctest::Approx(mu * 0.01 / shifted.op.q[0]).epsilon(1e-12));
  }
}

TEST_CASE("minimize_action at the origin") {
  const ModelSpec model = zero_model(1);
  OptimOptions opts;
  const ActionMinimum res =
      minimize_action(model, Field::Zero(1), 1.0, 100, opts);
  CHECK(res.value <= 1e-10);
  CHECK(res.path.nodes.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("minimize_action matches the scalar steering oracle") {
  const ModelSpec model = zero_model(1);
  Field u(1);
  u << 0.1;
  OptimOptions opts;
  opts.gradient_tolerance = 1e-8;
  opts.max_iterations = 20000;
  const ActionMinimum res = minimize_action(model, u, 1.0, 400, opts);
  const double oracle = quasipotential_linear_finite_horizon(model, u, 1.0);
  CHECK(std::abs(res.value - oracle) / oracle < 0.02);

  // Optimal profile of the scalar problem: u sinh(lambda t) / sinh(lambda T).
  const double lambda = eigenvalue(1);
  double worst = 0.0;
  for (Eigen::Index j = 0; j <= 400; ++j) {
    const double t = res.path.h * double(j);
    const double exact =
        0.1 * std::sinh(lambda * t) / std::sinh(lambda);
    worst = std::max(worst, std::abs(res.path.nodes(0, j) - exact));
  }
  CHECK(worst <= 5e-3);
}

TEST_CASE("analytic action gradient matches central differences") {
  const ModelSpec model = make_model(
      make_operator_spec(2, 2.0),
      nemytskij([](double s) { return 0.5 * std::sin(s); },
                [](double s) { return 0.5 * std::cos(s); }, 0.5, 8, "sin"));
  RandomStream stream(79, 0);
  SpectralPath z;
  z.h = 0.02;
  z.nodes.resize(2, 51);
  z.nodes.col(0).setZero();
  for (int j = 1; j <= 50; ++j)
    for (int i = 0; i < 2; ++i) z.nodes(i, j) = 0.3 * stream.next_normal();

  Eigen::VectorXd grad;
  action_value_and_gradient(model, z, grad);

  Eigen::VectorXd flat(2 * 49);
  for (int j = 1; j < 50; ++j)
    for (int i = 0; i < 2; ++i) flat[(j - 1) * 2 + i] = z.nodes(i, j);

  auto value_at = [&](const Eigen::VectorXd& x) {
    SpectralPath w = z;
    for (int j = 1; j < 50; ++j)
      for (int i = 0; i < 2; ++i) w.nodes(i, j) = x[(j - 1) * 2 + i];
    Eigen::VectorXd dummy;
    return action_value_and_gradient(model, w, dummy);
  };

  for (int probe = 0; probe < 10; ++probe) {
    const int idx = int(stream.next_uniform() * double(flat.size() - 1));
    const double step = 1e-6 * std::max(1.0, std::abs(flat[idx]));
    Eigen::VectorXd shifted = flat;
    shifted[idx] = flat[idx] + step;
    const double up = value_at(shifted);
    shifted[idx] = flat[idx] - step;
    const double down = value_at(shifted);
    const double fd = (up - down) / (2.0 * step);
    REQUIRE(std::abs(fd - grad[idx]) / std::max(1e-12, std::abs(fd)) <= 1e-5);
  }
}

TEST_CASE("modes decouple in the quadratic case") {
  const ModelSpec model = zero_model(2);
  Field u(2);
  u << 0.1, 0.05;
  OptimOptions opts;
  opts.gradient_tolerance = 1e-9;
  opts.max_iterations = 20000;
  const double joint = minimize_action(model, u, 0.5, 200, opts).value;
  double split = 0.0;
  for (int mode = 0; mode < 2; ++mode) {
    Field um = Field::Zero(2);
    um[mode] = u[mode];
    split += minimize_action(model, um, 0.5, 200, opts).value;
  }
  CHECK(std::abs(joint - split) / joint < 1e-6);
}

TEST_CASE("horizon ladder") {
  const ModelSpec model = zero_model(1);
  Field u(1);
  u << 0.1;
  QuasipotentialOptions opts;
  opts.horizons = {0.25, 0.5, 1.0, 2.0};
  opts.optim.max_iterations = 20000;
  const QuasipotentialResult res = minimize_quasipotential(model, u, opts);
  CHECK(res.converged);
  CHECK(res.monotone);
  CHECK(res.per_horizon.size() == 4);
  for (const auto& [T, value] : res.per_horizon) {
    const double oracle = quasipotential_linear_finite_horizon(model, u, T);
    CHECK(std::abs(value - oracle) / oracle < 0.02);
  }
  CHECK(std::abs(res.value - quasipotential_linear(model, u)) /
            quasipotential_linear(model, u) <
        0.03);

  SUBCASE("degenerate ladder equals a single minimization") {
    QuasipotentialOptions single = opts;
    single.horizons = {1.0};
    const QuasipotentialResult one = minimize_quasipotential(model, u, single);
    const ActionMinimum direct =
        minimize_action(model, u, 1.0, single.intervals, single.optim);
    CHECK(one.value == direct.value);
  }
  SUBCASE("zero target") {
    QuasipotentialOptions single = opts;
    single.horizons = {0.5};
    const QuasipotentialResult zero =
        minimize_quasipotential(model, Field::Zero(1), single);
    CHECK(zero.value <= 1e-10);
  }
}

TEST_CASE("frozen-action ladder coincides with the plain one for F = 0") {
  const ModelSpec model = zero_model(2);
  Field u(2);
  u << 0.1, -0.05;
  QuasipotentialOptions opts;
  opts.horizons = {0.5, 1.0};
  opts.intervals = 200;
  const QuasipotentialResult plain = minimize_quasipotential(model, u, opts);
  for (double tau : {0.1, 0.05}) {
    const QuasipotentialResult frozen =
        minimize_quasipotential_full(model, u, tau, opts);
    CHECK(std::abs(frozen.value - plain.value) <= 2e-6);
  }
}
