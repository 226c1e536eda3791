#include <doctest.h>

#include <cmath>

#include "spde/optim.hpp"

using namespace spde;

TEST_CASE("lbfgs minimizes a badly scaled quadratic") {
  const int n = 50;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = std::pow(10.0, 4.0 * i / (n - 1.0));
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = d.cwiseProduct(x) - b;
    return 0.5 * x.dot(d.cwiseProduct(x)) - b.dot(x);
  };
  OptimOptions opts;
  opts.gradient_tolerance = 1e-9;
  opts.max_iterations = 2000;

  SUBCASE("with the diagonal seed") {
    const Eigen::VectorXd seed = d.cwiseInverse();
    const OptimResult res =
        lbfgs_minimize(objective, Eigen::VectorXd::Zero(n), opts, &seed);
    CHECK(res.converged);
    CHECK((res.x - d.cwiseInverse()).lpNorm<Eigen::Infinity>() < 1e-7);
  }
  SUBCASE("without a seed") {
    OptimOptions plain = opts;
    plain.max_iterations = 50000;
    plain.gradient_tolerance = 1e-6;
    const OptimResult res =
        lbfgs_minimize(objective, Eigen::VectorXd::Zero(n), plain);
    CHECK(res.converged);
    CHECK((res.x - d.cwiseInverse()).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("lbfgs solves rosenbrock") {
  auto objective = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  OptimOptions opts;
  opts.gradient_tolerance = 1e-10;
  opts.max_iterations = 5000;
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const OptimResult res = lbfgs_minimize(objective, x0, opts);
  CHECK(res.converged);
  CHECK(std::abs(res.x[0] - 1.0) < 1e-6);
  CHECK(std::abs(res.x[1] - 1.0) < 1e-6);
}

TEST_CASE("lbfgs reports the iteration limit") {
  auto objective = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * x;
    return x.squaredNorm();
  };
  OptimOptions opts;
  opts.max_iterations = 1;
  opts.gradient_tolerance = 1e-16;
  const OptimResult res =
      lbfgs_minimize(objective, Eigen::VectorXd::Ones(3), opts);
  CHECK_FALSE(res.converged);
  CHECK(res.exit_reason == "iteration limit");
}

TEST_CASE("projected gradient lands on the feasible boundary") {
  Eigen::VectorXd c(3);
  c << 2.0, -1.0, 2.0;
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x - c);
    return (x - c).squaredNorm();
  };
  auto project_ball = [](Eigen::VectorXd& x) {
    const double norm = x.norm();
    if (norm > 1.0) x /= norm;
  };
  OptimOptions opts;
  opts.gradient_tolerance = 1e-10;
  const OptimResult res = projected_gradient_minimize(
      objective, project_ball, Eigen::VectorXd::Zero(3), opts);
  CHECK(res.converged);
  CHECK((res.x - c / c.norm()).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("projected gradient keeps interior minima") {
  Eigen::VectorXd c(2);
  c << 0.2, -0.1;
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x - c);
    return (x - c).squaredNorm();
  };
  auto project_ball = [](Eigen::VectorXd& x) {
    const double norm = x.norm();
    if (norm > 1.0) x /= norm;
  };
  const OptimResult res = projected_gradient_minimize(
      objective, project_ball, Eigen::VectorXd::Zero(2), {});
  CHECK(res.converged);
  CHECK((res.x - c).lpNorm<Eigen::Infinity>() < 1e-7);
}
