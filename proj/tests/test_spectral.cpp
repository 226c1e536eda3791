#include <doctest.h>

#include <cmath>

#include "spde/rng.hpp"
#include "spde/spectral.hpp"

using namespace spde;

TEST_CASE("eigenvalues are pi^2 i^2") {
  CHECK(eigenvalue(1) == doctest::Approx(9.869604401089358).epsilon(1e-14));
  CHECK(eigenvalue(2) == doctest::Approx(39.47841760435743).epsilon(1e-14));
  CHECK_THROWS_AS(eigenvalue(0), std::domain_error);
  CHECK_THROWS_AS(eigenvalue(-3), std::domain_error);
}

TEST_CASE("sobolev norms") {
  Field e1 = Field::Zero(4);
  e1[0] = 1.0;
  CHECK(sobolev_norm_sq(e1, 0.0) == 1.0);
  CHECK(sobolev_norm_sq(e1, 2.0) ==
        doctest::Approx(eigenvalue(1) * eigenvalue(1)).epsilon(1e-14));
  Field u(2);
  u << 0.3, -0.4;
  CHECK(sobolev_norm_sq(u, 0.0) == doctest::Approx(0.25).epsilon(1e-15));

  // Parseval: gamma = 0 is the plain coefficient norm.
  RandomStream stream(5, 0);
  Field r(8);
  for (int i = 0; i < 8; ++i) r[i] = stream.next_normal();
  CHECK(sobolev_norm_sq(r, 0.0) == r.matrix().squaredNorm());
}

TEST_CASE("projection truncates and is idempotent") {
  Field u(3);
  u << 1.0, 2.0, 3.0;
  const Field p2 = project(u, 2);
  REQUIRE(p2.size() == 2);
  CHECK(p2[0] == 1.0);
  CHECK(p2[1] == 2.0);
  CHECK((project(u, 3) == u).all());
  CHECK((project(project(u, 2), 2) == p2).all());
  CHECK_THROWS_AS(project(u, 4), std::domain_error);

  // |(I - P_n) u|^2 is the exact tail sum.
  const Field tail = u - embed(project(u, 2), 3);
  CHECK(tail.square().sum() == 9.0);
}

TEST_CASE("semigroup decay") {
  Field e1 = Field::Zero(3);
  e1[0] = 1.0;
  CHECK((semigroup_apply(e1, 0.0) == e1).all());
  const Field decayed = semigroup_apply(e1, 1.0);
  CHECK(decayed[0] == doctest::Approx(std::exp(-M_PI * M_PI)).epsilon(1e-14));
  CHECK_THROWS_AS(semigroup_apply(e1, -0.1), std::domain_error);

  RandomStream stream(7, 0);
  Field u(5);
  for (int i = 0; i < 5; ++i) u[i] = stream.next_normal();
  SUBCASE("semigroup law") {
    const Field ab = semigroup_apply(semigroup_apply(u, 0.3), 0.45);
    const Field once = semigroup_apply(u, 0.75);
    CHECK((ab - once).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("L2 contraction at rate lambda_1") {
    for (double t : {0.01, 0.1, 0.5}) {
      const double lhs = std::sqrt(semigroup_apply(u, t).square().sum());
      const double rhs =
          std::exp(-eigenvalue(1) * t) * std::sqrt(u.square().sum());
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("operator spec construction") {
  const OperatorSpec spec = make_operator_spec(4, 2.0);
  CHECK(spec.assumption_compliant);
  CHECK(spec.q[0] == doctest::Approx(std::pow(eigenvalue(1), -2.0)));
  CHECK(spec.lambda1() == eigenvalue(1));

  // delta outside (3/2, 2] only clears the compliance flag.
  CHECK_FALSE(make_operator_spec(4, 1.2).assumption_compliant);
  CHECK_FALSE(make_operator_spec(4, 2.5).assumption_compliant);
  CHECK(make_operator_spec(4, 1.6).assumption_compliant);

  Eigen::ArrayXd q(3);
  q << 1.0, 2.0, 3.0;
  const OperatorSpec explicit_q = make_operator_spec(3, q);
  CHECK_FALSE(explicit_q.delta.has_value());
  CHECK(explicit_q.assumption_compliant);
  q[1] = 0.0;
  CHECK_THROWS_AS(make_operator_spec(3, q), std::invalid_argument);

  const OperatorSpec sub = project(spec, 2);
  CHECK(sub.n == 2);
  CHECK(sub.q[1] == spec.q[1]);
  CHECK_THROWS_AS(project(spec, 9), std::domain_error);
}

TEST_CASE("q square-root pair") {
  const OperatorSpec spec = make_operator_spec(3, 2.0);
  RandomStream stream(11, 0);
  Field u(3);
  for (int i = 0; i < 3; ++i) u[i] = stream.next_normal();
  const Field round = q_inv_sqrt_apply(spec, q_sqrt_apply(spec, u));
  CHECK((round - u).abs().maxCoeff() < 1e-14);

  Field e1 = Field::Zero(3);
  e1[0] = 1.0;
  // delta = 2: q_1 = lambda_1^{-2}, so sqrt(q_1) = 1/lambda_1 = pi^{-2}.
  CHECK(q_sqrt_apply(spec, e1)[0] ==
        doctest::Approx(1.0 / eigenvalue(1)).epsilon(1e-14));
  CHECK((q_sqrt_apply(spec, Field::Zero(3)) == 0.0).all());
}

TEST_CASE("sine transform evaluates and inverts") {
  Field e1 = Field::Zero(1);
  e1[0] = 1.0;
  const Eigen::ArrayXd values = evaluate_on_grid(e1, 3);
  REQUIRE(values.size() == 3);
  CHECK(values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(values[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(values[2] == doctest::Approx(1.0).epsilon(1e-14));

  CHECK((evaluate_on_grid(Field::Zero(4), 8) == 0.0).all());
  CHECK_THROWS_AS(evaluate_on_grid(Field::Zero(4), 3), std::domain_error);
}

TEST_CASE("transform round trip is exact to 1e-12 up to M = 4096") {
  RandomStream stream(13, 0);
  for (auto [n, m] : {std::pair<int, int>{4, 16},
                      {32, 128},
                      {512, 512},
                      {1024, 4096}}) {
    Field u(n);
    for (int i = 0; i < n; ++i) u[i] = stream.next_normal();
    const SineTransform dst(n, m);
    const Field back = dst.synthesize(dst.evaluate(u));
    const double rel = (back - u).abs().maxCoeff() / u.abs().maxCoeff();
    CHECK(rel < 1e-12);
  }
}
