#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhopf/errors.hpp"
#include "zhopf/model.hpp"

#include <cmath>
#include <random>

using namespace zhopf;

namespace {

State4 random_state(std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return State4(u(rng), u(rng), u(rng), u(rng));
}

SystemParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  return {u(rng), u(rng), u(rng), u(rng), u(rng)};
}

Mat4 fd_jacobian(const SystemParams& p, const State4& s, double h) {
  Mat4 j;
  for (int k = 0; k < 4; ++k) {
    State4 sp = s, sm = s;
    sp[k] += h;
    sm[k] -= h;
    j.col(k) = (vector_field(p, sp) - vector_field(p, sm)) / (2 * h);
  }
  return j;
}

}  // namespace

TEST_CASE("vector field at known points") {
  CHECK(vector_field({0.7, -1.1, 2.0, 0.3, 5.0}, State4::Zero()).norm() == 0.0);
  CHECK(vector_field({2, 1, 1, 1, 3}, State4(1, 1, 1, 1)).norm() == 0.0);
  const State4 v = vector_field({1, 1, 1, 1, 1}, State4(1, 0, 0, 0));
  CHECK(v[0] == -1.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == 0.0);
  CHECK(v[3] == 0.0);
}

TEST_CASE("jacobian rows at the origin") {
  const SystemParams p{1.5, 0.5, 2.0, -0.7, 3.0};
  Mat4 want;
  want << -1.5, 1.5, 0, 0, 3.0, -2.0, 0.7, 0, 0, -0.7, -2.0, 0, 0, 0, 0, -0.5;
  CHECK((jacobian(p, State4::Zero()) - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jacobian agrees with central differences") {
  const Mat4 fd = fd_jacobian({1, 1, 1, 1, 1}, State4(0.3, -0.2, 0.5, 0.1), 1e-6);
  CHECK((fd - jacobian({1, 1, 1, 1, 1}, State4(0.3, -0.2, 0.5, 0.1))).cwiseAbs().maxCoeff() < 1e-8);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const SystemParams p = random_params(rng);
    const State4 s = random_state(rng);
    CHECK((fd_jacobian(p, s, 1e-6) - jacobian(p, s)).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("reflection equivariance") {
  std::mt19937_64 rng(3);
  const Mat4 sg = reflection();
  for (int i = 0; i < 1000; ++i) {
    const SystemParams p = random_params(rng);
    const State4 s = random_state(rng);
    CHECK((vector_field(p, reflect(s)) - sg * vector_field(p, s)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((jacobian(p, reflect(s)) - sg * jacobian(p, s) * sg).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("equilibria with the symmetric pair") {
  const EquilibriumSet set = equilibria({2, 1, 1, 1, 3});
  CHECK(set.delta == 1.0);
  CHECK_FALSE(set.line_of_equilibria);
  REQUIRE(set.points.size() == 3);
  CHECK(set.points[0].kind == EquilibriumKind::Origin);
  CHECK((set.points[1].point - State4(1, 1, 1, 1)).norm() < 1e-15);
  CHECK((set.points[2].point - State4(-1, -1, -1, 1)).norm() < 1e-15);
  for (const auto& e : set.points) CHECK(e.residual <= 1e-12);
}

TEST_CASE("pair z component carries d / c") {
  // with d != c the pair is (q, q, d q / c, Δ)
  const SystemParams p{1.3, 0.4, 0.8, -1.7, 6.0};
  const EquilibriumSet set = equilibria(p);
  REQUIRE(set.points.size() == 3);
  for (const auto& e : set.points) CHECK(e.residual <= 1e-12);
  const State4 naive(set.points[1].point[0], set.points[1].point[0],
                     set.points[1].point[0] / p.c, set.delta);
  CHECK(scaled_residual(p, naive) > 1e-3);
}

TEST_CASE("equilibria residuals on random parameters") {
  std::mt19937_64 rng(5);
  int pairs = 0;
  for (int i = 0; i < 500; ++i) {
    SystemParams p = random_params(rng);
    if (std::abs(p.c) < 0.05) continue;
    const EquilibriumSet set = equilibria(p);
    pairs += set.points.size() == 3;
    for (const auto& e : set.points) CHECK(e.residual <= 1e-12);
  }
  CHECK(pairs > 50);
}

TEST_CASE("only the origin when b Δ < 0") {
  const EquilibriumSet set = equilibria({2, 1, 1, 1, 1});
  CHECK(set.delta == -1.0);
  REQUIRE(set.points.size() == 1);
  CHECK(set.points[0].point.norm() == 0.0);
  CHECK_THROWS_AS(branch_point({2, 1, 1, 1, 1}, +1), DegenerateError);
}

TEST_CASE("line of equilibria for b = 0") {
  const EquilibriumSet set = equilibria({2, 0, 1, 1, 3});
  CHECK(set.line_of_equilibria);
  REQUIRE(set.points.size() == 2);
  CHECK(set.points[1].kind == EquilibriumKind::LineRepresentative);
  CHECK((set.points[1].point - State4(0, 0, 0, 1)).norm() == 0.0);
  for (double w : {-3.0, 0.0, 0.5, 7.0}) CHECK(vector_field({2, 0, 1, 1, 3}, State4(0, 0, 0, w)).norm() == 0.0);
}

TEST_CASE("c = 0 is rejected") {
  CHECK_THROWS_WITH_AS(equilibria({1, 1, 0, 1, 1}), "c must be nonzero", ValidationError);
  CHECK_THROWS_AS(delta({1, 1, 0, 1, 1}), ValidationError);
}

TEST_CASE("pair merges into the line point like sqrt(b)") {
  const double c = 1.0, d = 0.5, e = 4.0;
  std::vector<double> lb, ld;
  for (double b : {1e-2, 1e-4, 1e-6}) {
    const SystemParams p{2.0, b, c, d, e};
    const State4 target(0, 0, 0, delta(p));
    lb.push_back(std::log(b));
    ld.push_back(std::log((branch_point(p, +1) - target).norm()));
    CHECK((branch_point(p, -1) - target).norm() == doctest::Approx(std::exp(ld.back())));
  }
  // least-squares slope of log distance against log b
  const double mb = (lb[0] + lb[1] + lb[2]) / 3, md = (ld[0] + ld[1] + ld[2]) / 3;
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += (lb[i] - mb) * (ld[i] - md);
    den += (lb[i] - mb) * (lb[i] - mb);
  }
  CHECK(num / den == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(num / den - 0.5) <= 0.05);
}
