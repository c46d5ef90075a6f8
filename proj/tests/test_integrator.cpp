#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhopf/errors.hpp"
#include "zhopf/integrator.hpp"
#include "zhopf/orbits.hpp"

#include <cmath>
#include <random>

using namespace zhopf;

namespace {

OdeRhs oscillator() {
  return [](double, const VecX& y, VecX& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
}

}  // namespace

TEST_CASE("harmonic oscillator against the exact solution") {
  const VecX y0 = (VecX(2) << 1.0, 0.0).finished();
  IntegratorConfig cfg;
  cfg.dense = true;
  const Trajectory tr = dopri5(oscillator(), 0.0, y0, 20.0, cfg);
  CHECK(tr.t.back() == 20.0);
  CHECK(std::abs(tr.end()[0] - std::cos(20.0)) < 1e-8);
  CHECK(std::abs(tr.end()[1] + std::sin(20.0)) < 1e-8);
  // dense output between the steps
  double worst = 0;
  for (double t = 0; t <= 20; t += 0.137) worst = std::max(worst, std::abs(tr.at(t)[0] - std::cos(t)));
  CHECK(worst < 1e-8);
}

TEST_CASE("uniform samples") {
  IntegratorConfig cfg;
  cfg.dense = true;
  const Trajectory tr = dopri5(oscillator(), 0.0, (VecX(2) << 1.0, 0.0).finished(), 1.0, cfg);
  const auto s = tr.sample(0.25);
  REQUIRE(s.size() == 5);
  CHECK(s[2].first == doctest::Approx(0.5));
  CHECK(s[4].first == 1.0);
  CHECK(std::abs(s[2].second[0] - std::cos(0.5)) < 1e-9);
  CHECK_THROWS_AS(tr.sample(0.0), ValidationError);
  CHECK_THROWS_AS(tr.at(1.5), ValidationError);

  cfg.dense = false;
  CHECK_THROWS_AS(dopri5(oscillator(), 0.0, (VecX(2) << 1.0, 0.0).finished(), 1.0, cfg).at(0.5), ValidationError);
}

TEST_CASE("equilibrium stays put") {
  const SystemParams p{2, 1, 1, 1, 3};
  for (const Equilibrium& e : equilibria(p).points) {
    const Trajectory tr = integrate(p, e.point, 100.0);
    for (const VecX& y : tr.y) CHECK((y - e.point).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("reflection commutes with the flow") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1, 1);
  const SystemParams p{2, 0.5, 1, -0.7, 2};
  for (int i = 0; i < 10; ++i) {
    const State4 s(u(rng), u(rng), u(rng), u(rng));
    const State4 a = integrate(p, reflect(s), 5.0).end();
    const State4 b = reflect(State4(integrate(p, s, 5.0).end()));
    CHECK((a - b).norm() <= 1e-9 * (1 + a.norm()));
  }
}

TEST_CASE("tolerance halving barely moves the endpoint") {
  const SystemParams p{-1.9, 0.02, 1, -0.8, 1.7};
  const State4 s(0.01, -0.02, 0.015, 0.01);
  IntegratorConfig a, b;
  b.rtol = a.rtol / 2;
  b.atol = a.atol / 2;
  const State4 ya = integrate(p, s, 10.0, a).end(), yb = integrate(p, s, 10.0, b).end();
  CHECK((ya - yb).norm() <= 10 * a.rtol * (1 + ya.norm()));
}

TEST_CASE("failures") {
  const OdeRhs blowup = [](double, const VecX& y, VecX& dy) { dy[0] = y[0] * y[0]; };
  const VecX one = VecX::Ones(1);
  try {
    dopri5(blowup, 0.0, one, 2.0);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time() == doctest::Approx(1.0).epsilon(1e-3));
  }

  IntegratorConfig few;
  few.max_steps = 3;
  CHECK_THROWS_AS(dopri5(oscillator(), 0.0, (VecX(2) << 1.0, 0.0).finished(), 100.0, few), ConvergenceError);

  IntegratorConfig bad;
  bad.rtol = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(dopri5(oscillator(), 1.0, one, 0.0), ValidationError);

  const VecX nan = VecX::Constant(2, NAN);
  CHECK_THROWS_AS(dopri5(oscillator(), 0.0, nan, 1.0), BlowUpError);
}
