#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sample_specs.hpp"
#include "zhopf/errors.hpp"
#include "zhopf/reduction.hpp"
#include "zhopf/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace zhopf;
using zhopf::testing::random_spec;

namespace {

const double kPi = std::numbers::pi;

UnfoldingSpec example_i() { return UnfoldingSpec::case_i(1, 1, 1, 1, 0, 1); }
UnfoldingSpec example_ii() { return UnfoldingSpec::case_ii(1, 2, 6, 1, 1); }
UnfoldingSpec example_iii() { return UnfoldingSpec::case_iii(1, 1, 3, 1, 1, 0); }

Mat4 jordan_block(double w) {
  Mat4 m = Mat4::Zero();
  m(0, 1) = -w;
  m(1, 0) = w;
  return m;
}

double max_diff(const Vec3& a, const Vec3& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("perturbed parameters") {
  const SystemParams p0 = perturb(example_i(), 0.0);
  CHECK(p0.a == -2.0);
  CHECK(p0.b == 0.0);
  CHECK(p0.d == doctest::Approx(-0.8164966).epsilon(1e-7));
  CHECK(p0.e == doctest::Approx(1.6666667).epsilon(1e-7));

  const SystemParams p1 = perturb(example_i(), 0.01);
  CHECK(p1.a == doctest::Approx(-1.99));
  CHECK(p1.b == doctest::Approx(0.01));
  CHECK(p1.d == doctest::Approx(-0.8164966).epsilon(1e-7));
  CHECK(p1.e == doctest::Approx(1.6766667).epsilon(1e-7));
  // the spectrum moves off the zero-Hopf set by O(ε)
  CHECK_FALSE(is_zero_hopf(p1, State4::Zero(), 1e-8));
  const Spectrum4 ev = eigenvalues(jacobian(p1, State4::Zero()));
  const Spectrum4 target{Complex(0, 1), Complex(0, -1), 0.0, 0.0};
  CHECK(match_spectrum(ev, target).residual < 0.05);

  const SystemParams p3 = perturb(example_iii(), 0.01);
  CHECK(p3.a == doctest::Approx(-1.99));
  CHECK(p3.b == doctest::Approx(0.01));
  CHECK(p3.d == doctest::Approx(-0.8164966).epsilon(1e-7));
  CHECK(p3.e == 3.0);

  CHECK_THROWS_AS(perturb(example_i(), -1e-3), ValidationError);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_WITH_AS(UnfoldingSpec::case_i(0, 1, 1, 1, 0, 1), "c must be nonzero", ValidationError);
  CHECK_THROWS_AS(UnfoldingSpec::case_i(1, 0, 1, 1, 0, 1), ValidationError);
  CHECK_THROWS_AS(UnfoldingSpec::case_ii(1, 0.5, 1, 1, 1), ValidationError);
  // b1 Δ0 < 0: no pair to unfold
  CHECK_THROWS_AS(UnfoldingSpec::case_iii(1, 1, 3, 1, -1, 0), ValidationError);
  CHECK_NOTHROW(UnfoldingSpec::case_iii(1, 1, 0, 1, 0, 0));
  UnfoldingSpec s = example_ii();
  s.omega += 1e-9;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("base points are equilibria where they should be") {
  for (double eps : {1e-3, 1e-2}) {
    CHECK(scaled_residual(perturb(example_i(), eps), base_point(example_i(), eps)) == 0.0);
    CHECK(scaled_residual(perturb(example_iii(), eps), base_point(example_iii(), eps)) < 1e-14);
    // the line point stops being an equilibrium once b = ε b1 ≠ 0
    CHECK(scaled_residual(perturb(example_ii(), eps), base_point(example_ii(), eps)) > 0.0);
  }
  UnfoldingSpec minus = example_iii();
  minus.branch = -1;
  CHECK((base_point(minus, 0.01) - reflect(base_point(example_iii(), 0.01))).norm() < 1e-15);
}

TEST_CASE("Jordan change conjugates to the real Jordan form") {
  const Mat4 ci = conjugated_linearization(example_i());
  CHECK((ci - jordan_block(1.0)).cwiseAbs().maxCoeff() < 1e-10);

  const Spectrum4 ev = eigenvalues(conjugated_linearization(example_ii()));
  CHECK(match_spectrum(ev, {Complex(0, std::sqrt(11.0)), Complex(0, -std::sqrt(11.0)), 0.0, 0.0}).residual <
        1e-10);

  std::mt19937_64 rng(23);
  for (Case k : {Case::I, Case::II, Case::III}) {
    for (int i = 0; i < 20; ++i) {
      const UnfoldingSpec s = random_spec(k, rng);
      const LinearChange lc = jordan_change(s);
      CHECK((lc.forward * lc.inverse - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((conjugated_linearization(s) - jordan_block(s.omega)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("reduced coordinates round trip") {
  const UnfoldingSpec s = example_iii();
  const Vec3 x(0.7, -0.3, 0.4);
  const ReducedPoint rp = to_reduced(s, 0.02, to_model_state(s, 0.02, 1.1, x));
  CHECK(rp.theta == doctest::Approx(1.1));
  CHECK(max_diff(rp.x, x) < 1e-12);
}

TEST_CASE("angular rate tends to omega") {
  for (const UnfoldingSpec& s : {example_i(), example_ii(), example_iii()}) {
    auto worst = [&](double eps) {
      double dev = 0;
      for (double r : {0.5, 1.0, 2.0})
        for (double th = 0; th < 2 * kPi; th += 0.4)
          dev = std::max(dev, std::abs(theta_rate(s, eps, th, Vec3(r, 0.3, -0.2)) - s.omega));
      return dev;
    };
    // around the pair the linearization moves by O(√ε), so does the rate
    const double p = s.kase == Case::III ? 0.5 : 1.0;
    const double k3 = worst(1e-3) / std::pow(1e-3, p), k4 = worst(1e-4) / std::pow(1e-4, p),
                 k5 = worst(1e-5) / std::pow(1e-5, p);
    CHECK(k3 > 0);
    CHECK(std::abs(k4 - k5) <= 0.05 * k5);
    CHECK(std::abs(k3 - k5) <= 0.5 * k5);
  }
}

TEST_CASE("closed form against the pipeline at the example point") {
  const Vec3 v = first_order_field_closed(example_i())(0.0, Vec3(1, 0, 0));
  const Vec3 n = first_order_field_numeric(example_i())(0.0, Vec3(1, 0, 0));
  CHECK(max_diff(v, n) < 1e-8);
}

TEST_CASE("closed form against the pipeline on a grid") {
  std::mt19937_64 rng(29);
  for (Case k : {Case::I, Case::II, Case::III}) {
    std::vector<UnfoldingSpec> specs{k == Case::I ? example_i() : k == Case::II ? example_ii() : example_iii()};
    for (int i = 0; i < 4; ++i) specs.push_back(random_spec(k, rng));
    double worst = 0;
    for (const UnfoldingSpec& s : specs) {
      const ReducedField closed = first_order_field_closed(s);
      const ReducedField numeric = first_order_field_numeric(s);
      CHECK(closed.provenance == Provenance::ClosedForm);
      CHECK(numeric.provenance == Provenance::NumericPipeline);
      for (int j = 0; j < 8; ++j)
        for (double r : {0.5, 1.25, 2.0})
          for (double z : {-1.0, 0.0, 1.0})
            for (double w : {-1.0, 0.5}) {
              const double th = j * kPi / 4;
              worst = std::max(worst, max_diff(closed(th, Vec3(r, z, w)), numeric(th, Vec3(r, z, w))));
            }
    }
    INFO("case " << to_string(k));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("unfolding-free case iii field") {
  const UnfoldingSpec s = UnfoldingSpec::case_iii(1.2, 0.8, -2.0, 0, 0, 0);
  const ReducedField closed = first_order_field_closed(s);
  const ReducedField numeric = first_order_field_numeric(s);
  for (double th : {0.2, 1.9, 4.4}) CHECK(max_diff(closed(th, Vec3(0.9, 0.4, -0.6)), numeric(th, Vec3(0.9, 0.4, -0.6))) < 1e-7);
}

TEST_CASE("periodicity in theta") {
  for (const UnfoldingSpec& s : {example_i(), example_ii(), example_iii()}) {
    const Vec3 x(1.1, 0.3, -0.4);
    const ReducedField closed = first_order_field_closed(s);
    const ReducedField numeric = first_order_field_numeric(s);
    CHECK(max_diff(closed(0.3, x), closed(0.3 + 2 * kPi, x)) <= 1e-12);
    CHECK(max_diff(numeric(0.3, x), numeric(0.3 + 2 * kPi, x)) <= 1e-12);
  }
}

TEST_CASE("extraction diagnostics") {
  const Vec3 x(1.0, 0.2, 0.1);
  const Extraction ei = extract_first_order(example_i(), 0.3, x);
  CHECK(ei.residual < 1e-9);
  CHECK(ei.half_power.norm() == 0.0);
  CHECK(ei.drift.norm() < 1e-9);

  // the line point drifts at rate -b1 Δ along the model's w axis
  const Extraction eii = extract_first_order(example_ii(), 0.3, x);
  CHECK(eii.residual < 1e-9);
  CHECK(eii.drift.norm() > 1e-3);

  // the pair brings a genuine √ε term
  const Extraction eiii = extract_first_order(example_iii(), 0.3, x);
  CHECK(eiii.residual < 1e-6);
  CHECK(eiii.half_power.norm() > 1e-2);
  CHECK(eiii.drift.norm() < 1e-6);

  CHECK_THROWS_AS(extract_first_order(example_i(), 0.3, Vec3(0, 0.2, 0.1)), ReparametrizationError);
  ExtractionConfig tight;
  tight.max_residual = 1e-30;
  CHECK_THROWS_AS(extract_first_order(example_iii(), 0.3, x, tight), ConvergenceError);
  try {
    extract_first_order(example_iii(), 0.3, x, tight);
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residual() > 0);
  }
}

TEST_CASE("both branches give the same reduced field") {
  UnfoldingSpec minus = example_iii();
  minus.branch = -1;
  const ReducedField fp = first_order_field_numeric(example_iii());
  const ReducedField fm = first_order_field_numeric(minus);
  for (double th : {0.0, 1.0, 2.5, 5.0}) CHECK(max_diff(fp(th, Vec3(0.8, -0.2, 0.3)), fm(th, Vec3(0.8, -0.2, 0.3))) < 1e-8);
}

TEST_CASE("axis limits of the closed forms") {
  const ReducedField f3 = first_order_field_closed(example_iii());
  // with w = 0 every 1/r term vanishes and the limit exists
  const Vec3 lim = f3(0.4, Vec3(0, 0.3, 0));
  CHECK(max_diff(lim, f3(0.4, Vec3(1e-9, 0.3, 0))) < 1e-7);
  CHECK_THROWS_AS(f3(0.4, Vec3(0, 0.3, -0.5)), AxisSingularError);
  // at cos θ = 0 the singular numerators vanish too
  CHECK_NOTHROW(f3(kPi / 2, Vec3(0, 0.3, -0.5)));

  const ReducedField f2 = first_order_field_closed(example_ii());
  CHECK_NOTHROW(f2(0.4, Vec3(0, -0.125, 0)));
  CHECK_THROWS_AS(f2(0.4, Vec3(0, 0.5, 0.5)), AxisSingularError);

  CHECK_NOTHROW(first_order_field_closed(example_i())(0.4, Vec3(0, 0.5, 1.0)));
}
