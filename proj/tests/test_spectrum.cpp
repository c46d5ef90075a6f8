#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhopf/errors.hpp"
#include "zhopf/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace zhopf;

namespace {

// coefficients of prod (λ - λ_i) from an independent eigensolve
QuarticCoeffs from_roots(const Mat4& m) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m.cast<Complex>());
  std::array<Complex, 5> c{1.0, 0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    const Complex r = es.eigenvalues()[i];
    for (int k = i + 1; k >= 1; --k) c[k] -= r * c[k - 1];
  }
  return {c[1].real(), c[2].real(), c[3].real(), c[4].real(), true};
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

}  // namespace

TEST_CASE("case labels") {
  CHECK(parse_case("ii") == Case::II);
  CHECK(parse_case("III") == Case::III);
  CHECK(to_string(Case::I) == "i");
  CHECK_THROWS_AS(parse_case("iv"), ValidationError);
}

TEST_CASE("origin coefficients vanish on the zero-Hopf hyperplanes") {
  for (double d : {-2.0, 0.3}) {
    for (double e : {-1.0, 4.0}) {
      const QuarticCoeffs q = char_poly({-2, 0, 1, d, e}, State4::Zero());
      CHECK(q.A == 0.0);
      CHECK(q.D == 0.0);
    }
  }
}

TEST_CASE("origin coefficients against the determinant expansion") {
  const SystemParams p{1, 2, 3, 4, 5};
  const QuarticCoeffs q = char_poly_origin(p);
  const QuarticCoeffs r = from_roots(jacobian(p, State4::Zero()));
  const QuarticCoeffs f = char_poly_of(jacobian(p, State4::Zero()));
  CHECK(rel(q.A, r.A) < 1e-10);
  CHECK(rel(q.B, r.B) < 1e-10);
  CHECK(rel(q.C, r.C) < 1e-10);
  CHECK(rel(q.D, r.D) < 1e-10);
  CHECK(q.A == f.A);
  CHECK(q.B == f.B);
  CHECK(q.C == f.C);
  CHECK(q.D == f.D);
}

TEST_CASE("zero-Hopf coefficients (0, 1, 0, 0)") {
  const SystemParams p{-2, 0, 1, -std::sqrt(2.0 / 3.0), 5.0 / 3.0};
  const QuarticCoeffs q = char_poly(p, State4::Zero());
  CHECK(q.A == doctest::Approx(0.0));
  CHECK(q.B == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(q.C) < 1e-14);
  CHECK(q.D == 0.0);
}

TEST_CASE("random parameters against reconstructed quartic") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 100; ++i) {
    const SystemParams p{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const QuarticCoeffs q = char_poly(p, State4::Zero());
    const QuarticCoeffs r = from_roots(jacobian(p, State4::Zero()));
    CHECK(rel(q.A, r.A) < 1e-8);
    CHECK(rel(q.B, r.B) < 1e-8);
    CHECK(rel(q.C, r.C) < 1e-8);
    CHECK(rel(q.D, r.D) < 1e-8);
  }
}

TEST_CASE("coefficients away from the origin") {
  const SystemParams p{2, 1, 1, 1, 3};
  const QuarticCoeffs q = char_poly(p, State4(1, 1, 1, 1));
  CHECK(q.at_equilibrium);
  const QuarticCoeffs r = from_roots(jacobian(p, State4(1, 1, 1, 1)));
  CHECK(rel(q.C, r.C) < 1e-10);
  CHECK(rel(q.D, r.D) < 1e-10);
  CHECK_FALSE(char_poly(p, State4(1, 0, 0, 0)).at_equilibrium);
}

TEST_CASE("eigenvalue ordering") {
  const Spectrum4 ev = eigenvalues(jacobian(zero_hopf_params({Case::I, 1.0, 2.0}), State4::Zero()));
  CHECK(ev[0].imag() == doctest::Approx(2.0));
  CHECK(ev[3].imag() == doctest::Approx(-2.0));
}

TEST_CASE("constructed parameters") {
  const SystemParams p1 = zero_hopf_params({Case::I, 1.0, 1.0});
  CHECK(p1.a == -2.0);
  CHECK(p1.b == 0.0);
  CHECK(p1.d == doctest::Approx(-0.8164966).epsilon(1e-7));
  CHECK(p1.e == doctest::Approx(5.0 / 3.0));

  const SystemParams p2 = zero_hopf_params({Case::II, 1.0, std::nullopt, 2.0});
  CHECK(p2.a == -2.0);
  CHECK(zero_hopf_omega(p2) == doctest::Approx(std::sqrt(11.0)));
  const auto cert2 = is_zero_hopf(p2, zero_hopf_point(Case::II, p2));
  REQUIRE(cert2);
  CHECK(cert2->omega == doctest::Approx(std::sqrt(11.0)).epsilon(1e-12));

  const SystemParams p3 = zero_hopf_params({Case::III, -1.0, 2.0});
  CHECK(p3.a == 2.0);
  CHECK(p3.d == doctest::Approx(-std::sqrt(5.0) / std::sqrt(3.0)));
  // at the line point and at the limit of the pair (which coincide when b = 0)
  for (double e : {-4.0, 1.0, 6.0}) {
    SystemParams p = p3;
    p.e = e;
    const auto cert = is_zero_hopf(p, zero_hopf_point(Case::III, p));
    REQUIRE(cert);
    CHECK(std::abs(cert->omega - 2.0) < 1e-8);
    SystemParams pb = p;
    pb.b = 1e-12 * (delta(p) > 0 ? 1 : -1);
    CHECK((branch_point(pb, +1) - zero_hopf_point(Case::III, p)).norm() < 1e-5);
  }
}

TEST_CASE("bad construction requests") {
  CHECK_THROWS_WITH_AS(zero_hopf_params({Case::I, 0.0, 1.0}), "c must be nonzero", ValidationError);
  CHECK_THROWS_AS(zero_hopf_params({Case::I, 1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(zero_hopf_params({Case::I, 1.0, std::nullopt}), ValidationError);
  CHECK_THROWS_AS(zero_hopf_params({Case::II, 1.0, std::nullopt, 0.5}), ValidationError);
  CHECK_THROWS_AS(zero_hopf_params({Case::II, 1.0, 2.0, 2.0}), ValidationError);
  CHECK_NOTHROW(zero_hopf_params({Case::II, 1.0, std::sqrt(11.0), 2.0}));
}

TEST_CASE("certificates across the grid") {
  for (Case k : {Case::I, Case::II, Case::III}) {
    for (double c : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
      for (double w : {0.5, 1.0, 2.0, 3.0}) {
        const SystemParams p = zero_hopf_params({k, c, w});
        const auto cert = is_zero_hopf(p, zero_hopf_point(k, p), 1e-8);
        REQUIRE(cert);
        CHECK(std::abs(cert->omega - w) <= 1e-8);
        CHECK(cert->residual <= 1e-8);
        CHECK(cert->eigenvalues[0].imag() > 0);
      }
    }
  }
}

TEST_CASE("no certificate for generic parameters") {
  CHECK_FALSE(is_zero_hopf({1, 1, 1, 1, 1}, State4::Zero(), 1e-8));
  // a Hopf pair without the double zero
  const SystemParams p = zero_hopf_params({Case::I, 1.0, 1.0});
  SystemParams q = p;
  q.b = 0.3;
  CHECK_FALSE(is_zero_hopf(q, State4::Zero(), 1e-8));
}

TEST_CASE("optimal multiset matching") {
  const Spectrum4 a{Complex(0, 1), Complex(0, -1), 0.1, -0.1};
  const Spectrum4 t{Complex(0, -1), 0.0, Complex(0, 1), 0.0};
  const SpectrumMatch m = match_spectrum(a, t);
  CHECK(m.residual == doctest::Approx(0.1));
  CHECK(m.perm[0] == 1);
  CHECK(m.perm[2] == 0);
}
