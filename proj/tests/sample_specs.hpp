#pragma once

// Random unfolding specs for property tests.

#include "zhopf/reduction.hpp"

#include <cmath>
#include <random>

namespace zhopf::testing {

inline double away_from_zero(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution neg(0.5);
  return neg(rng) ? -mag(rng) : mag(rng);
}

inline UnfoldingSpec random_spec(Case k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5), om(0.5, 2.0);
  const double c = away_from_zero(rng, 0.4, 1.6);
  switch (k) {
    case Case::I: return UnfoldingSpec::case_i(c, om(rng), u(rng), u(rng), u(rng), u(rng));
    case Case::II: {
      // keep |c^2 - 3 d^2| away from zero
      const double d = away_from_zero(rng, 0.8 * std::abs(c) + 0.2, 2.0 * std::abs(c) + 0.5);
      return UnfoldingSpec::case_ii(c, d, u(rng) * 3, u(rng), u(rng));
    }
    case Case::III: {
      const double w = om(rng);
      const double e = u(rng) * 4;
      UnfoldingSpec probe;
      probe.kase = Case::III;
      probe.c = c;
      probe.omega = w;
      probe.e = e;
      const double b1 = std::abs(u(rng)) + 0.1;
      // choose the sign of b1 so that the pair exists
      const double sb = case_iii_delta0(probe) >= 0 ? b1 : -b1;
      return UnfoldingSpec::case_iii(c, w, e, u(rng), sb, u(rng) * 0.5);
    }
  }
  return {};
}

}  // namespace zhopf::testing
