#pragma once

#include "zhopf/cases.hpp"
#include "zhopf/model.hpp"

#include <array>
#include <complex>
#include <optional>

namespace zhopf {

using Complex = std::complex<double>;
using Spectrum4 = std::array<Complex, 4>;

/// λ⁴ + A λ³ + B λ² + C λ + D
struct QuarticCoeffs {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  /// false when the evaluation point is not an equilibrium (residual > 1e-9)
  bool at_equilibrium = true;

  Complex operator()(Complex lambda) const;
};

/// Characteristic polynomial of the linearization at `at`. At the origin the
/// coefficients come from their closed forms in (a, b, c, d, e); elsewhere
/// from the exact expansion of det(λI - J).
QuarticCoeffs char_poly(const SystemParams& p, const State4& at);

/// Closed-form coefficients at the origin.
QuarticCoeffs char_poly_origin(const SystemParams& p);

/// Exact expansion of det(λI - m) (Faddeev-LeVerrier).
QuarticCoeffs char_poly_of(const Mat4& m);

/// Eigenvalues by dense Hessenberg-QR, ordered by descending imaginary part,
/// ties by ascending real part.
Spectrum4 eigenvalues(const Mat4& m);

struct SpectrumMatch {
  double residual;          // max |λ - target| under the optimal pairing
  std::array<int, 4> perm;  // eigs[perm[k]] is paired with targets[k]
};

/// Optimal pairing (all 24 permutations) minimizing the largest distance.
SpectrumMatch match_spectrum(const Spectrum4& eigs, const Spectrum4& targets);

struct ZeroHopfCertificate {
  double omega;
  /// ordered as matched to (+iω, -iω, 0, 0)
  Spectrum4 eigenvalues;
  double residual;
};

/// Certificate iff the spectrum of jacobian(p, at) is within `tol` of
/// {0, 0, +iω, -iω} for some ω > tol.
std::optional<ZeroHopfCertificate> is_zero_hopf(const SystemParams& p, const State4& at,
                                                double tol = 1e-8);

struct ZeroHopfRequest {
  Case kase = Case::I;
  double c = 0.0;
  std::optional<double> omega;  // required for I and III; optional consistency check for II
  std::optional<double> d;      // required for II
  std::optional<double> e;      // free parameter of II and III (default 0)
};

/// Parameters making the case's equilibrium zero-Hopf:
///   I:   (a, b, d, e) = (-2c, 0, -√(c²+ω²)/√3, (4c²+ω²)/(3c))
///   II:  (a, b) = (-2c, 0), d given, ω = √(3d²-c²)
///   III: (a, b, d) = (-2c, 0, -√(c²+ω²)/√3)
SystemParams zero_hopf_params(const ZeroHopfRequest& req);

/// ω = √(3d² - c²), the rotation frequency of a zero-Hopf parameter set.
double zero_hopf_omega(const SystemParams& p);

/// The equilibrium that is zero-Hopf: the origin (I) or (0, 0, 0, Δ) (II, III).
State4 zero_hopf_point(Case kase, const SystemParams& p);

}  // namespace zhopf
