#pragma once

// Averaged maps f(r, z, w) = (1/2π) ∫ F(θ, r, z, w) dθ of the first-order
// fields, their zeros and the linear stability of each zero.

#include "zhopf/reduction.hpp"

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zhopf {

using Complex3 = std::array<std::complex<double>, 3>;

/// Composite trapezoid over n uniform θ-panels (n ≥ 8). Spectrally accurate
/// for the trigonometric polynomials produced by the reduction.
Vec3 average_quadrature(const ReducedField& field, const Vec3& x, int n = 256);

struct AveragedMap {
  Case kase;
  UnfoldingSpec spec;
  std::function<Vec3(const Vec3&)> eval;
  std::function<Mat3(const Vec3&)> jacobian;

  Vec3 operator()(const Vec3& x) const { return eval(x); }
};

/// Closed-form averaged map with its exact Jacobian.
AveragedMap averaged_map_closed(const UnfoldingSpec& spec);

enum class Verdict { Stable, Unstable, Nonhyperbolic };
std::string to_string(Verdict v);

/// λ³ + p2 λ² + p1 λ + p0 = det(λI - J)
struct MonicCubic {
  double p2 = 0.0;
  double p1 = 0.0;
  double p0 = 0.0;
};

/// Roots through the companion matrix, same ordering as the eigenvalues.
Complex3 cubic_roots(const MonicCubic& cubic);

/// Determinant, characteristic cubic and eigenvalues predicted by the
/// closed-form expressions for a labelled zero. Any of them may be missing.
struct ReferenceForms {
  std::optional<double> det;
  std::optional<MonicCubic> cubic;
  std::optional<Complex3> eigenvalues;
};

struct StabilityEntry {
  double det = 0.0;
  MonicCubic cubic;
  Complex3 eigenvalues{};  // numeric, descending imag then ascending real
  double cubic_root_residual = 0.0;  // eigenvalues vs roots of `cubic`
  /// |det| > 1e-12 · max(1, ‖J‖∞³); the averaging theorem needs it.
  bool theorem_applicable = false;
  Verdict verdict = Verdict::Nonhyperbolic;

  ReferenceForms reference;
  std::optional<double> det_reference_error;    // relative
  std::optional<double> cubic_reference_error;  // max coefficient difference
  std::optional<double> eigen_reference_error;  // optimal pairing, max distance
};

struct AveragedZero {
  std::string label;  // "s0", "s1", "s3/s4", ... ; a slash marks a ± pair merged to r > 0
  Vec3 location;
  double residual = 0.0;  // ‖f‖∞
  bool axis = false;      // r = 0
  bool trivial = false;   // the unperturbed equilibrium itself
  int multiplicity = 1;   // 2 when a ± pair with r ≠ 0 was merged
  StabilityEntry stability;
};

/// Reference forms for a zero by label; empty for labels without them.
ReferenceForms reference_forms(const UnfoldingSpec& spec, const std::string& label);

/// Jacobian analysis of `f` at `x`. Degenerate zeros get the verdict
/// Nonhyperbolic and theorem_applicable = false.
StabilityEntry stability_analysis(const UnfoldingSpec& spec, const AveragedMap& f, const Vec3& x,
                                  const std::string& label = "");
StabilityEntry stability_analysis(const UnfoldingSpec& spec, const AveragedZero& zero);

/// Every closed-form zero whose radicand is positive, polished by Newton
/// (target 1e-12, ≤ 20 iterations, halving on residual increase). Throws
/// ConvergenceError if a seed does not polish, which means a formula is wrong.
std::vector<AveragedZero> averaged_zeros(const UnfoldingSpec& spec);

/// Number of nontrivial zeros counted with multiplicity.
int nontrivial_count(const std::vector<AveragedZero>& zeros);

/// Named sign quantities that decide existence and stability:
///   i:   η = 3c e1 + 2√3 d1 √(c²+ω²), η1 = 3a1ω² - 2cη, 16cη + 3b1ω², 4η1 + 3b1ω²
///   ii:  E = c⁴ - 8c²d² + 7d⁴ + 2cd²e, H = (c⁴ - 4c²d² + 3d⁴)(c² + d² - ce), G = 2c² - 2d² - ce
///   iii: κ = b1(4c² - 3ce + 3ω²)
std::vector<std::pair<std::string, double>> discriminants(const UnfoldingSpec& spec);

}  // namespace zhopf
