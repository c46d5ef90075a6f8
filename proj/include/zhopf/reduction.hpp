#pragma once

// From the unfolded 4D model to a 2π-periodic first-order field on (r, z, w).
//
// The pipeline for a parameter ε > 0:
//   s = P(ε) + ε M (r cos θ, r sin θ, z, w)
// where P is the equilibrium being unfolded and M the change to real Jordan
// form of the ε = 0 linearization. Taking θ as the new time, the rates
// (dr/dθ, dz/dθ, dw/dθ) expand as G0 + √ε G½ + ε F + ..., and F is the
// first-order field that gets averaged.

#include "zhopf/cases.hpp"
#include "zhopf/model.hpp"

#include <Eigen/Core>

#include <functional>

namespace zhopf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct UnfoldingSpec {
  Case kase = Case::I;
  double c = 1.0;
  double omega = 1.0;  // case ii: derived, √(3d² - c²)
  double a1 = 0.0;
  double b1 = 0.0;
  double d1 = 0.0;  // cases i, iii
  double e1 = 0.0;  // case i
  double d = 0.0;   // case ii
  double e = 0.0;   // cases ii, iii (free, not perturbed)
  int branch = +1;  // case iii: which of p± is unfolded

  static UnfoldingSpec case_i(double c, double omega, double a1, double b1, double d1, double e1);
  static UnfoldingSpec case_ii(double c, double d, double e, double a1, double b1);
  static UnfoldingSpec case_iii(double c, double omega, double e, double a1, double b1, double d1,
                                int branch = +1);

  /// Throws ValidationError when the spec is outside the domain of its case.
  void validate() const;
};

/// Unperturbed value of d for cases i and iii: -√(c² + ω²)/√3.
double zero_hopf_d(double c, double omega);

/// Case iii: Δ at ε = 0, (3ce - 4c² - ω²)/(3c). The pair p± exists for small
/// ε > 0 iff b1 Δ0 > 0.
double case_iii_delta0(const UnfoldingSpec& spec);

/// Parameters of the unfolding at ε ≥ 0.
SystemParams perturb(const UnfoldingSpec& spec, double eps);

/// The point translated to the origin: 0 (i), (0, 0, 0, Δ) (ii), p±(ε) (iii;
/// the line point when b = 0).
State4 base_point(const UnfoldingSpec& spec, double eps);

struct LinearChange {
  Mat4 forward;  // Jordan coordinates -> rescaled model coordinates
  Mat4 inverse;
};

LinearChange jordan_change(const UnfoldingSpec& spec);

/// Linearization of the unfolded model at the base point, ε = 0.
Mat4 base_linearization(const UnfoldingSpec& spec);

/// inverse · base_linearization · forward. Should equal the real Jordan block
/// ((0, -ω), (ω, 0)) ⊕ 0 ⊕ 0.
Mat4 conjugated_linearization(const UnfoldingSpec& spec);

/// Reduced point (θ, r, z, w) <-> model state at a given ε.
State4 to_model_state(const UnfoldingSpec& spec, double eps, double theta, const Vec3& x);
struct ReducedPoint {
  double theta;
  Vec3 x;
};
ReducedPoint to_reduced(const UnfoldingSpec& spec, double eps, const State4& s);

/// dθ/dt of the rescaled system.
double theta_rate(const UnfoldingSpec& spec, double eps, double theta, const Vec3& x);

/// (dr/dθ, dz/dθ, dw/dθ) of the full rescaled system at ε > 0.
Vec3 reduced_rates(const UnfoldingSpec& spec, double eps, double theta, const Vec3& x);

enum class Provenance { ClosedForm, NumericPipeline };

struct ReducedField {
  std::function<Vec3(double, const Vec3&)> eval;
  Provenance provenance;

  Vec3 operator()(double theta, const Vec3& x) const { return eval(theta, x); }
};

/// First-order field from its closed form. Terms of the form A/r with A ≠ 0 at
/// r = 0 raise AxisSingularError there; otherwise the r = 0 value is the limit.
ReducedField first_order_field_closed(const UnfoldingSpec& spec);

struct ExtractionConfig {
  double eps0 = 1e-3;
  /// Samples eps0·2^-k (cases i, ii) or √eps0·2^-k in √ε (case iii).
  int samples = 0;  // 0: 6 for i/ii, 8 for iii
  /// Further ladders at eps0/10, eps0/100, ... tried while the fit has not settled.
  int refinements = 3;
  double max_residual = 1e-6;
  double min_theta_rate = 1e-6;
};

struct Extraction {
  Vec3 value;       // coefficient of ε
  Vec3 half_power;  // coefficient of √ε (always 0 for i/ii)
  Vec3 drift;       // ε⁰ term; nonzero only when the base point is not an equilibrium
  double residual;  // change of `value` against the next-lower-order fit
};

/// Fits the rates at a geometric ε ladder and reads off the ε-coefficient.
/// Throws ReparametrizationError when dθ/dt is below min_theta_rate at a
/// sample and ConvergenceError when the residual exceeds max_residual.
Extraction extract_first_order(const UnfoldingSpec& spec, double theta, const Vec3& x,
                               const ExtractionConfig& cfg = {});

ReducedField first_order_field_numeric(const UnfoldingSpec& spec, const ExtractionConfig& cfg = {});

}  // namespace zhopf
