#pragma once

// The four-dimensional Lorenz-Haken model
//
//   x' = a (y - x)
//   y' = -c y - d z + (e - w) x
//   z' = d y - c z
//   w' = -b w + x y
//
// together with its Jacobian, the reflection symmetry
// (x, y, z, w) -> (-x, -y, -z, w) and the equilibrium set.

#include <Eigen/Core>

#include <string_view>
#include <vector>

namespace zhopf {

using State4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct SystemParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double e = 0.0;

  double max_abs() const;
  bool finite() const;
};

State4 vector_field(const SystemParams& p, const State4& s);
Mat4 jacobian(const SystemParams& p, const State4& s);

/// diag(-1, -1, -1, 1); the model is equivariant under it.
Mat4 reflection();
State4 reflect(const State4& s);

/// Δ = (e c - c² - d²) / c. Throws ValidationError when c = 0.
double delta(const SystemParams& p);

/// Max-norm of the field at `s`, divided by max(1, |params|∞).
double scaled_residual(const SystemParams& p, const State4& s);

enum class EquilibriumKind { Origin, PlusBranch, MinusBranch, LineRepresentative };

std::string_view to_string(EquilibriumKind kind);

struct Equilibrium {
  EquilibriumKind kind;
  State4 point;
  double residual;  // scaled_residual at `point`
};

struct EquilibriumSet {
  double delta = 0.0;
  /// b = 0: the whole w-axis consists of equilibria; `points` then holds
  /// the origin and the representative (0, 0, 0, Δ).
  bool line_of_equilibria = false;
  std::vector<Equilibrium> points;
};

/// Equilibria of the model. The origin is always listed. For b Δ > 0
/// the symmetric pair p± = (±q, ±q, ±d q / c, Δ), q = √(bΔ), is added. The list
/// is complete whenever a ≠ 0.
EquilibriumSet equilibria(const SystemParams& p);

/// The plus (sign = +1) or minus (sign = -1) branch point; requires b Δ ≥ 0.
State4 branch_point(const SystemParams& p, int sign);

}  // namespace zhopf
