#include "zhopf/model.hpp"

#include "zhopf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace zhopf {

double SystemParams::max_abs() const {
  return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), std::abs(e)});
}

bool SystemParams::finite() const {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d) &&
         std::isfinite(e);
}

State4 vector_field(const SystemParams& p, const State4& s) {
  const double x = s[0], y = s[1], z = s[2], w = s[3];
  return State4(p.a * (y - x), -p.c * y - p.d * z + (p.e - w) * x, p.d * y - p.c * z,
                -p.b * w + x * y);
}

Mat4 jacobian(const SystemParams& p, const State4& s) {
  const double x = s[0], y = s[1], w = s[3];
  Mat4 j;
  // clang-format off
  j << -p.a,     p.a,   0.0,  0.0,
       p.e - w, -p.c,  -p.d,  -x,
       0.0,      p.d,  -p.c,  0.0,
       y,        x,     0.0, -p.b;
  // clang-format on
  return j;
}

Mat4 reflection() { return Eigen::Vector4d(-1.0, -1.0, -1.0, 1.0).asDiagonal(); }

State4 reflect(const State4& s) { return State4(-s[0], -s[1], -s[2], s[3]); }

double delta(const SystemParams& p) {
  if (p.c == 0.0) throw ValidationError("c must be nonzero");
  return (p.e * p.c - p.c * p.c - p.d * p.d) / p.c;
}

double scaled_residual(const SystemParams& p, const State4& s) {
  return vector_field(p, s).cwiseAbs().maxCoeff() / std::max(1.0, p.max_abs());
}

std::string_view to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Origin: return "origin";
    case EquilibriumKind::PlusBranch: return "plus";
    case EquilibriumKind::MinusBranch: return "minus";
    case EquilibriumKind::LineRepresentative: return "line";
  }
  return "?";
}

State4 branch_point(const SystemParams& p, int sign) {
  const double dl = delta(p);
  const double bd = p.b * dl;
  if (bd < 0.0) throw DegenerateError("b*Delta < 0: the symmetric equilibrium pair does not exist");
  const double q = sign * std::sqrt(bd);
  return State4(q, q, p.d * q / p.c, dl);
}

EquilibriumSet equilibria(const SystemParams& p) {
  if (!p.finite()) throw ValidationError("parameters must be finite");
  EquilibriumSet set;
  set.delta = delta(p);

  auto add = [&](EquilibriumKind kind, const State4& s) {
    set.points.push_back({kind, s, scaled_residual(p, s)});
  };

  add(EquilibriumKind::Origin, State4::Zero());
  if (p.b == 0.0) {
    set.line_of_equilibria = true;
    if (set.delta != 0.0) add(EquilibriumKind::LineRepresentative, State4(0, 0, 0, set.delta));
  } else if (p.b * set.delta > 0.0) {
    add(EquilibriumKind::PlusBranch, branch_point(p, +1));
    add(EquilibriumKind::MinusBranch, branch_point(p, -1));
  }
  return set;
}

}  // namespace zhopf
