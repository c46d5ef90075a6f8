#include "zhopf/reduction.hpp"

#include "zhopf/errors.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace zhopf {

namespace {

const double kSqrt3 = std::numbers::sqrt3;

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

UnfoldingSpec UnfoldingSpec::case_i(double c, double omega, double a1, double b1, double d1,
                                    double e1) {
  UnfoldingSpec s;
  s.kase = Case::I;
  s.c = c;
  s.omega = omega;
  s.a1 = a1;
  s.b1 = b1;
  s.d1 = d1;
  s.e1 = e1;
  s.validate();
  return s;
}

UnfoldingSpec UnfoldingSpec::case_ii(double c, double d, double e, double a1, double b1) {
  UnfoldingSpec s;
  s.kase = Case::II;
  s.c = c;
  s.d = d;
  s.e = e;
  s.a1 = a1;
  s.b1 = b1;
  const double w2 = 3 * d * d - c * c;
  s.omega = w2 > 0 ? std::sqrt(w2) : 0.0;
  s.validate();
  return s;
}

UnfoldingSpec UnfoldingSpec::case_iii(double c, double omega, double e, double a1, double b1,
                                      double d1, int branch) {
  UnfoldingSpec s;
  s.kase = Case::III;
  s.c = c;
  s.omega = omega;
  s.e = e;
  s.a1 = a1;
  s.b1 = b1;
  s.d1 = d1;
  s.branch = branch;
  s.validate();
  return s;
}

void UnfoldingSpec::validate() const {
  if (!finite_all({c, omega, a1, b1, d1, e1, d, e})) throw ValidationError("spec fields must be finite");
  if (c == 0.0) throw ValidationError("c must be nonzero");
  switch (kase) {
    case Case::I:
      if (!(omega > 0)) throw ValidationError("omega must be positive");
      break;
    case Case::II: {
      const double w2 = 3 * d * d - c * c;
      if (!(w2 > 0)) throw ValidationError("case ii requires 3 d^2 - c^2 > 0");
      if (std::abs(std::sqrt(w2) - omega) > 1e-14 * std::max(1.0, omega))
        throw ValidationError("case ii omega must equal sqrt(3 d^2 - c^2)");
      break;
    }
    case Case::III:
      if (!(omega > 0)) throw ValidationError("omega must be positive");
      if (branch != 1 && branch != -1) throw ValidationError("branch must be +1 or -1");
      if (b1 * case_iii_delta0(*this) < 0)
        throw ValidationError("case iii requires b1 * Delta >= 0 (the equilibrium pair must exist)");
      break;
  }
}

double zero_hopf_d(double c, double omega) { return -std::sqrt(c * c + omega * omega) / kSqrt3; }

double case_iii_delta0(const UnfoldingSpec& s) {
  return (3 * s.c * s.e - 4 * s.c * s.c - s.omega * s.omega) / (3 * s.c);
}

SystemParams perturb(const UnfoldingSpec& s, double eps) {
  if (!(eps >= 0) || !std::isfinite(eps)) throw ValidationError("eps must be finite and >= 0");
  SystemParams p;
  p.a = -2 * s.c + eps * s.a1;
  p.b = eps * s.b1;
  p.c = s.c;
  switch (s.kase) {
    case Case::I:
      p.d = zero_hopf_d(s.c, s.omega) + eps * s.d1;
      p.e = (4 * s.c * s.c + s.omega * s.omega) / (3 * s.c) + eps * s.e1;
      break;
    case Case::II:
      p.d = s.d;
      p.e = s.e;
      break;
    case Case::III:
      p.d = zero_hopf_d(s.c, s.omega) + eps * s.d1;
      p.e = s.e;
      break;
  }
  return p;
}

State4 base_point(const UnfoldingSpec& s, double eps) {
  const SystemParams p = perturb(s, eps);
  switch (s.kase) {
    case Case::I: return State4::Zero();
    case Case::II: return State4(0, 0, 0, delta(p));
    case Case::III:
      if (p.b == 0.0) return State4(0, 0, 0, delta(p));
      return branch_point(p, s.branch);
  }
  return State4::Zero();
}

LinearChange jordan_change(const UnfoldingSpec& s) {
  const double c = s.c, w = s.omega;
  Mat4 m = Mat4::Zero();
  switch (s.kase) {
    case Case::I: {
      const double S = std::sqrt(c * c + w * w);
      const double den = 3 * w * w * S;
      m.row(0) << 2 * c * kSqrt3 * w * w / den, 2 * c * c * kSqrt3 * w / den, -6 * c * c * S / den, 0;
      m.row(1) << kSqrt3 * c * w * w / den, (kSqrt3 * w * w * w + 2 * kSqrt3 * c * c * w) / den,
          -6 * c * c * S / den, 0;
      m.row(2) << 1.0 / 3, -2 * c / (3 * w), 2 * kSqrt3 * c * S / (3 * w * w), 0;
      m(3, 3) = 1;
      break;
    }
    case Case::II: {
      const double d = s.d, q = w, L = c * c - 3 * d * d;
      m.row(0) << (2 * c * c - 6 * d * d) / (3 * L), -2 * c * q / (3 * L), 0, 2 * c * c / L;
      const double k = -1.0 / (3 * (c * c * c - 3 * c * d * d));
      m.row(1) << k * (3 * c * d * d - c * c * c), k * q * (c * c + 3 * d * d), 0, -6 * c * c * c * k;
      const double k2 = d / (-3 * c * c * c + 9 * c * d * d);
      m.row(2) << k2 * L, 2 * c * q * k2, 0, -6 * c * c * k2;
      // the third Jordan coordinate is the model's w itself
      m(3, 2) = 1;
      break;
    }
    case Case::III: {
      const double S = std::sqrt(c * c + w * w);
      m.row(0) << 2 * c / kSqrt3, 2 * c * c / (kSqrt3 * w), -2 * c * c / (w * w), 0;
      m.row(1) << c / kSqrt3, (w * w + 2 * c * c) / (kSqrt3 * w), -2 * c * c / (w * w), 0;
      m.row(2) << S / 3, -2 * c * S / (3 * w), 2 * kSqrt3 * c * S / (3 * w * w), 0;
      m(3, 3) = 1;
      break;
    }
  }
  const double scale = m.cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12 * std::pow(scale, 4))
    throw DegenerateError("Jordan change is singular for these parameters");
  return {m, m.inverse()};
}

Mat4 base_linearization(const UnfoldingSpec& s) {
  return jacobian(perturb(s, 0.0), base_point(s, 0.0));
}

Mat4 conjugated_linearization(const UnfoldingSpec& s) {
  const LinearChange lc = jordan_change(s);
  return lc.inverse * base_linearization(s) * lc.forward;
}

State4 to_model_state(const UnfoldingSpec& s, double eps, double theta, const Vec3& x) {
  const LinearChange lc = jordan_change(s);
  const State4 u(x[0] * std::cos(theta), x[0] * std::sin(theta), x[1], x[2]);
  return base_point(s, eps) + eps * (lc.forward * u);
}

ReducedPoint to_reduced(const UnfoldingSpec& s, double eps, const State4& st) {
  if (!(eps > 0)) throw ValidationError("eps must be positive");
  const LinearChange lc = jordan_change(s);
  const State4 u = lc.inverse * ((st - base_point(s, eps)) / eps);
  return {std::atan2(u[1], u[0]), Vec3(std::hypot(u[0], u[1]), u[2], u[3])};
}

namespace {

// The rates are evaluated in extended precision: the ε-fit below amplifies
// rounding noise in the samples by roughly 1/ε, which in double would put a
// floor of about 1e-11 under the extracted field.
using Real = long double;
using State4L = Eigen::Matrix<Real, 4, 1>;
using Mat4L = Eigen::Matrix<Real, 4, 4>;

struct Frame {
  Real omega;
  State4L base;
  State4L drift;  // vector field at `base`, divided by ε
  Mat4L dj;       // J(base; ε) - J(base; 0)
  Mat4L fwd, inv;
  Real eps;
};

// The differences in dj are formed analytically (they are O(ε) or O(√ε)) so
// that no O(1) quantity is subtracted from another.
Frame make_frame(const UnfoldingSpec& s, const Mat4L& fwd, const Mat4L& inv, Real eps) {
  Frame f;
  const Real c = s.c, w = s.omega;
  f.omega = w;
  f.fwd = fwd;
  f.inv = inv;
  f.eps = eps;
  f.base.setZero();
  f.drift.setZero();

  const Real da = eps * Real(s.a1), b = eps * Real(s.b1);
  Real dd = 0, de = 0, dw = 0;
  switch (s.kase) {
    case Case::I:
      dd = eps * Real(s.d1);
      de = eps * Real(s.e1);
      break;
    case Case::II:
      f.base[3] = (Real(s.e) * c - c * c - Real(s.d) * Real(s.d)) / c;
      // -b w at the line point, with b = ε b1
      f.drift[3] = -Real(s.b1) * f.base[3];
      break;
    case Case::III: {
      dd = eps * Real(s.d1);
      const Real d0 = -std::sqrt(c * c + w * w) / std::sqrt(Real(3));
      const Real dl0 = (3 * c * Real(s.e) - 4 * c * c - w * w) / (3 * c);
      dw = -dd * (2 * d0 + dd) / c;
      const Real dl = dl0 + dw;
      f.base[3] = dl;
      if (b != 0) {
        const Real bd = b * dl;
        if (bd < 0) throw DegenerateError("b*Delta < 0: the symmetric equilibrium pair does not exist");
        const Real q = s.branch * std::sqrt(bd);
        f.base << q, q, (d0 + dd) * q / c, dl;
      }
      break;
    }
  }
  const Real bx = f.base[0], by = f.base[1];
  // clang-format off
  f.dj << -da,      da,  0,   0,
          de - dw,  0,  -dd, -bx,
          0,        dd,  0,   0,
          by,       bx,  0,  -b;
  // clang-format on
  return f;
}

Frame make_frame(const UnfoldingSpec& s, const LinearChange& lc, Real eps) {
  const Mat4L fwd = lc.forward.cast<Real>();
  return make_frame(s, fwd, fwd.inverse(), eps);
}

struct PolarRates {
  Real rdot, thetadot, zdot, wdot;
};

// Polar rates of the rescaled system. The quadratic field is expanded exactly
// about the base point,
//   f(base + ε M u) / ε = f(base) / ε + J0 M u + dJ M u + ε Q(M u),
// and M⁻¹ J0 M is replaced by its real Jordan form, a rotation at rate ω.
// Only the perturbation is pushed through the change of coordinates, so the
// O(1) rotation never cancels against itself in dr/dt.
PolarRates polar_rates(const Frame& f, double theta, const Vec3& x) {
  const Real C = std::cos(Real(theta)), Sn = std::sin(Real(theta)), r = x[0];
  const State4L u(r * C, r * Sn, x[1], x[2]);
  const State4L m = f.fwd * u;
  const State4L quad(0, -m[3] * m[0], 0, m[0] * m[1]);
  const State4L pu = f.inv * (f.drift + f.dj * m + f.eps * quad);
  return {C * pu[0] + Sn * pu[1], f.omega + (C * pu[1] - Sn * pu[0]) / r, pu[2], pu[3]};
}

}  // namespace

double theta_rate(const UnfoldingSpec& s, double eps, double theta, const Vec3& x) {
  if (!(eps > 0)) throw ValidationError("eps must be positive");
  if (!(x[0] > 0)) throw ReparametrizationError("theta is undefined on the axis r = 0");
  return static_cast<double>(polar_rates(make_frame(s, jordan_change(s), eps), theta, x).thetadot);
}

Vec3 reduced_rates(const UnfoldingSpec& s, double eps, double theta, const Vec3& x) {
  if (!(eps > 0)) throw ValidationError("eps must be positive");
  if (!(x[0] > 0)) throw ReparametrizationError("theta is undefined on the axis r = 0");
  const PolarRates pr = polar_rates(make_frame(s, jordan_change(s), eps), theta, x);
  return Vec3(double(pr.rdot / pr.thetadot), double(pr.zdot / pr.thetadot), double(pr.wdot / pr.thetadot));
}

// ---------------------------------------------------------------------------
// Closed forms. Fields with a 1/r prefactor are split as regular + axis / r;
// the axis numerators are the terms of the numerator that carry no factor r.

namespace {

Vec3 closed_case_i(const UnfoldingSpec& s, double th, const Vec3& x) {
  const double c = s.c, om = s.omega, a1 = s.a1, b1 = s.b1, d1 = s.d1, e1 = s.e1;
  const double r = x[0], Z = x[1], W = x[2];
  const double S = std::sqrt(c * c + om * om), C = std::cos(th), Sn = std::sin(th);
  const double om2 = om * om, om3 = om2 * om, om4 = om2 * om2, c2 = c * c;

  const double F1 =
      (c * r * om3 * (kSqrt3 * c * d1 - a1 * S) * C * C +
       om * S * C * (-6 * c2 * c * d1 * Z + r * om * (6 * c2 * (e1 - W) + a1 * om2) * Sn) +
       c * Sn *
           (6 * c * Z * (-(2 * c2 + om2) * d1 * S - kSqrt3 * c * (e1 - W) * (c2 + om2)) +
            r * om *
                (2 * c * om * (kSqrt3 * c * d1 + a1 * S) * C +
                 ((4 * c2 * c + 3 * c * om2) * kSqrt3 * d1 + (6 * c2 * (e1 - W) - 2 * a1 * om2) * S) *
                     Sn))) /
      (3 * c * om4 * S);

  const double F2 =
      (-12 * c2 * c * Z * (2 * kSqrt3 * (c2 + om2) * d1 + 3 * c * (e1 - W) * S) +
       kSqrt3 * c * r * om2 * (4 * c2 * (a1 + 3 * e1 - 3 * W) + a1 * om2) * C +
       r * om *
           (6 * (4 * c2 * c + c * om2) * d1 * S -
            kSqrt3 * (12 * c2 * c2 * (-e1 + W) + 4 * a1 * c2 * om2 + a1 * om4)) *
           Sn) /
      (18 * c2 * om3 * S);

  const double F3 =
      ((c2 + om2) * (12 * c2 * c2 * Z * Z + 2 * c2 * r * r * om2 - 3 * b1 * W * om4) +
       c * r * om *
           (-2 * c2 * c * r * om * std::cos(2 * th) -
            2 * kSqrt3 * c * Z * S * (3 * c * om * C + (4 * c2 + om2) * Sn) +
            3 * c2 * r * om2 * std::sin(2 * th) + r * om4 * std::sin(2 * th))) /
      (3 * om4 * om * (c2 + om2));

  return Vec3(F1, F2, F3);
}

struct Split {
  Vec3 regular;
  Vec3 axis;  // multiplies 1/r
};

Vec3 combine(const Split& sp, double r, const char* where) {
  if (r != 0.0) return sp.regular + sp.axis / r;
  const double scale = std::max(1.0, sp.regular.cwiseAbs().maxCoeff());
  if (sp.axis.cwiseAbs().maxCoeff() > 1e-14 * scale)
    throw AxisSingularError(std::string(where) + ": the 1/r term does not vanish on the axis r = 0");
  return sp.regular;
}

Split closed_case_ii(const UnfoldingSpec& s, double th, const Vec3& x) {
  const double c = s.c, d = s.d, a1 = s.a1, b1 = s.b1, e = s.e;
  const double r = x[0], z = x[1], w = x[2];
  const double q = s.omega, C = std::cos(th), Sn = std::sin(th);
  const double c2 = c * c, c3 = c2 * c, c4 = c2 * c2, d2 = d * d;
  const double K = c2 + d2 - c * e, L = c2 - 3 * d2;

  const double F1 =
      -(a1 * c * q * q * q * r * C * C + L * r * (a1 * (c2 + 3 * d2) - 6 * c2 * z) * C * Sn +
        2 * c * Sn * (-9 * c3 * w * z + q * r * (-a1 * c2 + 3 * a1 * d2 + 3 * c2 * z) * Sn)) /
      (3 * c * L * L);

  const double den2 = 9 * q * std::pow(c3 - 3 * c * d2, 2);
  const double R2 =
      3 * c2 * (-2 * d2 * L * r * r + 12 * c4 * w * w - 3 * b1 * L * L * z) +
      18 * c4 * w * L * r * C + 6 * b1 * c2 * L * K * (a1 - 3 * z) * C * C +
      2 * c4 * L * r * r * std::cos(2 * th) +
      c * q * (-L * (3 * a1 * b1 * K + 2 * (2 * c2 + 3 * d2) * r * r) + 18 * b1 * c2 * K * z) * C * Sn +
      3 * Sn * (-6 * c3 * (c2 + d2) * q * r * w + a1 * b1 * L * L * K * Sn);
  const double A2 = -54 * c4 * b1 * K * w * z * C;

  const double F3 =
      -(q * r * (-a1 * L * (c2 + d2) + 4 * c4 * z) * Sn - 12 * c4 * c * w * z +
        c * L * r * (a1 * (c2 + d2) - 4 * c2 * z) * C) /
      (6 * c3 * q * q * q);

  return {Vec3(F1, R2 / den2, F3), Vec3(0, A2 / den2, 0)};
}

Split closed_case_iii(const UnfoldingSpec& s, double th, const Vec3& x) {
  const double c = s.c, om = s.omega, a1 = s.a1, b1 = s.b1, d1 = s.d1, e = s.e;
  const double r = x[0], z = x[1], w = x[2];
  const double S = std::sqrt(c * c + om * om), C = std::cos(th), Sn = std::sin(th);
  const double c2 = c * c, c3 = c2 * c, c4 = c2 * c2;
  const double om2 = om * om, om3 = om2 * om, om4 = om2 * om2, om5 = om4 * om;
  const double kp = 4 * c2 - 3 * c * e + om2;

  const double den1 = 3 * c * om4 * S;
  const double R1 =
      -a1 * c * r * om3 * S * C * C +
      C * (-6 * c3 * d1 * z * om +
           (-2 * kSqrt3 * c3 * d1 * r * om2 + om2 * S * a1 * r * om2 + 2 * c2 * S * r * (a1 - 3 * w) * om2 -
            4 * kSqrt3 * c * d1 * r * om4) *
               Sn) +
      c * (kSqrt3 * c * d1 * r * om3 * std::cos(2 * th) + 6 * c * z * (d1 * om2 + kSqrt3 * c * w * S) * Sn -
           2 * r * om * S * (3 * c2 * w + a1 * om2) * Sn * Sn);
  const double A1 = 3 * b1 * w * w * S * kp * C * Sn;

  const double den2 = 18 * c2 * om3;
  const double R2 = c * r * om2 * (-24 * c * d1 * S + kSqrt3 * (4 * c2 * (a1 - 3 * w) + a1 * om2)) * C +
                    36 * c4 * w * z +
                    r * om * (6 * c * d1 * om2 * S - kSqrt3 * (12 * c4 * w + 4 * a1 * c2 * om2 + a1 * om4)) * Sn;
  const double A2 = 6 * kSqrt3 * c * b1 * w * w * kp * C;

  const double den3 = 3 * c * om5;
  const double R3 =
      12 * c4 * c * z * z + c * (2 * c2 * r * r - 3 * b1 * w) * om4 +
      c2 * r * om *
          (6 * c2 * om * C * (-kSqrt3 * z + r * om * Sn) +
           2 * Sn * (-kSqrt3 * c * z * (4 * c2 + om2) + r * om4 * C + 2 * c3 * r * om * Sn)) -
      b1 * w * kp * C * om * (3 * c * om * C + (4 * c2 + om2) * Sn);
  const double A3 = 4 * kSqrt3 * c2 * b1 * w * z * kp * C;

  return {Vec3(R1 / den1, R2 / den2, R3 / den3), Vec3(A1 / den1, A2 / den2, A3 / den3)};
}

}  // namespace

ReducedField first_order_field_closed(const UnfoldingSpec& spec) {
  spec.validate();
  switch (spec.kase) {
    case Case::I:
      return {[spec](double th, const Vec3& x) { return closed_case_i(spec, th, x); }, Provenance::ClosedForm};
    case Case::II:
      return {[spec](double th, const Vec3& x) { return combine(closed_case_ii(spec, th, x), x[0], "case ii"); },
              Provenance::ClosedForm};
    case Case::III:
      return {[spec](double th, const Vec3& x) { return combine(closed_case_iii(spec, th, x), x[0], "case iii"); },
              Provenance::ClosedForm};
  }
  throw ValidationError("unknown case");
}

// ---------------------------------------------------------------------------

namespace {

Extraction extract_at(const UnfoldingSpec& spec, const Mat4L& fwd, const Mat4L& inv, double theta,
                      const Vec3& x, double eps0, int n, double min_theta_rate) {
  const bool half = spec.kase == Case::III;
  const int order = half ? 2 : 1;  // index of the ε coefficient
  const Real t0 = half ? std::sqrt(Real(eps0)) : Real(eps0);

  using MatL = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  MatL vals(n, 3);
  for (int k = 0; k < n; ++k) {
    const Real t = t0 * std::ldexp(Real(1), -k);
    const PolarRates pr = polar_rates(make_frame(spec, fwd, inv, half ? t * t : t), theta, x);
    if (!(std::abs(pr.thetadot) >= min_theta_rate))
      throw ReparametrizationError("dtheta/dt vanishes at theta = " + std::to_string(theta));
    vals.row(k) << pr.rdot / pr.thetadot, pr.zdot / pr.thetadot, pr.wdot / pr.thetadot;
  }

  // polynomial fit in the normalized variable t / t0 = 2^-k
  auto fit = [&](int first, int count) {
    MatL v(count, count);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j) v(i, j) = std::ldexp(Real(1), -(first + i) * j);
    MatL coef = v.fullPivLu().solve(vals.middleRows(first, count));
    for (int j = 0; j < count; ++j) coef.row(j) /= std::pow(t0, j);
    return coef;
  };
  const MatL hi = fit(0, n);
  const MatL lo = fit(1, n - 1);

  Extraction out;
  out.value = hi.row(order).transpose().cast<double>();
  out.half_power = half ? Vec3(hi.row(1).transpose().cast<double>()) : Vec3::Zero();
  out.drift = hi.row(0).transpose().cast<double>();
  out.residual = static_cast<double>((hi.row(order) - lo.row(order)).cwiseAbs().maxCoeff());
  return out;
}

}  // namespace

Extraction extract_first_order(const UnfoldingSpec& spec, double theta, const Vec3& x,
                               const ExtractionConfig& cfg) {
  if (!(x[0] > 0)) throw ReparametrizationError("theta is undefined on the axis r = 0");
  const bool half = spec.kase == Case::III;
  const int n = cfg.samples > 0 ? cfg.samples : (half ? 8 : 6);
  if (n < (half ? 4 : 3)) throw ValidationError("too few extraction samples");

  const Mat4L fwd = jordan_change(spec).forward.cast<Real>();
  const Mat4L inv = fwd.inverse();
  // When the ε-series converges slowly (small ω against c, small r) the
  // ladder is moved towards 0 until the fit settles.
  constexpr double kSettled = 1e-10;
  Extraction best = extract_at(spec, fwd, inv, theta, x, cfg.eps0, n, cfg.min_theta_rate);
  for (int retry = 1; retry <= cfg.refinements && best.residual > kSettled; ++retry) {
    const Extraction e =
        extract_at(spec, fwd, inv, theta, x, cfg.eps0 * std::pow(0.1, retry), n, cfg.min_theta_rate);
    if (e.residual < best.residual) best = e;
  }
  if (!(best.residual <= cfg.max_residual))
    throw ConvergenceError("first-order extraction did not settle (residual " +
                               std::to_string(best.residual) + ")",
                           best.residual);
  return best;
}

ReducedField first_order_field_numeric(const UnfoldingSpec& spec, const ExtractionConfig& cfg) {
  spec.validate();
  // reducing the angle first keeps θ and θ + 2π bit-identical inside the fit
  return {[spec, cfg](double th, const Vec3& x) {
            return extract_first_order(spec, std::remainder(th, 2 * std::numbers::pi), x, cfg).value;
          },
          Provenance::NumericPipeline};
}

}  // namespace zhopf
