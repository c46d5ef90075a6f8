#include "zhopf/averaging.hpp"

#include "zhopf/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zhopf {

namespace {

using C = std::complex<double>;
const double kSqrt3 = std::numbers::sqrt3;

void sort_spectrum(Complex3& v) {
  std::sort(v.begin(), v.end(), [](const C& x, const C& y) {
    if (x.imag() != y.imag()) return x.imag() > y.imag();
    return x.real() < y.real();
  });
}

Complex3 eigen3(const Mat3& m) {
  Eigen::EigenSolver<Mat3> es(m, false);
  Complex3 out;
  for (int i = 0; i < 3; ++i) out[i] = es.eigenvalues()[i];
  sort_spectrum(out);
  return out;
}

double match3(const Complex3& a, const Complex3& b) {
  std::array<int, 3> p{0, 1, 2};
  double best = INFINITY;
  do {
    double worst = 0;
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(a[p[k]] - b[k]));
    best = std::min(best, worst);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Shorthands shared by the case i formulas.
struct CaseI {
  double c, om, a1, b1, d1, e1, S, eta, eta1;
  explicit CaseI(const UnfoldingSpec& s)
      : c(s.c), om(s.omega), a1(s.a1), b1(s.b1), d1(s.d1), e1(s.e1), S(std::sqrt(s.c * s.c + s.omega * s.omega)) {
    eta = 3 * c * e1 + 2 * kSqrt3 * d1 * S;
    eta1 = 3 * a1 * om * om - 2 * c * eta;
  }
};

struct CaseII {
  double c, d, e, a1, b1, q, q3, L, K, G, E, H;
  explicit CaseII(const UnfoldingSpec& s) : c(s.c), d(s.d), e(s.e), a1(s.a1), b1(s.b1), q(s.omega) {
    const double c2 = c * c, d2 = d * d;
    q3 = q * q * q;
    L = c2 - 3 * d2;
    K = c2 + d2 - c * e;
    G = 2 * c2 - 2 * d2 - c * e;
    E = c2 * c2 - 8 * c2 * d2 + 7 * d2 * d2 + 2 * c * d2 * e;
    H = (c2 - d2) * L * K;
  }
};

struct CaseIII {
  double c, om, e, a1, b1, kappa;
  explicit CaseIII(const UnfoldingSpec& s) : c(s.c), om(s.omega), e(s.e), a1(s.a1), b1(s.b1) {
    kappa = b1 * (4 * c * c - 3 * c * e + 3 * om * om);
  }
};

Vec3 eval_i(const CaseI& k, const Vec3& x) {
  const double r = x[0], Z = x[1], W = x[2];
  const double c = k.c, c2 = c * c, om = k.om, om2 = om * om, om3 = om2 * om;
  const double A = 6 * c2 * (k.e1 - W) - 3 * k.a1 * om2 + 4 * kSqrt3 * c * k.d1 * k.S;
  const double B = 3 * c * (k.e1 - W) + 2 * kSqrt3 * k.d1 * k.S;
  return {r * A / (6 * om3), -2 * c * Z * B / (3 * om3),
          (12 * c2 * c2 * Z * Z + 2 * c2 * r * r * om2 - 3 * k.b1 * W * om2 * om2) / (3 * om3 * om2)};
}

Mat3 jac_i(const CaseI& k, const Vec3& x) {
  const double r = x[0], Z = x[1], W = x[2];
  const double c = k.c, c2 = c * c, om = k.om, om2 = om * om, om3 = om2 * om, om5 = om3 * om2;
  const double A = 6 * c2 * (k.e1 - W) - 3 * k.a1 * om2 + 4 * kSqrt3 * c * k.d1 * k.S;
  const double B = 3 * c * (k.e1 - W) + 2 * kSqrt3 * k.d1 * k.S;
  Mat3 j;
  j << A / (6 * om3), 0, -c2 * r / om3,
      0, -2 * c * B / (3 * om3), 2 * c2 * Z / om3,
      4 * c2 * r * om2 / (3 * om5), 8 * c2 * c2 * Z / om5, -k.b1 / om;
  return j;
}

Vec3 eval_ii(const CaseII& k, const Vec3& x) {
  const double r = x[0], z = x[1], w = x[2];
  const double c2 = k.c * k.c, d2 = k.d * k.d;
  const double den2 = 3 * k.q * c2 * k.L * k.L;
  const double n2 = -2 * c2 * d2 * k.L * r * r + 12 * c2 * c2 * c2 * w * w - 3 * k.b1 * c2 * k.L * k.G * z +
                    1.5 * k.a1 * k.b1 * k.H;
  return {r * (k.a1 * k.L - 2 * c2 * z) / (2 * k.q3), n2 / den2, 2 * c2 * w * z / k.q3};
}

Mat3 jac_ii(const CaseII& k, const Vec3& x) {
  const double r = x[0], z = x[1], w = x[2];
  const double c2 = k.c * k.c, d2 = k.d * k.d;
  const double den2 = 3 * k.q * c2 * k.L * k.L;
  Mat3 j;
  j << (k.a1 * k.L - 2 * c2 * z) / (2 * k.q3), -c2 * r / k.q3, 0,
      -4 * c2 * d2 * k.L * r / den2, -3 * k.b1 * c2 * k.L * k.G / den2, 24 * c2 * c2 * c2 * w / den2,
      0, 2 * c2 * w / k.q3, 2 * c2 * z / k.q3;
  return j;
}

Vec3 eval_iii(const CaseIII& k, const Vec3& x) {
  const double r = x[0], z = x[1], w = x[2];
  const double c = k.c, c2 = c * c, c4 = c2 * c2, om = k.om, om2 = om * om, om3 = om2 * om, om4 = om2 * om2;
  const double f3 = 24 * c4 * z * z + c * (4 * c2 * c * r * r - 12 * k.b1 * c * w + 9 * k.b1 * k.e * w) * om2 +
                    (4 * c2 * r * r - 9 * k.b1 * w) * om4;
  return {-r * (2 * c2 * w + k.a1 * om2) / (2 * om3), 2 * c2 * w * z / om3, f3 / (6 * om4 * om)};
}

Mat3 jac_iii(const CaseIII& k, const Vec3& x) {
  const double r = x[0], z = x[1], w = x[2];
  const double c = k.c, c2 = c * c, c4 = c2 * c2, om = k.om, om2 = om * om, om3 = om2 * om, om4 = om2 * om2,
               om5 = om4 * om;
  Mat3 j;
  j << -(2 * c2 * w + k.a1 * om2) / (2 * om3), 0, -c2 * r / om3,
      0, 2 * c2 * w / om3, 2 * c2 * z / om3,
      (8 * c4 * r * om2 + 8 * c2 * r * om4) / (6 * om5), 8 * c4 * z / om5,
      (c * k.b1 * (9 * k.e - 12 * c) * om2 - 9 * k.b1 * om4) / (6 * om5);
  return j;
}

double inf_norm(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }

struct Seed {
  std::string label;
  Vec3 x;
  bool trivial = false;
  int multiplicity = 1;
};

std::vector<Seed> seeds(const UnfoldingSpec& s) {
  std::vector<Seed> out;
  switch (s.kase) {
    case Case::I: {
      const CaseI k(s);
      const double c = k.c, c2 = c * c, om2 = k.om * k.om;
      out.push_back({"s0", Vec3::Zero(), true});
      const double z2 = k.b1 * om2 * om2 * k.eta / (12 * c2 * c2 * c);
      if (z2 > 0) {
        const double W = k.e1 + 2 * k.d1 * k.S / (kSqrt3 * c);
        out.push_back({"s1", Vec3(0, -std::sqrt(z2), W)});
        out.push_back({"s2", Vec3(0, std::sqrt(z2), W)});
      }
      const double r2 = -k.b1 * om2 * k.eta1 / (4 * c2 * c2);
      if (r2 > 0) {
        const double W = k.e1 + (-3 * k.a1 * om2 + 4 * kSqrt3 * c * k.d1 * k.S) / (6 * c2);
        out.push_back({"s3/s4", Vec3(std::sqrt(r2), 0, W), false, 2});
      }
      break;
    }
    case Case::II: {
      const CaseII k(s);
      const double c2 = k.c * k.c, d2 = k.d * k.d;
      if (k.G != 0) out.push_back({"s1", Vec3(0, k.a1 * (c2 - d2) * k.K / (2 * c2 * k.G), 0)});
      const double r2 = 3 * k.a1 * (-k.b1 * k.E) / (4 * c2 * d2);
      if (r2 > 0) out.push_back({"s2/s3", Vec3(std::sqrt(r2), k.a1 * k.L / (2 * c2), 0), false, 2});
      const double w2 = k.a1 * (-k.b1 * k.H) / (8 * c2 * c2 * c2);
      if (w2 > 0) {
        out.push_back({"s4", Vec3(0, 0, std::sqrt(w2))});
        out.push_back({"s5", Vec3(0, 0, -std::sqrt(w2))});
      }
      break;
    }
    case Case::III: {
      const CaseIII k(s);
      const double c2 = k.c * k.c, om2 = k.om * k.om;
      out.push_back({"s0", Vec3::Zero(), true});
      const double r2 = -3 * k.a1 * om2 * k.kappa / (8 * c2 * c2 * (c2 + om2));
      if (r2 > 0) out.push_back({"s1/s2", Vec3(std::sqrt(r2), 0, -k.a1 * om2 / (2 * c2)), false, 2});
      break;
    }
  }
  return out;
}

Vec3 polish(const AveragedMap& f, Vec3 x, const std::string& label) {
  Vec3 fx = f(x);
  double res = inf_norm(fx);
  for (int it = 0; it < 20 && res > 1e-12; ++it) {
    const Vec3 dx = f.jacobian(x).completeOrthogonalDecomposition().solve(-fx);
    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h, step *= 0.5) {
      const Vec3 y = x + step * dx;
      const Vec3 fy = f(y);
      if (inf_norm(fy) < res) {
        x = y;
        fx = fy;
        res = inf_norm(fy);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(res <= 1e-10))
    throw ConvergenceError("closed-form zero " + label + " does not polish; a formula is inconsistent", res);
  return x;
}

}  // namespace

Vec3 average_quadrature(const ReducedField& field, const Vec3& x, int n) {
  if (n < 8) throw ValidationError("quadrature needs at least 8 panels");
  Vec3 sum = Vec3::Zero();
  const double h = 2 * std::numbers::pi / n;
  for (int k = 0; k < n; ++k) sum += field(k * h, x);
  return sum / n;
}

AveragedMap averaged_map_closed(const UnfoldingSpec& spec) {
  spec.validate();
  switch (spec.kase) {
    case Case::I: {
      const CaseI k(spec);
      return {spec.kase, spec, [k](const Vec3& x) { return eval_i(k, x); },
              [k](const Vec3& x) { return jac_i(k, x); }};
    }
    case Case::II: {
      const CaseII k(spec);
      return {spec.kase, spec, [k](const Vec3& x) { return eval_ii(k, x); },
              [k](const Vec3& x) { return jac_ii(k, x); }};
    }
    case Case::III: {
      const CaseIII k(spec);
      return {spec.kase, spec, [k](const Vec3& x) { return eval_iii(k, x); },
              [k](const Vec3& x) { return jac_iii(k, x); }};
    }
  }
  throw ValidationError("unknown case");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Nonhyperbolic: return "nonhyperbolic";
  }
  return "?";
}

Complex3 cubic_roots(const MonicCubic& p) {
  Mat3 comp;
  comp << -p.p2, -p.p1, -p.p0, 1, 0, 0, 0, 1, 0;
  return eigen3(comp);
}

ReferenceForms reference_forms(const UnfoldingSpec& s, const std::string& label) {
  ReferenceForms out;
  switch (s.kase) {
    case Case::I: {
      const CaseI k(s);
      const double om = k.om, om2 = om * om, om3 = om2 * om, om4 = om2 * om2, om5 = om4 * om;
      const double a1 = k.a1, b1 = k.b1, c = k.c, eta = k.eta;
      if (label == "s1" || label == "s2") {
        const double det = 2 * a1 * b1 * c * eta / (3 * om5);
        out.det = det;
        out.cubic = MonicCubic{(a1 + 2 * b1) / (2 * om), -b1 * (-3 * a1 * om2 + 8 * c * eta) / (6 * om4), -det};
        const C root = kSqrt3 * om * std::sqrt(C(b1 * (16 * c * eta + 3 * b1 * om2)));
        out.eigenvalues =
            Complex3{C(-a1 / (2 * om)), -(3 * b1 * om2 + root) / (6 * om3), -(3 * b1 * om2 - root) / (6 * om3)};
      } else if (label == "s3/s4") {
        const double det = a1 * b1 * k.eta1 / (3 * om5);
        out.det = det;
        out.cubic = MonicCubic{(a1 + b1) / om, 2 * b1 * c * eta / (3 * om4), -det};
        const C root = kSqrt3 * std::sqrt(C(b1 * om2 * (3 * (4 * a1 + b1) * om2 - 8 * c * eta)));
        out.eigenvalues =
            Complex3{C(-a1 / om), -(3 * b1 * om2 + root) / (6 * om3), -(3 * b1 * om2 - root) / (6 * om3)};
      }
      break;
    }
    case Case::II: {
      const CaseII k(s);
      const double c = k.c, d = k.d, e = k.e, c2 = c * c, c3 = c2 * c, c4 = c2 * c2, d2 = d * d, d4 = d2 * d2;
      const double a1 = k.a1, b1 = k.b1, q = k.q, q3 = k.q3, L = k.L, K = k.K, G = k.G, E = k.E;
      const double Gp = -G;  // 2d² + c(-2c + e)
      const double L3 = L * L * L;
      if (label == "s1") {
        const double P = 3 * c4 - 8 * c2 * d2 + 5 * d4 - 2 * c3 * e + 4 * c * d2 * e;
        const double t1 = (-a1 * P - 2 * b1 * Gp * Gp) / (2 * q3 * G);
        const double t2 = a1 * (a1 * (c2 - d2) * K * E + b1 * P * Gp * Gp) / (2 * L3 * Gp * Gp);
        const double t3 = a1 * a1 * b1 * (c2 - d2) * K * E / (2 * std::pow(q, 9) * G);
        out.det = t3;
        out.cubic = MonicCubic{t1, -t2, -t3};
        out.eigenvalues = Complex3{C(-b1 * Gp / q3), C(a1 * E / (2 * q3 * G)),
                                   C(a1 * (-c4 + d4 + c3 * e - c * d2 * e) / (q3 * Gp))};
      } else if (label == "s2/s3") {
        const double u1 = (a1 * L + b1 * G) / q3;
        const double u2 = a1 * b1 * (c2 - d2) * K / L3;
        const double u3 = a1 * a1 * b1 * E / std::pow(q, 7);
        out.det = u3;
        out.cubic = MonicCubic{-u1, -u2, -u3};
        const C root = C(0, 1) * std::sqrt(C(b1 * (-4 * a1 * E - b1 * Gp * Gp)));
        out.eigenvalues = Complex3{C(-a1 / q), -(b1 * Gp + root) / (2 * q3), -(b1 * Gp - root) / (2 * q3)};
      } else if (label == "s4" || label == "s5") {
        const double g1 = (a1 * c2 + 4 * b1 * c2 - 3 * a1 * d2 - 4 * b1 * d2 - 2 * b1 * c * e) / (2 * q3);
        const double g2 = a1 * b1 * (2 * c4 + 8 * c2 * d2 - 10 * d4 - 3 * c3 * e + c * d2 * e) / (2 * L3);
        const double g3 = a1 * a1 * b1 * (c2 - d2) * K / std::pow(q, 7);
        out.det = g3;
        out.cubic = MonicCubic{-g1, g2, -g3};
        const C root =
            C(0, 1) * std::sqrt(C(b1 * (8 * a1 * (-c4 + d4 + c3 * e - c * d2 * e) - b1 * Gp * Gp)));
        out.eigenvalues = Complex3{C(-a1 / (2 * q)), -(b1 * Gp + root) / (2 * q3), -(b1 * Gp - root) / (2 * q3)};
      }
      break;
    }
    case Case::III: {
      const CaseIII k(s);
      if (label == "s1/s2") {
        const double c = k.c, om = k.om, om2 = om * om, om3 = om2 * om, om5 = om3 * om2;
        const double det = k.a1 * k.a1 * k.kappa / (2 * om5);
        out.det = det;
        // no λ term in the reference cubic
        out.cubic = MonicCubic{(k.b1 * c * (4 * c - 3 * k.e) + (2 * k.a1 + 3 * k.b1) * om2) / (2 * om3), 0.0, -det};
        const C root = std::sqrt(C(k.kappa * (k.kappa + 8 * k.a1 * om2)));
        out.eigenvalues =
            Complex3{C(-k.a1 / om), -(k.kappa + root) / (4 * om3), -(k.kappa - root) / (4 * om3)};
      }
      break;
    }
  }
  return out;
}

StabilityEntry stability_analysis(const UnfoldingSpec& spec, const AveragedMap& f, const Vec3& x,
                                  const std::string& label) {
  StabilityEntry out;
  const Mat3 j = f.jacobian(x);
  out.det = j.determinant();
  out.cubic = MonicCubic{-j.trace(),
                         j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0) + j(0, 0) * j(2, 2) - j(0, 2) * j(2, 0) +
                             j(1, 1) * j(2, 2) - j(1, 2) * j(2, 1),
                         -out.det};
  out.eigenvalues = eigen3(j);
  out.cubic_root_residual = match3(out.eigenvalues, cubic_roots(out.cubic));

  const double norm = std::max(1.0, j.cwiseAbs().rowwise().sum().maxCoeff());
  out.theorem_applicable = std::abs(out.det) > 1e-12 * norm * norm * norm;
  if (!out.theorem_applicable) {
    out.verdict = Verdict::Nonhyperbolic;
  } else {
    const double hi = std::max({out.eigenvalues[0].real(), out.eigenvalues[1].real(), out.eigenvalues[2].real()});
    out.verdict = hi < -1e-10 ? Verdict::Stable : hi > 1e-10 ? Verdict::Unstable : Verdict::Nonhyperbolic;
  }

  if (!label.empty()) {
    out.reference = reference_forms(spec, label);
    if (out.reference.det)
      out.det_reference_error = std::abs(*out.reference.det - out.det) / std::max(std::abs(out.det), 1e-300);
    if (out.reference.cubic) {
      const MonicCubic& r = *out.reference.cubic;
      out.cubic_reference_error = std::max(
          {std::abs(r.p2 - out.cubic.p2), std::abs(r.p1 - out.cubic.p1), std::abs(r.p0 - out.cubic.p0)});
    }
    if (out.reference.eigenvalues) out.eigen_reference_error = match3(out.eigenvalues, *out.reference.eigenvalues);
  }
  return out;
}

StabilityEntry stability_analysis(const UnfoldingSpec& spec, const AveragedZero& zero) {
  if (!(zero.residual <= 1e-10)) throw ValidationError("stability analysis needs a zero with residual <= 1e-10");
  return stability_analysis(spec, averaged_map_closed(spec), zero.location, zero.label);
}

std::vector<AveragedZero> averaged_zeros(const UnfoldingSpec& spec) {
  const AveragedMap f = averaged_map_closed(spec);
  std::vector<AveragedZero> out;
  for (const Seed& sd : seeds(spec)) {
    Vec3 x = polish(f, sd.x, sd.label);
    if (x[0] < 0) x[0] = -x[0];  // θ -> θ + π
    const bool dup = std::any_of(out.begin(), out.end(), [&](const AveragedZero& z) {
      return (z.location - x).cwiseAbs().maxCoeff() <= 1e-9 * (1 + x.cwiseAbs().maxCoeff());
    });
    if (dup) continue;
    AveragedZero z;
    z.label = sd.label;
    z.location = x;
    z.residual = inf_norm(f(x));
    z.axis = std::abs(x[0]) <= 1e-12;
    z.trivial = sd.trivial;
    z.multiplicity = sd.multiplicity;
    z.stability = stability_analysis(spec, f, x, sd.label);
    out.push_back(std::move(z));
  }
  return out;
}

int nontrivial_count(const std::vector<AveragedZero>& zeros) {
  int n = 0;
  for (const AveragedZero& z : zeros)
    if (!z.trivial) n += z.multiplicity;
  return n;
}

std::vector<std::pair<std::string, double>> discriminants(const UnfoldingSpec& spec) {
  spec.validate();
  switch (spec.kase) {
    case Case::I: {
      const CaseI k(spec);
      const double om2 = k.om * k.om;
      return {{"eta", k.eta},
              {"eta1", k.eta1},
              {"16c*eta+3b1*omega^2", 16 * k.c * k.eta + 3 * k.b1 * om2},
              {"4eta1+3b1*omega^2", 4 * k.eta1 + 3 * k.b1 * om2}};
    }
    case Case::II: {
      const CaseII k(spec);
      return {{"E", k.E}, {"H", k.H}, {"G", k.G}};
    }
    case Case::III: return {{"kappa", CaseIII(spec).kappa}};
  }
  return {};
}

}  // namespace zhopf
