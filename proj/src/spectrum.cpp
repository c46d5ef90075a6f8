#include "zhopf/spectrum.hpp"

#include "zhopf/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace zhopf {

std::string_view to_string(Case c) {
  switch (c) {
    case Case::I: return "i";
    case Case::II: return "ii";
    case Case::III: return "iii";
  }
  return "?";
}

Case parse_case(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "i" || s == "1") return Case::I;
  if (s == "ii" || s == "2") return Case::II;
  if (s == "iii" || s == "3") return Case::III;
  throw ValidationError("unknown case '" + std::string(text) + "' (expected i, ii or iii)");
}

Complex QuarticCoeffs::operator()(Complex l) const {
  return (((l + A) * l + B) * l + C) * l + D;
}

QuarticCoeffs char_poly_origin(const SystemParams& p) {
  const double a = p.a, b = p.b, c = p.c, d = p.d, e = p.e;
  QuarticCoeffs q;
  q.A = a + b + 2 * c;
  q.B = 2 * b * c + c * c + d * d + a * (b + 2 * c - e);
  q.C = b * (c * c + d * d) + a * (2 * b * c + c * c + d * d - (b + c) * e);
  q.D = a * b * (c * c + d * d - c * e);
  return q;
}

QuarticCoeffs char_poly_of(const Mat4& m) {
  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k) / k
  double coef[5] = {1.0, 0, 0, 0, 0};
  Mat4 mk = Mat4::Zero();
  for (int k = 1; k <= 4; ++k) {
    mk = m * mk + coef[k - 1] * Mat4::Identity();
    coef[k] = -(m * mk).trace() / k;
  }
  return {coef[1], coef[2], coef[3], coef[4], true};
}

QuarticCoeffs char_poly(const SystemParams& p, const State4& at) {
  QuarticCoeffs q = at.isZero() ? char_poly_origin(p) : char_poly_of(jacobian(p, at));
  q.at_equilibrium = scaled_residual(p, at) <= 1e-9;
  return q;
}

Spectrum4 eigenvalues(const Mat4& m) {
  Eigen::EigenSolver<Mat4> es(m, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge", NAN);
  Spectrum4 out;
  for (int i = 0; i < 4; ++i) out[i] = es.eigenvalues()[i];
  std::sort(out.begin(), out.end(), [](Complex x, Complex y) {
    if (x.imag() != y.imag()) return x.imag() > y.imag();
    return x.real() < y.real();
  });
  return out;
}

SpectrumMatch match_spectrum(const Spectrum4& eigs, const Spectrum4& targets) {
  std::array<int, 4> perm{0, 1, 2, 3};
  SpectrumMatch best{std::numeric_limits<double>::infinity(), perm};
  do {
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(eigs[perm[k]] - targets[k]));
    if (worst < best.residual) best = {worst, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::optional<ZeroHopfCertificate> is_zero_hopf(const SystemParams& p, const State4& at,
                                                double tol) {
  const Spectrum4 ev = eigenvalues(jacobian(p, at));
  // the candidate rotation pair is the one farthest from the real axis
  auto by_imag = ev;
  std::sort(by_imag.begin(), by_imag.end(),
            [](Complex x, Complex y) { return std::abs(x.imag()) > std::abs(y.imag()); });
  const double omega = 0.5 * (std::abs(by_imag[0].imag()) + std::abs(by_imag[1].imag()));
  if (!(omega > tol)) return std::nullopt;

  const Spectrum4 targets{Complex(0, omega), Complex(0, -omega), 0.0, 0.0};
  const SpectrumMatch m = match_spectrum(ev, targets);
  if (m.residual > tol) return std::nullopt;

  ZeroHopfCertificate cert{omega, {}, m.residual};
  for (int k = 0; k < 4; ++k) cert.eigenvalues[k] = ev[m.perm[k]];
  return cert;
}

namespace {

void require_c(double c) {
  if (!std::isfinite(c)) throw ValidationError("c must be finite");
  if (c == 0.0) throw ValidationError("c must be nonzero");
}

double require_omega(const std::optional<double>& omega) {
  if (!omega) throw ValidationError("omega is required for this case");
  if (!std::isfinite(*omega) || *omega <= 0.0) throw ValidationError("omega must be positive");
  return *omega;
}

}  // namespace

SystemParams zero_hopf_params(const ZeroHopfRequest& req) {
  require_c(req.c);
  const double c = req.c;
  SystemParams p;
  p.a = -2 * c;
  p.c = c;
  p.b = 0.0;
  switch (req.kase) {
    case Case::I: {
      const double w = require_omega(req.omega);
      p.d = -std::sqrt(c * c + w * w) / std::sqrt(3.0);
      p.e = (4 * c * c + w * w) / (3 * c);
      break;
    }
    case Case::II: {
      if (req.d) {
        p.d = *req.d;
        const double w2 = 3 * p.d * p.d - c * c;
        if (!(w2 > 0.0)) throw ValidationError("case ii requires 3 d^2 - c^2 > 0");
        if (req.omega) {
          const double w = require_omega(req.omega);
          if (std::abs(std::sqrt(w2) - w) > 1e-12 * std::max(1.0, w))
            throw ValidationError("omega disagrees with sqrt(3 d^2 - c^2)");
        }
      } else {
        const double w = require_omega(req.omega);
        p.d = -std::sqrt(c * c + w * w) / std::sqrt(3.0);
      }
      p.e = req.e.value_or(0.0);
      break;
    }
    case Case::III: {
      const double w = require_omega(req.omega);
      p.d = -std::sqrt(c * c + w * w) / std::sqrt(3.0);
      p.e = req.e.value_or(0.0);
      break;
    }
  }
  return p;
}

double zero_hopf_omega(const SystemParams& p) {
  const double w2 = 3 * p.d * p.d - p.c * p.c;
  if (!(w2 > 0.0)) throw DegenerateError("3 d^2 - c^2 must be positive");
  return std::sqrt(w2);
}

State4 zero_hopf_point(Case kase, const SystemParams& p) {
  if (kase == Case::I) return State4::Zero();
  return State4(0, 0, 0, delta(p));
}

}  // namespace zhopf
