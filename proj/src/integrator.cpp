#include "zhopf/integrator.hpp"

#include "zhopf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zhopf {

namespace {

// Butcher tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// 5th minus 4th order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double err_norm(const VecX& err, const VecX& y0, const VecX& y1, const IntegratorConfig& cfg) {
  double s = 0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    s += (err[i] / sc) * (err[i] / sc);
  }
  return std::sqrt(s / err.size());
}

double initial_step(const OdeRhs& f, double t0, const VecX& y0, const VecX& k1, const IntegratorConfig& cfg,
                    double span) {
  VecX sc = (cfg.atol + cfg.rtol * y0.array().abs()).matrix();
  const double dn0 = std::sqrt((y0.array() / sc.array()).square().mean());
  const double dn1 = std::sqrt((k1.array() / sc.array()).square().mean());
  double h = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
  h = std::min(h, span);
  VecX y1 = y0 + h * k1, k2(y0.size());
  f(t0 + h, y1, k2);
  const double dn2 = std::sqrt(((k2 - k1).array() / sc.array()).square().mean()) / h;
  const double m = std::max(dn1, dn2);
  const double h1 = m <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / m, 1.0 / 5);
  return std::min({100 * h, h1, span});
}

bool all_finite(const VecX& v) { return v.allFinite(); }

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0) || !(atol > 0)) throw ValidationError("integrator tolerances must be positive");
  if (max_steps <= 0) throw ValidationError("max_steps must be positive");
}

VecX Trajectory::at(double time) const {
  if (dense_data.empty() && t.size() > 1) throw ValidationError("trajectory has no dense output");
  if (time < t.front() || time > t.back()) throw ValidationError("time outside the integrated span");
  if (t.size() == 1) return y.front();
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - t.begin(), 1) - 1, t.size() - 2);
  const double h = t[i + 1] - t[i];
  const double th = (time - t[i]) / h, th1 = 1 - th;
  const auto& r = dense_data[i];
  return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
}

std::vector<std::pair<double, VecX>> Trajectory::sample(double dt) const {
  if (!(dt > 0)) throw ValidationError("sample spacing must be positive");
  std::vector<std::pair<double, VecX>> out;
  const double t0 = t.front(), span = t.back() - t0;
  const long n = static_cast<long>(std::floor(span / dt * (1 + 1e-12)));
  for (long k = 0; k <= n; ++k) {
    const double tk = std::min(t0 + k * dt, t.back());
    out.emplace_back(tk, at(tk));
  }
  return out;
}

Trajectory dopri5(const OdeRhs& f, double t0, const VecX& y0, double t_end, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(t0) || !std::isfinite(t_end) || t_end < t0)
    throw ValidationError("integration needs finite t0 <= t_end");
  if (!all_finite(y0)) throw BlowUpError("nonfinite initial state", t0);

  Trajectory tr;
  tr.t.push_back(t0);
  tr.y.push_back(y0);
  if (t_end == t0) return tr;

  const Eigen::Index n = y0.size();
  VecX k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), y1(n);
  double t = t0;
  VecX y = y0;
  f(t, y, k1);
  double h = cfg.h0 > 0 ? std::min(cfg.h0, t_end - t0) : initial_step(f, t0, y0, k1, cfg, t_end - t0);
  bool last_rejected = false;

  for (long step = 0;; ++step) {
    if (step >= cfg.max_steps)
      throw ConvergenceError("step budget exhausted at t = " + std::to_string(t), t);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw BlowUpError("step size collapsed at t = " + std::to_string(t) + " (finite-time blow-up?)", t);
    const bool final_step = t + h >= t_end;
    if (final_step) h = t_end - t;

    ys = y + h * a21 * k1;
    f(t + c2 * h, ys, k2);
    ys = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ys, k3);
    ys = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ys, k4);
    ys = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ys, k5);
    ys = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ys, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y1, k7);

    const VecX errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = err_norm(errv, y, y1, cfg);
    if (!std::isfinite(err)) {
      if (!all_finite(y1) && h < 1e-10 * std::max(1.0, std::abs(t))) throw BlowUpError("state left the doubles", t);
      h *= 0.1;
      ++tr.rejected;
      continue;
    }

    if (err <= 1.0) {
      if (!all_finite(y1)) throw BlowUpError("state left the doubles", t + h);
      if (cfg.dense) {
        std::array<VecX, 5> r;
        r[0] = y;
        r[1] = y1 - y;
        r[2] = h * k1 - r[1];
        r[3] = r[1] - h * k7 - r[2];
        r[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        tr.dense_data.push_back(std::move(r));
      }
      t = final_step ? t_end : t + h;
      y = y1;
      k1 = k7;  // first-same-as-last
      tr.t.push_back(t);
      tr.y.push_back(y);
      if (final_step) return tr;
      double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h *= fac;
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      ++tr.rejected;
      last_rejected = true;
    }
  }
}

}  // namespace zhopf
