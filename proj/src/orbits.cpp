#include "zhopf/orbits.hpp"

#include "zhopf/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

namespace zhopf {

namespace {

const double kTwoPi = 2 * std::numbers::pi;

OdeRhs model_rhs(const SystemParams& p) {
  return [p](double, const VecX& y, VecX& dy) { dy = vector_field(p, State4(y)); };
}

OdeRhs variational_rhs(const SystemParams& p) {
  return [p](double, const VecX& y, VecX& dy) {
    const State4 s = y.head<4>();
    dy.head<4>() = vector_field(p, s);
    const Mat4 j = jacobian(p, s);
    Eigen::Map<const Mat4> phi(y.data() + 4);
    Eigen::Map<Mat4> dphi(dy.data() + 4);
    dphi = j * phi;
  };
}

double closure_scale(const State4& s) { return 1.0 + s.norm(); }

// θ along the orbit is increasing; find where it passes 0 and read off (r, z, w) there.
Vec3 section_point(const UnfoldingSpec& spec, double eps, const SystemParams& p, const State4& s0, double period,
                   const IntegratorConfig& base) {
  IntegratorConfig cfg = base;
  cfg.dense = true;
  const Trajectory tr = integrate(p, s0, period, cfg);
  auto theta = [&](double t) { return to_reduced(spec, eps, State4(tr.at(t))).theta; };
  const int n = 512;
  double t_prev = 0, th_prev = theta(0);
  for (int k = 1; k <= n; ++k) {
    const double t = period * k / n, th = theta(t);
    if (th_prev < 0 && th >= 0 && th - th_prev < std::numbers::pi) {
      double lo = t_prev, hi = t;
      for (int it = 0; it < 80 && hi - lo > 1e-15 * period; ++it) {
        const double mid = 0.5 * (lo + hi);
        (theta(mid) < 0 ? lo : hi) = mid;
      }
      return to_reduced(spec, eps, State4(tr.at(0.5 * (lo + hi)))).x;
    }
    t_prev = t;
    th_prev = th;
  }
  return to_reduced(spec, eps, s0).x;
}

}  // namespace

Trajectory integrate(const SystemParams& p, const State4& s0, double t_end, const IntegratorConfig& cfg) {
  return dopri5(model_rhs(p), 0.0, VecX(s0), t_end, cfg);
}

VariationalResult variational_flow(const SystemParams& p, const State4& s0, double t_end,
                                   const IntegratorConfig& cfg) {
  VecX y0(20);
  y0.head<4>() = s0;
  Eigen::Map<Mat4>(y0.data() + 4) = Mat4::Identity();
  IntegratorConfig c = cfg;
  c.dense = false;
  const Trajectory tr = dopri5(variational_rhs(p), 0.0, y0, t_end, c);
  const VecX& y = tr.end();
  return {y.head<4>(), Eigen::Map<const Mat4>(y.data() + 4)};
}

std::array<Complex, 3> PeriodicOrbit::nontrivial() const {
  std::array<Complex, 3> out;
  int j = 0;
  for (int k = 0; k < 4; ++k)
    if (k != trivial_index) out[j++] = floquet[k];
  return out;
}

PeriodicOrbit find_periodic_orbit(const UnfoldingSpec& spec, double eps, const Vec3& seed, const ShootingConfig& cfg) {
  spec.validate();
  if (!(eps > 0 && eps <= 0.05)) throw ValidationError("eps must lie in (0, 0.05]");
  cfg.integrator.validate();
  const SystemParams p = perturb(spec, eps);

  const State4 guess = to_model_state(spec, eps, 0.0, seed);
  // axis seeds can be the equilibria born with the unfolding rather than orbits
  for (const Equilibrium& e : equilibria(p).points)
    if ((e.point - guess).norm() <= 10 * eps * eps * (1 + seed.norm()))
      throw DegenerateError("seed is an equilibrium (" + std::string(to_string(e.kind)) +
                            ") of the perturbed system up to O(eps^2); no periodic orbit");
  State4 n = vector_field(p, guess);
  if (!(n.norm() > 0)) throw DegenerateError("the seed maps onto an equilibrium; no phase condition");
  n.normalize();

  State4 s = guess;
  double T = kTwoPi / spec.omega;
  double best = INFINITY;
  int it = 0;
  auto residual = [&](const VariationalResult& v, const State4& x) { return (v.end - x).norm(); };

  VariationalResult v = variational_flow(p, s, T, cfg.integrator);
  double res = residual(v, s);
  best = res;
  for (; it < cfg.max_iterations; ++it) {
    if (res <= 1e-4 * cfg.closure_tol * closure_scale(s)) break;
    Eigen::Matrix<double, 5, 5> J;
    J.topLeftCorner<4, 4>() = v.phi - Mat4::Identity();
    J.topRightCorner<4, 1>() = vector_field(p, v.end);
    J.bottomLeftCorner<1, 4>() = n.transpose();
    J(4, 4) = 0;
    Eigen::Matrix<double, 5, 1> g;
    g.head<4>() = v.end - s;
    g[4] = n.dot(s - guess);
    const Eigen::Matrix<double, 5, 1> dx = J.fullPivLu().solve(-g);
    if (!dx.allFinite()) break;

    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 8; ++h, step *= 0.5) {
      const State4 s1 = s + step * dx.head<4>();
      const double T1 = T + step * dx[4];
      if (!(T1 > 0)) continue;
      const VariationalResult v1 = variational_flow(p, s1, T1, cfg.integrator);
      const double r1 = residual(v1, s1);
      if (r1 < res || h == 7) {
        improved = r1 < res;
        s = s1;
        T = T1;
        v = v1;
        res = r1;
        break;
      }
    }
    best = std::min(best, res);
    if (!improved && dx.head<4>().norm() <= 1e-13 * closure_scale(s)) break;
  }
  if (!(res <= cfg.closure_tol * closure_scale(s)))
    throw ConvergenceError("shooting did not close the orbit", best);

  PeriodicOrbit orb;
  orb.eps = eps;
  orb.initial_state = s;
  orb.period = T;
  orb.closure_residual = res;
  orb.iterations = it;
  orb.floquet = eigenvalues(v.phi);
  double dist = INFINITY;
  for (int k = 0; k < 4; ++k)
    if (std::abs(orb.floquet[k] - 1.0) < dist) {
      dist = std::abs(orb.floquet[k] - 1.0);
      orb.trivial_index = k;
    }
  orb.section_point = section_point(spec, eps, p, s, T, cfg.integrator);
  return orb;
}

ConvergenceReport epsilon_sweep(const UnfoldingSpec& spec, const AveragedZero& seed, const std::vector<double>& eps_list,
                                const ShootingConfig& cfg) {
  if (eps_list.size() < 3) throw ValidationError("the sweep needs at least three eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ValidationError("eps values must be strictly decreasing");

  ConvergenceReport rep;
  rep.seed = seed.location;
  rep.label = seed.label;
  rep.theorem_applicable = seed.stability.theorem_applicable;
  for (int k = 0; k < 3; ++k) rep.averaged_real_parts[k] = seed.stability.eigenvalues[k].real();
  std::sort(rep.averaged_real_parts.begin(), rep.averaged_real_parts.end());

  std::vector<std::future<SweepEntry>> jobs;
  for (double eps : eps_list)
    jobs.push_back(std::async(std::launch::async, [&, eps] {
      SweepEntry e;
      e.eps = eps;
      try {
        e.orbit = find_periodic_orbit(spec, eps, seed.location, cfg);
      } catch (const Error& ex) {
        e.error = ex.what();
      }
      return e;
    }));

  double pconst = 0;
  bool any_orbit = false;
  for (auto& job : jobs) {
    SweepEntry e = job.get();
    if (e.orbit) {
      const PeriodicOrbit& o = *e.orbit;
      any_orbit = true;
      e.distance = (o.section_point - seed.location).norm();
      e.period_error = std::abs(o.period * spec.omega / kTwoPi - 1);
      pconst = std::max(pconst, e.period_error / e.eps);
      const auto mu = o.nontrivial();
      for (int k = 0; k < 3; ++k) e.floquet_rates[k] = std::log(std::abs(mu[k])) / (kTwoPi * e.eps);
      std::sort(e.floquet_rates.begin(), e.floquet_rates.end());
      e.stability_agrees = true;
      for (int k = 0; k < 3; ++k) {
        const double re = rep.averaged_real_parts[k];
        if (std::abs(re) > 1e-10 && (re > 0) != (e.floquet_rates[k] > 0)) e.stability_agrees = false;
      }
    }
    rep.entries.push_back(std::move(e));
  }
  rep.period_constant = any_orbit ? pconst : NAN;

  std::vector<double> lx, ly;
  for (const SweepEntry& e : rep.entries)
    if (e.orbit && e.distance > 0) {
      lx.push_back(std::log(e.eps));
      ly.push_back(std::log(e.distance));
    }
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / n;
      my += ly[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - (my + slope * (lx[i] - mx));
      ss += r * r;
    }
    rep.order = slope;
    rep.order_residual = std::sqrt(ss / n);
    rep.order_ok = slope >= 0.8 && slope <= 1.2;
  }

  const SweepEntry& last = rep.entries.back();
  if (last.orbit) {
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      const double re = rep.averaged_real_parts[k];
      worst = std::max(worst, std::abs(last.floquet_rates[k] - re) / std::abs(re));
    }
    rep.floquet_rate_error = worst;
    rep.floquet_rates_ok = worst <= 0.2;
  }
  return rep;
}

}  // namespace zhopf
