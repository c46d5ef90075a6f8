#pragma once

// Adaptive Dormand-Prince 5(4) with the classic 4th-order dense output.

#include <Eigen/Core>

#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace zhopf {

using VecX = Eigen::VectorXd;

/// dy = f(t, y); dy is pre-sized.
using OdeRhs = std::function<void(double t, const VecX& y, VecX& dy)>;

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  long max_steps = 1'000'000;
  bool dense = false;  // keep the interpolation data of every step
  double h0 = 0.0;     // 0: automatic first step

  /// Throws ValidationError unless both tolerances are positive and max_steps > 0.
  void validate() const;
};

struct Trajectory {
  std::vector<double> t;  // accepted step ends, starting at t0
  std::vector<VecX> y;
  long rejected = 0;

  /// Dense evaluation; requires cfg.dense. Outside [t0, t_end] throws ValidationError.
  VecX at(double time) const;
  /// Samples at t0, t0 + dt, ... up to t_end (inclusive when it lands on the grid).
  std::vector<std::pair<double, VecX>> sample(double dt) const;

  const VecX& end() const { return y.back(); }
  long steps() const { return static_cast<long>(t.size()) - 1; }

  // per accepted step: the five interpolation vectors
  std::vector<std::array<VecX, 5>> dense_data;
};

/// Integrates from t0 to t_end ≥ t0. Throws BlowUpError (with the time) on a
/// nonfinite state or a collapsing step size, and ConvergenceError (best
/// residual = time reached) when the step budget runs out.
Trajectory dopri5(const OdeRhs& f, double t0, const VecX& y0, double t_end, const IntegratorConfig& cfg = {});

}  // namespace zhopf
