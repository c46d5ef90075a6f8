#pragma once

// Ground truth for the averaging predictions: flows of the full model,
// periodic orbits by shooting, Floquet multipliers and ε-sweeps.

#include "zhopf/averaging.hpp"
#include "zhopf/integrator.hpp"
#include "zhopf/model.hpp"
#include "zhopf/spectrum.hpp"

#include <optional>
#include <string>
#include <vector>

namespace zhopf {

Trajectory integrate(const SystemParams& p, const State4& s0, double t_end, const IntegratorConfig& cfg = {});

struct VariationalResult {
  State4 end;
  Mat4 phi;  // fundamental matrix at t_end
};

VariationalResult variational_flow(const SystemParams& p, const State4& s0, double t_end,
                                   const IntegratorConfig& cfg = {});

struct ShootingConfig {
  IntegratorConfig integrator;
  int max_iterations = 25;
  /// success when ‖flow(T, s) - s‖ ≤ closure_tol · (1 + ‖s‖)
  double closure_tol = 1e-8;
};

struct PeriodicOrbit {
  double eps = 0.0;
  State4 initial_state;
  double period = 0.0;
  Spectrum4 floquet{};  // monodromy eigenvalues
  int trivial_index = 0;  // the multiplier closest to 1
  double closure_residual = 0.0;
  int iterations = 0;
  /// (r, z, w) where the orbit crosses θ = 0
  Vec3 section_point = Vec3::Zero();

  /// The three multipliers other than the trivial one.
  std::array<Complex, 3> nontrivial() const;
};

/// Shooting for the orbit born from `seed` (a point of the averaged map).
/// Unknowns: initial state and period; phase fixed by the hyperplane through
/// the guess normal to the flow. Throws ConvergenceError (best closure
/// residual) when Newton does not converge and BlowUpError on escape.
PeriodicOrbit find_periodic_orbit(const UnfoldingSpec& spec, double eps, const Vec3& seed,
                                  const ShootingConfig& cfg = {});

struct SweepEntry {
  double eps = 0.0;
  std::optional<PeriodicOrbit> orbit;
  std::string error;            // set when the orbit was not found
  double distance = NAN;        // ‖section point - seed‖
  double period_error = NAN;    // |T ω / 2π - 1|
  std::array<double, 3> floquet_rates{};  // log|μ| / (2π ε), ascending
  bool stability_agrees = false;  // signs of the rates vs real parts of the averaged spectrum
};

struct ConvergenceReport {
  Vec3 seed;
  std::string label;
  bool theorem_applicable = false;
  std::array<double, 3> averaged_real_parts{};  // ascending
  std::vector<SweepEntry> entries;              // in the order of eps_list

  std::optional<double> order;  // slope of log distance against log ε
  double order_residual = NAN;  // rms residual of that fit
  bool order_ok = false;        // order within [0.8, 1.2]; false when not asserted
  double period_constant = NAN;  // max |T ω / 2π - 1| / ε
  /// max_k |rate_k - Re λ_k| / |Re λ_k| at the smallest ε
  double floquet_rate_error = NAN;
  bool floquet_rates_ok = false;  // floquet_rate_error ≤ 0.2
};

/// Runs find_periodic_orbit for each ε (concurrently), then fits the
/// convergence order and compares Floquet data with the averaged spectrum.
/// eps_list must be strictly decreasing with at least three entries.
ConvergenceReport epsilon_sweep(const UnfoldingSpec& spec, const AveragedZero& seed, const std::vector<double>& eps_list,
                                const ShootingConfig& cfg = {});

}  // namespace zhopf
