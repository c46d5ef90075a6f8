// zhopf: equilibria, zero-Hopf parameters, averaged zeros, periodic orbits and
// the acceptance checks from the command line.
//
// Exit status: 0 success, 1 bad input, 2 numerical failure (the report is
// still written). Every run can write a JSON report (--json); when
// ZHOPF_REPORT_DIR is set, relative output paths resolve against it and a
// report is written there even without --json.

#include "zhopf/acceptance.hpp"
#include "zhopf/averaging.hpp"
#include "zhopf/errors.hpp"
#include "zhopf/orbits.hpp"
#include "zhopf/report.hpp"
#include "zhopf/spectrum.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace zhopf;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---- parsing helpers ---------------------------------------------------

std::map<std::string, double> parse_assignments(const std::string& text, const std::vector<std::string>& allowed) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ValidationError("unknown key '" + key + "'");
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() - eq - 1) throw ValidationError("bad number in '" + item + "'");
    if (out.count(key)) throw ValidationError("key '" + key + "' given twice");
    out[key] = v;
  }
  return out;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ValidationError(std::string("bad number in ") + what + ": '" + item + "'");
  }
  return out;
}

SystemParams parse_params(const std::string& text) {
  const auto kv = parse_assignments(text, {"a", "b", "c", "d", "e"});
  for (const char* k : {"a", "b", "c", "d", "e"})
    if (!kv.count(k)) throw ValidationError(std::string("--params is missing ") + k);
  SystemParams p{kv.at("a"), kv.at("b"), kv.at("c"), kv.at("d"), kv.at("e")};
  if (!p.finite()) throw ValidationError("parameters must be finite");
  return p;
}

struct SpecArgs {
  std::string kase;
  std::string kv;
  std::map<std::string, double> flags;

  void add(CLI::App* app) {
    app->add_option("--case", kase, "i, ii or iii");
    app->add_option("--spec", kv, "unfolding as key=value list (c, omega, a1, b1, d1, e1, d, e, branch)");
    for (const char* k : {"c", "omega", "a1", "b1", "d1", "e1", "d", "e", "branch"})
      app->add_option_function<double>(std::string("--") + k, [this, k](double v) { flags[k] = v; },
                                       std::string("unfolding parameter ") + k);
  }

  bool given() const { return !kase.empty() || !kv.empty() || !flags.empty(); }

  UnfoldingSpec build() const {
    if (kase.empty()) throw ValidationError("--case is required");
    const Case k = parse_case(kase);
    auto all = parse_assignments(kv, {"c", "omega", "a1", "b1", "d1", "e1", "d", "e", "branch"});
    for (const auto& [key, v] : flags) {
      if (all.count(key)) throw ValidationError("parameter " + key + " given twice");
      all[key] = v;
    }
    auto get = [&](const char* key, double fallback) { return all.count(key) ? all.at(key) : fallback; };
    auto need = [&](const char* key) {
      if (!all.count(key)) throw ValidationError(std::string("case ") + std::string(to_string(k)) + " needs " + key);
      return all.at(key);
    };
    auto reject = [&](std::initializer_list<const char*> keys) {
      for (const char* key : keys)
        if (all.count(key))
          throw ValidationError(std::string(key) + " is not a parameter of case " + std::string(to_string(k)));
    };
    UnfoldingSpec s;
    switch (k) {
      case Case::I:
        reject({"d", "e", "branch"});
        s = UnfoldingSpec::case_i(need("c"), need("omega"), get("a1", 0), get("b1", 0), get("d1", 0), get("e1", 0));
        break;
      case Case::II:
        reject({"d1", "e1", "branch"});
        s = UnfoldingSpec::case_ii(need("c"), need("d"), get("e", 0), get("a1", 0), get("b1", 0));
        if (all.count("omega")) s.omega = all.at("omega");
        break;
      case Case::III: {
        reject({"d", "e1"});
        const double br = get("branch", 1);
        if (br != 1 && br != -1) throw ValidationError("branch must be +1 or -1");
        s = UnfoldingSpec::case_iii(need("c"), need("omega"), get("e", 0), get("a1", 0), get("b1", 0), get("d1", 0),
                                    static_cast<int>(br));
        break;
      }
    }
    s.validate();
    return s;
  }
};

// ---- report plumbing ---------------------------------------------------

struct Run {
  std::string command;
  Json report = Json::object();
  Json stages = Json::object();
  std::optional<std::filesystem::path> json_path, csv_path;
  std::string csv;

  template <class F>
  Json stage(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Json out;
    try {
      out = body();
    } catch (...) {
      stages[name] = {{"status", "failed"},
                      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
      throw;
    }
    stages[name] = {{"status", "ok"},
                    {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                    {"result", out}};
    return out;
  }
};

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  const char* dir = std::getenv("ZHOPF_REPORT_DIR");
  if (dir && *dir && p.is_relative()) return std::filesystem::path(dir) / p;
  return p;
}

void print_complex(std::ostream& os, const Complex& z) {
  char buf[64];
  if (z.imag() == 0) std::snprintf(buf, sizeof buf, "%.10g", z.real());
  else std::snprintf(buf, sizeof buf, "%.10g%+.10gi", z.real(), z.imag());
  os << buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

IntegratorConfig integrator_from(std::optional<double> tol) {
  IntegratorConfig cfg;
  if (tol) {
    cfg.rtol = *tol;
    cfg.atol = *tol * 1e-2;
  }
  cfg.validate();
  return cfg;
}

// Averaged zero to shoot from: by label, or the first nontrivial zero off the axis.
AveragedZero pick_zero(const UnfoldingSpec& s, const std::string& label) {
  const auto zs = averaged_zeros(s);
  if (!label.empty()) {
    for (const AveragedZero& z : zs)
      if (z.label == label) return z;
    std::string known;
    for (const AveragedZero& z : zs) known += " " + z.label;
    throw ValidationError("no averaged zero '" + label + "' for this spec (have:" + known + ")");
  }
  for (const AveragedZero& z : zs)
    if (!z.trivial && !z.axis) return z;
  for (const AveragedZero& z : zs)
    if (!z.trivial) return z;
  throw ValidationError("this spec has no nontrivial averaged zero");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-Hopf analysis of the four-dimensional Lorenz-Haken model"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string json_out, csv_out;
  int quad_n = 64;
  std::optional<double> tol, sample_dt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--json", json_out, "write the JSON report here");
    sub->add_option("--quad-n", quad_n, "quadrature panels for averaging")->check(CLI::Range(8, 1 << 16));
    sub->add_option("--tol", tol, "numerical tolerance of the stage (see README)");
  };
  auto add_csv = [&](CLI::App* sub) {
    sub->add_option("--csv", csv_out, "write the trajectory or sweep table here");
    sub->add_option("--sample-dt", sample_dt, "sample trajectories at this spacing instead of the accepted steps");
  };

  // equilibria
  std::string params_text;
  auto* eq_cmd = app.add_subcommand("equilibria", "equilibria of the model and their spectra");
  eq_cmd->add_option("--params", params_text, "a=..,b=..,c=..,d=..,e=..")->required();
  add_common(eq_cmd);

  // zero-hopf
  std::string zh_case;
  double zh_c = 0;
  std::optional<double> zh_omega, zh_d, zh_e;
  auto* zh_cmd = app.add_subcommand("zero-hopf", "parameters that make an equilibrium zero-Hopf, with a certificate");
  zh_cmd->add_option("--case", zh_case, "i, ii or iii")->required();
  zh_cmd->add_option("--c", zh_c, "c")->required();
  zh_cmd->add_option("--omega", zh_omega, "rotation frequency (cases i, iii; consistency check for ii)");
  zh_cmd->add_option("--d", zh_d, "d (case ii)");
  zh_cmd->add_option("--e", zh_e, "e (cases ii, iii; default 0)");
  add_common(zh_cmd);

  // zeros
  SpecArgs zeros_spec;
  auto* zeros_cmd = app.add_subcommand("zeros", "zeros of the averaged map and their stability");
  zeros_spec.add(zeros_cmd);
  add_common(zeros_cmd);

  // orbit
  SpecArgs orbit_spec;
  double eps = 0;
  std::string zero_label, seed_text, state_text, orbit_params;
  std::optional<double> t_end;
  auto* orbit_cmd = app.add_subcommand("orbit", "periodic orbit by shooting, or a plain integration");
  orbit_spec.add(orbit_cmd);
  orbit_cmd->add_option("--eps", eps, "perturbation size in (0, 0.05]");
  orbit_cmd->add_option("--zero", zero_label, "label of the averaged zero to start from");
  orbit_cmd->add_option("--seed", seed_text, "starting point r,z,w instead of a zero");
  orbit_cmd->add_option("--params", orbit_params, "raw a=..,b=..,c=..,d=..,e=.. (with --state and --t-end)");
  orbit_cmd->add_option("--state", state_text, "x,y,z,w for a raw integration");
  orbit_cmd->add_option("--t-end", t_end, "integration time for a raw integration");
  add_common(orbit_cmd);
  add_csv(orbit_cmd);

  // sweep
  SpecArgs sweep_spec;
  std::string eps_list_text = "0.01,0.005,0.0025", sweep_zero;
  auto* sweep_cmd = app.add_subcommand("sweep", "orbits at decreasing eps and their convergence to the averaged zero");
  sweep_spec.add(sweep_cmd);
  sweep_cmd->add_option("--eps-list", eps_list_text, "strictly decreasing eps values")->capture_default_str();
  sweep_cmd->add_option("--zero", sweep_zero, "label of the averaged zero (default: first off-axis)");
  add_common(sweep_cmd);
  add_csv(sweep_cmd);

  // verify
  bool verify_all = false;
  std::vector<int> checks;
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
  verify_cmd->add_flag("--all", verify_all, "run all eight checks");
  verify_cmd->add_option("--check", checks, "run only these checks")->delimiter(',');
  add_common(verify_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  Run run;
  run.command = app.get_subcommands().front()->get_name();
  Json argv_echo = Json::array();
  for (int i = 0; i < argc; ++i) argv_echo.push_back(argv[i]);
  run.report["invocation"] = {{"argv", argv_echo}, {"command", run.command}};
  run.report["version"] = kVersion;

  int status = 0;
  Json tolerances = {{"quad_n", quad_n}};
  try {
    if (!json_out.empty()) run.json_path = resolve_output(json_out);
    else if (const char* dir = std::getenv("ZHOPF_REPORT_DIR"); dir && *dir)
      run.json_path = std::filesystem::path(dir) / (run.command + ".json");
    if (!csv_out.empty()) run.csv_path = resolve_output(csv_out);
    if (sample_dt && !(*sample_dt > 0)) throw ValidationError("--sample-dt must be positive");

    std::ostream& out = std::cout;

    if (eq_cmd->parsed()) {
      const SystemParams p = parse_params(params_text);
      run.report["params"] = to_json(p);
      const Json eqj = run.stage("equilibria", [&] { return to_json(equilibria(p)); });
      const EquilibriumSet eq = equilibria(p);
      out << "Delta = " << fmt(eq.delta) << (eq.line_of_equilibria ? "  (b = 0: the w-axis is a line of equilibria)" : "")
          << "\n";
      out << eq.points.size() << " equilibria\n";
      Json spectra = Json::array();
      run.stage("spectrum", [&] {
        for (const Equilibrium& e : eq.points) {
          const Spectrum4 ev = eigenvalues(jacobian(p, e.point));
          out << "  " << to_string(e.kind) << "  " << fmt_vec(e.point) << "  residual " << fmt(e.residual)
              << "\n    eigenvalues:";
          Json l = Json::array();
          for (const Complex& z : ev) {
            out << ' ';
            print_complex(out, z);
            l.push_back(to_json(z));
          }
          out << "\n";
          spectra.push_back(l);
        }
        return spectra;
      });
      (void)eqj;
    } else if (zh_cmd->parsed()) {
      ZeroHopfRequest req;
      req.kase = parse_case(zh_case);
      req.c = zh_c;
      req.omega = zh_omega;
      req.d = zh_d;
      req.e = zh_e;
      const double cert_tol = tol.value_or(1e-8);
      tolerances["certificate"] = cert_tol;
      const SystemParams p = zero_hopf_params(req);
      const State4 at = zero_hopf_point(req.kase, p);
      run.report["params"] = to_json(p);
      run.report["point"] = {at[0], at[1], at[2], at[3]};
      out << "a = " << fmt(p.a) << "  b = " << fmt(p.b) << "  c = " << fmt(p.c) << "  d = " << fmt(p.d)
          << "  e = " << fmt(p.e) << "\n";
      out << "zero-Hopf point " << fmt_vec(at) << "\n";
      const auto cert = is_zero_hopf(p, at, cert_tol);
      run.stage("spectrum", [&] {
        Json j = {{"certified", cert.has_value()}};
        if (cert) j["certificate"] = to_json(*cert);
        return j;
      });
      if (cert) {
        out << "certified: omega = " << fmt(cert->omega) << ", eigen-residual " << fmt(cert->residual) << "\n";
      } else {
        out << "NOT certified: spectrum is not {0, 0, +-i omega} within " << fmt(cert_tol) << "\n";
        status = 2;
      }
    } else if (zeros_cmd->parsed()) {
      const UnfoldingSpec s = zeros_spec.build();
      run.report["spec"] = to_json(s);
      const std::vector<AveragedZero> zs = averaged_zeros(s);
      Json disc = Json::object();
      for (const auto& [name, v] : discriminants(s)) disc[name] = to_json(v);
      run.report["discriminants"] = disc;
      Json zj = run.stage("averaged_zeros", [&] {
        Json a = Json::array();
        for (const AveragedZero& z : zs) a.push_back(to_json(z));
        return a;
      });
      // the closed map against the averaged numeric pipeline at each zero
      run.stage("quadrature_check", [&] {
        const ReducedField numeric = first_order_field_numeric(s);
        Json a = Json::object();
        for (const AveragedZero& z : zs) {
          // theta is undefined on the axis, so axis zeros have no pipeline value
          a[z.label] = z.axis ? Json(nullptr)
                              : to_json(average_quadrature(numeric, z.location, quad_n).cwiseAbs().maxCoeff());
        }
        return a;
      });
      out << "case " << to_string(s.kase) << ": " << zs.size() << " zeros, " << nontrivial_count(zs)
          << " nontrivial (with multiplicity)\n";
      for (const auto& [name, v] : discriminants(s)) out << "  " << name << " = " << fmt(v) << "\n";
      for (const AveragedZero& z : zs) {
        out << "  " << z.label << "  " << fmt_vec(z.location) << "  det " << fmt(z.stability.det) << "  "
            << to_string(z.stability.verdict) << (z.stability.theorem_applicable ? "" : " (degenerate)") << "\n    eigenvalues:";
        for (const auto& l : z.stability.eigenvalues) {
          out << ' ';
          print_complex(out, l);
        }
        out << "\n";
      }
      (void)zj;
    } else if (orbit_cmd->parsed()) {
      const bool raw = !orbit_params.empty() || !state_text.empty() || t_end.has_value();
      if (raw && (orbit_spec.given() || eps != 0 || !zero_label.empty() || !seed_text.empty()))
        throw ValidationError("give either --params/--state/--t-end or an unfolding spec with --eps, not both");
      const IntegratorConfig icfg = integrator_from(tol);
      tolerances["rtol"] = icfg.rtol;
      tolerances["atol"] = icfg.atol;
      if (raw) {
        if (orbit_params.empty() || state_text.empty() || !t_end)
          throw ValidationError("a raw integration needs --params, --state and --t-end");
        const SystemParams p = parse_params(orbit_params);
        const std::vector<double> st = parse_list(state_text, "--state");
        if (st.size() != 4) throw ValidationError("--state needs four numbers");
        run.report["params"] = to_json(p);
        IntegratorConfig cfg = icfg;
        cfg.dense = sample_dt.has_value();
        Trajectory tr;
        run.stage("integration", [&] {
          try {
            tr = integrate(p, State4(st[0], st[1], st[2], st[3]), *t_end, cfg);
          } catch (const BlowUpError& e) {
            run.report["blow_up_time"] = to_json(e.time());
            throw;
          }
          const VecX& y = tr.end();
          return Json{{"steps", tr.t.size() - 1}, {"rejected", tr.rejected}, {"end", {y[0], y[1], y[2], y[3]}}};
        });
        out << "integrated to t = " << fmt(tr.t.back()) << " in " << tr.t.size() - 1 << " steps; end state "
            << fmt_vec(tr.end()) << "\n";
        run.csv = trajectory_csv(tr, sample_dt);
      } else {
        const UnfoldingSpec s = orbit_spec.build();
        run.report["spec"] = to_json(s);
        run.report["eps"] = to_json(eps);
        Vec3 seed;
        std::string label = "custom";
        if (!seed_text.empty()) {
          if (!zero_label.empty()) throw ValidationError("give --zero or --seed, not both");
          const std::vector<double> v = parse_list(seed_text, "--seed");
          if (v.size() != 3) throw ValidationError("--seed needs three numbers r,z,w");
          seed = Vec3(v[0], v[1], v[2]);
        } else {
          const AveragedZero z = pick_zero(s, zero_label);
          seed = z.location;
          label = z.label;
          run.report["averaged_zero"] = to_json(z);
        }
        run.report["seed"] = {{"label", label}, {"location", {seed[0], seed[1], seed[2]}}};
        ShootingConfig scfg;
        scfg.integrator = icfg;
        tolerances["closure"] = scfg.closure_tol;
        PeriodicOrbit o;
        run.stage("orbit", [&] {
          try {
            o = find_periodic_orbit(s, eps, seed, scfg);
          } catch (const ConvergenceError& e) {
            run.report["best_closure_residual"] = to_json(e.best_residual());
            throw;
          }
          return to_json(o);
        });
        out << "orbit from " << label << " " << fmt_vec(seed) << " at eps = " << fmt(eps) << "\n";
        out << "  period " << fmt(o.period) << "  closure residual " << fmt(o.closure_residual) << "  after "
            << o.iterations << " Newton steps\n";
        out << "  section point (r, z, w) " << fmt_vec(o.section_point) << "\n  Floquet multipliers:";
        for (const Complex& m : o.floquet) {
          out << ' ';
          print_complex(out, m);
        }
        out << "\n";
        if (run.csv_path) {
          IntegratorConfig cfg = icfg;
          cfg.dense = sample_dt.has_value();
          run.csv = trajectory_csv(integrate(perturb(s, eps), o.initial_state, o.period, cfg), sample_dt);
        }
      }
    } else if (sweep_cmd->parsed()) {
      const UnfoldingSpec s = sweep_spec.build();
      const std::vector<double> eps_list = parse_list(eps_list_text, "--eps-list");
      run.report["spec"] = to_json(s);
      run.report["eps_list"] = eps_list;
      const AveragedZero z = pick_zero(s, sweep_zero);
      run.report["averaged_zero"] = to_json(z);
      ShootingConfig scfg;
      scfg.integrator = integrator_from(tol);
      tolerances["rtol"] = scfg.integrator.rtol;
      tolerances["atol"] = scfg.integrator.atol;
      tolerances["closure"] = scfg.closure_tol;
      ConvergenceReport rep;
      run.stage("sweep", [&] {
        rep = epsilon_sweep(s, z, eps_list, scfg);
        return to_json(rep);
      });
      out << "sweep from " << z.label << " " << fmt_vec(z.location) << "\n";
      for (const SweepEntry& e : rep.entries) {
        out << "  eps " << fmt(e.eps) << ": ";
        if (e.orbit)
          out << "distance " << fmt(e.distance) << ", |T w/2pi - 1| " << fmt(e.period_error) << ", rates "
              << fmt(e.floquet_rates[0]) << " " << fmt(e.floquet_rates[1]) << " " << fmt(e.floquet_rates[2]) << "\n";
        else
          out << "no orbit (" << e.error << ")\n";
      }
      out << "order " << (rep.order ? fmt(*rep.order) : std::string("n/a")) << (rep.order_ok ? " ok" : "")
          << "; Floquet rate error " << fmt(rep.floquet_rate_error) << (rep.floquet_rates_ok ? " ok" : "") << "\n";
      run.csv = sweep_csv_header() + sweep_csv_rows(rep);
      bool all_found = true;
      for (const SweepEntry& e : rep.entries) all_found &= e.orbit.has_value();
      if (!all_found) status = 2;
    } else if (verify_cmd->parsed()) {
      if (verify_all && !checks.empty()) throw ValidationError("give --all or --check, not both");
      if (!verify_all && checks.empty()) throw ValidationError("give --all or --check");
      AcceptanceOptions opt;
      opt.quad_n = quad_n;
      run.report["random_seed"] = opt.seed;
      const auto results = run_acceptance(checks, opt);
      Json arr = Json::array();
      int failed = 0;
      for (const CriterionResult& r : results) {
        std::printf("[%s] %d %s (%.2fs): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.detail.c_str());
        failed += !r.pass;
        arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"data", r.data}});
        run.stages["check_" + std::to_string(r.id)] = {{"status", r.pass ? "ok" : "failed"}, {"wall_seconds", r.seconds}};
      }
      std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failed, results.size());
      std::fflush(stdout);
      run.report["checks"] = arr;
      if (failed) status = 2;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    run.report["error"] = e.what();
    status = 2;
  }

  run.report["tolerances"] = tolerances;
  run.report["status"] = status == 0 ? "ok" : "numerical_failure";
  run.report["stages"] = run.stages;
  try {
    if (run.json_path) write_atomic(*run.json_path, canonical_dump(run.report));
    if (run.csv_path && !run.csv.empty()) write_atomic(*run.csv_path, run.csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return status ? status : 2;
  }
  return status;
}
