#include "zhopf/report.hpp"

#include "zhopf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace zhopf {

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
  return a;
}

template <std::size_t N>
Json spectrum(const std::array<Complex, N>& s) {
  Json a = Json::array();
  for (const Complex& z : s) a.push_back(to_json(z));
  return a;
}

Json cubic(const MonicCubic& c) { return {{"p2", to_json(c.p2)}, {"p1", to_json(c.p1)}, {"p0", to_json(c.p0)}}; }

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? to_json(*v) : Json(nullptr);
}

}  // namespace

Json to_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Complex& z) { return Json::array({to_json(z.real()), to_json(z.imag())}); }

Json to_json(const SystemParams& p) {
  return {{"a", to_json(p.a)}, {"b", to_json(p.b)}, {"c", to_json(p.c)}, {"d", to_json(p.d)}, {"e", to_json(p.e)}};
}

Json to_json(const UnfoldingSpec& s) {
  Json j{{"case", std::string(to_string(s.kase))}, {"c", to_json(s.c)},   {"omega", to_json(s.omega)},
         {"a1", to_json(s.a1)},                    {"b1", to_json(s.b1)}};
  switch (s.kase) {
    case Case::I:
      j["d1"] = to_json(s.d1);
      j["e1"] = to_json(s.e1);
      break;
    case Case::II:
      j["d"] = to_json(s.d);
      j["e"] = to_json(s.e);
      break;
    case Case::III:
      j["d1"] = to_json(s.d1);
      j["e"] = to_json(s.e);
      j["branch"] = s.branch;
      break;
  }
  return j;
}

Json to_json(const EquilibriumSet& eq) {
  Json pts = Json::array();
  for (const Equilibrium& e : eq.points)
    pts.push_back({{"kind", std::string(to_string(e.kind))}, {"point", vec(e.point)}, {"residual", to_json(e.residual)}});
  return {{"delta", to_json(eq.delta)}, {"line_of_equilibria", eq.line_of_equilibria}, {"points", pts}};
}

Json to_json(const ZeroHopfCertificate& cert) {
  return {{"omega", to_json(cert.omega)}, {"residual", to_json(cert.residual)},
          {"eigenvalues", spectrum(cert.eigenvalues)}};
}

Json to_json(const StabilityEntry& st) {
  Json ref{{"det", opt(st.reference.det)},
           {"cubic", st.reference.cubic ? cubic(*st.reference.cubic) : Json(nullptr)},
           {"eigenvalues", st.reference.eigenvalues ? spectrum(*st.reference.eigenvalues) : Json(nullptr)},
           {"det_error", opt(st.det_reference_error)},
           {"cubic_error", opt(st.cubic_reference_error)},
           {"eigen_error", opt(st.eigen_reference_error)}};
  return {{"det", to_json(st.det)},
          {"cubic", cubic(st.cubic)},
          {"eigenvalues", spectrum(st.eigenvalues)},
          {"cubic_root_residual", to_json(st.cubic_root_residual)},
          {"theorem_applicable", st.theorem_applicable},
          {"verdict", to_string(st.verdict)},
          {"reference", ref}};
}

Json to_json(const AveragedZero& z) {
  return {{"label", z.label},         {"location", vec(z.location)},   {"residual", to_json(z.residual)},
          {"axis", z.axis},           {"trivial", z.trivial},          {"multiplicity", z.multiplicity},
          {"stability", to_json(z.stability)}};
}

Json to_json(const PeriodicOrbit& o) {
  return {{"eps", to_json(o.eps)},
          {"initial_state", vec(o.initial_state)},
          {"period", to_json(o.period)},
          {"floquet_multipliers", spectrum(o.floquet)},
          {"trivial_index", o.trivial_index},
          {"closure_residual", to_json(o.closure_residual)},
          {"iterations", o.iterations},
          {"section_point", vec(o.section_point)}};
}

Json to_json(const ConvergenceReport& rep) {
  Json entries = Json::array();
  for (const SweepEntry& e : rep.entries) {
    Json rates = Json::array();
    for (double r : e.floquet_rates) rates.push_back(to_json(r));
    entries.push_back({{"eps", to_json(e.eps)},
                       {"found", e.orbit.has_value()},
                       {"orbit", e.orbit ? to_json(*e.orbit) : Json(nullptr)},
                       {"error", e.error},
                       {"distance", to_json(e.distance)},
                       {"period_error", to_json(e.period_error)},
                       {"floquet_rates", e.orbit ? rates : Json(nullptr)},
                       {"stability_agrees", e.stability_agrees}});
  }
  Json re = Json::array();
  for (double r : rep.averaged_real_parts) re.push_back(to_json(r));
  return {{"seed", vec(rep.seed)},
          {"label", rep.label},
          {"theorem_applicable", rep.theorem_applicable},
          {"averaged_real_parts", re},
          {"entries", entries},
          {"order", opt(rep.order)},
          {"order_residual", to_json(rep.order_residual)},
          {"order_ok", rep.order_ok},
          {"period_constant", to_json(rep.period_constant)},
          {"floquet_rate_error", to_json(rep.floquet_rate_error)},
          {"floquet_rates_ok", rep.floquet_rates_ok}};
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move report into place at " + path.string() + ": " + ec.message());
  }
}

std::string trajectory_csv(const Trajectory& tr, std::optional<double> sample_dt) {
  std::ostringstream os;
  os << "t,x,y,z,w\n";
  auto row = [&](double t, const VecX& y) {
    os << num(t);
    for (Eigen::Index i = 0; i < 4; ++i) os << ',' << num(y[i]);
    os << '\n';
  };
  if (sample_dt) {
    for (const auto& [t, y] : tr.sample(*sample_dt)) row(t, y);
  } else {
    for (std::size_t i = 0; i < tr.t.size(); ++i) row(tr.t[i], tr.y[i]);
  }
  return os.str();
}

std::string sweep_csv_header() {
  return "label,eps,found,period,closure_residual,r,z,w,distance,period_error,rate1,rate2,rate3,stability_agrees\n";
}

std::string sweep_csv_rows(const ConvergenceReport& rep) {
  std::ostringstream os;
  for (const SweepEntry& e : rep.entries) {
    os << rep.label << ',' << num(e.eps) << ',' << (e.orbit ? 1 : 0) << ',';
    if (e.orbit) {
      const PeriodicOrbit& o = *e.orbit;
      os << num(o.period) << ',' << num(o.closure_residual) << ',' << num(o.section_point[0]) << ','
         << num(o.section_point[1]) << ',' << num(o.section_point[2]) << ',' << num(e.distance) << ','
         << num(e.period_error) << ',' << num(e.floquet_rates[0]) << ',' << num(e.floquet_rates[1]) << ','
         << num(e.floquet_rates[2]) << ',' << (e.stability_agrees ? 1 : 0);
    } else {
      os << ",,,,,,,,,,0";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace zhopf
