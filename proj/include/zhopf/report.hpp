#pragma once

// JSON and CSV serialization of every result type. JSON objects use sorted
// keys and shortest round-trip numbers, so parse + dump reproduces a report
// byte for byte. Non-finite numbers become null.

#include "zhopf/averaging.hpp"
#include "zhopf/model.hpp"
#include "zhopf/orbits.hpp"
#include "zhopf/spectrum.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace zhopf {

using Json = nlohmann::json;

Json to_json(double v);
Json to_json(const Complex& z);  // [re, im]
Json to_json(const SystemParams& p);
Json to_json(const UnfoldingSpec& s);
Json to_json(const EquilibriumSet& eq);
Json to_json(const ZeroHopfCertificate& cert);
Json to_json(const StabilityEntry& st);
Json to_json(const AveragedZero& z);
Json to_json(const PeriodicOrbit& o);
Json to_json(const ConvergenceReport& rep);

/// Canonical text of a report (two-space indent, trailing newline).
std::string canonical_dump(const Json& j);

/// Writes through a temporary file in the same directory and renames it over
/// `path`. Throws Error on I/O failure.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Header `t,x,y,z,w`; one row per accepted step, or per dense sample when
/// `sample_dt` is given (the trajectory must then carry dense output).
std::string trajectory_csv(const Trajectory& tr, std::optional<double> sample_dt = std::nullopt);

/// One row per (seed, eps) of a sweep.
std::string sweep_csv_header();
std::string sweep_csv_rows(const ConvergenceReport& rep);

}  // namespace zhopf
