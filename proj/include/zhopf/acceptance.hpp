#pragma once

// The eight end-to-end checks, each against an oracle that does not share
// code with the quantity under test.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace zhopf {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // one line, the numbers behind the verdict
  double seconds = 0.0;
  nlohmann::json data;  // per-check measurements for the report
};

struct AcceptanceOptions {
  int quad_n = 64;
  std::uint64_t seed = 20261019;  // random draws of checks 2 and 7
};

inline constexpr int kCriteria = 8;

/// Runs the listed checks (all when empty) in ascending order. Checks 5 and 6
/// share their sweeps. Never throws for a failing check; errors inside a check
/// are reported as failures with the message as detail.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& which = {}, const AcceptanceOptions& opt = {});

}  // namespace zhopf
