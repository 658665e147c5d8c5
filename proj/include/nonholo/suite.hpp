#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nonholo/scenario.hpp"

namespace nonholo {

struct CheckRecord {
  std::string id;
  std::string anchor;  // the identity the check measures, in words
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  int points = 0;
  double ms = 0.0;
  bool operator==(const CheckRecord&) const = default;
};

struct Report {
  std::string scenario;
  std::vector<CheckRecord> checks;
  bool all_passed() const;
  int failed() const;
  bool operator==(const Report&) const = default;
};

enum class Suite { Frames, Connections, Conformal, Spin, Twistor, All };
// InvalidArgument for an unknown name.
Suite parse_suite(const std::string& name);
const char* suite_name(Suite s);

struct RunOptions {
  std::uint64_t seed = 0;
  int points = 100;
  double tol_scale = 1.0;  // multiplies every tolerance, after scenario overrides
};

// Deterministic in (scenario, suite, seed, points) apart from the ms fields.
// SuiteInapplicable when spin or twistor is requested on a chart without
// Lorentzian 4-dimensional blocks; "all" skips such suites.
Report run_suite(const Scenario& s, Suite suite, const RunOptions& opt);
// Jet derivatives of every scenario expression against the finite-difference
// oracle, up to second order.
Report crosscheck(const Scenario& s, const RunOptions& opt);

// {"scenario": str, "checks": [{"id", "anchor", "residual", "tol", "pass", "points", "ms"}]}
std::string report_to_json(const Report& r);
// ParseFailure for bad JSON, ValidationError for a schema mismatch.
Report report_from_json(const std::string& text);
// Fixed-width table with a summary line.
std::string report_to_text(const Report& r);
// format "json" or "text"; path "-" is stdout. IoError when the file cannot be written.
void write_report(const Report& r, const std::string& format, const std::string& path);

}  // namespace nonholo
