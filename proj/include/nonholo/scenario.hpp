#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nonholo/finsler.hpp"

namespace nonholo {

// metric: g, h and N given; finsler: F or L given on the slit chart;
// coordinate: the full coordinate metric G given, N optional.
enum class ScenarioKind { Metric, Finsler, Coordinate };
const char* scenario_kind_name(ScenarioKind k);

struct Scenario {
  std::string name;
  ChartSpec chart;
  ScenarioKind kind = ScenarioKind::Metric;
  std::map<std::string, double> constants;
  // The d-metric every suite works on (the Sasaki lift for finsler scenarios).
  DMetricField dmetric;
  std::optional<FinslerFunction> finsler;
  std::vector<ScalarField> coordinate_metric;  // coordinate kind only
  ScalarField conformal_factor;                // w for the conformal checks
  std::vector<std::pair<double, double>> box;  // domain box, one interval per coordinate
  std::vector<std::vector<double>> points;     // explicit sample points, used before random ones
  std::map<std::string, double> tolerances;    // per-check overrides
  bool vacuum = false;                         // enables the vacuum Einstein check
  bool conformally_flat = false;               // enables the vanishing Weyl check
  // Every expression field with a readable name, for the cross-check.
  std::vector<std::pair<std::string, ScalarField>> fields;
};

// Scenario JSON:
//   {"name": str, "chart": {"n": int, "m": int, "signature": [+-1, ...]},
//    "kind": "metric" | "finsler" | "coordinate",
//    "constants": {name: number},
//    "g": [n*n expr], "h": [m*m expr], "N": [n*m expr]           (metric)
//    "F": expr | "L": expr, "relaxed": bool                       (finsler)
//    "G": [(n+m)^2 expr], "N": [n*m expr]                         (coordinate)
//    "conformal_factor": expr, "vacuum": bool, "conformally_flat": bool,
//    "sample": {"box": [[lo, hi], ...], "points": [[...], ...]},
//    "tolerances": {check id: number}}
// Matrices are row-major; N is stored as N_i^a at i*m + a.
// ParseFailure (line, column) for JSON syntax and expression errors,
// ValidationError for everything else.
Scenario parse_scenario(const std::string& text);
// Catalog name first, otherwise a file path. IoError when the file is unreadable.
Scenario load_scenario(const std::string& name_or_path);

std::vector<std::string> catalog_names();
// JSON source of a catalog scenario; InvalidArgument for an unknown name.
const std::string& catalog_source(const std::string& name);

// 64-bit linear congruential generator, state' = a state + c with
// a = 6364136223846793005, c = 1442695040888963407. uniform() takes the top
// 53 bits of the new state.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // in [0, 1)

 private:
  std::uint64_t state_;
};

// The explicit points first, then uniform points in the box, `count` in total.
std::vector<std::vector<double>> sample_points(const Scenario& s, std::uint64_t seed, int count);

}  // namespace nonholo
