#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "nonholo/finsler.hpp"
#include "nonholo/suite.hpp"

using namespace nonholo;

namespace {

const char* kEuclidean = R"json({
  "name": "euclidean22",
  "chart": {"n": 2, "m": 2, "signature": [1, 1, 1, 1]},
  "kind": "metric",
  "g": ["1", "0", "0", "1"],
  "h": ["1+0.1*u1^2", "0", "0", "1"],
  "sample": {"box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]]}
})json";

const char* kRanders = R"json({
  "name": "randers_file",
  "chart": {"n": 4, "m": 4, "signature": [1, 1, 1, -1, 1, 1, 1, -1]},
  "kind": "finsler",
  "F": "sqrt(u5^2+u6^2+u7^2-u8^2) + 0.3*u5",
  "relaxed": true,
  "sample": {"box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1], [1, 2], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]]}
})json";

// Replaces the first occurrence of `from` in the Euclidean scenario.
std::string euclidean_with(const std::string& from, const std::string& to) {
  std::string s = kEuclidean;
  auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;  // not reached when the text is invalid
}

Report strip_timing(Report r) {
  for (auto& c : r.checks) c.ms = 0.0;
  return r;
}

const CheckRecord* find(const Report& r, const std::string& id) {
  for (const auto& c : r.checks)
    if (c.id == id) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("catalog scenarios load by name") {
  auto names = catalog_names();
  CHECK(names.size() == 5);
  for (const char* n : {"minkowski22", "schwarzschild22", "randers_flat", "quadratic_schwarzschild44",
                        "conformally_flat_nonholonomic"}) {
    Scenario s = load_scenario(n);
    CHECK(s.name == n);
  }
  Scenario m = load_scenario("minkowski22");
  CHECK(m.chart.n == 2);
  CHECK(m.chart.m == 2);
  CHECK(m.kind == ScenarioKind::Metric);
  const double x[4] = {0.3, -0.2, 0.5, 0.1};
  CHECK(m.dmetric.g[0].eval(x) == 1.0);
  CHECK(m.dmetric.g[3].eval(x) == 1.0);
  CHECK(m.dmetric.h[0].eval(x) == 1.0);
  CHECK(m.dmetric.h[3].eval(x) == -1.0);
  for (const auto& f : m.dmetric.N.coeffs) CHECK(f.eval(x) == 0.0);
  CHECK_THROWS_AS(catalog_source("nope"), Error);
}

TEST_CASE("coordinate scenario recovers N from the off-diagonal blocks") {
  Scenario s = load_scenario("conformally_flat_nonholonomic");
  CHECK(s.kind == ScenarioKind::Coordinate);
  const double x[4] = {0.4, -0.3, 0.2, 0.7};
  const double W = std::pow(1 + 0.2 * std::cos(x[1]), 2);
  const double r2 = x[0] * x[0] + x[1] * x[1];
  // G_{1 3} = -W u2 and h_11 = W (1 + r^2), so N_1^1 = -u2 / (1 + r^2)
  CHECK(s.dmetric.N.at(0, 0).eval(x) == doctest::Approx(-x[1] / (1 + r2)).epsilon(1e-14));
  CHECK(s.dmetric.N.at(1, 0).eval(x) == doctest::Approx(x[0] / (1 + r2)).epsilon(1e-14));
  CHECK(s.dmetric.h[0].eval(x) == doctest::Approx(W * (1 + r2)).epsilon(1e-14));
}

TEST_CASE("Randers file parses into a 4+4 Finsler scenario that is homogeneous") {
  Scenario s = parse_scenario(kRanders);
  REQUIRE(s.finsler.has_value());
  CHECK(s.kind == ScenarioKind::Finsler);
  CHECK(s.finsler->n == 4);
  CHECK(s.chart.dim() == 8);
  const double betas[] = {0.5, 2.0, 3.0};
  for (const auto& x : sample_points(s, 5, 100)) CHECK(homogeneity_check(*s.finsler, x, betas).max() < 1e-9);
}

TEST_CASE("JSON syntax errors carry line and column") {
  const std::string text = "{\n  \"name\": \"x\",\n  \"chart\": }\n}";
  try {
    parse_scenario(text);
    FAIL("expected a parse error");
  } catch (const ParseFailure& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.line() == 3);
    CHECK(e.column() == 12);  // the '}' where a value belongs
  }
}

TEST_CASE("malformed expression reports the offending column in the file") {
  const std::string text = euclidean_with("\"1+0.1*u1^2\"", "\"sin(\"");
  // line 6 is `  "h": ["sin(", "0", "0", "1"],`; the opening quote is column 9,
  // so the expression occupies columns 10..13 and the error sits at the end of
  // input, column 14
  try {
    parse_scenario(text);
    FAIL("expected a parse error");
  } catch (const ParseFailure& e) {
    CHECK(e.line() == 6);
    CHECK(e.column() == 14);
  }
}

TEST_CASE("validation errors name the violated invariant") {
  CHECK(code_of(euclidean_with("\"kind\"", "\"colour\": 1, \"kind\"")) == ErrorCode::ValidationError);
  CHECK(code_of(euclidean_with("[1, 1, 1, 1]", "[1, 1, 1, -1]")) == ErrorCode::ValidationError);
  CHECK(code_of(euclidean_with("[\"1\", \"0\", \"0\", \"1\"],\n  \"h\"", "[\"1\", \"0\"],\n  \"h\"")) ==
        ErrorCode::ValidationError);
  CHECK(code_of(euclidean_with("\"kind\"", "\"constants\": {\"u1\": 2}, \"kind\"")) == ErrorCode::ValidationError);
  CHECK(code_of(euclidean_with("\"kind\"", "\"tolerances\": {\"frames.duality\": -1}, \"kind\"")) ==
        ErrorCode::ValidationError);
  CHECK(code_of(euclidean_with("]]}", "]], \"points\": [[0, 0, 0, 5]]}")) == ErrorCode::ValidationError);
  CHECK(code_of(euclidean_with("\"kind\"", "\"conformal_factor\": \"-1\", \"kind\"")) == ErrorCode::ValidationError);
  CHECK(code_of("[1, 2]") == ErrorCode::ValidationError);
  try {
    parse_scenario(euclidean_with("[1, 1, 1, 1]", "[1, 1, 1, -1]"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("signature") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST_CASE("LCG matches the reference recurrence") {
  // values from an independent big-integer evaluation of the recurrence
  Lcg g(42);
  CHECK(g.next() == 10481999410520546993ULL);
  Lcg h(42);
  CHECK(h.uniform() == doctest::Approx(0.5682303266439076).epsilon(1e-15));
  CHECK(h.uniform() == doctest::Approx(0.2254634289477513).epsilon(1e-15));
  CHECK(h.uniform() == doctest::Approx(0.41283831882951183).epsilon(1e-15));
}

TEST_CASE("sample points: explicit first, then seeded and inside the box") {
  Scenario s = parse_scenario(euclidean_with("]]}", "]], \"points\": [[0.1, 0.2, 0.3, 0.4]]}"));
  auto a = sample_points(s, 7, 50), b = sample_points(s, 7, 50), c = sample_points(s, 8, 50);
  CHECK(a.size() == 50);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a[0] == std::vector<double>{0.1, 0.2, 0.3, 0.4});
  for (const auto& x : a)
    for (double v : x) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("report JSON round trip and schema") {
  Report r;
  r.scenario = "demo";
  CHECK(nlohmann::json::parse(report_to_json(r)) == nlohmann::json::parse(R"({"scenario": "demo", "checks": []})"));
  CHECK(report_from_json(report_to_json(r)) == r);

  r.checks.push_back({"a.one", "something holds", 1.25e-3, 1e-8, false, 17, 3.5});
  r.checks.push_back({"a.two", "something else", 0.1 + 0.2, 1.0, true, 4, 0.0});
  const std::string js = report_to_json(r);
  auto j = nlohmann::json::parse(js);
  CHECK(j["checks"][0]["pass"] == false);
  CHECK(j["checks"][0]["residual"].get<double>() == 1.25e-3);
  CHECK(j["checks"][0]["points"] == 17);
  CHECK(report_from_json(js) == r);
  CHECK(!r.all_passed());
  CHECK(r.failed() == 1);

  const std::string text = report_to_text(r);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("2 checks, 1 failed") != std::string::npos);

  CHECK_THROWS_AS(report_from_json("{\"scenario\": 1}"), Error);
  CHECK_THROWS_AS(report_from_json("{"), ParseFailure);
  CHECK_THROWS_AS(report_from_json(R"({"scenario": "x", "checks": [{"id": "a"}]})"), Error);
}

TEST_CASE("write_report writes files and reports IO failures") {
  Report r;
  r.scenario = "demo";
  r.checks.push_back({"a", "b", 0.0, 1.0, true, 1, 0.0});
  const std::string path = "nonholo_test_report.json";
  write_report(r, "json", path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(report_from_json(ss.str()) == r);
  std::remove(path.c_str());
  try {
    write_report(r, "json", "/nonexistent/dir/report.json");
    FAIL("expected an IO error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
  CHECK_THROWS_AS(write_report(r, "yaml", path), Error);
}

TEST_CASE("suite names") {
  for (const char* n : {"frames", "connections", "conformal", "spin", "twistor", "all"})
    CHECK(std::string(suite_name(parse_suite(n))) == n);
  CHECK_THROWS_AS(parse_suite("everything"), Error);
}

TEST_CASE("run_suite is deterministic apart from timing") {
  Scenario s = load_scenario("schwarzschild22");
  Report a = run_suite(s, Suite::Twistor, {9, 6, 1.0});
  Report b = run_suite(s, Suite::Twistor, {9, 6, 1.0});
  CHECK(strip_timing(a) == strip_timing(b));
  CHECK(report_to_json(strip_timing(a)) == report_to_json(strip_timing(b)));
  // every executed check appears exactly once
  std::set<std::string> ids;
  for (const auto& c : a.checks) CHECK(ids.insert(c.id).second);
}

TEST_CASE("minkowski22, all suites, seed 42, 100 points") {
  Report r = run_suite(load_scenario("minkowski22"), Suite::All, {42, 100, 1.0});
  CHECK(r.checks.size() > 25);
  for (const auto& c : r.checks) {
    CAPTURE(c.id);
    CHECK(c.points > 0);
    if (c.id == "conformal.weyl_invariance.canonical") {
      // The canonical connection of w^2 g differs from the conformally changed
      // connection: w depends on u1, so the rescaled h-block picks up
      // h-derivatives the canonical connection does not symmetrize. This is
      // the same obstruction that fails the conformal invariance criterion.
      CHECK(!c.pass);
      CHECK(c.residual > 1e-3);
    } else {
      CHECK(c.pass);
      CHECK(c.residual < 1e-10);
    }
  }
}

TEST_CASE("schwarzschild22 connections suite: vacuum Einstein residual") {
  Report r = run_suite(load_scenario("schwarzschild22"), Suite::Connections, {1, 100, 1.0});
  const CheckRecord* v = find(r, "connections.vacuum_einstein.levi_civita");
  REQUIRE(v != nullptr);
  CHECK(v->pass);
  CHECK(v->residual < 1e-7);
  CHECK(v->points == 100);
  CHECK(r.all_passed());
}

TEST_CASE("spin and twistor suites need Lorentzian blocks") {
  Scenario e = parse_scenario(kEuclidean);
  for (Suite k : {Suite::Spin, Suite::Twistor}) {
    try {
      run_suite(e, k, {1, 3, 1.0});
      FAIL("expected SuiteInapplicable");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::SuiteInapplicable);
    }
  }
  // "all" skips the inapplicable suites
  Report r = run_suite(e, Suite::All, {1, 3, 1.0});
  for (const auto& c : r.checks) CHECK(c.id.rfind("spin.", 0) != 0);
  CHECK(find(r, "conformal.weyl_traces.levi_civita") != nullptr);

  // the conformal suite uses the 4-dimensional Weyl normalization
  Scenario f = load_scenario("randers_flat");
  CHECK_THROWS_AS(run_suite(f, Suite::Conformal, {1, 2, 1.0}), Error);
  CHECK_THROWS_AS(run_suite(e, Suite::Frames, {1, 0, 1.0}), Error);
}

TEST_CASE("tolerance overrides and scaling") {
  Scenario s = parse_scenario(euclidean_with("\"kind\"", "\"tolerances\": {\"frames.duality\": 0.5}, \"kind\""));
  Report r = run_suite(s, Suite::Frames, {1, 2, 4.0});
  CHECK(find(r, "frames.duality")->tol == 2.0);
  CHECK(find(r, "frames.metric_split")->tol == doctest::Approx(4e-10));
}

TEST_CASE("crosscheck covers every expression field") {
  Scenario s = load_scenario("schwarzschild22");
  Report r = crosscheck(s, {3, 10, 1.0});
  CHECK(r.checks.size() == s.fields.size());
  CHECK(r.all_passed());
}
