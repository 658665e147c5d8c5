#include "nonholo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nonholo/expr.hpp"

namespace nonholo {

using nlohmann::json;

const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Metric: return "metric";
    case ScenarioKind::Finsler: return "finsler";
    case ScenarioKind::Coordinate: return "coordinate";
  }
  return "?";
}

namespace {

const std::map<std::string, std::string>& catalog() {
  static const std::map<std::string, std::string> c = {
      {"minkowski22", R"json({
  "name": "minkowski22",
  "chart": {"n": 2, "m": 2, "signature": [1, 1, 1, -1]},
  "kind": "metric",
  "g": ["1", "0", "0", "1"],
  "h": ["1", "0", "0", "-1"],
  "vacuum": true,
  "sample": {"box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]]}
})json"},
      {"schwarzschild22", R"json({
  "name": "schwarzschild22",
  "chart": {"n": 2, "m": 2, "signature": [1, 1, 1, -1]},
  "kind": "metric",
  "constants": {"M": 1},
  "g": ["1/(1-2*M/u1)", "0", "0", "u1^2"],
  "h": ["u1^2*sin(u2)^2", "0", "0", "-(1-2*M/u1)"],
  "vacuum": true,
  "sample": {"box": [[3, 10], [0.5, 2.6], [-1, 1], [-1, 1]]}
})json"},
      // Minkowski space in screw-motion coordinates (the u3 lines are helices),
      // rescaled by w^2: conformally flat, with N_i^a = G_ia h^ab nonintegrable.
      {"conformally_flat_nonholonomic", R"json({
  "name": "conformally_flat_nonholonomic",
  "chart": {"n": 2, "m": 2, "signature": [1, 1, 1, -1]},
  "kind": "coordinate",
  "constants": {"a": 0.2},
  "conformally_flat": true,
  "G": ["(1+a*cos(u2))^2", "0", "-(1+a*cos(u2))^2*u2", "0",
        "0", "(1+a*cos(u2))^2", "(1+a*cos(u2))^2*u1", "0",
        "-(1+a*cos(u2))^2*u2", "(1+a*cos(u2))^2*u1", "(1+a*cos(u2))^2*(1+u1^2+u2^2)", "0",
        "0", "0", "0", "-(1+a*cos(u2))^2"],
  "sample": {"box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]]}
})json"},
      {"randers_flat", R"json({
  "name": "randers_flat",
  "chart": {"n": 4, "m": 4, "signature": [1, 1, 1, -1, 1, 1, 1, -1]},
  "kind": "finsler",
  "F": "sqrt(u5^2+u6^2+u7^2-u8^2) + 0.3*u5",
  "relaxed": true,
  "sample": {"box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1], [1, 2], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]]}
})json"},
      {"quadratic_schwarzschild44", R"json({
  "name": "quadratic_schwarzschild44",
  "chart": {"n": 4, "m": 4, "signature": [1, 1, 1, -1, 1, 1, 1, -1]},
  "kind": "finsler",
  "constants": {"M": 1},
  "L": "u5^2/(1-2*M/u1) + u1^2*u6^2 + u1^2*sin(u2)^2*u7^2 - (1-2*M/u1)*u8^2",
  "sample": {"box": [[3, 10], [0.5, 2.6], [-1, 1], [-1, 1], [0.2, 1], [0.2, 1], [0.2, 1], [0.2, 1]]}
})json"},
  };
  return c;
}

// 1-based line and column of a byte offset.
std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

struct Reader {
  const std::string& text;
  const json& root;
  std::map<std::string, double> constants;
  std::size_t search_from = 0;

  [[noreturn]] void invalid(const std::string& what) const { fail(ErrorCode::ValidationError, what); }

  const json& need(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) invalid(std::string("missing \"") + key + "\"");
    return *it;
  }

  // Expressions report errors at their position in the file: the literal is
  // located by its JSON spelling, searching forward from the previous one.
  ScalarField expr(const json& v, int arity, const std::string& what) {
    if (!v.is_string()) invalid(what + " must be an expression string");
    const std::string src = v.get<std::string>();
    const std::string quoted = json(src).dump();
    std::size_t at = text.find(quoted, search_from);
    if (at == std::string::npos) at = text.find(quoted);
    int line = 1, quote_col = 0;
    if (at != std::string::npos) {
      auto [l, c] = line_column(text, at);
      line = l;
      quote_col = c;
      search_from = at + quoted.size();
    }
    return parse_expression(src, arity, constants, line, quote_col);
  }

  std::vector<ScalarField> exprs(const json& v, std::size_t count, int arity, const std::string& what) {
    if (!v.is_array() || v.size() != count)
      invalid(what + " must be an array of " + std::to_string(count) + " expressions");
    std::vector<ScalarField> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(expr(v[k], arity, what + "[" + std::to_string(k) + "]"));
    return out;
  }
};

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(ErrorCode::ValidationError, "unknown key \"" + it.key() + "\" in " + where);
  }
}

int as_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) fail(ErrorCode::ValidationError, what + " must be an integer");
  return v.get<int>();
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(ErrorCode::ValidationError, what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ErrorCode::ValidationError, what + " must be finite");
  return x;
}

// N_i^e = G_{ia} h^{ae} as a pointwise field, for coordinate scenarios without N.
NConnectionField nconnection_from_coordinate(const ChartSpec& chart, const std::vector<ScalarField>& G) {
  const int n = chart.n, m = chart.m, d = n + m;
  NConnectionField N;
  N.n = n;
  N.m = m;
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < m; ++e)
      N.coeffs.push_back(pointwise_field(d, "N", [G, n, m, d, i, e](std::span<const double> x, int order) {
        JetArray h({m, m});
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) h(a, b) = eval_jet(G[(n + a) * d + n + b], x, order);
        JetArray hi = inverse(h);
        Jet s = Jet::exact(0.0);
        for (int a = 0; a < m; ++a) s += eval_jet(G[i * d + n + a], x, order) * hi(a, e);
        return s;
      }));
  return N;
}

std::vector<double> center(const std::vector<std::pair<double, double>>& box) {
  std::vector<double> c;
  for (auto [lo, hi] : box) c.push_back(0.5 * (lo + hi));
  return c;
}

void validate_signature(const Scenario& s, std::span<const double> x) {
  RealArray G = assemble_metric(s.dmetric, x);
  Inertia got = inertia(G, 1e-12);
  Inertia want;
  for (int v : s.chart.signature) (v > 0 ? want.positive : want.negative)++;
  if (!(got == want))
    fail(ErrorCode::ValidationError, "declared signature does not match the metric inertia at the box center (" +
                                         std::to_string(got.positive) + " positive, " + std::to_string(got.negative) +
                                         " negative, " + std::to_string(got.zero) + " zero)");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // drop the library prefix "[json.exception.parse_error.101] parse error at line L, column C: "
    if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ParseFailure("JSON syntax: " + msg, line, col);
  }
  if (!root.is_object()) fail(ErrorCode::ValidationError, "scenario must be a JSON object");
  check_keys(root,
             {"name", "chart", "kind", "constants", "g", "h", "N", "F", "L", "relaxed", "G", "conformal_factor",
              "vacuum", "conformally_flat", "sample", "tolerances", "description"},
             "scenario");
  Reader r{text, root, {}, 0};
  Scenario s;

  const json& name = r.need(root, "name");
  if (!name.is_string() || name.get<std::string>().empty()) r.invalid("\"name\" must be a nonempty string");
  s.name = name.get<std::string>();

  const json& chart = r.need(root, "chart");
  if (!chart.is_object()) r.invalid("\"chart\" must be an object");
  check_keys(chart, {"n", "m", "signature"}, "chart");
  s.chart.n = as_int(r.need(chart, "n"), "chart.n");
  s.chart.m = as_int(r.need(chart, "m"), "chart.m");
  const json& sig = r.need(chart, "signature");
  if (!sig.is_array()) r.invalid("chart.signature must be an array");
  for (const auto& v : sig) s.chart.signature.push_back(as_int(v, "chart.signature entry"));
  s.chart.validate();
  const int n = s.chart.n, m = s.chart.m, d = s.chart.dim();

  if (auto it = root.find("constants"); it != root.end()) {
    if (!it->is_object()) r.invalid("\"constants\" must be an object");
    for (auto c = it->begin(); c != it->end(); ++c) {
      const std::string& k = c.key();
      if (k.empty() || !(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_'))
        r.invalid("constant name \"" + k + "\" must start with a letter");
      if (k.size() > 1 && k[0] == 'u' && std::all_of(k.begin() + 1, k.end(), ::isdigit))
        r.invalid("constant name \"" + k + "\" collides with a coordinate symbol");
      s.constants[k] = as_number(c.value(), "constant " + k);
    }
  }
  r.constants = s.constants;

  const std::string kind = r.need(root, "kind").is_string() ? root["kind"].get<std::string>() : "";
  if (kind == "metric") {
    s.kind = ScenarioKind::Metric;
    for (const char* k : {"F", "L", "relaxed", "G"})
      if (root.contains(k)) r.invalid(std::string("\"") + k + "\" is not used by metric scenarios");
    s.dmetric.chart = s.chart;
    s.dmetric.g = r.exprs(r.need(root, "g"), static_cast<std::size_t>(n * n), d, "g");
    s.dmetric.h = r.exprs(r.need(root, "h"), static_cast<std::size_t>(m * m), d, "h");
    s.dmetric.N = NConnectionField::zero(n, m);
    if (root.contains("N")) s.dmetric.N.coeffs = r.exprs(root["N"], static_cast<std::size_t>(n * m), d, "N");
    for (int k = 0; k < n * n; ++k) s.fields.emplace_back("g[" + std::to_string(k) + "]", s.dmetric.g[k]);
    for (int k = 0; k < m * m; ++k) s.fields.emplace_back("h[" + std::to_string(k) + "]", s.dmetric.h[k]);
    for (int k = 0; k < n * m; ++k) s.fields.emplace_back("N[" + std::to_string(k) + "]", s.dmetric.N.coeffs[k]);
  } else if (kind == "finsler") {
    s.kind = ScenarioKind::Finsler;
    for (const char* k : {"g", "h", "N", "G"})
      if (root.contains(k)) r.invalid(std::string("\"") + k + "\" is not used by finsler scenarios");
    if (n != m) r.invalid("finsler scenarios need n = m");
    const bool relaxed = root.contains("relaxed") && root["relaxed"].is_boolean() && root["relaxed"].get<bool>();
    if (root.contains("relaxed") && !root["relaxed"].is_boolean()) r.invalid("\"relaxed\" must be a boolean");
    if (root.contains("F") == root.contains("L")) r.invalid("finsler scenarios need exactly one of \"F\" and \"L\"");
    if (root.contains("F")) {
      ScalarField F = r.expr(root["F"], d, "F");
      s.finsler = FinslerFunction::from_F(n, F, relaxed);
      s.fields.emplace_back("F", F);
    } else {
      ScalarField L = r.expr(root["L"], d, "L");
      s.finsler = FinslerFunction::from_L(n, L);
      s.fields.emplace_back("L", L);
    }
    s.dmetric = sasaki_lift(*s.finsler, s.chart);
  } else if (kind == "coordinate") {
    s.kind = ScenarioKind::Coordinate;
    for (const char* k : {"g", "h", "F", "L", "relaxed"})
      if (root.contains(k)) r.invalid(std::string("\"") + k + "\" is not used by coordinate scenarios");
    s.coordinate_metric = r.exprs(r.need(root, "G"), static_cast<std::size_t>(d * d), d, "G");
    NConnectionField N;
    if (root.contains("N")) {
      N = NConnectionField::zero(n, m);
      N.coeffs = r.exprs(root["N"], static_cast<std::size_t>(n * m), d, "N");
    } else {
      N = nconnection_from_coordinate(s.chart, s.coordinate_metric);
    }
    s.dmetric = dmetric_from_coordinate(s.chart, s.coordinate_metric, N);
    for (int k = 0; k < d * d; ++k) s.fields.emplace_back("G[" + std::to_string(k) + "]", s.coordinate_metric[k]);
    if (root.contains("N"))
      for (int k = 0; k < n * m; ++k) s.fields.emplace_back("N[" + std::to_string(k) + "]", N.coeffs[k]);
  } else {
    r.invalid("\"kind\" must be \"metric\", \"finsler\" or \"coordinate\"");
  }

  s.conformal_factor = root.contains("conformal_factor") ? r.expr(root["conformal_factor"], d, "conformal_factor")
                                                         : parse_expression("1 + 0.1*sin(u1)", d);
  if (root.contains("conformal_factor")) s.fields.emplace_back("conformal_factor", s.conformal_factor);

  if (auto it = root.find("vacuum"); it != root.end()) {
    if (!it->is_boolean()) r.invalid("\"vacuum\" must be a boolean");
    s.vacuum = it->get<bool>();
  }
  if (auto it = root.find("conformally_flat"); it != root.end()) {
    if (!it->is_boolean()) r.invalid("\"conformally_flat\" must be a boolean");
    s.conformally_flat = it->get<bool>();
  }

  const json& sample = r.need(root, "sample");
  if (!sample.is_object()) r.invalid("\"sample\" must be an object");
  check_keys(sample, {"box", "points"}, "sample");
  const json& box = r.need(sample, "box");
  if (!box.is_array() || static_cast<int>(box.size()) != d)
    r.invalid("sample.box must list " + std::to_string(d) + " intervals");
  for (const auto& iv : box) {
    if (!iv.is_array() || iv.size() != 2) r.invalid("each sample.box entry must be [lo, hi]");
    const double lo = as_number(iv[0], "box bound"), hi = as_number(iv[1], "box bound");
    if (!(lo <= hi)) r.invalid("sample.box interval with lo > hi");
    s.box.emplace_back(lo, hi);
  }
  if (auto it = sample.find("points"); it != sample.end()) {
    if (!it->is_array()) r.invalid("sample.points must be an array");
    for (const auto& p : *it) {
      if (!p.is_array() || static_cast<int>(p.size()) != d)
        r.invalid("each sample point needs " + std::to_string(d) + " coordinates");
      std::vector<double> x;
      for (int k = 0; k < d; ++k) {
        x.push_back(as_number(p[k], "sample point coordinate"));
        if (x[k] < s.box[k].first || x[k] > s.box[k].second) r.invalid("sample point outside the domain box");
      }
      s.points.push_back(std::move(x));
    }
  }

  if (auto it = root.find("tolerances"); it != root.end()) {
    if (!it->is_object()) r.invalid("\"tolerances\" must be an object");
    for (auto t = it->begin(); t != it->end(); ++t) {
      const double v = as_number(t.value(), "tolerance " + t.key());
      if (!(v > 0.0)) r.invalid("tolerance " + t.key() + " must be positive");
      s.tolerances[t.key()] = v;
    }
  }

  // Evaluate everything once at the box center: expressions must be finite
  // there and the declared signature must match.
  std::vector<double> c = center(s.box);
  try {
    for (const auto& [label, f] : s.fields)
      if (!std::isfinite(f.eval(c))) r.invalid(label + " is not finite at the box center");
    if (s.kind == ScenarioKind::Coordinate && root.contains("N")) {
      // the off-diagonal blocks of G must be N h
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) {
          double nh = 0.0;
          for (int b = 0; b < m; ++b) nh += s.dmetric.N.at(i, b).eval(c) * s.dmetric.h[b * m + a].eval(c);
          if (std::abs(nh - s.coordinate_metric[i * d + n + a].eval(c)) > 1e-10)
            r.invalid("off-diagonal blocks of G disagree with N h at the box center");
        }
    }
    validate_signature(s, c);
    const double w = s.conformal_factor.eval(c);
    if (!(w > 0.0)) r.invalid("conformal_factor must be positive on the domain");
  } catch (const ParseFailure&) {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    fail(ErrorCode::ValidationError, std::string("scenario does not evaluate at the box center: ") + e.what());
  }
  return s;
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : catalog()) out.push_back(k);
  return out;
}

const std::string& catalog_source(const std::string& name) {
  auto it = catalog().find(name);
  if (it == catalog().end()) fail(ErrorCode::InvalidArgument, "no catalog scenario named \"" + name + "\"");
  return it->second;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (catalog().count(name_or_path)) return parse_scenario(catalog_source(name_or_path));
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read scenario file \"" + name_or_path + "\" (and no catalog entry by that name)");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::uint64_t Lcg::next() {
  state_ = 6364136223846793005ULL * state_ + 1442695040888963407ULL;
  return state_;
}

double Lcg::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<std::vector<double>> sample_points(const Scenario& s, std::uint64_t seed, int count) {
  if (count < 0) fail(ErrorCode::InvalidArgument, "sample count must be nonnegative");
  std::vector<std::vector<double>> out;
  for (const auto& p : s.points) {
    if (static_cast<int>(out.size()) == count) break;
    out.push_back(p);
  }
  Lcg rng(seed);
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> x;
    for (auto [lo, hi] : s.box) x.push_back(lo + (hi - lo) * rng.uniform());
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace nonholo
