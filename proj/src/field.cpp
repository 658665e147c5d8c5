#include "nonholo/field.hpp"

#include <algorithm>
#include <cmath>

#include "nonholo/errors.hpp"

namespace nonholo {

ScalarField::ScalarField(int arity, std::string label, Fn fn) : arity_(arity), label_(std::move(label)), fn_(std::move(fn)) {}

ScalarField ScalarField::constant(int arity, double value) {
  ScalarField f(arity, std::to_string(value), [value](std::span<const Jet>) { return Jet::exact(value); });
  f.constant_ = true;
  f.constant_value_ = value;
  return f;
}

ScalarField ScalarField::coordinate(int arity, int index) {
  return ScalarField(arity, "u" + std::to_string(index + 1), [index](std::span<const Jet> u) { return u[index]; });
}

Jet ScalarField::operator()(std::span<const Jet> u) const {
  if (!fn_) fail(ErrorCode::InvalidArgument, "evaluating an empty scalar field");
  if (static_cast<int>(u.size()) != arity_) fail(ErrorCode::InvalidArgument, "arity mismatch for field " + label_);
  return fn_(u);
}

double ScalarField::eval(std::span<const double> point) const {
  auto u = coordinate_jets(point, 0);
  return (*this)(u).value();
}

namespace {

ScalarField combine(const ScalarField& a, const ScalarField& b, const char* op,
                    std::function<Jet(const Jet&, const Jet&)> f) {
  if (a.arity() != b.arity()) fail(ErrorCode::InvalidArgument, "arity mismatch combining fields");
  return ScalarField(a.arity(), "(" + a.label() + op + b.label() + ")",
                     [a, b, f](std::span<const Jet> u) { return f(a(u), b(u)); });
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.is_constant() && b.is_constant()) return ScalarField::constant(a.arity(), a.constant_value() + b.constant_value());
  return combine(a, b, "+", [](const Jet& x, const Jet& y) { return x + y; });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (a.is_constant() && b.is_constant()) return ScalarField::constant(a.arity(), a.constant_value() - b.constant_value());
  return combine(a, b, "-", [](const Jet& x, const Jet& y) { return x - y; });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.is_constant() && b.is_constant()) return ScalarField::constant(a.arity(), a.constant_value() * b.constant_value());
  return combine(a, b, "*", [](const Jet& x, const Jet& y) { return x * y; });
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return combine(a, b, "/", [](const Jet& x, const Jet& y) { return x / y; });
}

ScalarField operator*(double s, const ScalarField& a) { return ScalarField::constant(a.arity(), s) * a; }

ScalarField pointwise_field(int arity, std::string label, std::function<Jet(std::span<const double>, int)> fn) {
  return ScalarField(arity, std::move(label), [arity, fn](std::span<const Jet> u) {
    std::vector<double> x(static_cast<std::size_t>(arity));
    std::vector<Jet> delta(static_cast<std::size_t>(arity));
    int order = 0;
    for (int k = 0; k < arity; ++k) {
      x[k] = u[k].value();
      if (!u[k].is_exact()) {
        order = std::max(order, u[k].order());
        delta[k] = u[k] - x[k];
      }
    }
    Jet t = fn(x, order);
    if (order == 0 || t.is_exact()) return Jet::exact(t.value());
    return substitute(t, delta);
  });
}

std::vector<Jet> coordinate_jets(std::span<const double> point, int order) {
  if (order < 0 || order > kMaxJetOrder) fail(ErrorCode::OrderUnsupported, "jet order must lie in [0, 5]");
  const int n = static_cast<int>(point.size());
  std::vector<Jet> u;
  u.reserve(point.size());
  for (int k = 0; k < n; ++k) u.push_back(Jet::variable(n, order, k, point[k]));
  return u;
}

Jet eval_jet(const ScalarField& f, std::span<const double> point, int order) {
  if (order > kMaxJetOrder) fail(ErrorCode::OrderUnsupported, "requested jet order " + std::to_string(order));
  auto u = coordinate_jets(point, order);
  Jet j = f(u);
  if (j.is_exact()) j = Jet::constant(static_cast<int>(point.size()), order, j.value());
  for (double c : j.coeffs())
    if (!std::isfinite(c)) fail(ErrorCode::EvaluationFailure, "non-finite jet coefficient in " + f.label());
  return j;
}

double fd_step_for_order(int k, double base_step) {
  // Widening factors keep roundoff (~eps / h^k) below the h^6 truncation
  // error left after two Richardson levels.
  static constexpr double widen[] = {1.0, 1.0, 1.0, 30.0, 100.0, 200.0};
  return base_step * widen[std::clamp(k, 0, 5)];
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double central_difference(const ScalarField& f, std::span<const double> point, const std::vector<int>& exps, double h) {
  const int n = static_cast<int>(point.size());
  std::vector<int> active;
  for (int k = 0; k < n; ++k)
    if (exps[k] > 0) active.push_back(k);
  std::vector<int> j(active.size(), 0);
  std::vector<double> x(point.begin(), point.end());
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t s = 0; s < active.size(); ++s) {
      const int k = active[s];
      const int a = exps[k];
      x[k] = point[k] + (0.5 * a - j[s]) * h;
      w *= ((j[s] % 2) ? -1.0 : 1.0) * binomial(a, j[s]);
    }
    sum += w * f.eval(x);
    std::size_t s = 0;
    for (; s < active.size(); ++s) {
      if (++j[s] <= exps[active[s]]) break;
      j[s] = 0;
    }
    if (s == active.size()) break;
  }
  int total = 0;
  for (int a : exps) total += a;
  return sum / std::pow(h, total);
}

}  // namespace

FdEstimate fd_partial(const ScalarField& f, std::span<const double> point, std::span<const int> multi_index,
                      double base_step) {
  std::vector<int> exps(point.size(), 0);
  for (int k : multi_index) ++exps.at(static_cast<std::size_t>(k));
  const double h = fd_step_for_order(static_cast<int>(multi_index.size()), base_step);
  if (multi_index.empty()) return {f.eval(point), 0.0, true};
  const double d0 = central_difference(f, point, exps, h);
  const double d1 = central_difference(f, point, exps, h / 2);
  const double d2 = central_difference(f, point, exps, h / 4);
  const double r0 = (4 * d1 - d0) / 3;
  const double r1 = (4 * d2 - d1) / 3;
  const double r = (16 * r1 - r0) / 15;
  FdEstimate est;
  est.value = r;
  est.spread = std::abs(r - r1);
  est.converged = std::isfinite(r) && est.spread <= 1e-4 * (1.0 + std::abs(r));
  return est;
}

CrosscheckResult jet_crosscheck(const ScalarField& f, std::span<const double> point, int order) {
  Jet j = eval_jet(f, point, order);
  CrosscheckResult out;
  for (const auto& [mi, value] : j.partials()) {
    if (mi.empty()) continue;
    FdEstimate est = fd_partial(f, point, mi);
    out.residual = std::max(out.residual, std::abs(value - est.value) / (1.0 + std::abs(value)));
    out.converged = out.converged && est.converged;
    ++out.partials;
  }
  return out;
}

}  // namespace nonholo
