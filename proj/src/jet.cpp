#include "nonholo/jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>

#include "nonholo/errors.hpp"

namespace nonholo {

namespace {

void enumerate(int nvars, int degree, int var, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (var == nvars - 1) {
    cur[var] = degree;
    out.push_back(cur);
    return;
  }
  for (int k = degree; k >= 0; --k) {
    cur[var] = k;
    enumerate(nvars, degree - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

JetBasis::JetBasis(int nvars) : nvars_(nvars) {
  std::vector<std::vector<int>> monos;
  std::vector<int> cur(static_cast<std::size_t>(nvars), 0);
  for (int d = 0; d <= kMaxJetOrder; ++d) {
    enumerate(nvars, d, 0, cur, monos);
    sizes_[d] = static_cast<int>(monos.size());
  }
  const int total = static_cast<int>(monos.size());
  exps_.resize(static_cast<std::size_t>(total * nvars));
  degree_.resize(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    int deg = 0;
    for (int k = 0; k < nvars; ++k) {
      exps_[i * nvars + k] = static_cast<std::uint8_t>(monos[i][k]);
      deg += monos[i][k];
    }
    degree_[i] = static_cast<std::uint8_t>(deg);
    index_.emplace(monos[i], i);
  }
  shift_.assign(static_cast<std::size_t>(total * nvars), -1);
  for (int i = 0; i < total; ++i) {
    if (degree_[i] == kMaxJetOrder) continue;
    for (int k = 0; k < nvars; ++k) {
      std::vector<int> e = monos[i];
      ++e[k];
      shift_[i * nvars + k] = index_.at(e);
    }
  }
  std::array<std::vector<MulEntry>, kMaxJetOrder + 1> by_degree;
  std::vector<int> e(static_cast<std::size_t>(nvars));
  for (int a = 0; a < total; ++a) {
    for (int b = 0; b < total; ++b) {
      int d = degree_[a] + degree_[b];
      if (d > kMaxJetOrder) continue;
      for (int k = 0; k < nvars; ++k) e[k] = monos[a][k] + monos[b][k];
      by_degree[d].push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                              static_cast<std::uint32_t>(index_.at(e))});
    }
  }
  for (int d = 0; d <= kMaxJetOrder; ++d) {
    mul_.insert(mul_.end(), by_degree[d].begin(), by_degree[d].end());
    mul_count_[d] = static_cast<int>(mul_.size());
  }
}

const JetBasis& JetBasis::get(int nvars) {
  static std::array<std::unique_ptr<JetBasis>, kMaxJetVars + 1> cache;
  static std::array<std::once_flag, kMaxJetVars + 1> flags;
  if (nvars < 1 || nvars > kMaxJetVars) fail(ErrorCode::InvalidArgument, "jet variable count out of range");
  std::call_once(flags[nvars], [nvars] { cache[nvars].reset(new JetBasis(nvars)); });
  return *cache[nvars];
}

int JetBasis::index_of(std::span<const int> exps) const {
  auto it = index_.find(std::vector<int>(exps.begin(), exps.end()));
  return it == index_.end() ? -1 : it->second;
}

Jet Jet::constant(int nvars, int order, double value) {
  if (order < 0 || order > kMaxJetOrder) fail(ErrorCode::OrderUnsupported, "jet order must lie in [0, 5]");
  Jet j;
  j.nvars_ = nvars;
  j.order_ = order;
  j.c_.assign(static_cast<std::size_t>(JetBasis::get(nvars).size(order)), 0.0);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int order, int var, double value) {
  Jet j = constant(nvars, order, value);
  if (order >= 1) j.c_[1 + var] = 1.0;
  return j;
}

Jet Jet::exact(double value) {
  Jet j;
  if (value != 0.0) j.c_.assign(1, value);
  return j;
}

double Jet::partial(std::span<const int> multi_index) const {
  if (is_exact()) return multi_index.empty() ? value() : 0.0;
  if (static_cast<int>(multi_index.size()) > order_) fail(ErrorCode::OrderUnsupported, "partial beyond jet order");
  std::vector<int> e(static_cast<std::size_t>(nvars_), 0);
  for (int k : multi_index) {
    if (k < 0 || k >= nvars_) fail(ErrorCode::InvalidArgument, "partial index out of range");
    ++e[k];
  }
  const int idx = JetBasis::get(nvars_).index_of(e);
  double scale = 1.0;
  for (int x : e) scale *= factorial(x);
  return c_[idx] * scale;
}

std::map<std::vector<int>, double> Jet::partials() const {
  std::map<std::vector<int>, double> out;
  if (is_exact()) {
    out[{}] = value();
    return out;
  }
  const JetBasis& basis = JetBasis::get(nvars_);
  for (int i = 0; i < static_cast<int>(c_.size()); ++i) {
    std::vector<int> mi;
    double scale = 1.0;
    for (int k = 0; k < nvars_; ++k) {
      const int p = basis.exponent(i, k);
      scale *= factorial(p);
      for (int r = 0; r < p; ++r) mi.push_back(k);
    }
    out[mi] = c_[i] * scale;
  }
  return out;
}

Jet Jet::truncated(int order) const {
  if (is_exact() || order >= order_) return *this;
  if (order < 0) fail(ErrorCode::OrderUnsupported, "negative jet order");
  Jet j;
  j.nvars_ = nvars_;
  j.order_ = order;
  j.c_.assign(c_.begin(), c_.begin() + JetBasis::get(nvars_).size(order));
  return j;
}

Jet Jet::derivative(int var) const {
  if (is_exact()) return Jet();
  if (order_ == 0) fail(ErrorCode::OrderUnsupported, "derivative of an order-0 jet");
  const JetBasis& basis = JetBasis::get(nvars_);
  Jet j;
  j.nvars_ = nvars_;
  j.order_ = order_ - 1;
  const int n = basis.size(order_ - 1);
  j.c_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) j.c_[i] = (basis.exponent(i, var) + 1) * c_[basis.shift(i, var)];
  return j;
}

Jet Jet::operator-() const {
  Jet j = *this;
  for (double& x : j.c_) x = -x;
  return j;
}

Jet& Jet::operator+=(double s) {
  if (c_.empty()) {
    if (s != 0.0) c_.assign(1, s);
  } else {
    c_[0] += s;
  }
  return *this;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.is_exact()) return *this += o.value();
  if (is_exact()) {
    const double s = value();
    *this = o;
    return *this += s;
  }
  if (o.order_ < order_) {
    order_ = o.order_;
    c_.resize(o.c_.size());
  }
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet& Jet::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_exact()) return a.value() == 0.0 ? Jet() : b * a.value();
  if (b.is_exact()) return b.value() == 0.0 ? Jet() : a * b.value();
  const int p = std::min(a.order_, b.order_);
  Jet r;
  r.nvars_ = a.nvars_;
  r.order_ = p;
  const JetBasis& basis = JetBasis::get(a.nvars_);
  r.c_.assign(static_cast<std::size_t>(basis.size(p)), 0.0);
  const double* ac = a.c_.data();
  const double* bc = b.c_.data();
  double* rc = r.c_.data();
  for (const auto& e : basis.mul_table(p)) rc[e.r] += ac[e.a] * bc[e.b];
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet substitute(const Jet& taylor, std::span<const Jet> delta) {
  if (taylor.is_exact()) return taylor;
  const int nv = static_cast<int>(delta.size());
  if (taylor.nvars() != nv) fail(ErrorCode::InvalidArgument, "substitute: variable count mismatch");
  int p = 0;
  bool any = false;
  for (const Jet& d : delta)
    if (!d.is_exact_zero()) {
      if (d.is_exact()) fail(ErrorCode::InvalidArgument, "substitute: increments must vanish at the base point");
      p = std::max(p, d.order());
      any = true;
    }
  if (!any) return Jet::exact(taylor.value());
  p = std::min(p, taylor.order());
  const JetBasis& B = JetBasis::get(nv);
  const int count = B.size(p);
  // monomial idx = monomial(parent[idx]) * delta[pvar[idx]]
  std::vector<int> parent(static_cast<std::size_t>(count), -1), pvar(static_cast<std::size_t>(count), -1);
  for (int idx = 0; idx < count; ++idx)
    for (int k = 0; k < nv; ++k) {
      const int child = B.shift(idx, k);
      if (child > 0 && child < count && parent[child] < 0) {
        parent[child] = idx;
        pvar[child] = k;
      }
    }
  std::vector<Jet> mono(static_cast<std::size_t>(count));
  mono[0] = Jet::exact(1.0);
  Jet out = Jet::exact(taylor.value());
  for (int idx = 1; idx < count; ++idx) {
    const Jet& base = mono[parent[idx]];
    const Jet& d = delta[pvar[idx]];
    if (base.is_exact_zero() || d.is_exact_zero()) continue;
    mono[idx] = base * d;
    const double c = taylor.coeff(idx);
    if (c != 0.0) out += mono[idx] * c;
  }
  return out;
}

Jet compose(const Jet& a, std::span<const double> taylor) {
  if (a.is_exact()) return Jet::exact(taylor[0]);
  Jet h = a;
  h.c_[0] = 0.0;
  const int p = a.order_;
  Jet r = Jet::constant(a.nvars_, p, taylor[p]);
  for (int k = p - 1; k >= 0; --k) {
    r = r * h;
    r.c_[0] += taylor[k];
  }
  return r;
}

namespace {

int needed(const Jet& a) { return a.is_exact() ? 0 : a.order(); }

[[noreturn]] void domain(const char* what) { fail(ErrorCode::EvaluationFailure, what); }

}  // namespace

Jet exp(const Jet& a) {
  const int p = needed(a);
  std::array<double, kMaxJetOrder + 1> t{};
  const double e = std::exp(a.value());
  for (int k = 0; k <= p; ++k) t[k] = e / factorial(k);
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double x = a.value();
  if (!(x > 0.0)) domain("log of a nonpositive value");
  const int p = needed(a);
  std::array<double, kMaxJetOrder + 1> t{};
  t[0] = std::log(x);
  for (int k = 1; k <= p; ++k) t[k] = ((k % 2) ? 1.0 : -1.0) / (k * std::pow(x, k));
  return compose(a, t);
}

Jet sin(const Jet& a) {
  const int p = needed(a);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {s, c, -s, -c};
  std::array<double, kMaxJetOrder + 1> t{};
  for (int k = 0; k <= p; ++k) t[k] = cyc[k % 4] / factorial(k);
  return compose(a, t);
}

Jet cos(const Jet& a) {
  const int p = needed(a);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cyc[4] = {c, -s, -c, s};
  std::array<double, kMaxJetOrder + 1> t{};
  for (int k = 0; k <= p; ++k) t[k] = cyc[k % 4] / factorial(k);
  return compose(a, t);
}

Jet pow(const Jet& a, double r) {
  const double x = a.value();
  const int p = needed(a);
  if (r == std::floor(r) && std::abs(r) <= 64) {
    const int k = static_cast<int>(r);
    if (k >= 0) return ipow(a, k);
    return reciprocal(ipow(a, -k));
  }
  if (x < 0.0) domain("fractional power of a negative value");
  if (x == 0.0 && p > 0) domain("fractional power at zero is not differentiable");
  std::array<double, kMaxJetOrder + 1> t{};
  double binom = 1.0;
  for (int k = 0; k <= p; ++k) {
    t[k] = binom * std::pow(x, r - k);
    binom *= (r - k) / (k + 1);
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  if (a.value() < 0.0) domain("sqrt of a negative value");
  return pow(a, 0.5);
}

Jet abs(const Jet& a) {
  const double x = a.value();
  if (x == 0.0 && needed(a) > 0) domain("abs is not differentiable at zero");
  return x < 0.0 ? -a : a;
}

Jet reciprocal(const Jet& a) {
  const double x = a.value();
  if (x == 0.0) domain("division by zero");
  const int p = needed(a);
  std::array<double, kMaxJetOrder + 1> t{};
  double v = 1.0 / x;
  for (int k = 0; k <= p; ++k) {
    t[k] = v;
    v *= -1.0 / x;
  }
  return compose(a, t);
}

Jet ipow(const Jet& a, int k) {
  if (k < 0) return reciprocal(ipow(a, -k));
  Jet result = Jet::exact(1.0);
  Jet base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

Jet pow(const Jet& a, const Jet& b) {
  if (b.is_exact()) return pow(a, b.value());
  return exp(b * log(a));
}

}  // namespace nonholo
