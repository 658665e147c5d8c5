#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace nonholo {

inline constexpr int kMaxJetOrder = 5;
inline constexpr int kMaxJetVars = 8;

// Monomials x^a in nvars variables with |a| <= kMaxJetOrder, enumerated by
// degree first. A jet of order p therefore occupies a prefix of this basis,
// and truncation is a resize.
class JetBasis {
 public:
  struct MulEntry {
    std::uint32_t a, b, r;
  };

  static const JetBasis& get(int nvars);

  int nvars() const { return nvars_; }
  int size(int order) const { return sizes_[order]; }
  int degree(int idx) const { return degree_[idx]; }
  int exponent(int idx, int var) const { return exps_[idx * nvars_ + var]; }
  // Index of monomial(idx) * x_var, or -1 past kMaxJetOrder.
  int shift(int idx, int var) const { return shift_[idx * nvars_ + var]; }
  int index_of(std::span<const int> exps) const;
  // Product pairs with degree(a)+degree(b) <= order form a prefix of mul_.
  std::span<const MulEntry> mul_table(int order) const {
    return {mul_.data(), static_cast<std::size_t>(mul_count_[order])};
  }

 private:
  explicit JetBasis(int nvars);

  int nvars_;
  int sizes_[kMaxJetOrder + 1]{};
  std::vector<std::uint8_t> exps_;
  std::vector<std::uint8_t> degree_;
  std::vector<int> shift_;
  std::vector<MulEntry> mul_;
  int mul_count_[kMaxJetOrder + 1]{};
  std::map<std::vector<int>, int> index_;
};

// Truncated multivariate Taylor polynomial. Coefficients are stored
// normalized (c_a = d^a f / a!), so products are plain truncated convolutions.
//
// A jet without variables is exact: a default-constructed Jet is an exact
// zero and Jet::exact(v) an exact constant. Exact jets behave as scalars and
// never lower the order of an expression; structural zeros of connection
// tables use them.
class Jet {
 public:
  static constexpr int kExactOrder = 1 << 20;

  Jet() = default;
  static Jet constant(int nvars, int order, double value);
  static Jet variable(int nvars, int order, int var, double value);
  static Jet exact(double value);

  bool is_exact() const { return nvars_ == 0; }
  bool is_exact_zero() const { return c_.empty(); }
  int nvars() const { return nvars_; }
  int order() const { return is_exact() ? kExactOrder : order_; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  double coeff(int idx) const { return c_.empty() ? 0.0 : c_[idx]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs_mut() { return c_; }

  // Partial derivative for a multi-index given as a list of variable indices
  // (order irrelevant; length <= order()).
  double partial(std::span<const int> multi_index) const;
  double partial(std::initializer_list<int> multi_index) const {
    return partial(std::span<const int>(multi_index.begin(), multi_index.size()));
  }
  // All partials keyed by canonically sorted multi-index.
  std::map<std::vector<int>, double> partials() const;

  Jet truncated(int order) const;
  Jet derivative(int var) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
  friend Jet operator/(double s, const Jet& a);

 private:
  friend Jet compose(const Jet& a, std::span<const double> taylor);
  int nvars_ = 0;
  int order_ = 0;
  std::vector<double> c_;
};

// Sum_k taylor[k] * (a - a(0))^k, the composition of a univariate function
// with Taylor coefficients taylor[] about a.value().
Jet compose(const Jet& a, std::span<const double> taylor);

// Sum_a taylor_a * prod_k delta_k^{a_k}: evaluates the Taylor polynomial
// `taylor` (nvars = delta.size()) at increments delta that vanish at the base
// point. Used to pull a jet computed at a point back onto arbitrary input jets.
Jet substitute(const Jet& taylor, std::span<const Jet> delta);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
Jet abs(const Jet& a);
Jet reciprocal(const Jet& a);
Jet pow(const Jet& a, double r);
Jet pow(const Jet& a, const Jet& b);
Jet ipow(const Jet& a, int k);

}  // namespace nonholo
