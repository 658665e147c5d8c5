#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nonholo/jet.hpp"

namespace nonholo {

// A smooth map on a chart of the given arity. Evaluation is defined on jets of
// the coordinates, so a field composes with any jet-valued substitution.
class ScalarField {
 public:
  using Fn = std::function<Jet(std::span<const Jet>)>;

  ScalarField() = default;
  ScalarField(int arity, std::string label, Fn fn);

  static ScalarField constant(int arity, double value);
  static ScalarField zero(int arity) { return constant(arity, 0.0); }
  static ScalarField coordinate(int arity, int index);

  int arity() const { return arity_; }
  const std::string& label() const { return label_; }
  bool valid() const { return static_cast<bool>(fn_); }
  // Exact constants never depend on the point; they evaluate to exact jets.
  bool is_constant() const { return constant_; }
  double constant_value() const { return constant_value_; }

  Jet operator()(std::span<const Jet> u) const;
  double eval(std::span<const double> point) const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);

 private:
  int arity_ = 0;
  std::string label_;
  Fn fn_;
  bool constant_ = false;
  double constant_value_ = 0.0;
};

// A field defined pointwise by a jet computation: fn(point, order) must return
// the jet of the field at point to at least the requested order. Input jets
// are handled by Taylor substitution, so the field composes like any other.
ScalarField pointwise_field(int arity, std::string label, std::function<Jet(std::span<const double>, int)> fn);

// Coordinate jets u_k + t_k at a point, all of the given order.
std::vector<Jet> coordinate_jets(std::span<const double> point, int order);

// All partials of f at point up to order (<= 5).
Jet eval_jet(const ScalarField& f, std::span<const double> point, int order);

// Central finite-difference estimate of one partial derivative (multi-index
// as a list of variable indices) with two-level Richardson extrapolation.
// Independent of the jet code path: f is sampled only through eval().
struct FdEstimate {
  double value = 0.0;
  // |extrapolated - first-level| used as a convergence indicator.
  double spread = 0.0;
  bool converged = true;
};
FdEstimate fd_partial(const ScalarField& f, std::span<const double> point, std::span<const int> multi_index,
                      double base_step = 1e-3);

// Step used for a derivative of total order k. Roundoff of a k-th central
// difference grows like eps / h^k, so the base step is widened above order 2
// (x30, x100, x200 for orders 3, 4, 5).
double fd_step_for_order(int k, double base_step = 1e-3);

struct CrosscheckResult {
  double residual = 0.0;
  bool converged = true;
  int partials = 0;
};
// max |jet partial - fd partial| / (1 + |jet partial|) over all multi-indices
// of length 1..order.
CrosscheckResult jet_crosscheck(const ScalarField& f, std::span<const double> point, int order);

}  // namespace nonholo
