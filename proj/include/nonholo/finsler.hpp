#pragma once

#include <span>
#include <vector>

#include "nonholo/geometry.hpp"

namespace nonholo {

// Generating function on the slit tangent chart u = (x^1..x^n, y^1..y^n).
// L = F^2 is the primitive that gets differentiated. In relaxed-signature
// mode only nondegeneracy of the Hessian is required, and a scenario may give
// L directly (F is then sqrt|L|).
struct FinslerFunction {
  int n = 2;
  ScalarField F;  // may be empty when only L is known
  ScalarField L;
  bool relaxed = false;

  int arity() const { return 2 * n; }
  static FinslerFunction from_F(int n, ScalarField F, bool relaxed = false);
  static FinslerFunction from_L(int n, ScalarField L);
};

// All Finsler objects at one point. With L at jet order q:
//   g (Hessian), ginv and G (semispray) carry order q - 2, N carries q - 3.
struct FinslerJets {
  int n = 2;
  Jet L;
  JetArray g;     // g~_ij = 1/2 d^2 L / dy^i dy^j
  JetArray ginv;
  JetArray G;     // G~^k = 1/4 g~^kj (y^i d^2 L / dy^j dx^i - dL/dx^j)
  JetArray N;     // N~_j^a = dG~^a / dy^j, stored (j, a)
};

// ZeroSection when |y| < 1e-12; SingularHessian when |det g~| < 1e-12.
FinslerJets finsler_jets(const FinslerFunction& f, std::span<const double> point, int order);

RealArray hessian_metric(const FinslerFunction& f, std::span<const double> point);
RealArray semispray(const FinslerFunction& f, std::span<const double> point);
RealArray canonical_nconnection(const FinslerFunction& f, std::span<const double> point);

// Sasaki d-metric jets (g = h = g~, N = N~) for the d-connection builders.
DMetricJets sasaki_jets(const FinslerFunction& f, std::span<const double> point, int order);
// Field form of the Sasaki lift. Its coefficient fields are pointwise jet
// maps, so they support dmetric_jets up to order 2.
DMetricField sasaki_lift(const FinslerFunction& f, const ChartSpec& chart);

struct HomogeneityReport {
  // Residuals are scaled: |F(x, b y) - b F| / (1 + |F|),
  // |y^i dF/dy^i - F| / (1 + |F|), |y^i y^j g~_ij - L| / (1 + |L|).
  double scaling = 0.0;
  double euler = 0.0;
  double quadratic = 0.0;
  double max() const { return std::max(scaling, std::max(euler, quadratic)); }
};
HomogeneityReport homogeneity_check(const FinslerFunction& f, std::span<const double> point,
                                    std::span<const double> betas);

// Number of positive and negative eigenvalues of a symmetric matrix.
struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  bool operator==(const Inertia&) const = default;
};
Inertia inertia(const RealArray& S, double tol = 1e-12);

// e with e^T Fmat e = G, by congruence to the common signature normal form:
// S = Q |D|^{1/2} sgn(D) |D|^{1/2} Q^T with eigenvalues sorted descending and
// each eigenvector's first nonzero entry positive, then e = A_F^{-T} A_G^T.
// SignatureMismatch if the inertias differ.
RealArray solve_finsler_vierbein(const RealArray& G, const RealArray& Fmat);

}  // namespace nonholo
