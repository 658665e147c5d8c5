#pragma once

#include <span>
#include <vector>

#include "nonholo/geometry.hpp"
#include "nonholo/tensor.hpp"

namespace nonholo {

enum class ConnectionKind { Canonical, Cartan, Berwald, Chern, LeviCivita, Custom };
const char* connection_kind_name(ConnectionKind k);

// A linear connection in the N-adapted frame e_alpha = (e_i, e_a), held as jets
// at one point so that frame derivatives of the coefficients are available.
//   Gamma(g, a, b) = Gamma^g_{ab},  D_{e_b} e_a = Gamma^g_{ab} e_g
//   W(a, b, g)     = W_{ab}^g,      [e_a, e_b] = W_{ab}^g e_g
// G is the adapted metric diag(g, h) and Ginv its inverse.
struct DConnection {
  int n = 2;
  int m = 2;
  ConnectionKind kind = ConnectionKind::Custom;
  JetArray N;
  JetArray G;
  JetArray Ginv;
  JetArray Gamma;
  JetArray W;
  std::vector<double> point;

  int dim() const { return n + m; }
  Jet e(int alpha, const Jet& f) const { return elongated(N, n, alpha, f); }
};

// The four N-adapted families at the base point.
struct DConnectionCoeffs {
  ConnectionKind kind = ConnectionKind::Custom;
  RealArray L_h;  // L^i_jk  (i, j, k)
  RealArray L_v;  // L^a_bk  (a, b, k)
  RealArray C_h;  // C^i_jc  (i, j, c)
  RealArray C_v;  // C^a_bc  (a, b, c)
  std::vector<double> point;
};
DConnectionCoeffs coefficients(const DConnection& D);

// Canonical d-connection of a d-metric (h- and v-parts metric compatible,
// vanishing pure h- and pure v-torsion). Coefficients lose one jet order.
DConnection canonical_dconnection(const DMetricJets& dm, std::span<const double> point);
DConnection canonical_dconnection(const DMetricField& dm, std::span<const double> point, int order);

// Normal (Cartan), Berwald or Chern d-connection of a Sasaki-type d-metric
// (g = h under a = n + i). NotSasaki if the blocks differ beyond 1e-10.
DConnection cartan_dconnection(const DMetricJets& sasaki, ConnectionKind kind, std::span<const double> point);

// Coordinate Christoffel symbols Gamma(g, a, b) of a coordinate metric.
JetArray christoffel(const JetArray& G);
RealArray levi_civita(const std::vector<ScalarField>& G, int dim, std::span<const double> point);

// Levi-Civita connection of the metric assembled from dm, re-expressed in the
// N-adapted frame.
DConnection levi_civita_adapted(const DMetricJets& dm, std::span<const double> point);

// Coordinate-basis metric jets assembled from a d-metric.
JetArray assemble_metric_jets(const DMetricJets& dm);

// T(g, a, b) = T^g_{ab} = T(e_b, e_a)^g = Gamma^g_{ab} - Gamma^g_{ba} - W_{ba}^g.
JetArray torsion(const DConnection& D);
TensorBlock dtorsion(const DConnection& D);

// R(t, a, b, g) = R^t_{abg}, R(e_g, e_b) e_a = R^t_{abg} e_t.
JetArray curvature(const DConnection& D);

// Covariant derivative of a tensor with the given index variances; the new
// (derivative) index is appended last.
JetArray covariant_derivative(const DConnection& D, const JetArray& T, const std::vector<Variance>& var);

// Nonmetricity D_g g_{ab} as (a, b, g).
JetArray nonmetricity(const DConnection& D);

struct CurvaturePackage {
  RealArray riemann;  // R^t_{abg}
  RealArray torsion;  // T^g_{ab}
  RealArray ricci;    // R_{ab} = R^t_{abt}
  double scalar = 0.0;
  RealArray einstein;  // R_{ab} - g_{ab} sR / 2
  double lambda_spinor = 0.0;
  RealArray phi;  // 3 Lambda g_{ab} - R_{ab} / 2
  RealArray metric;
  RealArray metric_inv;
};
// Jet-level Ricci contraction and scalar; used where derivatives are needed.
JetArray ricci_jets(const JetArray& R);
Jet scalar_jets(const JetArray& Ric, const JetArray& Ginv);
CurvaturePackage contractions(const DConnection& D, const JetArray& R);
CurvaturePackage curvature_package(const DConnection& D);

// Q = D - nabla in the N-adapted frame.
JetArray distortion(const DConnection& D, const DConnection& lc);
// Curvature of D rebuilt from the Levi-Civita curvature plus distortion terms;
// compare with curvature(D).
JetArray distorted_curvature(const DConnection& lc, const JetArray& Q);

struct LcConstraintResidual {
  double L = 0.0;      // max |L^c_aj - e_a N_j^c|
  double C = 0.0;      // max |C^i_jb|
  double Omega = 0.0;  // max |Omega^a_ji|
  double max() const { return std::max(L, std::max(C, Omega)); }
};
LcConstraintResidual lc_constraint_residual(const DConnection& D);

// Ricci identity with torsion,
//   (D_m D_n - D_n D_m) V^t + T^g_{nm} D_g V^t = R^t_{anm} V^a,
// for a vector field given by jets. Returns the max residual.
double commutator_residual(const DConnection& D, const JetArray& R, const JetArray& T, const JetArray& V);

// Helpers shared by the higher modules.
inline void accumulate(Jet& acc, const Jet& a, const Jet& b) {
  if (!a.is_exact_zero() && !b.is_exact_zero()) acc += a * b;
}
inline void accumulate(Jet& acc, const Jet& a, const Jet& b, double s) {
  if (!a.is_exact_zero() && !b.is_exact_zero()) acc += (a * b) * s;
}
JetArray truncate_all(const JetArray& a, int order);

}  // namespace nonholo
