#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nonholo/field.hpp"
#include "nonholo/tensor.hpp"

namespace nonholo {

struct ChartSpec {
  int n = 2;
  int m = 2;
  std::vector<int> signature;  // length n+m, entries +-1
  int dim() const { return n + m; }
  void validate() const;
};

// N_i^a(u), stored row-major as coeffs[i * m + a] with a the local v-index.
struct NConnectionField {
  int n = 2;
  int m = 2;
  std::vector<ScalarField> coeffs;
  static NConnectionField zero(int n, int m);
  const ScalarField& at(int i, int a) const { return coeffs[i * m + a]; }
};

// d-metric g_ij e^i e^j + h_ab e^a e^b over the N-elongated coframe.
struct DMetricField {
  ChartSpec chart;
  std::vector<ScalarField> g;  // n*n
  std::vector<ScalarField> h;  // m*m
  NConnectionField N;
};

// Coordinate-basis components of the N-adapted frame and coframe.
//   frame(alpha, col)  : e_alpha = frame(alpha, col) d_col
//   coframe(beta, col) : e^beta  = coframe(beta, col) du^col
// Duality e^beta(e_alpha) = delta is frame * coframe^T = I.
struct FramePair {
  RealArray frame;
  RealArray coframe;
  std::vector<double> point;
  double duality_residual() const;
};

// Jets of a d-metric at one point. N(i, a) uses the local v-index a.
struct DMetricJets {
  int n = 2;
  int m = 2;
  JetArray g, h, N;
  int dim() const { return n + m; }
};

DMetricJets dmetric_jets(const DMetricField& dm, std::span<const double> point, int order);
JetArray nconnection_jets(const NConnectionField& N, std::span<const double> point, int order);

// N-elongated derivative e_alpha f (dder): e_i = d_i - N_i^b d_b, e_a = d_a.
Jet elongated(const JetArray& N, int n, int alpha, const Jet& f);

// Block-diagonal N-adapted metric diag(g, h) as a (n+m)^2 jet array.
JetArray adapted_metric(const DMetricJets& dm);

// Inverse of a square jet matrix; SingularMetric when |det| < 1e-12 at the point.
JetArray inverse(const JetArray& a);
double determinant(const RealArray& a);

FramePair adapted_frames(const NConnectionField& N, std::span<const double> point);
FramePair adapted_frames(const RealArray& N, int n, int m, std::span<const double> point = {});

struct Anholonomy {
  RealArray W;      // W(alpha, beta, gamma) = W_{alpha beta}^gamma, [e_alpha, e_beta] = W e_gamma
  RealArray Omega;  // Omega(i, j, a) = e_j N_i^a - e_i N_j^a
};
Anholonomy anholonomy(const NConnectionField& N, std::span<const double> point);
// Jet version: W at one order below N.
JetArray anholonomy_jets(const JetArray& N, int n, int m);
JetArray omega_jets(const JetArray& N, int n, int m);

RealArray assemble_metric(const RealArray& g, const RealArray& h, const RealArray& N);
RealArray assemble_metric(const DMetricField& dm, std::span<const double> point);

struct SplitMetric {
  RealArray g, h, N;
};
// Inverse of assemble_metric. If N is absent it is recovered as N_i^e = G_{ia} h^{ae}.
SplitMetric split_metric(const RealArray& G, int n, int m, const std::optional<RealArray>& N = std::nullopt);

// d-metric field from a coordinate metric field and an N-connection, using the
// inverse ansatz: h = G_vv, g = G_hh - N N h.
DMetricField dmetric_from_coordinate(const ChartSpec& chart, const std::vector<ScalarField>& G,
                                     const NConnectionField& N);

}  // namespace nonholo
