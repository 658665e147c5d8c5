#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nonholo/expr.hpp"
#include "nonholo/field.hpp"
#include "nonholo/finsler.hpp"
#include "nonholo/geometry.hpp"

namespace testutil {

using namespace nonholo;

// 2+2 (or 4+4) d-metric from expression strings, row-major blocks.
inline DMetricField dmetric(int n, const std::vector<std::string>& g, const std::vector<std::string>& h,
                            const std::vector<std::string>& N, std::vector<int> signature = {}) {
  DMetricField dm;
  if (signature.empty()) {
    signature.assign(2 * n, 1);
    signature.back() = -1;
  }
  dm.chart = ChartSpec{n, n, signature};
  for (const auto& s : g) dm.g.push_back(parse_expression(s, 2 * n));
  for (const auto& s : h) dm.h.push_back(parse_expression(s, 2 * n));
  dm.N = NConnectionField::zero(n, n);
  for (std::size_t k = 0; k < N.size(); ++k) dm.N.coeffs[k] = parse_expression(N[k], 2 * n);
  return dm;
}

// Schwarzschild (M = 1) with x = (r, theta), y = (phi, t).
inline DMetricField schwarzschild22() {
  return dmetric(2, {"1/(1-2/u1)", "0", "0", "u1^2"}, {"u1^2*sin(u2)^2", "0", "0", "-(1-2/u1)"}, {});
}

inline std::vector<ScalarField> schwarzschild_coordinate() {
  std::vector<ScalarField> G(16, ScalarField::zero(4));
  G[0] = parse_expression("1/(1-2/u1)", 4);
  G[5] = parse_expression("u1^2", 4);
  G[10] = parse_expression("u1^2*sin(u2)^2", 4);
  G[15] = parse_expression("-(1-2/u1)", 4);
  return G;
}

// Finite-difference Christoffel symbols and Riemann tensor of a coordinate
// metric; they never touch the jet code path. Riemann in the usual placement
// R^r_{s m n} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}.
struct FdCurvature {
  RealArray christoffel;  // (r, a, b)
  RealArray riemann;      // (r, s, m, n)
};

inline FdCurvature fd_curvature(const std::vector<ScalarField>& G, int d, const std::vector<double>& x) {
  RealArray g({d, d}), dg({d, d, d}), ddg({d, d, d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const ScalarField& f = G[a * d + b];
      g(a, b) = f.eval(x);
      for (int c = 0; c < d; ++c) {
        int mi[1] = {c};
        dg(a, b, c) = fd_partial(f, x, mi).value;
        for (int e = 0; e < d; ++e) {
          int mi2[2] = {c, e};
          // wider step: at 1e-3 roundoff in the second difference is ~1e-9
          ddg(a, b, c, e) = fd_partial(f, x, mi2, 1e-2).value;
        }
      }
    }
  Eigen::MatrixXd gm(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) gm(a, b) = g(a, b);
  Eigen::MatrixXd gi = gm.inverse();
  // d_c g^{ab} = -g^{ai} d_c g_ij g^{jb}
  RealArray dgi({d, d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double s = 0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s -= gi(a, i) * dg(i, j, c) * gi(j, b);
        dgi(a, b, c) = s;
      }
  FdCurvature out;
  out.christoffel = RealArray({d, d, d});
  RealArray dGam({d, d, d, d});  // (r, a, b, c) = d_c Gamma^r_ab
  for (int r = 0; r < d; ++r)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double s = 0;
        for (int l = 0; l < d; ++l) s += 0.5 * gi(r, l) * (dg(l, a, b) + dg(l, b, a) - dg(a, b, l));
        out.christoffel(r, a, b) = s;
        for (int c = 0; c < d; ++c) {
          double t = 0;
          for (int l = 0; l < d; ++l) {
            t += 0.5 * dgi(r, l, c) * (dg(l, a, b) + dg(l, b, a) - dg(a, b, l));
            t += 0.5 * gi(r, l) * (ddg(l, a, b, c) + ddg(l, b, a, c) - ddg(a, b, l, c));
          }
          dGam(r, a, b, c) = t;
        }
      }
  const RealArray& Gm = out.christoffel;
  out.riemann = RealArray({d, d, d, d});
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          double v = dGam(r, n, s, m) - dGam(r, m, s, n);
          for (int l = 0; l < d; ++l) v += Gm(r, m, l) * Gm(l, n, s) - Gm(r, n, l) * Gm(l, m, s);
          out.riemann(r, s, m, n) = v;
        }
  return out;
}

// Euler-Lagrange residual of the semispray. Integrates x'' = -2 s G~(x, x')
// with RK4 from u0 = (x, y) and evaluates d/dt dL/dy^j - dL/dx^j along the path
// with finite differences of L only: L through eval(), the time derivative by a
// five-point stencil on the sampled path. The residual is relative to the size
// of the two terms. s = 1 gives geodesics of L.
inline double euler_lagrange_residual(const FinslerFunction& f, std::vector<double> u0, double s = 1.0,
                                      int steps = 60, double h = 1e-2) {
  const int n = f.n;
  auto rhs = [&](const std::vector<double>& u) {
    RealArray G = semispray(f, u);
    std::vector<double> du(2 * n);
    for (int k = 0; k < n; ++k) {
      du[k] = u[n + k];
      du[n + k] = -2.0 * s * G(k);
    }
    return du;
  };
  auto axpy = [](const std::vector<double>& u, double a, const std::vector<double>& k) {
    std::vector<double> r(u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += a * k[i];
    return r;
  };
  std::vector<std::vector<double>> path{u0};
  for (int k = 0; k < steps; ++k) {
    const auto& u = path.back();
    auto k1 = rhs(u), k2 = rhs(axpy(u, h / 2, k1)), k3 = rhs(axpy(u, h / 2, k2)), k4 = rhs(axpy(u, h, k3));
    std::vector<double> next(u);
    for (int i = 0; i < 2 * n; ++i) next[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    path.push_back(next);
  }
  auto dL = [&](const std::vector<double>& u, int var) {
    int mi[1] = {var};
    return fd_partial(f.L, u, mi).value;
  };
  std::vector<std::vector<double>> p(path.size(), std::vector<double>(n));
  for (std::size_t t = 0; t < path.size(); ++t)
    for (int j = 0; j < n; ++j) p[t][j] = dL(path[t], n + j);
  double worst = 0.0;
  for (std::size_t t = 2; t + 2 < path.size(); t += 4)
    for (int j = 0; j < n; ++j) {
      const double dpdt = (-p[t + 2][j] + 8 * p[t + 1][j] - 8 * p[t - 1][j] + p[t - 2][j]) / (12 * h);
      const double dLdx = dL(path[t], j);
      worst = std::max(worst, std::abs(dpdt - dLdx) / (1.0 + std::abs(dpdt) + std::abs(dLdx)));
    }
  return worst;
}

}  // namespace testutil
