#include "nonholo/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace nonholo {

void ChartSpec::validate() const {
  if (n != m || (n != 2 && n != 4)) fail(ErrorCode::ValidationError, "chart must have n = m in {2, 4}");
  if (static_cast<int>(signature.size()) != n + m) fail(ErrorCode::ValidationError, "signature length must be n+m");
  for (int s : signature)
    if (s != 1 && s != -1) fail(ErrorCode::ValidationError, "signature entries must be +1 or -1");
}

NConnectionField NConnectionField::zero(int n, int m) {
  NConnectionField N;
  N.n = n;
  N.m = m;
  N.coeffs.assign(static_cast<std::size_t>(n * m), ScalarField::zero(n + m));
  return N;
}

double FramePair::duality_residual() const {
  const int d = frame.dim(0);
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += frame(a, c) * coframe(b, c);
      r = std::max(r, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  return r;
}

JetArray nconnection_jets(const NConnectionField& N, std::span<const double> point, int order) {
  auto u = coordinate_jets(point, order);
  JetArray out({N.n, N.m});
  for (int i = 0; i < N.n; ++i)
    for (int a = 0; a < N.m; ++a) out(i, a) = N.at(i, a)(u);
  return out;
}

DMetricJets dmetric_jets(const DMetricField& dm, std::span<const double> point, int order) {
  const int n = dm.chart.n, m = dm.chart.m;
  if (static_cast<int>(point.size()) != n + m) fail(ErrorCode::InvalidArgument, "point dimension mismatch");
  auto u = coordinate_jets(point, order);
  DMetricJets out;
  out.n = n;
  out.m = m;
  out.g = JetArray({n, n});
  out.h = JetArray({m, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.g(i, j) = dm.g[i * n + j](u);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.h(a, b) = dm.h[a * m + b](u);
  out.N = JetArray({n, m});
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) out.N(i, a) = dm.N.at(i, a)(u);
  return out;
}

Jet elongated(const JetArray& N, int n, int alpha, const Jet& f) {
  Jet r = f.derivative(alpha);
  if (alpha < n) {
    const int m = N.dim(1);
    for (int b = 0; b < m; ++b)
      if (!N(alpha, b).is_exact_zero()) r -= N(alpha, b) * f.derivative(n + b);
  }
  return r;
}

JetArray adapted_metric(const DMetricJets& dm) {
  const int n = dm.n, d = dm.dim();
  JetArray G({d, d});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = dm.g(i, j);
  for (int a = 0; a < dm.m; ++a)
    for (int b = 0; b < dm.m; ++b) G(n + a, n + b) = dm.h(a, b);
  return G;
}

double determinant(const RealArray& a) {
  const int d = a.dim(0);
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = a(i, j);
  return M.determinant();
}

JetArray inverse(const JetArray& a) {
  const int d = a.dim(0);
  if (std::abs(determinant(values(a))) < 1e-12) fail(ErrorCode::SingularMetric, "matrix is degenerate at the point");
  JetArray A = a;
  JetArray I({d, d});
  for (int i = 0; i < d; ++i) I(i, i) = Jet::exact(1.0);
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(A(r, col).value()) > std::abs(A(piv, col).value())) piv = r;
    if (piv != col)
      for (int c = 0; c < d; ++c) {
        std::swap(A(piv, c), A(col, c));
        std::swap(I(piv, c), I(col, c));
      }
    const Jet inv = reciprocal(A(col, col));
    for (int c = 0; c < d; ++c) {
      A(col, c) = A(col, c) * inv;
      I(col, c) = I(col, c) * inv;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col || A(r, col).is_exact_zero()) continue;
      const Jet f = A(r, col);
      for (int c = 0; c < d; ++c) {
        if (!A(col, c).is_exact_zero()) A(r, c) -= f * A(col, c);
        if (!I(col, c).is_exact_zero()) I(r, c) -= f * I(col, c);
      }
    }
  }
  return I;
}

FramePair adapted_frames(const RealArray& N, int n, int m, std::span<const double> point) {
  const int d = n + m;
  FramePair fp;
  fp.frame = RealArray({d, d});
  fp.coframe = RealArray({d, d});
  fp.point.assign(point.begin(), point.end());
  for (int k = 0; k < d; ++k) {
    fp.frame(k, k) = 1.0;
    fp.coframe(k, k) = 1.0;
  }
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < m; ++b) {
      fp.frame(i, n + b) = -N(i, b);
      fp.coframe(n + b, i) = N(i, b);
    }
  return fp;
}

FramePair adapted_frames(const NConnectionField& N, std::span<const double> point) {
  return adapted_frames(values(nconnection_jets(N, point, 0)), N.n, N.m, point);
}

JetArray omega_jets(const JetArray& N, int n, int m) {
  JetArray Om({n, n, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < m; ++a) {
        if (i == j) continue;
        Om(i, j, a) = elongated(N, n, j, N(i, a)) - elongated(N, n, i, N(j, a));
      }
  return Om;
}

JetArray anholonomy_jets(const JetArray& N, int n, int m) {
  const int d = n + m;
  JetArray W({d, d, d});
  JetArray Om = omega_jets(N, n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < m; ++a) W(i, j, n + a) = Om(i, j, a);
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        Jet dN = N(i, c).derivative(n + b);
        W(i, n + b, n + c) = dN;
        W(n + b, i, n + c) = -dN;
      }
  }
  return W;
}

Anholonomy anholonomy(const NConnectionField& N, std::span<const double> point) {
  JetArray Nj = nconnection_jets(N, point, 1);
  Anholonomy out;
  out.W = values(anholonomy_jets(Nj, N.n, N.m));
  out.Omega = values(omega_jets(Nj, N.n, N.m));
  return out;
}

RealArray assemble_metric(const RealArray& g, const RealArray& h, const RealArray& N) {
  const int n = g.dim(0), m = h.dim(0), d = n + m;
  RealArray G({d, d});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = g(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) s += N(i, a) * N(j, b) * h(a, b);
      G(i, j) = s;
      G(j, i) = s;
    }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      double s = 0.0;
      for (int e = 0; e < m; ++e) s += N(i, e) * h(a, e);
      G(i, n + a) = s;
      G(n + a, i) = s;
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) G(n + a, n + b) = h(a, b);
  return G;
}

RealArray assemble_metric(const DMetricField& dm, std::span<const double> point) {
  DMetricJets j = dmetric_jets(dm, point, 0);
  return assemble_metric(values(j.g), values(j.h), values(j.N));
}

SplitMetric split_metric(const RealArray& G, int n, int m, const std::optional<RealArray>& N) {
  SplitMetric out;
  out.h = RealArray({m, m});
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.h(a, b) = G(n + a, n + b);
  const double det = determinant(out.h);
  if (std::abs(det) < 1e-12) fail(ErrorCode::DegenerateVBlock, "vertical block of the metric is degenerate");
  if (N) {
    out.N = *N;
  } else {
    Eigen::MatrixXd h(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) h(a, b) = out.h(a, b);
    Eigen::MatrixXd hinv = h.inverse();
    out.N = RealArray({n, m});
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < m; ++e) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += G(i, n + a) * hinv(a, e);
        out.N(i, e) = s;
      }
  }
  out.g = RealArray({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = G(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) s -= out.N(i, a) * out.N(j, b) * out.h(a, b);
      out.g(i, j) = s;
    }
  return out;
}

DMetricField dmetric_from_coordinate(const ChartSpec& chart, const std::vector<ScalarField>& G,
                                     const NConnectionField& N) {
  const int n = chart.n, m = chart.m, d = n + m;
  DMetricField dm;
  dm.chart = chart;
  dm.N = N;
  dm.h.resize(static_cast<std::size_t>(m * m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) dm.h[a * m + b] = G[(n + a) * d + n + b];
  dm.g.resize(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ScalarField s = G[i * d + j];
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const ScalarField& Nia = N.at(i, a);
          const ScalarField& Njb = N.at(j, b);
          if ((Nia.is_constant() && Nia.constant_value() == 0.0) || (Njb.is_constant() && Njb.constant_value() == 0.0))
            continue;
          s = s - Nia * Njb * dm.h[a * m + b];
        }
      dm.g[i * n + j] = s;
    }
  return dm;
}

}  // namespace nonholo
