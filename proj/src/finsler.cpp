#include "nonholo/finsler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace nonholo {

FinslerFunction FinslerFunction::from_F(int n, ScalarField F, bool relaxed) {
  FinslerFunction f;
  f.n = n;
  f.L = F * F;
  f.F = std::move(F);
  f.relaxed = relaxed;
  return f;
}

FinslerFunction FinslerFunction::from_L(int n, ScalarField L) {
  FinslerFunction f;
  f.n = n;
  f.L = std::move(L);
  f.relaxed = true;
  return f;
}

namespace {

void require_slit(const FinslerFunction& f, std::span<const double> point) {
  if (static_cast<int>(point.size()) != f.arity()) fail(ErrorCode::InvalidArgument, "point has wrong arity");
  double y2 = 0.0;
  for (int i = 0; i < f.n; ++i) y2 += point[f.n + i] * point[f.n + i];
  if (std::sqrt(y2) < 1e-12) fail(ErrorCode::ZeroSection, "y = 0 lies on the excluded zero section");
}

Eigen::MatrixXd to_eigen(const RealArray& a) {
  Eigen::MatrixXd m(a.dim(0), a.dim(1));
  for (int i = 0; i < a.dim(0); ++i)
    for (int j = 0; j < a.dim(1); ++j) m(i, j) = a(i, j);
  return m;
}

RealArray from_eigen(const Eigen::MatrixXd& m) {
  RealArray a({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
  return a;
}

}  // namespace

FinslerJets finsler_jets(const FinslerFunction& f, std::span<const double> point, int order) {
  require_slit(f, point);
  if (order < 2) fail(ErrorCode::OrderUnsupported, "Finsler objects need L to order >= 2");
  const int n = f.n;
  FinslerJets J;
  J.n = n;
  J.L = eval_jet(f.L, point, order);
  J.g = JetArray({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      J.g(i, j) = 0.5 * J.L.derivative(n + i).derivative(n + j);
      J.g(j, i) = J.g(i, j);
    }
  if (std::abs(determinant(values(J.g))) < 1e-12) fail(ErrorCode::SingularHessian, "Hessian of F^2 is degenerate");
  J.ginv = inverse(J.g);
  auto u = coordinate_jets(point, order);
  // B_j = y^i d^2 L / dy^j dx^i - dL/dx^j
  std::vector<Jet> B(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Jet dLy = J.L.derivative(n + j);
    Jet s = -J.L.derivative(j).truncated(order - 2);
    for (int i = 0; i < n; ++i) s += u[n + i] * dLy.derivative(i);
    B[j] = s;
  }
  J.G = JetArray({n});
  for (int k = 0; k < n; ++k) {
    Jet s;
    for (int j = 0; j < n; ++j) s += J.ginv(k, j) * B[j];
    J.G(k) = 0.25 * s;
  }
  if (order >= 3) {
    J.N = JetArray({n, n});
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a) J.N(j, a) = J.G(a).derivative(n + j);
  }
  return J;
}

RealArray hessian_metric(const FinslerFunction& f, std::span<const double> point) {
  return values(finsler_jets(f, point, 2).g);
}

RealArray semispray(const FinslerFunction& f, std::span<const double> point) {
  return values(finsler_jets(f, point, 2).G);
}

RealArray canonical_nconnection(const FinslerFunction& f, std::span<const double> point) {
  return values(finsler_jets(f, point, 3).N);
}

DMetricJets sasaki_jets(const FinslerFunction& f, std::span<const double> point, int order) {
  FinslerJets J = finsler_jets(f, point, order);
  if (order < 3) fail(ErrorCode::OrderUnsupported, "Sasaki lift needs L to order >= 3");
  DMetricJets dm;
  dm.n = f.n;
  dm.m = f.n;
  dm.g = J.g;
  dm.h = J.g;
  dm.N = J.N;
  return dm;
}

DMetricField sasaki_lift(const FinslerFunction& f, const ChartSpec& chart) {
  if (chart.n != f.n || chart.m != f.n) fail(ErrorCode::WrongDimension, "chart does not match the Finsler function");
  const int n = f.n, d = f.arity();
  DMetricField dm;
  dm.chart = chart;
  dm.N = NConnectionField::zero(n, n);
  dm.g.resize(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      dm.g[i * n + j] = pointwise_field(d, "g~" + std::to_string(i + 1) + std::to_string(j + 1),
                                        [f, i, j](std::span<const double> x, int p) {
                                          return finsler_jets(f, x, p + 2).g(i, j);
                                        });
      dm.N.coeffs[i * n + j] = pointwise_field(d, "N~" + std::to_string(i + 1) + std::to_string(j + 1),
                                               [f, i, j](std::span<const double> x, int p) {
                                                 return finsler_jets(f, x, p + 3).N(i, j);
                                               });
    }
  dm.h = dm.g;
  return dm;
}

HomogeneityReport homogeneity_check(const FinslerFunction& f, std::span<const double> point,
                                    std::span<const double> betas) {
  require_slit(f, point);
  const int n = f.n;
  auto Fjet = [&](std::span<const double> x, int order) {
    if (f.F.valid()) return eval_jet(f.F, x, order);
    return sqrt(abs(eval_jet(f.L, x, order)));
  };
  HomogeneityReport r;
  Jet F1 = Fjet(point, 1);
  const double F0 = F1.value();
  for (double b : betas) {
    std::vector<double> xb(point.begin(), point.end());
    for (int i = 0; i < n; ++i) xb[n + i] *= b;
    const double Fb = Fjet(xb, 0).value();
    r.scaling = std::max(r.scaling, std::abs(Fb - b * F0) / (1.0 + std::abs(F0)));
  }
  double euler = -F0;
  for (int i = 0; i < n; ++i) euler += point[n + i] * F1.derivative(n + i).value();
  r.euler = std::abs(euler) / (1.0 + std::abs(F0));
  Jet L2 = eval_jet(f.L, point, 2);
  double q = -L2.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      q += point[n + i] * point[n + j] * 0.5 * L2.derivative(n + i).derivative(n + j).value();
  r.quadratic = std::abs(q) / (1.0 + std::abs(L2.value()));
  return r;
}

Inertia inertia(const RealArray& S, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(S), Eigen::EigenvaluesOnly);
  Inertia in;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    const double v = es.eigenvalues()(k);
    if (std::abs(v) <= tol) ++in.zero;
    else if (v > 0) ++in.positive;
    else ++in.negative;
  }
  return in;
}

namespace {

// S = A sgn A^T with A = Q |D|^{1/2}, deterministic branch.
Eigen::MatrixXd normal_form_factor(const RealArray& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(S));
  if (es.info() != Eigen::Success) fail(ErrorCode::SingularMetric, "eigendecomposition failed");
  const int d = static_cast<int>(S.dim(0));
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
  Eigen::MatrixXd A(d, d);
  for (int c = 0; c < d; ++c) {
    const double lam = es.eigenvalues()(order[c]);
    if (std::abs(lam) < 1e-12) fail(ErrorCode::SingularMetric, "matrix is degenerate");
    Eigen::VectorXd v = es.eigenvectors().col(order[c]);
    for (int k = 0; k < d; ++k)
      if (std::abs(v(k)) > 1e-12) {
        if (v(k) < 0) v = -v;
        break;
      }
    A.col(c) = v * std::sqrt(std::abs(lam));
  }
  return A;
}

}  // namespace

RealArray solve_finsler_vierbein(const RealArray& G, const RealArray& Fmat) {
  if (G.dims() != Fmat.dims() || G.rank() != 2 || G.dim(0) != G.dim(1))
    fail(ErrorCode::InvalidArgument, "vierbein solve needs two square matrices of equal size");
  Inertia ig = inertia(G), iff = inertia(Fmat);
  if (!(ig == iff)) fail(ErrorCode::SignatureMismatch, "metrics have different inertia; no real vierbein exists");
  Eigen::MatrixXd AG = normal_form_factor(G);
  Eigen::MatrixXd AF = normal_form_factor(Fmat);
  Eigen::MatrixXd e = AF.transpose().fullPivLu().solve(AG.transpose());
  return from_eigen(e);
}

}  // namespace nonholo
