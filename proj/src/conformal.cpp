#include "nonholo/conformal.hpp"

#include <cmath>

namespace nonholo {

void require_positive(const ScalarField& w, std::span<const double> point) {
  if (!(w.eval(point) > 1e-12)) fail(ErrorCode::NonpositiveFactor, "conformal factor must be positive");
}

DMetricField conformal_rescale(const DMetricField& dm, const ScalarField& w) {
  DMetricField out = dm;
  const ScalarField w2 = w * w;
  for (auto& f : out.g) f = w2 * f;
  for (auto& f : out.h) f = w2 * f;
  return out;
}

DMetricJets conformal_rescale(const DMetricJets& dm, const Jet& w) {
  if (!(w.value() > 1e-12)) fail(ErrorCode::NonpositiveFactor, "conformal factor must be positive");
  DMetricJets out = dm;
  const Jet w2 = w * w;
  for (Jet& j : out.g.data()) j = w2 * j;
  for (Jet& j : out.h.data()) j = w2 * j;
  return out;
}

RealArray conformal_dvector(const NConnectionField& N, const ScalarField& w, std::span<const double> point) {
  require_positive(w, point);
  const int d = N.n + N.m;
  JetArray Nj = nconnection_jets(N, point, 1);
  Jet lw = log(eval_jet(w, point, 1));
  RealArray ups({d});
  for (int a = 0; a < d; ++a) ups(a) = elongated(Nj, N.n, a, lw).value();
  return ups;
}

WeylJets weyl_jets(const DConnection& D, const JetArray& R) {
  const int d = D.dim();
  const JetArray& G = D.G;
  const JetArray& Gi = D.Ginv;
  JetArray Ric = ricci_jets(R);
  Jet sR = scalar_jets(Ric, Gi);
  WeylJets w;
  w.P = JetArray({d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) w.P(a, b) = 0.5 * (G(a, b) * sR * (1.0 / 6.0) - Ric(b, a));
  JetArray Pm({d, d});  // P_a^t
  for (int a = 0; a < d; ++a)
    for (int t = 0; t < d; ++t) {
      Jet s;
      for (int mu = 0; mu < d; ++mu) accumulate(s, w.P(a, mu), Gi(mu, t));
      Pm(a, t) = s;
    }
  w.mixed = JetArray({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          Jet s;
          for (int e = 0; e < d; ++e) accumulate(s, Gi(g, e), R(t, e, b, a));
          if (b == g) s += Pm(a, t);
          if (a == g) s -= Pm(b, t);
          if (b == t) s -= Pm(a, g);
          if (a == t) s += Pm(b, g);
          w.mixed(t, a, b, g) = s;
        }
  w.updown = JetArray({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          Jet s;
          for (int e = 0; e < d; ++e) accumulate(s, w.mixed(t, a, b, e), G(e, g));
          w.updown(t, a, b, g) = s;
        }
  w.lowered = JetArray({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          Jet s;
          for (int e = 0; e < d; ++e) accumulate(s, G(t, e), w.updown(e, a, b, g));
          w.lowered(t, a, b, g) = s;
        }
  return w;
}

WeylPackage weyl_dtensor(const DConnection& D, const JetArray& R) {
  JetArray R0 = truncate_all(R, 0);
  DConnection D0 = D;
  D0.G = truncate_all(D.G, 0);
  D0.Ginv = truncate_all(D.Ginv, 0);
  WeylJets w = weyl_jets(D0, R0);
  return {values(w.mixed), values(w.updown), values(w.lowered), values(w.P)};
}

double weyl_trace_residual(const WeylPackage& w) {
  const RealArray& C = w.weyl_mixed;
  const int d = C.dim(0);
  double r = 0.0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      double ta = 0, tb = 0, ga = 0, gb = 0;
      for (int k = 0; k < d; ++k) {
        ta += C(k, k, x, y);
        tb += C(k, x, k, y);
        ga += C(x, k, y, k);
        gb += C(x, y, k, k);
      }
      r = std::max({r, std::abs(ta), std::abs(tb), std::abs(ga), std::abs(gb)});
    }
  return r;
}

namespace {

ConformalInvariance compare_weyl(const DConnection& D, const DConnection& Dh, double w) {
  WeylPackage a = weyl_dtensor(D, curvature(D));
  WeylPackage b = weyl_dtensor(Dh, curvature(Dh));
  ConformalInvariance r;
  r.mixed = max_abs_diff(a.weyl_updown, b.weyl_updown);
  RealArray scaled = a.weyl_lowered;
  for (double& v : scaled.data()) v *= w * w;
  r.lowered = max_abs_diff(scaled, b.weyl_lowered);
  r.scale = max_abs(a.weyl_updown);
  return r;
}

}  // namespace

ConformalInvariance conformal_invariance_check(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                                               ConnectionBuilder build) {
  DConnection D = build(dm, point);
  DConnection Dh = build(conformal_rescale(dm, w), point);
  return compare_weyl(D, Dh, w.value());
}

ConformalInvariance coordinate_rescaling_control(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                                                 ConnectionBuilder build) {
  // Coordinate blocks: G_hh = g + N h N^T, G_hv = N h, G_vv = h.
  // Scaling G_hh and G_vv by w^2 and keeping G_hv gives h' = w^2 h,
  // N' = N / w^2, g' = w^2 (g + N h N^T) - N' h' N'^T.
  const int n = dm.n, m = dm.m;
  const Jet w2 = w * w;
  const Jet iw2 = reciprocal(w2);
  DMetricJets out = dm;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) out.N(i, a) = dm.N(i, a) * iw2;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.h(a, b) = w2 * dm.h(a, b);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet nhn;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) accumulate(nhn, dm.N(i, a) * dm.N(j, b), dm.h(a, b));
      // w^2 (g + NhN) - (N/w^2)(w^2 h)(N/w^2) = w^2 g + (w^2 - 1/w^2) NhN
      out.g(i, j) = w2 * dm.g(i, j) + (w2 - iw2) * nhn;
    }
  DConnection D = build(dm, point);
  DConnection Dh = build(out, point);
  return compare_weyl(D, Dh, w.value());
}

BianchiResidual bianchi_residual(const DConnection& D, const JetArray& R) {
  const int d = D.dim();
  BianchiResidual out;
  out.curvature_scale = max_abs(values(R));
  JetArray R1 = truncate_all(R, 1);
  JetArray DR = covariant_derivative(D, R1, {Variance::Up, Variance::Down, Variance::Down, Variance::Down});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g)
          for (int e = 0; e < d; ++e) {
            const double s = DR(t, a, b, g, e).value() + DR(t, a, g, e, b).value() + DR(t, a, e, b, g).value();
            out.first = std::max(out.first, std::abs(s));
          }
  WeylJets w = weyl_jets(D, R1);
  JetArray Cl = truncate_all(w.lowered, 1);
  JetArray DC = covariant_derivative(D, Cl, {Variance::Down, Variance::Down, Variance::Down, Variance::Down});
  JetArray DP = covariant_derivative(D, truncate_all(w.P, 1), {Variance::Down, Variance::Down});
  for (int g = 0; g < d; ++g)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double div = 0.0;
        for (int t = 0; t < d; ++t)
          for (int mu = 0; mu < d; ++mu) div += D.Ginv(t, mu).value() * DC(g, t, a, b, mu).value();
        // 2 D_[b P_g]a = D_b P_ga - D_g P_ba
        const double dp = DP(g, a, b).value() - DP(b, a, g).value();
        out.second = std::max(out.second, std::abs(div - dp));
        out.second_opposite_sign = std::max(out.second_opposite_sign, std::abs(div + dp));
      }
  return out;
}

double box(const DConnection& D, const Jet& w) {
  const int d = D.dim();
  JetArray s(std::vector<int>{});
  s[0] = w;
  JetArray Dw = covariant_derivative(D, s, {});
  JetArray DDw = covariant_derivative(D, Dw, {Variance::Down});
  double b = 0.0;
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c) b += D.Ginv(a, c).value() * DDw(a, c).value();
  return b;
}

LambdaRescaling lambda_rescaling(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                                 ConnectionBuilder build) {
  DConnection D = build(dm, point);
  DConnection Dh = build(conformal_rescale(dm, w), point);
  LambdaRescaling r;
  r.lambda = contractions(D, curvature(D)).lambda_spinor;
  r.lambda_hat = contractions(Dh, curvature(Dh)).lambda_spinor;
  r.w = w.value();
  r.box_over_w = box(D, w) / r.w;
  const double lhs = 4.0 * r.w * r.w * r.lambda_hat - 4.0 * r.lambda;
  r.residual_minus = std::abs(lhs + r.box_over_w);
  r.residual_plus = std::abs(lhs - r.box_over_w);
  return r;
}

}  // namespace nonholo
