#include "nonholo/twistor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nonholo/finsler.hpp"

namespace nonholo {

const double kTwistorPSign = -1.0;

namespace {

const cplx kI(0.0, 1.0);

cplx value(const CJet& z) { return {z.re.value(), z.im.value()}; }

Eigen::Matrix2cd mat2_from(const CplxArray& a) {
  Eigen::Matrix2cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = a(i, j);
  return m;
}

double perm_sign(int a, int b, int c, int d) {
  const int p[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] == p[j]) return 0.0;
  int inv = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) inv += p[i] > p[j];
  return inv % 2 ? -1.0 : 1.0;
}

// x^{AA'} = gamma_k^{AA'} x^k
Eigen::Matrix2cd spinor_vector(const Soldering& s, std::span<const double> x) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 4; ++k)
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap) m(A, Ap) += s.gamma_up(k, A, Ap) * x[k];
  return m;
}

Eigen::Matrix4cd algebra_block(const Eigen::Matrix2cd& tsp, const CplxArray& Ps) {
  Eigen::Matrix4cd A = Eigen::Matrix4cd::Zero();
  for (int B = 0; B < 2; ++B)
    for (int Ap = 0; Ap < 2; ++Ap) A(B, 2 + Ap) = kI * tsp(B, Ap);
  for (int Bp = 0; Bp < 2; ++Bp)
    for (int B = 0; B < 2; ++B) {
      cplx s = 0.0;
      for (int A = 0; A < 2; ++A)
        for (int Ap = 0; Ap < 2; ++Ap) s += tsp(A, Ap) * Ps(A, Ap, B, Bp);
      A(2 + Bp, B) = kI * s;
    }
  return A;
}

std::vector<double> adapted_vector(const JetArray& N, int n, int m, std::span<const double> u) {
  std::vector<double> t(u.begin(), u.end());
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) t[n + a] += N(i, a).value() * u[i];
  return t;
}

std::array<cplx, 4> apply_matrix(const Eigen::Matrix4cd& M, const std::array<cplx, 4>& z) {
  std::array<cplx, 4> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i] += M(i, j) * z[j];
  return out;
}

double flat_variation(const DMetricField& dm, std::span<const double> point) {
  DMetricJets J = dmetric_jets(dm, point, 1);
  double v = 0.0;
  for (const JetArray* a : {&J.g, &J.h, &J.N})
    for (const Jet& j : a->data())
      for (int k = 0; k < dm.chart.dim(); ++k) v = std::max(v, std::abs(j.derivative(k).value()));
  return v;
}

// omega^B = omega0^B - i X^{BB'} pi0_{B'} over a block with constant soldering.
std::array<CJet, 2> block_solution_jets(const TwistorValue& Z0, const Soldering& s, const std::vector<Jet>& X) {
  std::array<CJet, 2> out;
  for (int B = 0; B < 2; ++B) {
    Jet re = Jet::exact(Z0.omega[B].real()), im = Jet::exact(Z0.omega[B].imag());
    for (int k = 0; k < 4; ++k)
      for (int Bp = 0; Bp < 2; ++Bp) {
        // -i g pi = -i (gr + i gi)(pr + i pi) = (gr pi + gi pr) - i (gr pr - gi pi)
        const cplx c = -kI * s.gamma_up(k, B, Bp) * Z0.pi[Bp];
        const Jet& x = X[s.block[k]];
        re += c.real() * x;
        im += c.imag() * x;
      }
    out[B] = {re, im};
  }
  return out;
}

}  // namespace

TwistorValue TwistorValue::from_flat(const std::array<cplx, 4>& z, bool dual) {
  TwistorValue t;
  t.omega = {z[0], z[1]};
  t.pi = {z[2], z[3]};
  t.dual = dual;
  return t;
}

double max_abs_diff(const TwistorValue& a, const TwistorValue& b) {
  double m = 0.0;
  auto fa = a.flat(), fb = b.flat();
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(fa[i] - fb[i]));
  return m;
}

cplx pairing(const TwistorValue& W, const TwistorValue& Z) {
  if (!W.dual || Z.dual) fail(ErrorCode::InvalidArgument, "pairing needs a dual twistor and a twistor");
  return W.omega[0] * Z.omega[0] + W.omega[1] * Z.omega[1] + W.pi[0] * Z.pi[0] + W.pi[1] * Z.pi[1];
}

SpinorField quadratic_probe(std::array<cplx, 2> constant, std::array<cplx, 2> quad) {
  return [constant, quad](std::span<const double> point, int order) {
    auto u = coordinate_jets(point, order);
    Jet q = u[0] * u[0];
    std::array<CJet, 2> out;
    for (int A = 0; A < 2; ++A)
      out[A] = {constant[A].real() + quad[A].real() * q, constant[A].imag() + quad[A].imag() * q};
    return out;
  };
}

SpinFrame spin_frame(const DConnection& D, std::vector<int> block, const std::vector<std::vector<int>>& groups) {
  if (min_order(D.G) < 1) fail(ErrorCode::OrderUnsupported, "spin frame needs metric jets of order >= 1");
  JetArray E = orthonormal_tetrad(D.G, block, groups);
  RealArray Gb({4, 4});
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) Gb(k, l) = D.G(block[k], block[l]).value();
  SpinFrame f;
  f.block = block;
  f.soldering = make_soldering(values(E), Gb, block);
  f.connection = spin_connection(D, E, block);
  return f;
}

SpinFrame spin_frame(const DConnection& D) {
  if (D.dim() != 4) fail(ErrorCode::WrongDimension, "twistors need a 4-dimensional chart");
  std::vector<int> hg(static_cast<std::size_t>(D.n)), vg(static_cast<std::size_t>(D.m));
  std::iota(hg.begin(), hg.end(), 0);
  std::iota(vg.begin(), vg.end(), D.n);
  return spin_frame(D, {0, 1, 2, 3}, {hg, vg});
}

CplxArray spinor_gradient(const DConnection& D, const SpinFrame& f, const std::array<CJet, 2>& omega) {
  cplx Dk[4][2];
  for (int k = 0; k < 4; ++k)
    for (int B = 0; B < 2; ++B) {
      const int alpha = f.block[k];
      cplx v(D.e(alpha, omega[B].re).value(), D.e(alpha, omega[B].im).value());
      for (int C = 0; C < 2; ++C) v += f.connection.gamma(B, C, k) * value(omega[C]);
      Dk[k][B] = v;
    }
  CplxArray out({2, 2, 2});
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int B = 0; B < 2; ++B) {
        cplx s = 0.0;
        for (int k = 0; k < 4; ++k) s += f.soldering.gamma_down(k, A, Ap) * Dk[k][B];
        out(A, Ap, B) = s;
      }
  return out;
}

CplxArray twistor_operator(const DConnection& D, const SpinFrame& f, const std::array<CJet, 2>& omega) {
  CplxArray g = spinor_gradient(D, f, omega);
  auto up = [&](int A, int Ap, int B) {
    cplx s = 0.0;
    for (int C = 0; C < 2; ++C) s += eps(A, C) * g(C, Ap, B);
    return s;
  };
  CplxArray out({2, 2, 2});
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int Ap = 0; Ap < 2; ++Ap) out(A, B, Ap) = 0.5 * (up(A, Ap, B) + up(B, Ap, A));
  return out;
}

TwistorResidual twistor_residual(const SpinorField& omega, const DMetricField& dm, std::span<const double> point,
                                 ConnectionBuilder build) {
  DConnection D = build(dmetric_jets(dm, point, 2), point);
  SpinFrame f = spin_frame(D);
  TwistorResidual r;
  r.symmetric = twistor_operator(D, f, omega(point, 1));
  r.max = max_abs(r.symmetric);
  return r;
}

std::vector<Jet> adapted_position(const RealArray& N, int n, std::span<const double> point,
                                  std::span<const double> origin, int order) {
  const int d = static_cast<int>(point.size());
  std::vector<Jet> u = coordinate_jets(point, order);
  std::vector<Jet> X(static_cast<std::size_t>(d));
  auto o = [&](int k) { return origin.empty() ? 0.0 : origin[k]; };
  for (int k = 0; k < d; ++k) X[k] = u[k] - o(k);
  for (int a = 0; a < d - n; ++a)
    for (int i = 0; i < n; ++i) X[n + a] += N(i, a) * (u[i] - o(i));
  return X;
}

FlatCertificate certify_flat(const DMetricField& dm, std::span<const double> point, ConnectionBuilder build) {
  FlatCertificate c;
  c.variation = flat_variation(dm, point);
  DMetricJets J = dmetric_jets(dm, point, 2);
  DConnection D = build(J, point);
  CurvatureSpinors cs = curvature_spinors(lowered_curvature(D, curvature(D)).values, build_soldering(J), false);
  c.psi = max_abs(cs.psi);
  return c;
}

TwistorValue flat_twistor_solution(const TwistorValue& Z0, const DMetricField& dm, std::span<const double> point,
                                   ConnectionBuilder build, std::span<const double> origin) {
  FlatCertificate c = certify_flat(dm, point, build);
  if (c.psi >= 1e-8)
    fail(ErrorCode::IncompatibleBackground, "Weyl spinor does not vanish (max |Psi| = " + std::to_string(c.psi) + ")");
  if (c.variation >= 1e-8)
    fail(ErrorCode::IncompatibleBackground,
         "closed-form twistor solution needs constant g, h and N (variation " + std::to_string(c.variation) + ")");
  Soldering s = build_soldering(dmetric_jets(dm, point, 0));
  RealArray N = values(nconnection_jets(dm.N, point, 0));
  std::vector<Jet> X = adapted_position(N, dm.chart.n, point, origin, 0);
  std::vector<double> xv(X.size());
  for (std::size_t k = 0; k < X.size(); ++k) xv[k] = X[k].value();
  Eigen::Matrix2cd Xs = spinor_vector(s, xv);
  TwistorValue Z = Z0;
  if (!Z0.dual) {
    for (int B = 0; B < 2; ++B)
      for (int Bp = 0; Bp < 2; ++Bp) Z.omega[B] -= kI * Xs(B, Bp) * Z0.pi[Bp];
  } else {
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int A = 0; A < 2; ++A) Z.pi[Ap] += kI * Xs(A, Ap) * Z0.omega[A];
  }
  return Z;
}

SpinorField flat_solution_field(const TwistorValue& Z0, const DMetricField& dm, std::span<const double> origin) {
  if (Z0.dual) fail(ErrorCode::InvalidArgument, "the omega field of a dual twistor is not a twistor field");
  std::vector<double> o(origin.begin(), origin.end());
  return [Z0, dm, o](std::span<const double> point, int order) {
    Soldering s = build_soldering(dmetric_jets(dm, point, 0));
    RealArray N = values(nconnection_jets(dm.N, point, 0));
    return block_solution_jets(Z0, s, adapted_position(N, dm.chart.n, point, o, order));
  };
}

CplxArray psi_contract(const CplxArray& psi, std::span<const cplx> omega) {
  CplxArray out({2, 2, 2});
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int C = 0; C < 2; ++C) out(A, B, C) = psi(0, A, B, C) * omega[0] + psi(1, A, B, C) * omega[1];
  return out;
}

Compatibility twistor_compatibility(const CurvatureSpinors& cs, std::span<const cplx> omega) {
  Compatibility c;
  c.residual = psi_contract(cs.psi, omega);
  c.max = max_abs(c.residual);
  return c;
}

double spirality(const TwistorValue& Z) {
  if (Z.dual) fail(ErrorCode::InvalidArgument, "spirality is defined for twistors, not dual twistors");
  return (Z.omega[0] * std::conj(Z.pi[0]) + Z.omega[1] * std::conj(Z.pi[1])).real();
}

Kinematics kinematics(const TwistorValue& Z, const Soldering& s) {
  if (Z.dual) fail(ErrorCode::InvalidArgument, "kinematics is defined for twistors, not dual twistors");
  if (std::abs(Z.pi[0]) + std::abs(Z.pi[1]) < 1e-14) fail(ErrorCode::ZeroPi, "pi = 0: no momentum");
  Kinematics k;
  k.s = spirality(Z);
  const auto& w = Z.omega;
  const auto& p = Z.pi;
  // p^{AA'} = eps^{AB} eps^{A'B'} pibar_B pi_B'
  CplxArray pu({2, 2});
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap) {
      cplx v = 0.0;
      for (int B = 0; B < 2; ++B)
        for (int Bp = 0; Bp < 2; ++Bp) v += eps(A, B) * eps(Ap, Bp) * std::conj(p[B]) * p[Bp];
      pu(A, Ap) = v;
    }
  CplxArray pt = from_spinor(pu, s, Variance::Up);
  // M^{AA'BB'} = i omega^(A pibar^B) eps^{A'B'} - i omegabar^(A' pi^B') eps^{AB}
  cplx pibar_up[2], pi_up[2];
  for (int A = 0; A < 2; ++A) {
    pibar_up[A] = 0.0;
    pi_up[A] = 0.0;
    for (int B = 0; B < 2; ++B) {
      pibar_up[A] += eps(A, B) * std::conj(p[B]);
      pi_up[A] += eps(A, B) * p[B];
    }
  }
  CplxArray Ms({2, 2, 2, 2});
  for (int A = 0; A < 2; ++A)
    for (int Ap = 0; Ap < 2; ++Ap)
      for (int B = 0; B < 2; ++B)
        for (int Bp = 0; Bp < 2; ++Bp) {
          const cplx a = 0.5 * (w[A] * pibar_up[B] + w[B] * pibar_up[A]) * eps(Ap, Bp);
          const cplx b = 0.5 * (std::conj(w[Ap]) * pi_up[Bp] + std::conj(w[Bp]) * pi_up[Ap]) * eps(A, B);
          Ms(A, Ap, B, Bp) = kI * a - kI * b;
        }
  CplxArray Mt = from_spinor(Ms, s, Variance::Up);
  k.p = RealArray({4});
  k.M = RealArray({4, 4});
  for (int a = 0; a < 4; ++a) {
    k.p(a) = pt(a).real();
    k.imag = std::max(k.imag, std::abs(pt(a).imag()));
    for (int b = 0; b < 4; ++b) {
      k.M(a, b) = Mt(a, b).real();
      k.imag = std::max(k.imag, std::abs(Mt(a, b).imag()));
    }
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      k.null_residual += s.metric(a, b) * k.p(a) * k.p(b);
      k.antisymmetry = std::max(k.antisymmetry, std::abs(k.M(a, b) + k.M(b, a)));
    }
  k.null_residual = std::abs(k.null_residual);
  for (int a = 0; a < 4; ++a) k.future += s.coframe(3, a) * k.p(a);
  Eigen::Matrix4d g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g(a, b) = s.metric(a, b);
  // e_{alpha beta gamma tau} = e_{a'b'c'd'} theta^{a'}_alpha ... with the frame
  // orientation e_{txyz} = +1, i.e. -1 on the stored leg order (x, y, z, t)
  Eigen::Matrix4d th;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) th(a, b) = s.coframe(a, b);
  const double vol = -th.determinant();
  k.S = RealArray({4});
  for (int a = 0; a < 4; ++a) {
    double v = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double e = perm_sign(a, b, c, d);
          if (e != 0.0) v += e * k.p(b) * k.M(c, d);
        }
    k.S(a) = 0.5 * vol * v;
    double pl = 0.0;
    for (int b = 0; b < 4; ++b) pl += g(a, b) * k.p(b);
    k.spin_residual = std::max(k.spin_residual, std::abs(k.S(a) - k.s * pl));
  }
  return k;
}

TwistorValue conformal_transform(const TwistorValue& Z, const RealArray& upsilon, const Soldering& s) {
  TwistorValue out = Z;
  for (int Ap = 0; Ap < 2; ++Ap)
    for (int A = 0; A < 2; ++A) {
      cplx u = 0.0;
      for (int k = 0; k < 4; ++k) u += s.gamma_down(k, A, Ap) * upsilon(k);
      out.pi[Ap] += kI * u * Z.omega[A];
    }
  return out;
}

std::vector<double> Curve::position(double t) const {
  if (tau.size() < 2 || points.size() != tau.size() || tangents.size() != tau.size())
    fail(ErrorCode::InvalidArgument, "curve needs matching knots, points and tangents");
  std::size_t j = static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), t) - tau.begin());
  j = std::clamp<std::size_t>(j, 1, tau.size() - 1) - 1;
  const double h = tau[j + 1] - tau[j], s = (t - tau[j]) / h;
  const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
  std::vector<double> p(points[j].size());
  for (std::size_t k = 0; k < p.size(); ++k)
    p[k] = h00 * points[j][k] + h10 * h * tangents[j][k] + h01 * points[j + 1][k] + h11 * h * tangents[j + 1][k];
  return p;
}

std::vector<double> Curve::tangent(double t) const {
  std::size_t j = static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), t) - tau.begin());
  j = std::clamp<std::size_t>(j, 1, tau.size() - 1) - 1;
  const double h = tau[j + 1] - tau[j], s = (t - tau[j]) / h;
  const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1, d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
  std::vector<double> v(points[j].size());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = (d00 * points[j][k] + d01 * points[j + 1][k]) / h + d10 * tangents[j][k] + d11 * tangents[j + 1][k];
  return v;
}

Curve Curve::line(std::vector<double> from, std::vector<double> direction, double length) {
  Curve c;
  c.tau = {0.0, length};
  std::vector<double> to(from.size());
  for (std::size_t k = 0; k < from.size(); ++k) to[k] = from[k] + length * direction[k];
  c.points = {std::move(from), std::move(to)};
  c.tangents = {direction, direction};
  return c;
}

CplxArray transport_P(const RealArray& P, const Soldering& s) {
  CplxArray out = to_spinor(complexify(P), s, Variance::Down);
  for (auto& v : out.data()) v *= kTwistorPSign;
  return out;
}

TwistorConnection twistor_connection(const DMetricField& dm, std::span<const double> point,
                                     std::span<const double> coord_tangent, ConnectionBuilder build) {
  DMetricJets J = dmetric_jets(dm, point, 2);
  DConnection D = build(J, point);
  SpinFrame f = spin_frame(D);
  TwistorConnection tc;
  std::vector<double> t = adapted_vector(D.N, D.n, D.m, coord_tangent);
  tc.adapted_tangent = RealArray({4});
  for (int k = 0; k < 4; ++k) tc.adapted_tangent(k) = t[k];
  Eigen::Matrix2cd Gt = Eigen::Matrix2cd::Zero();
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int k = 0; k < 4; ++k) Gt(A, B) += f.connection.gamma(A, B, k) * t[k];
  tc.spin = Eigen::Matrix4cd::Zero();
  tc.spin.topLeftCorner<2, 2>() = Gt;
  tc.spin.bottomRightCorner<2, 2>() = -Gt.conjugate().transpose();
  WeylPackage w = weyl_dtensor(D, curvature(D));
  tc.algebra = algebra_block(spinor_vector(f.soldering, t), transport_P(w.P, f.soldering));
  return tc;
}

namespace {

Eigen::Matrix4cd generator(const Curve& c, double tau, const DMetricField& dm, ConnectionBuilder build) {
  std::vector<double> x = c.position(tau), u = c.tangent(tau);
  TwistorConnection tc = twistor_connection(dm, x, u, build);
  return tc.spin + tc.algebra;
}

void check_finite(const Eigen::Matrix4cd& M, double limit) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (!std::isfinite(M(i, j).real()) || !std::isfinite(M(i, j).imag()) || std::abs(M(i, j)) > limit)
        fail(ErrorCode::StepFailure, "transport produced a non-finite or runaway value");
}

// Propagator of dY/dtau = -G Y along c (RK4), optionally with the per-step values.
Eigen::Matrix4cd propagate(const Curve& c, const DMetricField& dm, int steps, ConnectionBuilder build,
                           std::vector<Eigen::Matrix4cd>* history = nullptr) {
  if (steps < 1) fail(ErrorCode::InvalidArgument, "transport needs at least one step");
  const double h = (c.end() - c.begin()) / steps;
  Eigen::Matrix4cd Y = Eigen::Matrix4cd::Identity();
  if (history) history->push_back(Y);
  Eigen::Matrix4cd G0 = generator(c, c.begin(), dm, build);
  for (int s = 0; s < steps; ++s) {
    const double t0 = c.begin() + s * h;
    Eigen::Matrix4cd Gm = generator(c, t0 + 0.5 * h, dm, build);
    Eigen::Matrix4cd G1 = generator(c, s + 1 == steps ? c.end() : t0 + h, dm, build);
    Eigen::Matrix4cd k1 = -G0 * Y;
    Eigen::Matrix4cd k2 = -Gm * (Y + 0.5 * h * k1);
    Eigen::Matrix4cd k3 = -Gm * (Y + 0.5 * h * k2);
    Eigen::Matrix4cd k4 = -G1 * (Y + h * k3);
    Y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(Y, 1e12);
    if (history) history->push_back(Y);
    G0 = G1;
  }
  return Y;
}

TwistorValue apply_propagator(const Eigen::Matrix4cd& Y, const TwistorValue& Z0) {
  // dual values follow the inverse transpose, which keeps W_a Z^a fixed
  Eigen::Matrix4cd M = Z0.dual ? Eigen::Matrix4cd(Y.inverse().transpose()) : Y;
  return TwistorValue::from_flat(apply_matrix(M, Z0.flat()), Z0.dual);
}

}  // namespace

Transport twistor_transport(const TwistorValue& Z0, const Curve& c, const DMetricField& dm, int steps,
                            ConnectionBuilder build) {
  if (dm.chart.dim() != 4) fail(ErrorCode::WrongDimension, "twistor transport needs a 4-dimensional chart");
  std::vector<Eigen::Matrix4cd> hist;
  propagate(c, dm, steps, build, &hist);
  Transport tr;
  const double h = (c.end() - c.begin()) / steps;
  for (std::size_t s = 0; s < hist.size(); ++s) {
    tr.tau.push_back(c.begin() + static_cast<double>(s) * h);
    tr.Z.push_back(apply_propagator(hist[s], Z0));
  }
  return tr;
}

double transport_order(const TwistorValue& Z0, const Curve& c, const DMetricField& dm, int steps,
                       ConnectionBuilder build) {
  TwistorValue a = twistor_transport(Z0, c, dm, steps, build).Z.back();
  TwistorValue b = twistor_transport(Z0, c, dm, 2 * steps, build).Z.back();
  TwistorValue d = twistor_transport(Z0, c, dm, 4 * steps, build).Z.back();
  return std::log2(max_abs_diff(a, b) / max_abs_diff(b, d));
}

TwistorCurvature twistor_curvature(const DMetricJets& dm, std::span<const double> point, std::span<const double> t,
                                   std::span<const double> v, ConnectionBuilder build) {
  if (dm.dim() != 4) fail(ErrorCode::WrongDimension, "twistor curvature needs a 4-dimensional chart");
  DConnection D = build(dm, point);
  JetArray R = curvature(D);
  if (min_order(R) < 1) fail(ErrorCode::OrderUnsupported, "twistor curvature needs d-metric jets of order >= 3");
  SpinFrame f = spin_frame(D);
  const Soldering& s = f.soldering;
  RealArray R0 = values(R);
  // Lorentz endomorphism R(t, v) in the orthonormal frame
  RealArray Mon({4, 4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double m = 0.0;
      for (int tau = 0; tau < 4; ++tau)
        for (int al = 0; al < 4; ++al) {
          double r = 0.0;
          for (int be = 0; be < 4; ++be)
            for (int ga = 0; ga < 4; ++ga) r += R0(tau, al, be, ga) * v[be] * t[ga];
          m += s.coframe(a, tau) * r * s.tetrad(b, al);
        }
      Mon(a, b) = m;
    }
  CplxArray XR = lorentz_to_spin(Mon);
  Eigen::Matrix2cd X = mat2_from(XR);
  WeylJets wj = weyl_jets(D, R);
  RealArray P = values(wj.P);
  RealArray DP = values(covariant_derivative(D, wj.P, {Variance::Down, Variance::Down}));
  RealArray T = values(torsion(D));
  std::vector<double> tor(4, 0.0);
  for (int g = 0; g < 4; ++g)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) tor[g] += T(g, a, b) * t[b] * v[a];
  RealArray DPt({4, 4}), DPv({4, 4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int e = 0; e < 4; ++e) {
        DPt(a, b) += DP(a, b, e) * t[e];
        DPv(a, b) += DP(a, b, e) * v[e];
      }
  CplxArray Ps = transport_P(P, s), DPts = transport_P(DPt, s), DPvs = transport_P(DPv, s);
  Eigen::Matrix2cd ts = spinor_vector(s, t), vs = spinor_vector(s, v), Ts = spinor_vector(s, tor);
  Eigen::Matrix4cd At = algebra_block(ts, Ps), Av = algebra_block(vs, Ps);
  Eigen::Matrix4cd dA = Eigen::Matrix4cd::Zero();
  for (int B = 0; B < 2; ++B)
    for (int Ap = 0; Ap < 2; ++Ap) dA(B, 2 + Ap) = kI * Ts(B, Ap);
  for (int Bp = 0; Bp < 2; ++Bp)
    for (int B = 0; B < 2; ++B) {
      cplx sum = 0.0;
      for (int A = 0; A < 2; ++A)
        for (int Ap = 0; Ap < 2; ++Ap)
          sum += vs(A, Ap) * DPts(A, Ap, B, Bp) - ts(A, Ap) * DPvs(A, Ap, B, Bp) + Ts(A, Ap) * Ps(A, Ap, B, Bp);
      dA(2 + Bp, B) = kI * sum;
    }
  TwistorCurvature out;
  out.F = Eigen::Matrix4cd::Zero();
  out.F.topLeftCorner<2, 2>() = X;
  out.F.bottomRightCorner<2, 2>() = -X.conjugate().transpose();
  out.F += dA + At * Av - Av * At;
  out.K = kI * out.F.transpose();
  // Psi route for the diagonal blocks: eps^{BC} Psi_{CAMN} t^{MM'} v^{NN'} eps_{M'N'}
  CurvatureSpinors cs = curvature_spinors(lowered_curvature(D, R).values, s, false);
  Eigen::Matrix2cd Xpsi = Eigen::Matrix2cd::Zero();
  for (int B = 0; B < 2; ++B)
    for (int A = 0; A < 2; ++A) {
      cplx sum = 0.0;
      for (int C = 0; C < 2; ++C)
        for (int M = 0; M < 2; ++M)
          for (int N = 0; N < 2; ++N)
            for (int Mp = 0; Mp < 2; ++Mp)
              for (int Np = 0; Np < 2; ++Np)
                sum += eps(B, C) * cs.psi(C, A, M, N) * ts(M, Mp) * vs(N, Np) * eps(Mp, Np);
      Xpsi(B, A) = sum;
    }
  Eigen::Matrix4cd Fpsi = out.F;
  Fpsi.topLeftCorner<2, 2>() = Xpsi;
  Fpsi.bottomRightCorner<2, 2>() = -Xpsi.conjugate().transpose();
  out.K_psi = kI * Fpsi.transpose();
  out.lower_left = out.K.bottomLeftCorner<2, 2>().cwiseAbs().maxCoeff();
  return out;
}

Eigen::Matrix4cd twistor_holonomy(const DMetricField& dm, std::span<const double> point, std::span<const double> t,
                                  std::span<const double> v, ConnectionBuilder build, double eps0,
                                  int steps_per_side) {
  if (dm.chart.dim() != 4) fail(ErrorCode::WrongDimension, "twistor holonomy needs a 4-dimensional chart");
  std::vector<double> tv(t.begin(), t.end()), vv(v.begin(), v.end()), mt(4), mv(4);
  for (int k = 0; k < 4; ++k) {
    mt[k] = -t[k];
    mv[k] = -v[k];
  }
  auto estimate = [&](double e) {
    std::vector<double> p0(point.begin(), point.end()), p1(4), p2(4), p3(4);
    for (int k = 0; k < 4; ++k) {
      p1[k] = p0[k] + e * t[k];
      p2[k] = p1[k] + e * v[k];
      p3[k] = p0[k] + e * v[k];
    }
    Eigen::Matrix4cd H = propagate(Curve::line(p3, mv, e), dm, steps_per_side, build) *
                         propagate(Curve::line(p2, mt, e), dm, steps_per_side, build) *
                         propagate(Curve::line(p1, vv, e), dm, steps_per_side, build) *
                         propagate(Curve::line(p0, tv, e), dm, steps_per_side, build);
    // H = I - e^2 F(t, v) + O(e^3)
    return Eigen::Matrix4cd(-(H - Eigen::Matrix4cd::Identity()) / (e * e));
  };
  Eigen::Matrix4cd F1 = estimate(eps0), F2 = estimate(0.5 * eps0), F4 = estimate(0.25 * eps0);
  Eigen::Matrix4cd R1 = 2.0 * F2 - F1, R2 = 2.0 * F4 - F2;
  Eigen::Matrix4cd F = (4.0 * R2 - R1) / 3.0;
  return kI * F.transpose();
}

FinslerTwistorBlocks finsler_twistor_blocks(const DMetricField& sasaki, std::span<const double> point,
                                            const TwistorValue& Z_h, const TwistorValue& Z_v,
                                            std::span<const double> origin, bool strict) {
  if (sasaki.chart.n != 4 || sasaki.chart.m != 4) fail(ErrorCode::WrongDimension, "Finsler twistor blocks need a 4+4 chart");
  DMetricJets J = dmetric_jets(sasaki, point, 2);
  DConnection D = cartan_dconnection(J, ConnectionKind::Cartan, point);
  BlockwiseSpinors bs = finsler_blockwise_spinors(D, curvature(D), false);
  FinslerTwistorBlocks out;
  out.compat_h = max_abs(psi_contract(bs.h.psi, Z_h.omega));
  out.compat_v = max_abs(psi_contract(bs.v.psi, Z_v.omega));
  for (int I = 0; I < 2; ++I)
    for (int Jx = 0; Jx < 2; ++Jx)
      for (int K = 0; K < 2; ++K) {
        cplx s = 0.0;
        for (int Dv = 0; Dv < 2; ++Dv) s += bs.mixed_psi(I, Jx, K, Dv) * Z_v.omega[Dv];
        out.compat_mixed = std::max(out.compat_mixed, std::abs(s));
      }
  const double variation = flat_variation(sasaki, point);
  const double tol = 1e-8;
  out.h_ok = out.compat_h < tol && out.compat_mixed < tol && variation < tol;
  out.v_ok = out.compat_v < tol && out.compat_mixed < tol && variation < tol;
  if (strict && !(out.h_ok && out.v_ok))
    fail(ErrorCode::IncompatibleBackground, std::string(out.h_ok ? "v" : "h") +
                                                "-block fails the compatibility conditions or has a varying background");
  RealArray N = values(nconnection_jets(sasaki.N, point, 0));
  std::vector<Jet> X = adapted_position(N, 4, point, origin, 1);
  auto block = [&](const TwistorValue& Z0, std::vector<int> idx, TwistorValue& sol, double& residual) {
    SpinFrame f = spin_frame(D, idx, {{0, 1, 2, 3}});
    std::array<CJet, 2> w = block_solution_jets(Z0, f.soldering, X);
    sol = Z0;
    sol.omega = {value(w[0]), value(w[1])};
    residual = max_abs(twistor_operator(D, f, w));
  };
  if (out.h_ok) block(Z_h, {0, 1, 2, 3}, out.h, out.residual_h);
  if (out.v_ok) block(Z_v, {4, 5, 6, 7}, out.v, out.residual_v);
  return out;
}

}  // namespace nonholo
