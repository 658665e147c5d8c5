#include "nonholo/spin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace nonholo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::size_t sflat(std::initializer_list<int> idx) {
  std::size_t f = 0;
  for (int i : idx) f = 2 * f + static_cast<std::size_t>(i);
  return f;
}

// Index k (0-based from the left) of a flat spinor position in a rank-r array.
int sbit(std::size_t flat, int k, int rank) { return static_cast<int>((flat >> (rank - 1 - k)) & 1u); }

CplxArray spinor_array(int rank) { return CplxArray(std::vector<int>(static_cast<std::size_t>(rank), 2)); }

Eigen::Matrix4cd soldering_matrix() {
  CplxArray s = flat_soldering();
  Eigen::Matrix4cd S;
  for (int a = 0; a < 4; ++a)
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap) S(a, 2 * A + Ap) = s(a, A, Ap);
  return S;
}

// sigma^{a'}_{AA'} as (a', A, A'), dual to the flat soldering.
CplxArray flat_soldering_dual() {
  Eigen::Matrix4cd Sinv = soldering_matrix().inverse();
  CplxArray d({4, 2, 2});
  for (int a = 0; a < 4; ++a)
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap) d(a, A, Ap) = Sinv(2 * A + Ap, a);
  return d;
}

// Replace tensor index `pos` (dimension 4) by a spinor pair: out(o, A, A', i) = sum_k map(k, A, A') in(o, k, i).
CplxArray convert_index(const CplxArray& in, int pos, const CplxArray& map) {
  const auto& dims = in.dims();
  if (dims[pos] != 4) fail(ErrorCode::RoleMismatch, "spinor conversion needs 4-valued tensor indices");
  std::size_t outer = 1, inner = 1;
  for (int k = 0; k < pos; ++k) outer *= dims[k];
  for (std::size_t k = pos + 1; k < dims.size(); ++k) inner *= dims[k];
  std::vector<int> nd(dims.begin(), dims.begin() + pos);
  nd.push_back(2);
  nd.push_back(2);
  nd.insert(nd.end(), dims.begin() + pos + 1, dims.end());
  CplxArray out(nd);
  for (std::size_t o = 0; o < outer; ++o)
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap)
        for (std::size_t i = 0; i < inner; ++i) {
          cplx s = 0.0;
          for (int k = 0; k < 4; ++k) s += map(k, A, Ap) * in[(o * 4 + k) * inner + i];
          out[((o * 2 + A) * 2 + Ap) * inner + i] = s;
        }
  return out;
}

// Inverse: the pair at positions (pos, pos + 1) becomes one tensor index.
CplxArray unconvert_pair(const CplxArray& in, int pos, const CplxArray& map) {
  const auto& dims = in.dims();
  if (dims[pos] != 2 || dims[pos + 1] != 2) fail(ErrorCode::RoleMismatch, "not a spinor pair");
  std::size_t outer = 1, inner = 1;
  for (int k = 0; k < pos; ++k) outer *= dims[k];
  for (std::size_t k = pos + 2; k < dims.size(); ++k) inner *= dims[k];
  std::vector<int> nd(dims.begin(), dims.begin() + pos);
  nd.push_back(4);
  nd.insert(nd.end(), dims.begin() + pos + 2, dims.end());
  CplxArray out(nd);
  for (std::size_t o = 0; o < outer; ++o)
    for (int k = 0; k < 4; ++k)
      for (std::size_t i = 0; i < inner; ++i) {
        cplx s = 0.0;
        for (int A = 0; A < 2; ++A)
          for (int Ap = 0; Ap < 2; ++Ap) s += map(k, A, Ap) * in[((o * 2 + A) * 2 + Ap) * inner + i];
        out[(o * 4 + k) * inner + i] = s;
      }
  return out;
}

const Soldering& pick(const SolderingSet& s, IndexRole role) {
  const Soldering* p = nullptr;
  if (role == IndexRole::Total) p = s.total;
  else if (role == IndexRole::H) p = s.h;
  else if (role == IndexRole::V) p = s.v;
  else fail(ErrorCode::RoleMismatch, "index is already a spinor index");
  if (!p) fail(ErrorCode::RoleMismatch, "no soldering declared for this index role");
  return *p;
}

Eigen::Matrix2cd mat2(const CplxArray& a, int k = -1) {
  Eigen::Matrix2cd m;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B) m(A, B) = k < 0 ? a(A, B) : a(k, A, B);
  return m;
}

// X_{ABCD}, Phi_{ABC'D'} and Lambda from a curvature spinor P_{AA'BB'CC'DD'}
// given as an accessor, so the same code serves values and derivatives.
template <class Get>
void extract(Get P, CplxArray& X, CplxArray& Phi, cplx& lambda) {
  X = spinor_array(4);
  Phi = spinor_array(4);
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int C = 0; C < 2; ++C)
        for (int D = 0; D < 2; ++D) {
          cplx x = 0.0, f = 0.0;
          for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q) {
              const double e1 = eps(p, q);
              if (e1 == 0.0) continue;
              for (int r = 0; r < 2; ++r)
                for (int t = 0; t < 2; ++t) {
                  const double e2 = eps(r, t);
                  if (e2 == 0.0) continue;
                  x += e1 * e2 * P(A, p, B, q, C, r, D, t);  // contract primed within each pair
                  f += e1 * e2 * P(A, p, B, q, r, C, t, D);  // C, D here are primed slots
                }
            }
          X(A, B, C, D) = 0.25 * x;
          Phi(A, B, C, D) = 0.25 * f;
        }
  lambda = 0.0;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int C = 0; C < 2; ++C)
        for (int D = 0; D < 2; ++D) lambda += eps(A, C) * eps(B, D) * X(A, B, C, D);
  lambda /= 6.0;
}

CplxArray symmetrize4(const CplxArray& X) {
  CplxArray S = spinor_array(4);
  std::array<int, 4> perm{0, 1, 2, 3};
  std::vector<std::array<int, 4>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int C = 0; C < 2; ++C)
        for (int D = 0; D < 2; ++D) {
          const std::array<int, 4> idx{A, B, C, D};
          cplx s = 0.0;
          for (const auto& p : perms) s += X(idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]);
          S(A, B, C, D) = s / 24.0;
        }
  return S;
}

CplxArray x_from_psi(const CplxArray& psi, double lambda) {
  CplxArray X = psi;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int C = 0; C < 2; ++C)
        for (int D = 0; D < 2; ++D)
          X(A, B, C, D) += lambda * (eps(A, C) * eps(B, D) + eps(A, D) * eps(B, C));
  return X;
}

}  // namespace

double eps(int A, int B) { return A == B ? 0.0 : (A == 0 ? 1.0 : -1.0); }

CplxArray flat_soldering() {
  const double h = kInvSqrt2;
  CplxArray s({4, 2, 2});
  s(0, 0, 1) = h;
  s(0, 1, 0) = h;
  s(1, 0, 1) = cplx(0.0, -h);
  s(1, 1, 0) = cplx(0.0, h);
  s(2, 0, 0) = h;
  s(2, 1, 1) = -h;
  s(3, 0, 0) = h;
  s(3, 1, 1) = h;
  return s;
}

CplxArray dirac_matrices() {
  // gamma_a = i sqrt2 [[0, sigma_a^{AA'}], [sigma_{a A'A}, 0]]; the factor i turns
  // the Clifford relation of the spinor metric -eta into that of eta.
  CplxArray s = flat_soldering();
  CplxArray g({4, 4, 4});
  const cplx f(0.0, std::sqrt(2.0));
  for (int a = 0; a < 4; ++a)
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap) {
        g(a, A, 2 + Ap) = f * s(a, A, Ap);
        cplx low = 0.0;
        for (int B = 0; B < 2; ++B)
          for (int Bp = 0; Bp < 2; ++Bp) low += eps(A, B) * eps(Ap, Bp) * s(a, B, Bp);
        g(a, 2 + Ap, A) = f * low;
      }
  return g;
}

double clifford_residual() {
  CplxArray g = dirac_matrices();
  const double eta[4] = {1.0, 1.0, 1.0, -1.0};
  double r = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          cplx s = 0.0;
          for (int k = 0; k < 4; ++k) s += g(a, i, k) * g(b, k, j) + g(b, i, k) * g(a, k, j);
          const double want = (a == b && i == j) ? 2.0 * eta[a] : 0.0;
          r = std::max(r, std::abs(s - want));
        }
  return r;
}

JetArray orthonormal_tetrad(const JetArray& G, std::span<const int> block,
                            const std::vector<std::vector<int>>& groups) {
  const int d = static_cast<int>(block.size());
  auto ip = [&](const std::vector<Jet>& x, const std::vector<Jet>& y) {
    Jet s;
    for (int k = 0; k < d; ++k) {
      if (x[k].is_exact_zero()) continue;
      Jet gy;
      for (int l = 0; l < d; ++l) accumulate(gy, G(block[k], block[l]), y[l]);
      accumulate(s, x[k], gy);
    }
    return s;
  };
  double scale = 0.0;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) scale = std::max(scale, std::abs(G(block[k], block[l]).value()));
  const double tol = 1e-10 * std::max(1.0, scale);

  struct Leg {
    std::vector<Jet> v;
    int sign;
  };
  std::vector<Leg> legs;
  for (const auto& group : groups) {
    std::vector<std::vector<Jet>> pending;
    for (int k : group) {
      std::vector<Jet> e(static_cast<std::size_t>(d));
      e[k] = Jet::exact(1.0);
      pending.push_back(std::move(e));
    }
    std::vector<Leg> done;
    auto project = [&](std::vector<Jet> v) {
      for (const Leg& L : done) {
        Jet c = ip(v, L.v) * static_cast<double>(L.sign);
        for (int k = 0; k < d; ++k) v[k] -= c * L.v[k];
      }
      return v;
    };
    while (!pending.empty()) {
      bool taken = false;
      for (std::size_t p = 0; p < pending.size() && !taken; ++p) {
        std::vector<Jet> v = project(pending[p]);
        Jet n2 = ip(v, v);
        if (std::abs(n2.value()) > tol) {
          const int sg = n2.value() > 0.0 ? 1 : -1;
          Jet inv = reciprocal(sqrt(n2 * static_cast<double>(sg)));
          for (Jet& c : v) c = c * inv;
          done.push_back({std::move(v), sg});
          pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(p));
          taken = true;
        }
      }
      if (!taken) {
        // every remaining candidate is null: a sum of two is not
        if (pending.size() < 2) fail(ErrorCode::SingularMetric, "degenerate metric block in Gram-Schmidt");
        for (int k = 0; k < d; ++k) pending[0][k] += pending[1][k];
      }
    }
    for (Leg& L : done) legs.push_back(std::move(L));
  }
  if (static_cast<int>(legs.size()) != d) fail(ErrorCode::WrongDimension, "groups do not cover the block");
  std::stable_partition(legs.begin(), legs.end(), [](const Leg& L) { return L.sign > 0; });
  int neg = 0;
  for (const Leg& L : legs) neg += L.sign < 0;
  if (d != 4 || neg != 1) fail(ErrorCode::WrongSignature, "spinor soldering needs signature (+,+,+,-)");
  JetArray E({d, d});
  for (int a = 0; a < d; ++a)
    for (int k = 0; k < d; ++k) E(a, k) = legs[a].v[k];
  return E;
}

double Soldering::reconstruction_residual() const {
  double r = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      cplx s = 0.0;
      for (int A = 0; A < 2; ++A)
        for (int Ap = 0; Ap < 2; ++Ap)
          for (int B = 0; B < 2; ++B)
            for (int Bp = 0; Bp < 2; ++Bp)
              s += gamma_up(k, A, Ap) * gamma_up(l, B, Bp) * eps(A, B) * eps(Ap, Bp);
      r = std::max(r, std::abs(metric(k, l) - kSpinorMetricSign * s));
    }
  return r;
}

Soldering make_soldering(const RealArray& tetrad, const RealArray& metric, std::vector<int> block) {
  Soldering s;
  s.block = std::move(block);
  s.metric = metric;
  s.tetrad = tetrad;
  Eigen::Matrix4d E;
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < 4; ++k) E(a, k) = tetrad(a, k);
  Eigen::Matrix4d th = E.inverse().transpose();
  s.coframe = RealArray({4, 4});
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < 4; ++k) s.coframe(a, k) = th(a, k);
  CplxArray up = flat_soldering(), dn = flat_soldering_dual();
  s.gamma_up = CplxArray({4, 2, 2});
  s.gamma_down = CplxArray({4, 2, 2});
  for (int k = 0; k < 4; ++k)
    for (int A = 0; A < 2; ++A)
      for (int Ap = 0; Ap < 2; ++Ap) {
        cplx u = 0.0, w = 0.0;
        for (int a = 0; a < 4; ++a) {
          u += th(a, k) * up(a, A, Ap);
          w += E(a, k) * dn(a, A, Ap);
        }
        s.gamma_up(k, A, Ap) = u;
        s.gamma_down(k, A, Ap) = w;
      }
  return s;
}

Soldering build_soldering(const DMetricJets& dm) {
  if (dm.dim() != 4) fail(ErrorCode::WrongDimension, "spinor soldering needs a 4-dimensional chart");
  JetArray G = truncate_all(adapted_metric(dm), 0);
  std::vector<int> block{0, 1, 2, 3};
  std::vector<int> hg(static_cast<std::size_t>(dm.n)), vg(static_cast<std::size_t>(dm.m));
  std::iota(hg.begin(), hg.end(), 0);
  std::iota(vg.begin(), vg.end(), dm.n);
  JetArray E = orthonormal_tetrad(G, block, {hg, vg});
  return make_soldering(values(E), values(G), block);
}

Soldering build_soldering(const DMetricField& dm, std::span<const double> point) {
  if (dm.chart.dim() != 4) fail(ErrorCode::WrongDimension, "spinor soldering needs a 4-dimensional chart");
  return build_soldering(dmetric_jets(dm, point, 0));
}

Soldering block_soldering(const RealArray& G, std::vector<int> block) {
  if (block.size() != 4) fail(ErrorCode::WrongDimension, "block soldering needs a 4-dimensional block");
  JetArray Gj(G.dims());
  for (std::size_t i = 0; i < G.size(); ++i) Gj[i] = Jet::exact(G[i]);
  JetArray E = orthonormal_tetrad(Gj, block, {{0, 1, 2, 3}});
  RealArray gb({4, 4});
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) gb(k, l) = G(block[k], block[l]);
  return make_soldering(values(E), gb, std::move(block));
}

CplxArray complexify(const RealArray& a) {
  CplxArray c(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i];
  return c;
}

CplxArray to_spinor(const CplxArray& T, const Soldering& s, Variance v) {
  CplxArray out = T;
  for (int pos = T.rank() - 1; pos >= 0; --pos)
    out = convert_index(out, pos, v == Variance::Up ? s.gamma_up : s.gamma_down);
  return out;
}

CplxArray from_spinor(const CplxArray& S, const Soldering& s, Variance v) {
  if (S.rank() % 2 != 0) fail(ErrorCode::RoleMismatch, "odd number of spinor indices");
  CplxArray out = S;
  for (int pos = S.rank() / 2 - 1; pos >= 0; --pos)
    out = unconvert_pair(out, 2 * pos, v == Variance::Up ? s.gamma_down : s.gamma_up);
  return out;
}

SpinorBlock tensor_to_spinor(const TensorBlock& T, const SolderingSet& s) {
  const int r = T.values.rank();
  if (static_cast<int>(T.roles.size()) != r || static_cast<int>(T.variance.size()) != r)
    fail(ErrorCode::RoleMismatch, "tensor block has inconsistent index tags");
  SpinorBlock S;
  S.name = T.name;
  S.values = complexify(T.values);
  for (int pos = r - 1; pos >= 0; --pos) {
    const Soldering& so = pick(s, T.roles[pos]);
    S.values = convert_index(S.values, pos, T.variance[pos] == Variance::Up ? so.gamma_up : so.gamma_down);
  }
  for (int pos = 0; pos < r; ++pos) {
    S.variance.insert(S.variance.end(), 2, T.variance[pos]);
    S.roles.push_back(IndexRole::SpinorUnprimed);
    S.roles.push_back(IndexRole::SpinorPrimed);
    S.origin.insert(S.origin.end(), 2, T.roles[pos]);
  }
  return S;
}

TensorBlock spinor_to_tensor(const SpinorBlock& S, const SolderingSet& s, double* imag_max) {
  const int r = S.values.rank();
  if (r % 2 != 0 || static_cast<int>(S.roles.size()) != r || static_cast<int>(S.origin.size()) != r ||
      static_cast<int>(S.variance.size()) != r)
    fail(ErrorCode::RoleMismatch, "spinor block has inconsistent index tags");
  for (int p = 0; p < r; p += 2)
    if (S.roles[p] != IndexRole::SpinorUnprimed || S.roles[p + 1] != IndexRole::SpinorPrimed ||
        S.origin[p] != S.origin[p + 1] || S.variance[p] != S.variance[p + 1])
      fail(ErrorCode::RoleMismatch, "spinor indices do not form (A, A') pairs");
  CplxArray out = S.values;
  for (int p = r / 2 - 1; p >= 0; --p) {
    const Soldering& so = pick(s, S.origin[2 * p]);
    out = unconvert_pair(out, 2 * p, S.variance[2 * p] == Variance::Up ? so.gamma_down : so.gamma_up);
  }
  TensorBlock T;
  T.name = S.name;
  T.values = RealArray(out.dims());
  double im = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    T.values[i] = out[i].real();
    im = std::max(im, std::abs(out[i].imag()));
  }
  if (imag_max) *imag_max = im;
  for (int p = 0; p < r; p += 2) {
    T.variance.push_back(S.variance[p]);
    T.roles.push_back(S.origin[p]);
  }
  return T;
}

JetArray lowered_curvature_jets(const DConnection& D, const JetArray& R) {
  const int d = D.dim();
  JetArray Rl({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          Jet s;
          for (int e = 0; e < d; ++e) accumulate(s, D.G(t, e), R(e, a, b, g));
          Rl(t, a, b, g) = s;
        }
  return Rl;
}

TensorBlock lowered_curvature(const DConnection& D, const JetArray& R) {
  const int d = D.dim();
  RealArray G = values(D.G), R0 = values(R), Rl({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          double s = 0.0;
          for (int e = 0; e < d; ++e) s += G(t, e) * R0(e, a, b, g);
          Rl(t, a, b, g) = s;
        }
  return make_block("R", std::vector<Variance>(4, Variance::Down), std::vector<IndexRole>(4, IndexRole::Total), Rl);
}

double curvature_symmetry_residual(const RealArray& R) {
  const int d = R.dim(0);
  double r = 0.0;
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          const double v = R(t, a, b, g);
          r = std::max(r, std::abs(v + R(a, t, b, g)));
          r = std::max(r, std::abs(v + R(t, a, g, b)));
          r = std::max(r, std::abs(v - R(b, g, t, a)));
          r = std::max(r, std::abs(v + R(t, b, g, a) + R(t, g, a, b)));
        }
  return r;
}

CplxArray curvature_spinor_form(const RealArray& Rl, const Soldering& s) {
  CplxArray P({4, 4, 4, 4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) P(a, b, c, d) = kSpinorMetricSign * Rl(c, d, a, b);
  return to_spinor(P, s, Variance::Down);
}

RealArray curvature_from_spinor_form(const CplxArray& Rs, const Soldering& s, double* imag_max) {
  CplxArray P = from_spinor(Rs, s, Variance::Down);
  RealArray Rl({4, 4, 4, 4});
  double im = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const cplx v = kSpinorMetricSign * P(a, b, c, d);
          Rl(c, d, a, b) = v.real();
          im = std::max(im, std::abs(v.imag()));
        }
  if (imag_max) *imag_max = im;
  return Rl;
}

CplxArray rebuild_curvature_spinor(const CurvatureSpinors& cs) {
  CplxArray X = x_from_psi(cs.psi, cs.lambda);
  CplxArray out = spinor_array(8);
  for (std::size_t f = 0; f < out.size(); ++f) {
    const int A = sbit(f, 0, 8), Ap = sbit(f, 1, 8), B = sbit(f, 2, 8), Bp = sbit(f, 3, 8);
    const int C = sbit(f, 4, 8), Cp = sbit(f, 5, 8), D = sbit(f, 6, 8), Dp = sbit(f, 7, 8);
    cplx v = X(A, B, C, D) * eps(Ap, Bp) * eps(Cp, Dp);
    v += cs.phi(A, B, Cp, Dp) * eps(Ap, Bp) * eps(C, D);
    v += std::conj(cs.phi(Ap, Bp, C, D)) * eps(A, B) * eps(Cp, Dp);
    v += std::conj(X(Ap, Bp, Cp, Dp)) * eps(A, B) * eps(C, D);
    out[f] = v;
  }
  return out;
}

CurvatureSpinors curvature_spinors(const RealArray& Rl, const Soldering& s, bool strict) {
  if (Rl.rank() != 4 || Rl.dim(0) != 4) fail(ErrorCode::WrongDimension, "curvature spinors need a 4-dimensional curvature");
  CurvatureSpinors cs;
  cs.symmetry = curvature_symmetry_residual(Rl);
  if (strict && cs.symmetry > 1e-6)
    fail(ErrorCode::SymmetryViolation,
         "curvature lacks the symmetries of a metric curvature (residual " + std::to_string(cs.symmetry) + ")");
  CplxArray P = curvature_spinor_form(Rl, s);
  cplx lam;
  extract(
      [&](int a, int ap, int b, int bp, int c, int cp, int d, int dp) {
        return P[sflat({a, ap, b, bp, c, cp, d, dp})];
      },
      cs.X, cs.phi, lam);
  cs.lambda = lam.real();
  cs.lambda_imag = std::abs(lam.imag());
  cs.psi = symmetrize4(cs.X);
  CplxArray Xp = x_from_psi(cs.psi, cs.lambda);
  cs.psi_symmetry = max_abs_diff(cs.X, Xp);
  double sym = 0.0, herm = 0.0;
  for (int A = 0; A < 2; ++A)
    for (int B = 0; B < 2; ++B)
      for (int C = 0; C < 2; ++C)
        for (int D = 0; D < 2; ++D) {
          sym = std::max(sym, std::abs(cs.phi(A, B, C, D) - cs.phi(B, A, C, D)));
          sym = std::max(sym, std::abs(cs.phi(A, B, C, D) - cs.phi(A, B, D, C)));
          herm = std::max(herm, std::abs(std::conj(cs.phi(A, B, C, D)) - cs.phi(C, D, A, B)));
        }
  cs.phi_symmetry = sym;
  cs.phi_hermiticity = herm;
  RealArray back = curvature_from_spinor_form(rebuild_curvature_spinor(cs), s);
  cs.reconstruction = max_abs_diff(back, Rl);
  return cs;
}

CurvatureSpinors curvature_spinors(const TensorBlock& Rl, const SolderingSet& s, bool strict) {
  if (Rl.roles.size() != 4) fail(ErrorCode::RoleMismatch, "curvature block must have four indices");
  for (std::size_t k = 0; k < 4; ++k)
    if (Rl.variance[k] != Variance::Down || Rl.roles[k] != Rl.roles[0])
      fail(ErrorCode::RoleMismatch, "curvature block must be fully lowered with one index role");
  return curvature_spinors(Rl.values, pick(s, Rl.roles[0]), strict);
}

CplxArray weyl_psi(const RealArray& W, const Soldering& s) {
  // Decomposition order: Cs(a, b, c, d) = -C_{c b a d} in the conformal module placement.
  CplxArray C({4, 4, 4, 4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) C(a, b, c, d) = kSpinorMetricSign * W(c, b, a, d);
  CplxArray Cs = to_spinor(C, s, Variance::Down);
  CplxArray X, Phi;
  cplx lam;
  extract([&](int a, int ap, int b, int bp, int c, int cp, int d, int dp) { return Cs[sflat({a, ap, b, bp, c, cp, d, dp})]; },
          X, Phi, lam);
  return symmetrize4(X);
}

SelfDualSplit weyl_split(const CurvatureSpinors& cs, const RealArray& W, const Soldering& s) {
  SelfDualSplit out;
  CplxArray C({4, 4, 4, 4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) C(a, b, c, d) = kSpinorMetricSign * W(c, b, a, d);
  out.weyl = to_spinor(C, s, Variance::Down);
  out.anti_self_dual = spinor_array(8);
  out.self_dual = spinor_array(8);
  for (std::size_t f = 0; f < out.weyl.size(); ++f) {
    const int A = sbit(f, 0, 8), Ap = sbit(f, 1, 8), B = sbit(f, 2, 8), Bp = sbit(f, 3, 8);
    const int C2 = sbit(f, 4, 8), Cp = sbit(f, 5, 8), D = sbit(f, 6, 8), Dp = sbit(f, 7, 8);
    out.anti_self_dual[f] = cs.psi(A, B, C2, D) * eps(Ap, Bp) * eps(Cp, Dp);
    out.self_dual[f] = std::conj(cs.psi(Ap, Bp, Cp, Dp)) * eps(A, B) * eps(C2, D);
    out.residual = std::max(out.residual, std::abs(out.weyl[f] - out.anti_self_dual[f] - out.self_dual[f]));
  }
  return out;
}

std::vector<cplx> psi_components(const CplxArray& psi, std::span<const cplx> o, std::span<const cplx> iota) {
  std::vector<cplx> out(5);
  for (int k = 0; k < 5; ++k) {
    // first 4-k slots take o, the rest iota
    cplx s = 0.0;
    for (int A = 0; A < 2; ++A)
      for (int B = 0; B < 2; ++B)
        for (int C = 0; C < 2; ++C)
          for (int D = 0; D < 2; ++D) {
            const int idx[4] = {A, B, C, D};
            cplx w = psi(A, B, C, D);
            for (int q = 0; q < 4; ++q) w *= (q < 4 - k) ? o[idx[q]] : iota[idx[q]];
            s += w;
          }
    out[k] = s;
  }
  return out;
}

std::vector<std::vector<cplx>> principal_spinors(const CplxArray& psi) {
  // Psi(x) with x = (1, z): sum_k binom(4, k) Psi_{0..01..1} z^k
  const double binom[5] = {1, 4, 6, 4, 1};
  cplx c[5];
  for (int k = 0; k < 5; ++k) {
    int idx[4];
    for (int q = 0; q < 4; ++q) idx[q] = q < 4 - k ? 0 : 1;
    c[k] = binom[k] * psi(idx[0], idx[1], idx[2], idx[3]);
  }
  double scale = 0.0;
  for (const cplx& v : c) scale = std::max(scale, std::abs(v));
  std::vector<std::vector<cplx>> out;
  if (scale == 0.0) return out;
  int deg = 4;
  while (deg > 0 && std::abs(c[deg]) <= 1e-14 * scale) {
    out.push_back({0.0, 1.0});  // root at infinity
    --deg;
  }
  if (deg == 0) return out;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
  for (int i = 0; i < deg; ++i) out.push_back({1.0, es.eigenvalues()(i)});
  return out;
}

CplxArray lorentz_to_spin(const RealArray& M, double* residual) {
  CplxArray s = flat_soldering();
  Eigen::Matrix<double, 32, 6> A;
  Eigen::Matrix<double, 32, 1> rhs;
  auto basis = [](int j) {
    Eigen::Matrix2cd X = Eigen::Matrix2cd::Zero();
    const cplx u = (j % 2 == 0) ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
    if (j / 2 == 0) {
      X(0, 0) = u;
      X(1, 1) = -u;
    } else if (j / 2 == 1) {
      X(0, 1) = u;
    } else {
      X(1, 0) = u;
    }
    return X;
  };
  for (int b = 0; b < 4; ++b) {
    Eigen::Matrix2cd sb = mat2(s, b);
    Eigen::Matrix2cd target = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 4; ++a) target += M(a, b) * mat2(s, a);
    for (int e = 0; e < 4; ++e) {
      const int row = 8 * b + 2 * e;
      rhs(row) = target(e / 2, e % 2).real();
      rhs(row + 1) = target(e / 2, e % 2).imag();
    }
    for (int j = 0; j < 6; ++j) {
      Eigen::Matrix2cd X = basis(j);
      Eigen::Matrix2cd L = X * sb + sb * X.adjoint();
      for (int e = 0; e < 4; ++e) {
        const int row = 8 * b + 2 * e;
        A(row, j) = L(e / 2, e % 2).real();
        A(row + 1, j) = L(e / 2, e % 2).imag();
      }
    }
  }
  Eigen::Matrix<double, 6, 1> x = A.colPivHouseholderQr().solve(rhs);
  if (residual) *residual = (A * x - rhs).cwiseAbs().maxCoeff();
  Eigen::Matrix2cd X = Eigen::Matrix2cd::Zero();
  for (int j = 0; j < 6; ++j) X += x(j) * basis(j);
  CplxArray out({2, 2});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = X(i, j);
  return out;
}

SpinConnection spin_connection(const DConnection& D, const JetArray& E, std::span<const int> block) {
  if (min_order(E) < 1) fail(ErrorCode::OrderUnsupported, "spin connection needs tetrad jets of order >= 1");
  SpinConnection sc;
  sc.block.assign(block.begin(), block.end());
  RealArray E0 = values(E);
  Eigen::Matrix4d Em;
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < 4; ++k) Em(a, k) = E0(a, k);
  Eigen::Matrix4d th = Em.inverse().transpose();
  sc.omega = RealArray({4, 4, 4});
  sc.gamma = CplxArray({2, 2, 4});
  for (int k = 0; k < 4; ++k) {
    RealArray M({4, 4});
    for (int b = 0; b < 4; ++b) {
      // D_{e_k} E_b in the block basis
      double dE[4];
      for (int l = 0; l < 4; ++l) {
        double v = D.e(block[k], E(b, l)).value();
        for (int m = 0; m < 4; ++m) v += D.Gamma(block[l], block[m], block[k]).value() * E0(b, m);
        dE[l] = v;
      }
      for (int a = 0; a < 4; ++a) {
        double v = 0.0;
        for (int l = 0; l < 4; ++l) v += th(a, l) * dE[l];
        M(a, b) = v;
        sc.omega(a, b, k) = v;
      }
    }
    double res = 0.0;
    CplxArray X = lorentz_to_spin(M, &res);
    sc.lift_residual = std::max(sc.lift_residual, res);
    for (int A = 0; A < 2; ++A)
      for (int B = 0; B < 2; ++B) sc.gamma(A, B, k) = X(A, B);
  }
  return sc;
}

SpinorBianchi spinor_bianchi_residual(const DMetricJets& dm, std::span<const double> point, ConnectionBuilder build) {
  if (dm.dim() != 4) fail(ErrorCode::WrongDimension, "spinor Bianchi identities need a 4-dimensional chart");
  DConnection D = build(dm, point);
  JetArray R = curvature(D);
  if (min_order(R) < 1) fail(ErrorCode::OrderUnsupported, "spinor Bianchi identities need d-metric jets of order >= 3");
  JetArray Rl = lowered_curvature_jets(D, R);
  RealArray DR = values(covariant_derivative(D, Rl, std::vector<Variance>(4, Variance::Down)));
  Soldering s = build_soldering(dm);
  SpinorBianchi out;
  CplxArray P({4, 4, 4, 4, 4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          for (int e = 0; e < 4; ++e) {
            P(a, b, c, d, e) = kSpinorMetricSign * DR(c, d, a, b, e);
            out.scale = std::max(out.scale, std::abs(DR(c, d, a, b, e)));
          }
  CplxArray Ps = to_spinor(P, s, Variance::Down);
  // derivatives of X, Phi, Lambda for each derivative pair (E, E')
  CplxArray dPsi = spinor_array(6), dPhi = spinor_array(6), dLam = spinor_array(2);
  for (int E = 0; E < 2; ++E)
    for (int Ep = 0; Ep < 2; ++Ep) {
      CplxArray X, Phi;
      cplx lam;
      extract(
          [&](int a, int ap, int b, int bp, int c, int cp, int d, int dp) {
            return Ps[sflat({a, ap, b, bp, c, cp, d, dp, E, Ep})];
          },
          X, Phi, lam);
      CplxArray psi = symmetrize4(X);
      for (std::size_t f = 0; f < 16; ++f) {
        dPsi[f * 4 + static_cast<std::size_t>(2 * E + Ep)] = psi[f];
        dPhi[f * 4 + static_cast<std::size_t>(2 * E + Ep)] = Phi[f];
      }
      dLam(E, Ep) = lam;
    }
  auto dpsi = [&](int A, int B, int C, int D, int E, int Ep) { return dPsi[sflat({A, B, C, D, E, Ep})]; };
  auto dphi = [&](int A, int B, int Ap, int Bp, int E, int Ep) { return dPhi[sflat({A, B, Ap, Bp, E, Ep})]; };
  // Sym_(BCD)
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int B = 0; B < 2; ++B)
    for (int C = 0; C < 2; ++C)
      for (int D = 0; D < 2; ++D)
        for (int Bp = 0; Bp < 2; ++Bp) {
          cplx div = 0.0;
          for (int A = 0; A < 2; ++A)
            for (int F = 0; F < 2; ++F) div += eps(A, F) * dpsi(A, B, C, D, F, Bp);
          const int idx[3] = {B, C, D};
          cplx rhs = 0.0;
          for (const auto& p : perms) {
            const int b = idx[p[0]], c = idx[p[1]], d = idx[p[2]];
            for (int Ap = 0; Ap < 2; ++Ap)
              for (int Fp = 0; Fp < 2; ++Fp) rhs += eps(Ap, Fp) * dphi(c, d, Ap, Bp, b, Fp);
          }
          rhs /= 6.0;
          out.psi_phi = std::max(out.psi_phi, std::abs(div - rhs));
          out.psi_divergence = std::max(out.psi_divergence, std::abs(div));
        }
  for (int D = 0; D < 2; ++D)
    for (int Bp = 0; Bp < 2; ++Bp) {
      cplx v = 3.0 * dLam(D, Bp);
      for (int C = 0; C < 2; ++C)
        for (int F = 0; F < 2; ++F)
          for (int Ap = 0; Ap < 2; ++Ap)
            for (int Fp = 0; Fp < 2; ++Fp) v += eps(C, F) * eps(Ap, Fp) * dphi(C, D, Ap, Bp, F, Fp);
      out.phi_lambda = std::max(out.phi_lambda, std::abs(v));
    }
  CurvatureSpinors cs = curvature_spinors(lowered_curvature(D, R).values, s, false);
  out.phi_max = max_abs(cs.phi);
  out.lambda_abs = std::abs(cs.lambda);
  return out;
}

double conformal_psi_residual(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                              ConnectionBuilder build) {
  require_positive(ScalarField::constant(static_cast<int>(point.size()), w.value()), point);
  DConnection D = build(dm, point);
  CurvatureSpinors a = curvature_spinors(lowered_curvature(D, curvature(D)).values, build_soldering(dm), false);
  DMetricJets dh = conformal_rescale(dm, w);
  DConnection Dh = build(dh, point);
  CurvatureSpinors b = curvature_spinors(lowered_curvature(Dh, curvature(Dh)).values, build_soldering(dh), false);
  const double w2 = w.value() * w.value();
  double r = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) r = std::max(r, std::abs(w2 * b.psi[i] - a.psi[i]));
  return r;
}

BlockwiseSpinors finsler_blockwise_spinors(const DConnection& D8, const JetArray& R8, bool strict) {
  if (D8.n != 4 || D8.m != 4) fail(ErrorCode::WrongDimension, "blockwise spinors need a 4+4 chart");
  RealArray G = values(D8.G);
  RealArray Rl = lowered_curvature(D8, R8).values;
  BlockwiseSpinors out;
  out.h_soldering = block_soldering(G, {0, 1, 2, 3});
  out.v_soldering = block_soldering(G, {4, 5, 6, 7});
  RealArray Rh({4, 4, 4, 4}), Rv({4, 4, 4, 4}), Pm({4, 4, 4, 4});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          Rh(i, j, k, l) = Rl(i, j, k, l);
          Rv(i, j, k, l) = Rl(4 + i, 4 + j, 4 + k, 4 + l);
          Pm(i, j, k, l) = Rl(i, j, k, 4 + l);
        }
  out.h = curvature_spinors(Rh, out.h_soldering, strict);
  out.v = curvature_spinors(Rv, out.v_soldering, strict);
  SolderingSet set{nullptr, &out.h_soldering, &out.v_soldering};
  out.mixed = tensor_to_spinor(make_block("P", std::vector<Variance>(4, Variance::Down),
                                          {IndexRole::H, IndexRole::H, IndexRole::H, IndexRole::V}, Pm),
                               set);
  out.mixed_norm = max_abs(Pm);
  // Decomposition order of the mixed block: derivative pair (k, a) first, then (i, j).
  const CplxArray& M = out.mixed.values;  // (I, I', J, J', K, K', A, A')
  auto P = [&](int k, int kp, int a, int ap, int i, int ip, int j, int jp) {
    return kSpinorMetricSign * M[sflat({i, ip, j, jp, k, kp, a, ap})];
  };
  CplxArray X = spinor_array(4);  // X(K, D, I, J) with D the v-index
  for (int K = 0; K < 2; ++K)
    for (int Dv = 0; Dv < 2; ++Dv)
      for (int I = 0; I < 2; ++I)
        for (int J = 0; J < 2; ++J) {
          cplx x = 0.0;
          for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
              for (int r = 0; r < 2; ++r)
                for (int t = 0; t < 2; ++t) x += eps(p, q) * eps(r, t) * P(K, p, Dv, q, I, r, J, t);
          X(K, Dv, I, J) = 0.25 * x;
        }
  // Psi_{IJK D}: symmetrize the three h-indices
  out.mixed_psi = spinor_array(4);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int I = 0; I < 2; ++I)
    for (int J = 0; J < 2; ++J)
      for (int K = 0; K < 2; ++K)
        for (int Dv = 0; Dv < 2; ++Dv) {
          const int idx[3] = {I, J, K};
          cplx s = 0.0;
          for (const auto& p : perms) s += X(idx[p[2]], Dv, idx[p[0]], idx[p[1]]);
          out.mixed_psi(I, J, K, Dv) = s / 6.0;
        }
  return out;
}

}  // namespace nonholo
