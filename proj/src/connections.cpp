#include "nonholo/connections.hpp"

#include <cmath>

namespace nonholo {

const char* connection_kind_name(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::Canonical: return "canonical";
    case ConnectionKind::Cartan: return "cartan";
    case ConnectionKind::Berwald: return "berwald";
    case ConnectionKind::Chern: return "chern";
    case ConnectionKind::LeviCivita: return "levi-civita";
    case ConnectionKind::Custom: return "custom";
  }
  return "custom";
}

JetArray truncate_all(const JetArray& a, int order) {
  JetArray r = a;
  for (Jet& j : r.data())
    if (!j.is_exact() && j.order() > order) j = j.truncated(order);
  return r;
}

namespace {

JetArray block(const JetArray& a, int off, int size) {
  JetArray r({size, size});
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) r(i, j) = a(off + i, off + j);
  return r;
}

void init_frame_data(DConnection& D, const DMetricJets& dm, std::span<const double> point) {
  D.n = dm.n;
  D.m = dm.m;
  D.N = dm.N;
  D.G = adapted_metric(dm);
  D.Ginv = inverse(D.G);
  D.W = anholonomy_jets(dm.N, dm.n, dm.m);
  D.point.assign(point.begin(), point.end());
  const int d = dm.dim();
  D.Gamma = JetArray({d, d, d});
}

}  // namespace

DConnectionCoeffs coefficients(const DConnection& D) {
  const int n = D.n, m = D.m;
  DConnectionCoeffs c;
  c.kind = D.kind;
  c.point = D.point;
  c.L_h = RealArray({n, n, n});
  c.L_v = RealArray({m, m, n});
  c.C_h = RealArray({n, n, m});
  c.C_v = RealArray({m, m, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) c.L_h(i, j, k) = D.Gamma(i, j, k).value();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < n; ++k) c.L_v(a, b, k) = D.Gamma(n + a, n + b, k).value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < m; ++a) c.C_h(i, j, a) = D.Gamma(i, j, n + a).value();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int e = 0; e < m; ++e) c.C_v(a, b, e) = D.Gamma(n + a, n + b, n + e).value();
  return c;
}

DConnection canonical_dconnection(const DMetricJets& dm, std::span<const double> point) {
  DConnection D;
  D.kind = ConnectionKind::Canonical;
  init_frame_data(D, dm, point);
  const int n = dm.n, m = dm.m;
  const JetArray& g = dm.g;
  const JetArray& h = dm.h;
  const JetArray gi = block(D.Ginv, 0, n);
  const JetArray hi = block(D.Ginv, n, m);
  auto e = [&](int alpha, const Jet& f) { return D.e(alpha, f); };

  // e_k g_ij and d_c g_ij, e_k h_ab and d_c h_ab
  JetArray eg({n, n, n}), dg({n, n, m}), eh({m, m, n}), dh({m, m, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) eg(i, j, k) = e(k, g(i, j));
      for (int c = 0; c < m; ++c) dg(i, j, c) = g(i, j).derivative(n + c);
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      for (int k = 0; k < n; ++k) eh(a, b, k) = e(k, h(a, b));
      for (int c = 0; c < m; ++c) dh(a, b, c) = h(a, b).derivative(n + c);
    }
  // dN(k, a, b) = d_b N_k^a
  JetArray dN({n, m, m});
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) dN(k, a, b) = dm.N(k, a).derivative(n + b);

  // L^i_jk = 1/2 g^ir (e_k g_jr + e_j g_kr - e_r g_jk)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet s;
        for (int r = 0; r < n; ++r) accumulate(s, gi(i, r), eg(j, r, k) + eg(k, r, j) - eg(j, k, r));
        D.Gamma(i, j, k) = 0.5 * s;
      }
  // L^a_bk = d_b N_k^a + 1/2 h^ac (e_k h_bc - h_dc d_b N_k^d - h_db d_c N_k^d)
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < n; ++k) {
        Jet s;
        for (int c = 0; c < m; ++c) {
          Jet t = eh(b, c, k);
          for (int dd = 0; dd < m; ++dd) {
            if (!dN(k, dd, b).is_exact_zero()) t -= h(dd, c) * dN(k, dd, b);
            if (!dN(k, dd, c).is_exact_zero()) t -= h(dd, b) * dN(k, dd, c);
          }
          accumulate(s, hi(a, c), t);
        }
        D.Gamma(n + a, n + b, k) = dN(k, a, b) + 0.5 * s;
      }
  // C^i_jc = 1/2 g^ik d_c g_jk
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < m; ++c) {
        Jet s;
        for (int k = 0; k < n; ++k) accumulate(s, gi(i, k), dg(j, k, c));
        D.Gamma(i, j, n + c) = 0.5 * s;
      }
  // C^a_bc = 1/2 h^ad (d_c h_bd + d_b h_cd - d_d h_bc)
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        Jet s;
        for (int dd = 0; dd < m; ++dd) accumulate(s, hi(a, dd), dh(b, dd, c) + dh(c, dd, b) - dh(b, c, dd));
        D.Gamma(n + a, n + b, n + c) = 0.5 * s;
      }
  return D;
}

DConnection canonical_dconnection(const DMetricField& dm, std::span<const double> point, int order) {
  return canonical_dconnection(dmetric_jets(dm, point, order), point);
}

DConnection cartan_dconnection(const DMetricJets& s, ConnectionKind kind, std::span<const double> point) {
  if (s.n != s.m) fail(ErrorCode::NotSasaki, "Sasaki lift needs n = m");
  const int n = s.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(s.g(i, j).value() - s.h(i, j).value()) > 1e-10)
        fail(ErrorCode::NotSasaki, "h- and v-blocks of the d-metric differ");
  DConnection D;
  D.kind = kind;
  init_frame_data(D, s, point);
  const JetArray gi = block(D.Ginv, 0, n);
  const JetArray& g = s.g;

  JetArray L({n, n, n}), C({n, n, n});
  if (kind == ConnectionKind::Berwald) {
    // L^i_jk = d N_j^i / d y^k
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) L(i, j, k) = s.N(j, i).derivative(n + k);
  } else {
    JetArray eg({n, n, n});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) eg(i, j, k) = D.e(k, g(i, j));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Jet acc;
          for (int h = 0; h < n; ++h) accumulate(acc, gi(i, h), eg(j, h, k) + eg(h, k, j) - eg(j, k, h));
          L(i, j, k) = 0.5 * acc;
        }
    if (kind == ConnectionKind::Cartan) {
      JetArray dg({n, n, n});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) dg(i, j, k) = g(i, j).derivative(n + k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            Jet acc;
            for (int h = 0; h < n; ++h) accumulate(acc, gi(i, h), dg(h, k, j) + dg(h, j, k) - dg(j, k, h));
            C(i, j, k) = 0.5 * acc;
          }
    } else if (kind != ConnectionKind::Chern) {
      fail(ErrorCode::InvalidArgument, "cartan_dconnection supports cartan, berwald and chern kinds");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        D.Gamma(i, j, k) = L(i, j, k);
        D.Gamma(n + i, n + j, k) = L(i, j, k);
        D.Gamma(i, j, n + k) = C(i, j, k);
        D.Gamma(n + i, n + j, n + k) = C(i, j, k);
      }
  return D;
}

JetArray christoffel(const JetArray& G) {
  const int d = G.dim(0);
  JetArray Gi = inverse(G);
  JetArray dG({d, d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) dG(a, b, c) = G(a, b).derivative(c);
  JetArray Gam({d, d, d});
  for (int g = 0; g < d; ++g)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        Jet s;
        for (int e = 0; e < d; ++e) accumulate(s, Gi(g, e), dG(e, a, b) + dG(e, b, a) - dG(a, b, e));
        Gam(g, a, b) = 0.5 * s;
        Gam(g, b, a) = Gam(g, a, b);
      }
  return Gam;
}

RealArray levi_civita(const std::vector<ScalarField>& G, int dim, std::span<const double> point) {
  auto u = coordinate_jets(point, 1);
  JetArray Gj({dim, dim});
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) Gj(a, b) = G[a * dim + b](u);
  return values(christoffel(Gj));
}

JetArray assemble_metric_jets(const DMetricJets& dm) {
  const int n = dm.n, m = dm.m, d = n + m;
  JetArray G({d, d});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet s = dm.g(i, j);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          if (!dm.N(i, a).is_exact_zero() && !dm.N(j, b).is_exact_zero()) accumulate(s, dm.N(i, a) * dm.N(j, b), dm.h(a, b));
      G(i, j) = s;
      G(j, i) = s;
    }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      Jet s;
      for (int e = 0; e < m; ++e) accumulate(s, dm.N(i, e), dm.h(a, e));
      G(i, n + a) = s;
      G(n + a, i) = s;
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) G(n + a, n + b) = dm.h(a, b);
  return G;
}

DConnection levi_civita_adapted(const DMetricJets& dm, std::span<const double> point) {
  DConnection D;
  D.kind = ConnectionKind::LeviCivita;
  init_frame_data(D, dm, point);
  const int n = dm.n, m = dm.m, d = n + m;
  JetArray cg = christoffel(assemble_metric_jets(dm));
  // frame E(alpha, mu) and coframe Th(gamma, mu) as jets
  JetArray E({d, d}), Th({d, d});
  for (int k = 0; k < d; ++k) {
    E(k, k) = Jet::exact(1.0);
    Th(k, k) = Jet::exact(1.0);
  }
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < m; ++b) {
      E(i, n + b) = -dm.N(i, b);
      Th(n + b, i) = dm.N(i, b);
    }
  // nabla_{e_b} e_a = (e_b E_a^mu + E_a^l E_b^nu Gamma^mu_{l nu}) d_mu
  JetArray V({d, d, d});  // V(a, b, mu)
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int mu = 0; mu < d; ++mu) {
        Jet s = D.e(b, E(a, mu));
        for (int l = 0; l < d; ++l) {
          if (E(a, l).is_exact_zero()) continue;
          for (int nu = 0; nu < d; ++nu) {
            if (E(b, nu).is_exact_zero() || cg(mu, l, nu).is_exact_zero()) continue;
            s += E(a, l) * E(b, nu) * cg(mu, l, nu);
          }
        }
        V(a, b, mu) = s;
      }
  for (int g = 0; g < d; ++g)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Jet s;
        for (int mu = 0; mu < d; ++mu) accumulate(s, Th(g, mu), V(a, b, mu));
        D.Gamma(g, a, b) = s;
      }
  return D;
}

JetArray torsion(const DConnection& D) {
  const int d = D.dim();
  JetArray T({d, d, d});
  for (int g = 0; g < d; ++g)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) T(g, a, b) = D.Gamma(g, a, b) - D.Gamma(g, b, a) - D.W(b, a, g);
  return T;
}

TensorBlock dtorsion(const DConnection& D) {
  return make_block("T", {Variance::Up, Variance::Down, Variance::Down},
                    {IndexRole::Total, IndexRole::Total, IndexRole::Total}, values(torsion(D)));
}

JetArray curvature(const DConnection& D) {
  const int d = D.dim();
  const JetArray& Gm = D.Gamma;
  // e_g Gamma^t_{ab}
  JetArray eG({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (!Gm(t, a, b).is_exact_zero())
          for (int g = 0; g < d; ++g) eG(t, a, b, g) = D.e(g, Gm(t, a, b));
  JetArray R({d, d, d, d});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          if (b == g) continue;
          Jet s = eG(t, a, b, g) - eG(t, a, g, b);
          for (int mu = 0; mu < d; ++mu) {
            accumulate(s, Gm(mu, a, b), Gm(t, mu, g));
            accumulate(s, Gm(mu, a, g), Gm(t, mu, b), -1.0);
            accumulate(s, Gm(t, a, mu), D.W(g, b, mu), -1.0);
          }
          R(t, a, b, g) = s;
        }
  return R;
}

JetArray covariant_derivative(const DConnection& D, const JetArray& T, const std::vector<Variance>& var) {
  const int d = D.dim();
  const int r = T.rank();
  std::vector<int> dims = T.dims();
  dims.push_back(d);
  JetArray out(dims);
  std::vector<std::size_t> stride(r, 1);
  for (int k = r - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::size_t>(T.dim(k + 1));
  std::vector<int> idx(r, 0);
  for (std::size_t f = 0; f < T.size(); ++f) {
    std::size_t rem = f;
    for (int k = 0; k < r; ++k) {
      idx[k] = static_cast<int>(rem / stride[k]);
      rem %= stride[k];
    }
    for (int b = 0; b < d; ++b) {
      Jet s = D.e(b, T[f]);
      for (int k = 0; k < r; ++k) {
        const std::size_t base = f - static_cast<std::size_t>(idx[k]) * stride[k];
        for (int mu = 0; mu < d; ++mu) {
          const Jet& tm = T[base + static_cast<std::size_t>(mu) * stride[k]];
          if (tm.is_exact_zero()) continue;
          if (var[k] == Variance::Up) accumulate(s, D.Gamma(idx[k], mu, b), tm);
          else accumulate(s, D.Gamma(mu, idx[k], b), tm, -1.0);
        }
      }
      out[f * d + b] = s;
    }
  }
  return out;
}

JetArray nonmetricity(const DConnection& D) { return covariant_derivative(D, D.G, {Variance::Down, Variance::Down}); }

JetArray ricci_jets(const JetArray& R) {
  const int d = R.dim(0);
  JetArray Ric({d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Jet s;
      for (int t = 0; t < d; ++t) s += R(t, a, b, t);
      Ric(a, b) = s;
    }
  return Ric;
}

Jet scalar_jets(const JetArray& Ric, const JetArray& Ginv) {
  const int d = Ric.dim(0);
  Jet s;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) accumulate(s, Ginv(a, b), Ric(a, b));
  return s;
}

CurvaturePackage contractions(const DConnection& D, const JetArray& R) {
  const int d = D.dim();
  CurvaturePackage p;
  p.riemann = values(R);
  p.torsion = values(torsion(D));
  p.metric = values(D.G);
  p.metric_inv = values(D.Ginv);
  p.ricci = RealArray({d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0.0;
      for (int t = 0; t < d; ++t) s += p.riemann(t, a, b, t);
      p.ricci(a, b) = s;
    }
  double sR = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sR += p.metric_inv(a, b) * p.ricci(a, b);
  p.scalar = sR;
  p.lambda_spinor = sR / 24.0;
  p.einstein = RealArray({d, d});
  p.phi = RealArray({d, d});
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      p.einstein(a, b) = p.ricci(a, b) - 0.5 * p.metric(a, b) * sR;
      p.phi(a, b) = 3.0 * p.lambda_spinor * p.metric(a, b) - 0.5 * p.ricci(a, b);
    }
  return p;
}

CurvaturePackage curvature_package(const DConnection& D) { return contractions(D, curvature(D)); }

JetArray distortion(const DConnection& D, const DConnection& lc) {
  JetArray Q = D.Gamma;
  for (std::size_t k = 0; k < Q.size(); ++k) Q[k] -= lc.Gamma[k];
  return Q;
}

JetArray distorted_curvature(const DConnection& lc, const JetArray& Q) {
  const int d = lc.dim();
  JetArray R = curvature(lc);
  JetArray dQ = covariant_derivative(lc, Q, {Variance::Up, Variance::Down, Variance::Down});
  for (int t = 0; t < d; ++t)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          Jet s = dQ(t, a, b, g) - dQ(t, a, g, b);
          for (int mu = 0; mu < d; ++mu) {
            accumulate(s, Q(mu, a, b), Q(t, mu, g));
            accumulate(s, Q(mu, a, g), Q(t, mu, b), -1.0);
          }
          R(t, a, b, g) += s;
        }
  return R;
}

LcConstraintResidual lc_constraint_residual(const DConnection& D) {
  const int n = D.n, m = D.m;
  LcConstraintResidual r;
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < n; ++j) {
        const double v = D.Gamma(n + c, n + a, j).value() - D.N(j, c).derivative(n + a).value();
        r.L = std::max(r.L, std::abs(v));
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int b = 0; b < m; ++b) r.C = std::max(r.C, std::abs(D.Gamma(i, j, n + b).value()));
  r.Omega = max_abs(values(omega_jets(D.N, n, m)));
  return r;
}

double commutator_residual(const DConnection& D, const JetArray& R, const JetArray& T, const JetArray& V) {
  const int d = D.dim();
  JetArray DV = covariant_derivative(D, V, {Variance::Up});
  JetArray DDV = covariant_derivative(D, DV, {Variance::Up, Variance::Down});
  double worst = 0.0;
  for (int t = 0; t < d; ++t)
    for (int nu = 0; nu < d; ++nu)
      for (int mu = 0; mu < d; ++mu) {
        double lhs = DDV(t, nu, mu).value() - DDV(t, mu, nu).value();
        for (int g = 0; g < d; ++g) lhs += T(g, nu, mu).value() * DV(t, g).value();
        double rhs = 0.0;
        for (int a = 0; a < d; ++a) rhs += R(t, a, nu, mu).value() * V(a).value();
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  return worst;
}

}  // namespace nonholo
