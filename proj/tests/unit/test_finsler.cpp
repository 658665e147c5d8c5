#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "nonholo/connections.hpp"
#include "nonholo/finsler.hpp"

using namespace nonholo;

namespace {

// 2+2 quadratic F from a Euclidean base metric depending on x
const char* kBaseG[4] = {"1+0.3*u1^2", "0.2*u2", "0.2*u2", "2+sin(u1*u2)"};

FinslerFunction quadratic2() {
  std::string q = "(" + std::string(kBaseG[0]) + ")*u3^2 + 2*(" + kBaseG[1] + ")*u3*u4 + (" + kBaseG[3] + ")*u4^2";
  return FinslerFunction::from_F(2, parse_expression("sqrt(" + q + ")", 4));
}

FinslerFunction randers2() {
  return FinslerFunction::from_F(2, parse_expression("sqrt(u3^2+u4^2) + 0.3*u3 - 0.2*u4", 4));
}

// Randers-type F on the Lorentzian 4+4 slit chart of the catalog
FinslerFunction randers44() {
  return FinslerFunction::from_F(4, parse_expression("sqrt(u5^2+u6^2+u7^2-u8^2) + 0.3*u5", 8), true);
}

std::vector<ScalarField> base_metric2() {
  std::vector<ScalarField> G;
  for (const char* s : kBaseG) G.push_back(parse_expression(s, 2));
  return G;
}

std::vector<double> slit_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), y(0.3, 1.5);
  return {u(rng), u(rng), y(rng), y(rng)};
}

std::vector<double> lorentz_slit_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(-1.0, 1.0), y(0.5, 1.5), t(-0.5, 0.5);
  return {x(rng), x(rng), x(rng), x(rng), y(rng), y(rng), y(rng), t(rng)};
}

}  // namespace

TEST_CASE("Hessian metric of a constant quadratic form is the form") {
  auto f = FinslerFunction::from_F(2, parse_expression("sqrt(2*u3^2 + 0.5*u3*u4 + u4^2)", 4));
  std::vector<double> x{0.1, 0.2, 0.7, -0.4};
  RealArray g = hessian_metric(f, x);
  CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs(semispray(f, x)) < 1e-14);
  CHECK(max_abs(canonical_nconnection(f, x)) < 1e-14);
  CHECK_THROWS_AS(hessian_metric(f, std::vector<double>{0.1, 0.2, 0.0, 0.0}), Error);
}

TEST_CASE("Randers Hessian matches the finite-difference Hessian of F^2") {
  auto f = randers2();
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    auto x = slit_point(rng);
    RealArray g = hessian_metric(f, x);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        int mi[2] = {2 + i, 2 + j};
        const double fd = 0.5 * fd_partial(f.L, x, mi, 1e-2).value;
        CHECK(std::abs(g(i, j) - fd) < 1e-7);
      }
    auto x2 = x;
    x2[2] *= 2.0;
    x2[3] *= 2.0;
    CHECK(max_abs_diff(hessian_metric(f, x2), g) < 1e-10);
  }
}

TEST_CASE("quadratic reduction: semispray and N-connection from base Christoffels") {
  auto f = quadratic2();
  auto G = base_metric2();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10; ++k) {
    auto x = slit_point(rng);
    std::vector<double> xb{x[0], x[1]};
    RealArray gam = testutil::fd_curvature(G, 2, xb).christoffel;
    RealArray gam_jet = levi_civita(G, 2, xb);
    RealArray g = hessian_metric(f, x);
    RealArray Gs = semispray(f, x);
    RealArray N = canonical_nconnection(f, x);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::abs(g(i, j) - G[i * 2 + j].eval(xb)) < 1e-9);
    for (int a = 0; a < 2; ++a) {
      double s = 0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += 0.5 * gam(a, i, j) * x[2 + i] * x[2 + j];
      CHECK(std::abs(Gs(a) - s) < 1e-7);
      for (int j = 0; j < 2; ++j) {
        double nb = 0, nj = 0;
        for (int b = 0; b < 2; ++b) {
          nb += gam(a, j, b) * x[2 + b];
          nj += gam_jet(a, j, b) * x[2 + b];
        }
        CHECK(std::abs(N(j, a) - nb) < 1e-7);
        CHECK(std::abs(N(j, a) - nj) < 1e-12);
      }
    }
  }
}

TEST_CASE("semispray generates solutions of the Euler-Lagrange equations") {
  std::mt19937_64 rng(21);
  // x-dependent Randers metric, so that the spray is nonzero
  auto randers_x = FinslerFunction::from_F(
      2, parse_expression("sqrt((1+0.2*u1^2)*u3^2 + u4^2) + 0.3*sin(u2)*u3", 4));
  for (const auto& f : {quadratic2(), randers_x}) {
    for (int k = 0; k < 3; ++k) {
      auto u = slit_point(rng);
      const double good = testutil::euler_lagrange_residual(f, u);
      const double bad = testutil::euler_lagrange_residual(f, u, 1.05);
      CHECK(good < 1e-6);
      CHECK(bad > 1e-4);  // the oracle notices a 5% error in the spray
    }
  }
}

TEST_CASE("semispray and N-connection homogeneity") {
  auto f = randers2();
  auto q = quadratic2();
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    auto x = slit_point(rng);
    for (double b : {0.5, 2.0, 3.0}) {
      auto xb = x;
      xb[2] *= b;
      xb[3] *= b;
      for (const FinslerFunction* ff : {&f, &q}) {
        RealArray G1 = semispray(*ff, x), Gb = semispray(*ff, xb);
        RealArray N1 = canonical_nconnection(*ff, x), Nb = canonical_nconnection(*ff, xb);
        for (int a = 0; a < 2; ++a) CHECK(std::abs(Gb(a) - b * b * G1(a)) < 1e-9);
        for (std::size_t c = 0; c < N1.size(); ++c) CHECK(std::abs(Nb[c] - b * N1[c]) < 1e-9);
      }
    }
  }
}

TEST_CASE("homogeneity residuals and the non-homogeneous probe") {
  std::mt19937_64 rng(12);
  const double betas[] = {0.5, 2.0, 3.0};
  auto r = randers44();
  auto q = quadratic2();
  for (int k = 0; k < 20; ++k) {
    CHECK(homogeneity_check(r, lorentz_slit_point(rng), betas).max() < 1e-9);
    CHECK(homogeneity_check(q, slit_point(rng), betas).max() < 1e-9);
  }
  auto bad = FinslerFunction::from_F(2, parse_expression("u3^2+u4^2", 4));
  std::vector<double> x{0.1, 0.2, 0.6, 0.8};
  HomogeneityReport h = homogeneity_check(bad, x, betas);
  // y^i dF/dy^i - F = 2F - F = F = 1
  CHECK(h.euler == doctest::Approx(1.0 / 2.0));
  CHECK(h.scaling > 0.1);
}

TEST_CASE("Sasaki lift: equal blocks, assembly, field route") {
  auto c = FinslerFunction::from_F(2, parse_expression("sqrt(2*u3^2 + u4^2)", 4));
  ChartSpec chart{2, 2, {1, 1, 1, 1}};
  DMetricField dm = sasaki_lift(c, chart);
  std::vector<double> x{0.1, 0.2, 0.7, -0.4};
  RealArray A = assemble_metric(dm, x);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double expect = (i == j) ? (i % 2 == 0 ? 2.0 : 1.0) : 0.0;
      CHECK(std::abs(A(i, j) - expect) < 1e-12);
    }
  auto r = randers2();
  DMetricField rd = sasaki_lift(r, chart);
  std::mt19937_64 rng(13);
  for (int k = 0; k < 50; ++k) {
    auto y = slit_point(rng);
    RealArray M = assemble_metric(rd, y);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(M(i, j) == M(j, i));
    CHECK(std::abs(determinant(M)) > 1e-12);
    for (int i = 0; i < 4; ++i) CHECK(rd.g[i].eval(y) == rd.h[i].eval(y));
  }
  // the field route and the pointwise jets agree, including first derivatives
  auto q = quadratic2();
  DMetricField qd = sasaki_lift(q, chart);
  std::vector<double> p{0.3, -0.2, 0.8, 0.5};
  DMetricJets viaField = dmetric_jets(qd, p, 1);
  DMetricJets direct = sasaki_jets(q, p, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int v = 0; v < 4; ++v) {
        CHECK(std::abs(viaField.g(i, j).derivative(v).value() - direct.g(i, j).derivative(v).value()) < 1e-12);
        CHECK(std::abs(viaField.N(i, j).derivative(v).value() - direct.N(i, j).derivative(v).value()) < 1e-12);
      }
}

TEST_CASE("vierbein solve by congruence") {
  RealArray F({4, 4});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealArray A({4, 4});
  for (double& v : A.data()) v = u(rng);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = (i == j) ? 2.0 : 0.0;
      for (int k = 0; k < 4; ++k) s += A(i, k) * A(j, k);
      F(i, j) = s;
    }
  RealArray e = solve_finsler_vierbein(F, F);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(e(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
  RealArray F4 = F;
  for (double& v : F4.data()) v *= 4.0;
  RealArray e2 = solve_finsler_vierbein(F4, F);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(e2(i, j) - (i == j ? 2.0 : 0.0)) < 1e-12);

  auto residual = [](const RealArray& G, const RealArray& Fm, const RealArray& ev) {
    double r = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) s += ev(a, i) * Fm(a, b) * ev(b, j);
        r = std::max(r, std::abs(s - G(i, j)));
      }
    return r;
  };
  for (int t = 0; t < 20; ++t) {
    RealArray B({4, 4}), G({4, 4});
    for (double& v : B.data()) v = u(rng);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = (i == j) ? 1.0 : 0.0;
        for (int k = 0; k < 4; ++k) s += B(i, k) * B(j, k);
        G(i, j) = s;
      }
    CHECK(residual(G, F, solve_finsler_vierbein(G, F)) < 1e-9);
  }
  // Lorentzian pair
  RealArray L1({4, 4}), L2({4, 4});
  for (int i = 0; i < 4; ++i) {
    L1(i, i) = i == 3 ? -1.0 : 1.0 + i;
    L2(i, i) = i == 3 ? -2.0 : 1.0;
  }
  L1(0, 3) = L1(3, 0) = 0.3;
  CHECK(residual(L1, L2, solve_finsler_vierbein(L1, L2)) < 1e-9);
  CHECK_THROWS_AS(solve_finsler_vierbein(L1, F), Error);
  try {
    solve_finsler_vierbein(L1, F);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::SignatureMismatch);
  }
}

TEST_CASE("Cartan, Berwald and Chern connections of a quadratic F reduce to base Christoffels") {
  auto f = quadratic2();
  auto G = base_metric2();
  std::vector<double> x{0.3, -0.4, 0.8, 0.6};
  std::vector<double> xb{x[0], x[1]};
  RealArray gam = testutil::fd_curvature(G, 2, xb).christoffel;
  DMetricJets S = sasaki_jets(f, x, 4);
  for (ConnectionKind kind : {ConnectionKind::Cartan, ConnectionKind::Berwald, ConnectionKind::Chern}) {
    DConnectionCoeffs c = coefficients(cartan_dconnection(S, kind, x));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          CHECK(std::abs(c.L_h(i, j, k) - gam(i, j, k)) < 1e-7);
          CHECK(std::abs(c.C_v(i, j, k)) < 1e-12);
          CHECK(c.L_v(i, j, k) == c.L_h(i, j, k));
          CHECK(c.C_h(i, j, k) == c.C_v(i, j, k));
        }
  }
  DMetricJets bad = S;
  bad.h(0, 0) = bad.h(0, 0) + 0.1;
  CHECK_THROWS_AS(cartan_dconnection(bad, ConnectionKind::Cartan, x), Error);
}

TEST_CASE("Randers: Cartan is metric compatible, Berwald and Chern are not") {
  auto f = randers44();
  std::mt19937_64 rng(23);
  double cartan = 0, berwald = 0, chern = 0;
  for (int k = 0; k < 5; ++k) {
    auto x = lorentz_slit_point(rng);
    DMetricJets S = sasaki_jets(f, x, 4);
    cartan = std::max(cartan, max_abs(values(nonmetricity(cartan_dconnection(S, ConnectionKind::Cartan, x)))));
    berwald = std::max(berwald, max_abs(values(nonmetricity(cartan_dconnection(S, ConnectionKind::Berwald, x)))));
    chern = std::max(chern, max_abs(values(nonmetricity(cartan_dconnection(S, ConnectionKind::Chern, x)))));
    DConnection D = cartan_dconnection(S, ConnectionKind::Cartan, x);
    RealArray T = values(torsion(D));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int l = 0; l < 4; ++l) {
          CHECK(std::abs(T(i, j, l)) < 1e-10);
          CHECK(std::abs(T(4 + i, 4 + j, 4 + l)) < 1e-10);
        }
    CHECK(lc_constraint_residual(D).max() > 1e-3);
  }
  CHECK(cartan < 1e-9);
  CHECK(berwald > 1e-4);
  CHECK(chern > 1e-4);
}

TEST_CASE("Cartan curvature of a quadratic Schwarzschild F reproduces the base Riemann tensor") {
  std::string L = "u5^2/(1-2/u1) + u1^2*u6^2 + u1^2*sin(u2)^2*u7^2 - (1-2/u1)*u8^2";
  auto f = FinslerFunction::from_L(4, parse_expression(L, 8));
  std::vector<double> x{4.0, 1.1, 0.3, 0.2, 0.7, 0.3, 0.2, 1.1};
  std::vector<double> xb{x[0], x[1], x[2], x[3]};
  auto Gc = testutil::schwarzschild_coordinate();
  testutil::FdCurvature fd = testutil::fd_curvature(Gc, 4, xb);
  DMetricJets S = sasaki_jets(f, x, 4);
  DConnection D = cartan_dconnection(S, ConnectionKind::Cartan, x);
  JetArray R = curvature(D);
  double worst = 0;
  for (int t = 0; t < 4; ++t)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g) {
          worst = std::max(worst, std::abs(R(t, a, b, g).value() - fd.riemann(t, a, g, b)));
          // v-block carries the same tensor under a = n + i
          CHECK(std::abs(R(4 + t, 4 + a, b, g).value() - R(t, a, b, g).value()) < 1e-12);
        }
  CHECK(worst < 1e-7);
}
