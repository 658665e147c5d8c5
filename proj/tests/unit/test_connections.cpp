#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "nonholo/connections.hpp"

using namespace nonholo;
using testutil::dmetric;

namespace {

std::vector<double> random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng), u(rng)};
}

DMetricField generic22() {
  return dmetric(2, {"1+0.2*u1*u3", "0.1*u2", "0.1*u2", "2+sin(u4)"},
                 {"1+0.3*u2^2", "0.2*u3", "0.2*u3", "-1-0.1*u1*u4"},
                 {"0.3*u2*u3", "0.2*u4", "0.2*sin(u1)", "0.1*u3*u4"});
}

}  // namespace

TEST_CASE("flat holonomic d-metric has vanishing coefficients and curvature") {
  auto dm = dmetric(2, {"1", "0", "0", "1"}, {"1", "0", "0", "-1"}, {});
  std::vector<double> x{0.3, 0.1, -0.2, 0.5};
  DConnection D = canonical_dconnection(dm, x, 2);
  CHECK(max_abs(values(D.Gamma)) == 0.0);
  CHECK(max_abs(values(curvature(D))) == 0.0);
  CurvaturePackage p = curvature_package(D);
  CHECK(max_abs(p.ricci) == 0.0);
  CHECK(p.scalar == 0.0);
  CHECK(max_abs(p.einstein) == 0.0);
  CHECK(p.lambda_spinor == 0.0);
}

TEST_CASE("canonical h-coefficients of Schwarzschild match finite-difference Christoffels") {
  auto dm = testutil::schwarzschild22();
  auto G = testutil::schwarzschild_coordinate();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> x = random_point(rng, 0.6, 2.4);
    x[0] = 3.0 + 7.0 * (x[0] - 0.6) / 1.8;
    DConnection D = canonical_dconnection(dm, x, 3);
    testutil::FdCurvature fd = testutil::fd_curvature(G, 4, x);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) CHECK(D.Gamma(i, j, l).value() == doctest::Approx(fd.christoffel(i, j, l)).epsilon(1e-9));
    // R^i_{hjk} families against the coordinate Riemann tensor (ours: R(e_g, e_b) e_a)
    JetArray R = curvature(D);
    for (int t = 0; t < 2; ++t)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int g = 0; g < 2; ++g) CHECK(std::abs(R(t, a, b, g).value() - fd.riemann(t, a, g, b)) < 1e-8);
  }
}

TEST_CASE("2-sphere Christoffels match the closed form") {
  std::vector<ScalarField> G{ScalarField::constant(2, 1.0), ScalarField::zero(2), ScalarField::zero(2),
                             parse_expression("sin(u1)^2", 2)};
  const double th = 0.7;
  std::vector<double> x{th, 0.3};
  RealArray Gm = levi_civita(G, 2, x);
  CHECK(Gm(0, 1, 1) == doctest::Approx(-std::sin(th) * std::cos(th)).epsilon(1e-10));
  CHECK(Gm(1, 0, 1) == doctest::Approx(std::cos(th) / std::sin(th)).epsilon(1e-10));
  CHECK(Gm(1, 1, 0) == Gm(1, 0, 1));
  CHECK(Gm(0, 0, 0) == 0.0);
  std::vector<ScalarField> C{ScalarField::constant(2, 2.0), ScalarField::zero(2), ScalarField::zero(2),
                             ScalarField::constant(2, -1.0)};
  CHECK(max_abs(levi_civita(C, 2, x)) == 0.0);
}

TEST_CASE("Levi-Civita Christoffels are symmetric in the lower indices") {
  auto dm = generic22();
  std::vector<double> x{0.4, 0.3, -0.2, 0.6};
  JetArray Gam = christoffel(assemble_metric_jets(dmetric_jets(dm, x, 2)));
  for (int g = 0; g < 4; ++g)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(Gam(g, a, b).value() == Gam(g, b, a).value());
}

TEST_CASE("canonical d-connection is metric compatible at random points") {
  auto dm = generic22();
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto x = random_point(rng, -0.8, 0.8);
    DConnection D = canonical_dconnection(dm, x, 1);
    worst = std::max(worst, max_abs(values(nonmetricity(D))));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("x-linear N reproduces hand-computed L^a_bk") {
  // g = h = delta, N_1^3 = x^2 (u2): L^a_bk = d_b N_k^a + 1/2 (...) = 0 since N has no y-dependence
  // and h is constant; C vanish too. Only the anholonomy is nonzero.
  auto dm = dmetric(2, {"1", "0", "0", "1"}, {"1", "0", "0", "1"}, {"u2", "0", "0", "0"}, {1, 1, 1, 1});
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  DConnection D = canonical_dconnection(dm, x, 2);
  CHECK(max_abs(values(D.Gamma)) == 0.0);
  TensorBlock T = dtorsion(D);
  // T^a_ji = Omega_ji^a with Omega_ij^a = e_j N_i^a - e_i N_j^a, so T^3_21 = e_1 N_2^3 - e_2 N_1^3 = -1
  CHECK(T.values(2, 1, 0) == doctest::Approx(-1.0));
  CHECK(T.values(2, 0, 1) == doctest::Approx(1.0));
  RealArray Om = values(omega_jets(D.N, 2, 2));
  CHECK(T.values(2, 1, 0) == Om(1, 0, 0));
  // with y-dependent N the v-coefficients pick up d_b N_k^a
  auto dm2 = dmetric(2, {"1", "0", "0", "1"}, {"1", "0", "0", "1"}, {"u3*u2", "0", "0", "0"}, {1, 1, 1, 1});
  DConnection D2 = canonical_dconnection(dm2, x, 2);
  // L^3_{3 1} = d_3 N_1^3 + 1/2 (-2 d_3 N_1^3) = 0 ; L^3_{4 1} = 1/2(- h_33 d_4 N... ) = 0
  CHECK(std::abs(D2.Gamma(2, 2, 0).value()) < 1e-15);
  CHECK(max_abs(values(nonmetricity(D2))) < 1e-14);
}

TEST_CASE("canonical torsion has exact structural zeros") {
  auto dm = generic22();
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    auto x = random_point(rng, -0.8, 0.8);
    DConnection D = canonical_dconnection(dm, x, 1);
    RealArray T = dtorsion(D).values;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) {
          CHECK(T(i, j, l) == 0.0);
          CHECK(T(2 + i, 2 + j, 2 + l) == 0.0);
        }
    // remaining families follow the d-torsion pattern
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int c = 0; c < 2; ++c) CHECK(T(i, j, 2 + c) == doctest::Approx(D.Gamma(i, j, 2 + c).value()));
  }
  // N = 0 and x-only metric: no torsion at all
  auto hol = dmetric(2, {"1+u1^2", "0", "0", "exp(u2)"}, {"2", "0", "0", "-1"}, {});
  DConnection H = canonical_dconnection(hol, std::vector<double>{0.3, 0.2, 0.1, 0.0}, 1);
  CHECK(max_abs(dtorsion(H).values) < 1e-10);
}

TEST_CASE("Ricci identity with torsion holds for random vector fields") {
  auto dm = generic22();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto x = random_point(rng, -0.7, 0.7);
    DConnection D = canonical_dconnection(dm, x, 3);
    JetArray R = curvature(D);
    JetArray T = torsion(D);
    auto u = coordinate_jets(x, 3);
    JetArray V({4});
    V(0) = sin(c(rng) * u[0] * u[1] + c(rng));
    V(1) = exp(c(rng) * u[2]) * u[3];
    V(2) = cos(u[3] + c(rng) * u[0]);
    V(3) = u[1] * u[2] * u[0] * c(rng) + c(rng) * u[3] * u[3];
    worst = std::max(worst, commutator_residual(D, R, T, V));
  }
  CHECK(worst < 1e-7);
}

TEST_CASE("curvature of the canonical connection agrees with the distortion route") {
  auto dm = generic22();
  std::mt19937_64 rng(4);
  for (int k = 0; k < 5; ++k) {
    auto x = random_point(rng, -0.7, 0.7);
    DMetricJets J = dmetric_jets(dm, x, 3);
    DConnection D = canonical_dconnection(J, x);
    DConnection lc = levi_civita_adapted(J, x);
    JetArray Q = distortion(D, lc);
    CHECK(max_abs(values(Q)) > 1e-3);
    CHECK(max_abs_diff(values(curvature(D)), values(distorted_curvature(lc, Q))) < 1e-10);
    // same inputs give bit-identical distortion
    JetArray Q2 = distortion(canonical_dconnection(J, x), levi_civita_adapted(J, x));
    CHECK(max_abs_diff(values(Q), values(Q2)) == 0.0);
  }
}

TEST_CASE("integrable product scenario has no distortion and satisfies the Levi-Civita constraints") {
  auto dm = dmetric(2, {"1+u1^2", "0.1*u2", "0.1*u2", "2+sin(u1)"}, {"3", "0.5", "0.5", "-1"}, {});
  std::vector<double> x{0.3, 0.2, 0.1, -0.4};
  DMetricJets J = dmetric_jets(dm, x, 2);
  DConnection D = canonical_dconnection(J, x);
  CHECK(max_abs(values(distortion(D, levi_civita_adapted(J, x)))) < 1e-9);
  CHECK(lc_constraint_residual(D).max() < 1e-10);
}

TEST_CASE("x-only gradient N with constant v-metric has vanishing Omega residual") {
  // N_i^a = d_i phi^a(x) is integrable
  auto dm = dmetric(2, {"1", "0", "0", "1"}, {"1", "0", "0", "-1"},
                    {"u2*cos(u1)", "2*u1", "sin(u1)", "u2"});
  std::vector<double> x{0.3, -0.6, 0.2, 0.8};
  DConnection D = canonical_dconnection(dm, x, 2);
  CHECK(lc_constraint_residual(D).Omega < 1e-10);
}

TEST_CASE("contractions: scalar curvature, Einstein tensor and Lambda") {
  // unit 2-sphere times a flat Lorentzian block
  auto dm = dmetric(2, {"1", "0", "0", "sin(u1)^2"}, {"1", "0", "0", "-1"}, {});
  std::vector<double> x{0.9, 0.1, 0.2, 0.3};
  CurvaturePackage p = curvature_package(canonical_dconnection(dm, x, 2));
  CHECK(p.scalar == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(p.lambda_spinor == doctest::Approx(2.0 / 24.0).epsilon(1e-12));
  // independent recontraction of the scalar from the Riemann tensor
  auto gen = generic22();
  std::vector<double> y{0.2, 0.4, -0.3, 0.5};
  DConnection D = canonical_dconnection(gen, y, 2);
  CurvaturePackage q = curvature_package(D);
  double s = 0.0;
  for (int t = 0; t < 4; ++t)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += q.metric_inv(a, b) * q.riemann(t, a, b, t);
  CHECK(std::abs(q.scalar - s) < 1e-10);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(q.einstein(a, b) == doctest::Approx(q.ricci(a, b) - 0.5 * q.metric(a, b) * q.scalar));
      CHECK(q.phi(a, b) == doctest::Approx(3.0 * q.lambda_spinor * q.metric(a, b) - 0.5 * q.ricci(a, b)));
    }
  // nonholonomic torsion makes Ricci nonsymmetric
  double asym = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) asym = std::max(asym, std::abs(q.ricci(a, b) - q.ricci(b, a)));
  CHECK(asym > 1e-4);
}

TEST_CASE("Schwarzschild vacuum: Levi-Civita Einstein tensor vanishes, canonical one does not") {
  auto dm = testutil::schwarzschild22();
  std::vector<double> x{4.5, 1.1, 0.3, 0.2};
  DMetricJets J = dmetric_jets(dm, x, 3);
  CurvaturePackage lc = curvature_package(levi_civita_adapted(J, x));
  CHECK(max_abs(lc.einstein) < 1e-7);
  // With N = 0 the canonical connection drops the mixed Christoffels
  // Gamma^i_{ab}, so the vacuum statement fails; see the README.
  DConnection D = canonical_dconnection(J, x);
  CHECK(max_abs(curvature_package(D).einstein) > 1e-3);
  LcConstraintResidual r = lc_constraint_residual(D);
  CHECK(r.C == 0.0);
  CHECK(r.Omega == 0.0);
  CHECK(r.L > 1e-2);
}

TEST_CASE("Levi-Civita connection in the adapted frame is torsion-free and metric compatible") {
  auto dm = generic22();
  std::vector<double> x{0.1, -0.3, 0.6, 0.2};
  DConnection lc = levi_civita_adapted(dmetric_jets(dm, x, 2), x);
  CHECK(max_abs(values(torsion(lc))) < 1e-13);
  CHECK(max_abs(values(nonmetricity(lc))) < 1e-13);
}
