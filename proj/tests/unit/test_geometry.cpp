#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "nonholo/expr.hpp"
#include "nonholo/geometry.hpp"

using namespace nonholo;

namespace {

NConnectionField nconn(int n, int m, std::vector<std::string> src) {
  NConnectionField N = NConnectionField::zero(n, m);
  for (std::size_t k = 0; k < src.size(); ++k) N.coeffs[k] = parse_expression(src[k], n + m);
  return N;
}

RealArray random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  RealArray a({r, c});
  for (double& v : a.data()) v = u(rng);
  return a;
}

RealArray random_symmetric(int d, std::mt19937_64& rng) {
  RealArray a = random_matrix(d, d, rng);
  RealArray s({d, d});
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = a(i, j) + a(j, i) + (i == j ? 3.0 * (i % 2 ? -1 : 1) : 0.0);
  return s;
}

}  // namespace

TEST_CASE("holonomic frames are the identity") {
  NConnectionField N = NConnectionField::zero(2, 2);
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  FramePair fp = adapted_frames(N, x);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(fp.frame(a, b) == (a == b ? 1.0 : 0.0));
      CHECK(fp.coframe(a, b) == (a == b ? 1.0 : 0.0));
    }
}

TEST_CASE("constant N elongates frame and coframe with opposite signs") {
  NConnectionField N = nconn(2, 2, {"0.7", "0", "0", "0"});
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  FramePair fp = adapted_frames(N, x);
  CHECK(fp.frame(0, 2) == doctest::Approx(-0.7));
  CHECK(fp.coframe(2, 0) == doctest::Approx(0.7));
  CHECK(fp.frame(2, 0) == 0.0);
  CHECK(fp.duality_residual() < 1e-15);
}

TEST_CASE("frame duality for random smooth N") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NConnectionField N = nconn(2, 2, {"sin(u1*u3)", "u2*u4^2", "exp(u1-u3)", "cos(u2+u4)"});
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
    CHECK(adapted_frames(N, x).duality_residual() < 1e-12);
  }
}

TEST_CASE("anholonomy simple cases") {
  std::vector<double> x{0.3, -0.4, 0.5, 0.9};
  Anholonomy z = anholonomy(NConnectionField::zero(2, 2), x);
  CHECK(max_abs(z.W) == 0.0);
  CHECK(max_abs(z.Omega) == 0.0);
  // N_1^3 = y^4: W_{14}^3 = 1
  Anholonomy lin = anholonomy(nconn(2, 2, {"u4", "0", "0", "0"}), x);
  CHECK(lin.W(0, 3, 2) == doctest::Approx(1.0));
  CHECK(lin.W(3, 0, 2) == doctest::Approx(-1.0));
  // x-only N: no mixed terms, Omega nonzero in general
  Anholonomy xo = anholonomy(nconn(2, 2, {"u2^2", "u1", "0", "u1*u2"}), x);
  for (int i = 0; i < 2; ++i)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) CHECK(xo.W(i, 2 + b, 2 + c) == 0.0);
  CHECK(max_abs(xo.Omega) > 0.1);
}

TEST_CASE("integrable x-only N has vanishing Omega") {
  // N_i^a = d_i phi^a(x)
  NConnectionField N = nconn(2, 2, {"2*u1*u2", "cos(u1)", "u1^2+3*u2^2", "0"});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
    CHECK(max_abs(anholonomy(N, x).Omega) < 1e-10);
  }
}

TEST_CASE("anholonomy equals the frame commutator computed by finite differences") {
  NConnectionField N = nconn(2, 2, {"sin(u1*u3)+u4", "u2*u4^2", "exp(u1-u3)", "cos(u2+u4)*u3"});
  std::vector<double> x{0.2, 0.6, -0.3, 0.45};
  Anholonomy an = anholonomy(N, x);
  const double h = 1e-5;
  // frame field E(alpha, mu) at a point
  auto frame_at = [&](std::vector<double> p) { return adapted_frames(N, p).frame; };
  RealArray E = frame_at(x);
  // dE(alpha, mu, nu) = d_nu E_alpha^mu
  RealArray dE({4, 4, 4});
  for (int nu = 0; nu < 4; ++nu) {
    std::vector<double> xp = x, xm = x;
    xp[nu] += h;
    xm[nu] -= h;
    RealArray Ep = frame_at(xp), Em = frame_at(xm);
    for (int a = 0; a < 4; ++a)
      for (int mu = 0; mu < 4; ++mu) dE(a, mu, nu) = (Ep(a, mu) - Em(a, mu)) / (2 * h);
  }
  RealArray C = adapted_frames(N, x).coframe;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double br[4] = {0, 0, 0, 0};
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) br[mu] += E(a, nu) * dE(b, mu, nu) - E(b, nu) * dE(a, mu, nu);
      for (int g = 0; g < 4; ++g) {
        double w = 0.0;
        for (int mu = 0; mu < 4; ++mu) w += C(g, mu) * br[mu];
        CHECK(an.W(a, b, g) == doctest::Approx(w).epsilon(1e-7));
      }
    }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a) CHECK(an.Omega(i, j, a) == -an.Omega(j, i, a));
}

TEST_CASE("assembled metric formula and congruence") {
  RealArray g({2, 2}), h({2, 2}), N({2, 2});
  g(0, 0) = g(1, 1) = h(0, 0) = h(1, 1) = 1.0;
  N(0, 0) = 0.3;
  RealArray G = assemble_metric(g, h, N);
  CHECK(G(0, 0) == doctest::Approx(1.09));
  CHECK(G(0, 2) == doctest::Approx(0.3));
  CHECK(G(2, 0) == doctest::Approx(0.3));

  std::mt19937_64 rng(17);
  for (int d : {2, 4}) {
    for (int t = 0; t < 10; ++t) {
      RealArray gg = random_symmetric(d, rng), hh = random_symmetric(d, rng), NN = random_matrix(d, d, rng);
      RealArray GG = assemble_metric(gg, hh, NN);
      FramePair fp = adapted_frames(NN, d, d);
      // coframe^T diag(g,h) coframe
      const int D = 2 * d;
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          double s = 0.0;
          for (int p = 0; p < D; ++p)
            for (int q = 0; q < D; ++q) {
              double blk = 0.0;
              if (p < d && q < d) blk = gg(p, q);
              if (p >= d && q >= d) blk = hh(p - d, q - d);
              s += fp.coframe(p, a) * blk * fp.coframe(q, b);
            }
          CHECK(std::abs(s - GG(a, b)) < 1e-12);
          CHECK(GG(a, b) == GG(b, a));
        }
      SplitMetric sp = split_metric(GG, d, d);
      CHECK(max_abs_diff(sp.g, gg) < 1e-12);
      CHECK(max_abs_diff(sp.h, hh) < 1e-12);
      CHECK(max_abs_diff(sp.N, NN) < 1e-12);
      SplitMetric sp2 = split_metric(GG, d, d, NN);
      CHECK(max_abs_diff(sp2.g, gg) < 1e-12);
    }
  }
}

TEST_CASE("split of a block-diagonal metric and degenerate vertical block") {
  RealArray G({4, 4});
  G(0, 0) = 2;
  G(1, 1) = 3;
  G(2, 2) = 4;
  G(3, 3) = -5;
  SplitMetric sp = split_metric(G, 2, 2);
  CHECK(sp.g(0, 0) == 2);
  CHECK(sp.h(1, 1) == -5);
  CHECK(max_abs(sp.N) == 0.0);
  G(3, 3) = 0.0;
  try {
    split_metric(G, 2, 2);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateVBlock);
  }
}

TEST_CASE("jet matrix inverse") {
  JetArray a({2, 2});
  std::vector<double> x{0.5, 1.5};
  auto u = coordinate_jets(x, 2);
  a(0, 0) = u[0] * u[0] + 1.0;
  a(0, 1) = u[1];
  a(1, 0) = u[1];
  a(1, 1) = -1.0 + 0.0 * u[0];
  JetArray inv = inverse(a);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Jet s;
      for (int k = 0; k < 2; ++k) s += a(i, k) * inv(k, j);
      for (double c : s.coeffs()) (void)c;
      CHECK(s.value() == doctest::Approx(i == j ? 1.0 : 0.0));
      CHECK(std::abs(s.partial({0, 1})) < 1e-13);
      CHECK(std::abs(s.partial({1, 1})) < 1e-13);
    }
  JetArray sing({2, 2});
  sing(0, 0) = u[0];
  sing(0, 1) = u[0];
  sing(1, 0) = u[1];
  sing(1, 1) = u[1];
  CHECK_THROWS_AS(inverse(sing), Error);
}

TEST_CASE("chart validation") {
  ChartSpec c{2, 2, {1, 1, 1, -1}};
  CHECK_NOTHROW(c.validate());
  ChartSpec bad{3, 3, {1, 1, 1, 1, 1, 1}};
  CHECK_THROWS_AS(bad.validate(), Error);
  ChartSpec bad2{2, 2, {1, 1, 2, -1}};
  CHECK_THROWS_AS(bad2.validate(), Error);
}
