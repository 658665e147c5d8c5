#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <span>
#include <vector>

#include "nonholo/spin.hpp"

namespace nonholo {

// Twistor components in the spin frame of the local soldering:
// Z = (omega^0, omega^1, pi_0', pi_1'), dual W = (lambda_0, lambda_1, mu^0', mu^1').
struct TwistorValue {
  std::array<cplx, 2> omega{};  // or lambda_A when dual
  std::array<cplx, 2> pi{};     // or mu^{A'} when dual
  bool dual = false;

  std::array<cplx, 4> flat() const { return {omega[0], omega[1], pi[0], pi[1]}; }
  static TwistorValue from_flat(const std::array<cplx, 4>& z, bool dual = false);
};
double max_abs_diff(const TwistorValue& a, const TwistorValue& b);
// W_a Z^a = lambda_A omega^A + mu^{A'} pi_{A'}.
cplx pairing(const TwistorValue& W, const TwistorValue& Z);

// Complex jet: real and imaginary parts as jets.
struct CJet {
  Jet re, im;
};
// Spinor field omega^A(u) in the spin frame of the local soldering.
using SpinorField = std::function<std::array<CJet, 2>(std::span<const double> point, int order)>;
// omega^A = constant + (u^1)^2 * quad, a generic non-solution probe.
SpinorField quadratic_probe(std::array<cplx, 2> constant, std::array<cplx, 2> quad);

// Local spin data over a 4-dimensional block of frame indices: soldering and
// spin connection, both from the orthonormal tetrad of D.G over the block.
struct SpinFrame {
  std::vector<int> block;
  Soldering soldering;
  SpinConnection connection;
};
// groups as in orthonormal_tetrad (positions into block). D.G needs jet order >= 1.
SpinFrame spin_frame(const DConnection& D, std::vector<int> block, const std::vector<std::vector<int>>& groups);
// 4-dimensional chart: block {0..3} with the h/v groups.
SpinFrame spin_frame(const DConnection& D);

// D_{AA'} omega^B over the block: out(A, A', B).
CplxArray spinor_gradient(const DConnection& D, const SpinFrame& f, const std::array<CJet, 2>& omega);
// Symmetrized twistor operator D^{(A}_{A'} omega^{B)}: components (A, B, A'),
// six independent complex values.
CplxArray twistor_operator(const DConnection& D, const SpinFrame& f, const std::array<CJet, 2>& omega);

// Residual of the twistor equation for a spinor field on a 4-dimensional chart,
// with D built by `build` from d-metric jets of order 2.
struct TwistorResidual {
  CplxArray symmetric;  // D^{(A}_{A'} omega^{B)}
  double max = 0.0;
};
TwistorResidual twistor_residual(const SpinorField& omega, const DMetricField& dm, std::span<const double> point,
                                 ConnectionBuilder build);

// N-adapted affine position X^i = u^i - o^i, X^a = u^a - o^a + N_i^a (u^i - o^i)
// for a constant N; dX^alpha is the adapted coframe.
std::vector<Jet> adapted_position(const RealArray& N, int n, std::span<const double> point,
                                  std::span<const double> origin, int order);

// Background certification for the closed-form solution: Psi = 0 and
// constant g, h, N at the point (so the adapted frame is holonomic and D = d).
struct FlatCertificate {
  double psi = 0.0;
  double variation = 0.0;  // max |first derivative| of g, h, N
  bool ok(double tol = 1e-8) const { return psi < tol && variation < tol; }
};
FlatCertificate certify_flat(const DMetricField& dm, std::span<const double> point, ConnectionBuilder build);

// omega^B = omega0^B - i X^{BB'} pi0_{B'}, pi = pi0 (dual: lambda = lambda0,
// mu^{A'} = mu0^{A'} + i X^{AA'} lambda0_A) with X the adapted position from
// origin. IncompatibleBackground unless certify_flat passes.
TwistorValue flat_twistor_solution(const TwistorValue& Z0, const DMetricField& dm, std::span<const double> point,
                                   ConnectionBuilder build, std::span<const double> origin = {});
// Jet form of the omega part, for the derivative check.
SpinorField flat_solution_field(const TwistorValue& Z0, const DMetricField& dm, std::span<const double> origin = {});

// Psi_{TABC} omega^T as (A, B, C).
CplxArray psi_contract(const CplxArray& psi, std::span<const cplx> omega);
struct Compatibility {
  CplxArray residual;  // Psi_{TABC} omega^T
  double max = 0.0;
};
Compatibility twistor_compatibility(const CurvatureSpinors& cs, std::span<const cplx> omega);

// s = 1/2 (omega^A pibar_A + pi_{A'} omegabar^{A'}).
double spirality(const TwistorValue& Z);

struct Kinematics {
  double s = 0.0;
  RealArray p;  // p^alpha, from p_{AA'} = pibar_A pi_A' raised in spinor space
  RealArray M;  // M^{alpha beta}
  // S_alpha = 1/2 e_{alpha beta gamma tau} p^beta M^{gamma tau}, e oriented by the
  // tetrad with the timelike leg first (e_{txyz} = +1)
  RealArray S;
  double null_residual = 0.0;      // |g(p, p)|
  double future = 0.0;             // timelike frame component of p, > 0
  double antisymmetry = 0.0;       // max |M + M^T|
  double imag = 0.0;               // largest imaginary part dropped
  double spin_residual = 0.0;      // max |S_alpha - s p_alpha|
};
// ZeroPi when pi = 0.
Kinematics kinematics(const TwistorValue& Z, const Soldering& s);

// Local twistor transform under g -> w^2 g: omega unchanged,
// pi_{A'} -> pi_{A'} + i Upsilon_{AA'} omega^A with Upsilon_alpha = e_alpha ln w.
TwistorValue conformal_transform(const TwistorValue& Z, const RealArray& upsilon, const Soldering& s);

// Piecewise-cubic Hermite path through knots with prescribed tangents.
struct Curve {
  std::vector<double> tau;                    // increasing knot parameters
  std::vector<std::vector<double>> points;    // coordinates at the knots
  std::vector<std::vector<double>> tangents;  // du/dtau at the knots

  std::vector<double> position(double t) const;
  std::vector<double> tangent(double t) const;
  double begin() const { return tau.front(); }
  double end() const { return tau.back(); }
  static Curve line(std::vector<double> from, std::vector<double> direction, double length = 1.0);
};

// Generator G of the transport dZ/dtau = -G Z at a point for the coordinate
// tangent u': G = Gamma_tw(t) + A(t) in the spin frame there,
//   A(t) = [[0, i t^{BA'}], [i t^{AA'} P_{AA'BB'}, 0]].
struct TwistorConnection {
  Eigen::Matrix4cd spin;     // blockdiag(Gamma(t), -conj(Gamma(t))^T)
  Eigen::Matrix4cd algebra;  // A(t)
  RealArray adapted_tangent;
};
TwistorConnection twistor_connection(const DMetricField& dm, std::span<const double> point,
                                     std::span<const double> coord_tangent, ConnectionBuilder build);

// P_{AA'BB'} used by the transport: the spinor form of the conformal module's
// P_ab times this sign (fixed by K = 0 on conformally flat metrics).
extern const double kTwistorPSign;
CplxArray transport_P(const RealArray& P, const Soldering& s);

struct Transport {
  std::vector<double> tau;
  std::vector<TwistorValue> Z;
};
// Classical RK4 with `steps` equal steps. Dual values are transported by the
// adjoint system so that W_a Z^a is preserved. StepFailure on non-finite or
// runaway values.
Transport twistor_transport(const TwistorValue& Z0, const Curve& c, const DMetricField& dm, int steps,
                            ConnectionBuilder build);
// Observed order log2(|Z_n - Z_2n| / |Z_2n - Z_4n|) at the end point.
double transport_order(const TwistorValue& Z0, const Curve& c, const DMetricField& dm, int steps,
                       ConnectionBuilder build);

// Curvature of the local twistor connection for d-vectors t, v (adapted components).
//   column form F = [tD, vD] - [t,v]D acting on Z,
//   paper layout K = i F^T (rows: source component, columns: target component).
struct TwistorCurvature {
  Eigen::Matrix4cd F;      // from R, D P, torsion and [A_t, A_v]
  Eigen::Matrix4cd K;      // i F^T
  Eigen::Matrix4cd K_psi;  // diagonal blocks from Psi alone, off-diagonal from F
  double lower_left = 0.0;  // max |K(pi rows, omega columns)|
};
// dm jets of order >= 3 for the derivative of P.
TwistorCurvature twistor_curvature(const DMetricJets& dm, std::span<const double> point, std::span<const double> t,
                                   std::span<const double> v, ConnectionBuilder build);
// Paper layout K from the holonomy of the coordinate parallelogram spanned by
// the coordinate vectors t and v (eps, eps/2, eps/4 with Richardson).
Eigen::Matrix4cd twistor_holonomy(const DMetricField& dm, std::span<const double> point, std::span<const double> t,
                                  std::span<const double> v, ConnectionBuilder build, double eps = 0.02,
                                  int steps_per_side = 8);

// Finsler 4+4: twistor data on the h-block (indices 0..3) and the v-block (4..7).
struct FinslerTwistorBlocks {
  double compat_h = 0.0;      // |Psi~_{LIJK} omega_h^L|
  double compat_mixed = 0.0;  // |Psi~_{IJK D} omega_v^D|
  double compat_v = 0.0;      // |Psi~_{DABC} omega_v^D|
  bool h_ok = false, v_ok = false;
  TwistorValue h, v;        // closed-form block solutions at the point (when ok)
  double residual_h = 0.0;  // twistor equation residual of the block solution
  double residual_v = 0.0;
};
// Z_h, Z_v are the block data at `origin`; the closed form uses the block
// adapted positions. IncompatibleBackground for a block only when `strict`.
FinslerTwistorBlocks finsler_twistor_blocks(const DMetricField& sasaki, std::span<const double> point,
                                            const TwistorValue& Z_h, const TwistorValue& Z_v,
                                            std::span<const double> origin, bool strict = false);

}  // namespace nonholo
