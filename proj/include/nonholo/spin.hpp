#pragma once

#include <span>
#include <string>
#include <vector>

#include "nonholo/conformal.hpp"

namespace nonholo {

// Two-spinor conventions.
//   eps_{01} = eps^{01} = +1, kappa^A = eps^{AB} kappa_B, kappa_B = kappa^A eps_{AB}.
//   Flat soldering sigma_{a'}^{AA'} = (s_x, s_y, s_z, 1) / sqrt(2), timelike leg last.
// Real vectors correspond to Hermitian spinors, so eps_{AB} eps_{A'B'} reproduces
// the metric with the opposite overall sign: g_{ab} = -gamma_a gamma_b eps eps.
// All spinor algebra below is written for that spinor metric g_s = -g.
// Spinor arrays have every dimension 2 and are stored row-major.
constexpr double kSpinorMetricSign = -1.0;

double eps(int A, int B);  // same table for eps_{AB} and eps^{AB}
CplxArray flat_soldering();  // (a', A, A')
// Dirac matrices (a', 4, 4) with gamma_a gamma_b + gamma_b gamma_a = 2 eta_ab,
// eta = diag(1, 1, 1, -1), built from the flat soldering.
CplxArray dirac_matrices();
double clifford_residual();

// Orthonormal tetrad E(a', k) over the frame indices `block` of the metric G,
// leg a' = sum_k E(a', k) e_{block[k]}. Gram-Schmidt runs inside each group
// (positions into block) so legs never mix groups; spacelike legs come first
// and the timelike leg last. WrongSignature unless the block is (+,+,+,-).
JetArray orthonormal_tetrad(const JetArray& G, std::span<const int> block,
                            const std::vector<std::vector<int>>& groups);

struct Soldering {
  std::vector<int> block;  // frame indices covered, size 4
  RealArray metric;        // block metric g_kl
  RealArray tetrad;        // E(a', k)
  RealArray coframe;       // theta(a', k), E theta^T = I
  CplxArray gamma_up;      // gamma_k^{AA'}   (k, A, A')
  CplxArray gamma_down;    // gamma^k_{AA'}   (k, A, A')
  // max |g_kl + gamma_k^{AA'} gamma_l^{BB'} eps_AB eps_A'B'|
  double reconstruction_residual() const;
};

Soldering make_soldering(const RealArray& tetrad, const RealArray& metric, std::vector<int> block);
// 4-dimensional d-metric: Gram-Schmidt inside the h- and v-blocks.
// WrongDimension unless n + m = 4.
Soldering build_soldering(const DMetricJets& dm);
Soldering build_soldering(const DMetricField& dm, std::span<const double> point);
// One 4-dimensional block of a larger adapted metric, Gram-Schmidt over the whole block.
Soldering block_soldering(const RealArray& G, std::vector<int> block);

struct SpinorBlock {
  std::string name;
  std::vector<Variance> variance;  // per spinor index
  std::vector<IndexRole> roles;    // SpinorUnprimed / SpinorPrimed
  std::vector<IndexRole> origin;   // tensor role each pair came from
  CplxArray values;
};

// Solderings for the index roles: Total indices use `total`, H and V indices
// use the block solderings.
struct SolderingSet {
  const Soldering* total = nullptr;
  const Soldering* h = nullptr;
  const Soldering* v = nullptr;
};

// Every tensor index becomes a pair (A, A') of the same variance.
// RoleMismatch for spinor-role input or a role without a soldering.
SpinorBlock tensor_to_spinor(const TensorBlock& T, const SolderingSet& s);
// Inverse; the imaginary part of the result (zero for real tensors) goes to imag_max.
TensorBlock spinor_to_tensor(const SpinorBlock& S, const SolderingSet& s, double* imag_max = nullptr);

// Index-wise conversion kernels on plain arrays (all indices lower or all upper).
CplxArray to_spinor(const CplxArray& T, const Soldering& s, Variance v);
CplxArray from_spinor(const CplxArray& S, const Soldering& s, Variance v);
CplxArray complexify(const RealArray& a);

// R(t, a, b, g) = R_{tabg} = g_{te} R^e_{abg}; roles Total, all Down.
TensorBlock lowered_curvature(const DConnection& D, const JetArray& R);
JetArray lowered_curvature_jets(const DConnection& D, const JetArray& R);
// Max residual of the algebraic symmetries the spinor decomposition needs:
// antisymmetry in (t, a) and (b, g), pair exchange, and the cyclic identity.
double curvature_symmetry_residual(const RealArray& Rl);

struct CurvatureSpinors {
  CplxArray psi;  // Psi_{ABCD}
  CplxArray phi;  // Phi_{ABA'B'}
  CplxArray X;    // X_{ABCD} = Psi_{ABCD} + Lambda (eps_AC eps_BD + eps_AD eps_BC)
  double lambda = 0.0;
  double lambda_imag = 0.0;
  double psi_symmetry = 0.0;
  double phi_symmetry = 0.0;
  double phi_hermiticity = 0.0;
  double symmetry = 0.0;        // curvature_symmetry_residual of the input
  double reconstruction = 0.0;  // max |R - R(Psi, Phi, Lambda)| in tensor form
};

// Decomposition of R_{tabg} (as from lowered_curvature). The spinor form is
// taken of Rs(a, b, c, d) = -R(c, d, a, b): the first pair is the derivative
// pair and the last index is lowered with the spinor metric. SymmetryViolation
// when strict and the symmetry residual exceeds 1e-6; otherwise the residuals
// are reported as measured.
CurvatureSpinors curvature_spinors(const RealArray& Rl, const Soldering& s, bool strict = true);
CurvatureSpinors curvature_spinors(const TensorBlock& Rl, const SolderingSet& s, bool strict = true);

// Spinor form Rs_{AA'BB'CC'DD'} of a lowered curvature-type tensor in the
// decomposition order, and the inverse map back to R_{tabg}.
CplxArray curvature_spinor_form(const RealArray& Rl, const Soldering& s);
CplxArray rebuild_curvature_spinor(const CurvatureSpinors& cs);
RealArray curvature_from_spinor_form(const CplxArray& Rs, const Soldering& s, double* imag_max = nullptr);

struct SelfDualSplit {
  CplxArray anti_self_dual;  // Psi_{ABCD} eps_{A'B'} eps_{C'D'}
  CplxArray self_dual;       // conj(Psi)_{A'B'C'D'} eps_{AB} eps_{CD}
  CplxArray weyl;            // spinor form of the Weyl tensor
  double residual = 0.0;     // max |C - (-C) - (+C)|
};
// weyl_lowered is WeylPackage::weyl_lowered, C_{tabg} in the conformal module placement.
SelfDualSplit weyl_split(const CurvatureSpinors& cs, const RealArray& weyl_lowered, const Soldering& s);
// Psi from the Weyl tensor alone; must agree with the Psi of the full curvature.
CplxArray weyl_psi(const RealArray& weyl_lowered, const Soldering& s);

// Psi_{ABCD} contracted with o^A o^B o^C o^D etc.: the five dyad components
// Psi_0..Psi_4 for a normalized dyad (o, iota), o_A iota^A = 1.
std::vector<cplx> psi_components(const CplxArray& psi, std::span<const cplx> o, std::span<const cplx> iota);
// Principal spinors: the roots of Psi_{ABCD} x^A x^B x^C x^D = 0, as spinors (x^0, x^1).
std::vector<std::vector<cplx>> principal_spinors(const CplxArray& psi);

// Spin connection induced by a metric-compatible D through the tetrad.
//   D_k kappa^A = e_k kappa^A + Gamma(A, B, k) kappa^B,   k over the block.
struct SpinConnection {
  std::vector<int> block;
  RealArray omega;        // orthonormal-frame coefficients omega^{a'}_{b' k}
  CplxArray gamma;        // Gamma^A_{B k}
  double lift_residual = 0.0;  // failure of omega to lie in the Lorentz algebra
};
// tetrad: jets of E(a', k) with order >= 1 (orthonormal_tetrad of D.G).
SpinConnection spin_connection(const DConnection& D, const JetArray& tetrad, std::span<const int> block);

// The sl(2,C) element X with sigma_a M^a_b = X sigma_b + sigma_b X^dagger for a
// Lorentz generator M^a_b in the orthonormal frame. residual reports the
// failure of M to be a Lorentz generator.
CplxArray lorentz_to_spin(const RealArray& M, double* residual = nullptr);

struct SpinorBianchi {
  double psi_phi = 0.0;         // max |D^A_B' Psi_ABCD - D^A'_(B Phi_CD)A'B'|
  double phi_lambda = 0.0;      // max |D^CA' Phi_CDA'B' + 3 D_DB' Lambda|
  double psi_divergence = 0.0;  // max |D^A_B' Psi_ABCD|
  double phi_max = 0.0;
  double lambda_abs = 0.0;
  double scale = 0.0;           // max |D R|, for relative statements
};
// Spinor covariant derivatives of Psi, Phi and Lambda are the spinor forms of
// the covariant derivative of the curvature (gamma and eps are D-parallel for a
// metric-compatible D). dm needs jet order >= 3.
SpinorBianchi spinor_bianchi_residual(const DMetricJets& dm, std::span<const double> point, ConnectionBuilder build);

// Psi of the rescaled metric w^2 g in its own spin frame, multiplied by w^2,
// against Psi of g: equality is Psi^_{ABCD} = Psi_{ABCD} with eps^ = w eps.
double conformal_psi_residual(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                              ConnectionBuilder build);

// Curvature spinors of the h- and v-blocks of an 8-dimensional (4+4) connection.
struct BlockwiseSpinors {
  Soldering h_soldering, v_soldering;
  CurvatureSpinors h, v;
  SpinorBlock mixed;  // P-block, three h pairs and one v pair, all lower
  CplxArray mixed_psi;  // X of the mixed block symmetrized over its three h-indices: Psi_{IJK D}
  double mixed_norm = 0.0;
};
BlockwiseSpinors finsler_blockwise_spinors(const DConnection& D8, const JetArray& R8, bool strict = true);

}  // namespace nonholo
