#pragma once

#include <span>

#include "nonholo/connections.hpp"

namespace nonholo {

// d-metric g -> w^2 g with the N-connection held fixed.
DMetricField conformal_rescale(const DMetricField& dm, const ScalarField& w);
DMetricJets conformal_rescale(const DMetricJets& dm, const Jet& w);
// Upsilon_a = e_a ln w at the point; NonpositiveFactor when w <= 1e-12.
RealArray conformal_dvector(const NConnectionField& N, const ScalarField& w, std::span<const double> point);
void require_positive(const ScalarField& w, std::span<const double> point);

// Weyl d-tensor in the index placements used throughout:
//   mixed(t, a, b, g)   = C^t_{ab}^g
//   updown(t, a, b, g)  = C^t_{abg}
//   lowered(t, a, b, g) = C_{tabg}
// built from the abstract-order curvature Rabs^t_{abg} := R^t_{gba} and
//   2 P_{ab} = sR g_{ab} / 6 - R_{ba}.
struct WeylJets {
  JetArray mixed, updown, lowered, P;
};
WeylJets weyl_jets(const DConnection& D, const JetArray& R);

struct WeylPackage {
  RealArray weyl_mixed, weyl_updown, weyl_lowered, P;
};
WeylPackage weyl_dtensor(const DConnection& D, const JetArray& R);
// Max over the four metric-free contractions of C^t_{ab}^g (t or g with a or b).
double weyl_trace_residual(const WeylPackage& w);

struct ConformalInvariance {
  double lowered = 0.0;  // max |C^_{tabg} - w^2 C_{tabg}|
  double mixed = 0.0;    // max |C^^t_{abg} - C^t_{abg}|
  double scale = 0.0;    // max |C^t_{abg}|, for relative statements
};
using ConnectionBuilder = DConnection (*)(const DMetricJets&, std::span<const double>);
ConformalInvariance conformal_invariance_check(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                                               ConnectionBuilder build);
// Negative control: scale the diagonal blocks of the coordinate metric while
// leaving the off-diagonal blocks alone, which changes N to N / w^2.
ConformalInvariance coordinate_rescaling_control(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                                                 ConnectionBuilder build);

struct BianchiResidual {
  double first = 0.0;                // max |cyclic D_e R^t_{abg}|
  double second = 0.0;               // max |D^t C_{gtab} - 2 D_[b P_g]a|
  double second_opposite_sign = 0.0;  // max |D^t C_{gtab} + 2 D_[b P_g]a|
  double curvature_scale = 0.0;
};
// Needs R with at least one jet order left.
BianchiResidual bianchi_residual(const DConnection& D, const JetArray& R);

// Box w = g^{ab} D_a D_b w at the point.
double box(const DConnection& D, const Jet& w);

struct LambdaRescaling {
  double lambda = 0.0, lambda_hat = 0.0, w = 0.0, box_over_w = 0.0;
  double residual_minus = 0.0;  // |4 w^2 L^ - 4 L + w^-1 box w|
  double residual_plus = 0.0;   // |4 w^2 L^ - 4 L - w^-1 box w|
};
LambdaRescaling lambda_rescaling(const DMetricJets& dm, const Jet& w, std::span<const double> point,
                                 ConnectionBuilder build);

}  // namespace nonholo
