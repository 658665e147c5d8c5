#include "nonholo/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "nonholo/conformal.hpp"
#include "nonholo/twistor.hpp"

namespace nonholo {

using nlohmann::json;

bool Report::all_passed() const { return failed() == 0; }

int Report::failed() const {
  int f = 0;
  for (const auto& c : checks) f += !c.pass;
  return f;
}

Suite parse_suite(const std::string& name) {
  for (Suite s : {Suite::Frames, Suite::Connections, Suite::Conformal, Suite::Spin, Suite::Twistor, Suite::All})
    if (name == suite_name(s)) return s;
  fail(ErrorCode::InvalidArgument, "unknown suite \"" + name + "\" (frames, connections, conformal, spin, twistor, all)");
}

const char* suite_name(Suite s) {
  switch (s) {
    case Suite::Frames: return "frames";
    case Suite::Connections: return "connections";
    case Suite::Conformal: return "conformal";
    case Suite::Spin: return "spin";
    case Suite::Twistor: return "twistor";
    case Suite::All: return "all";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

DConnection cartan_builder(const DMetricJets& J, std::span<const double> x) {
  return cartan_dconnection(J, ConnectionKind::Cartan, x);
}

const char* kind_id(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::Canonical: return "canonical";
    case ConnectionKind::Cartan: return "cartan";
    case ConnectionKind::LeviCivita: return "levi_civita";
    default: return "other";
  }
}

ConnectionBuilder builder_for(ConnectionKind k) {
  switch (k) {
    case ConnectionKind::Canonical: return canonical_dconnection;
    case ConnectionKind::Cartan: return cartan_builder;
    default: return levi_civita_adapted;
  }
}

// Lazily built objects at one sample point.
class PointContext {
 public:
  PointContext(const Scenario& s, std::vector<double> x) : s_(s), x_(std::move(x)) {}

  const std::vector<double>& x() const { return x_; }
  bool finsler() const { return s_.kind == ScenarioKind::Finsler; }

  // d-metric jets carrying N to order 2 (order 3 for `high`; Finsler charts
  // stop at the Sasaki lift of L at order 5).
  const DMetricJets& jets(bool high = false) {
    if (finsler()) high = false;
    auto& slot = high ? jets_hi_ : jets_;
    if (!slot) {
      if (finsler())
        slot = sasaki_jets(*s_.finsler, x_, 5);
      else
        slot = dmetric_jets(s_.dmetric, x_, high ? 3 : 2);
    }
    return *slot;
  }

  const DConnection& connection(ConnectionKind k, bool high = false) {
    if (finsler()) high = false;
    auto& cache = high ? conn_hi_ : conn_;
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, builder_for(k)(jets(high), x_)).first;
    return it->second;
  }

  const JetArray& curvature_of(ConnectionKind k, bool high = false) {
    if (finsler()) high = false;
    auto& cache = high ? curv_hi_ : curv_;
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, curvature(connection(k, high))).first;
    return it->second;
  }

  const Jet& w(int order) {
    if (!w_ || w_->order() < order) w_ = eval_jet(s_.conformal_factor, x_, order);
    return *w_;
  }

 private:
  const Scenario& s_;
  std::vector<double> x_;
  std::optional<DMetricJets> jets_, jets_hi_;
  std::map<ConnectionKind, DConnection> conn_, conn_hi_;
  std::map<ConnectionKind, JetArray> curv_, curv_hi_;
  std::optional<Jet> w_;
};

class Runner {
 public:
  Runner(const Scenario& s, const RunOptions& o) : s_(s), opt_(o) {}

  // f returns the residual at this point, or nothing when the check does not
  // apply there.
  void measure(const std::string& id, const std::string& anchor, double tol,
               const std::function<std::optional<double>()>& f) {
    auto it = index_.find(id);
    if (it == index_.end()) {
      it = index_.emplace(id, recs_.size()).first;
      CheckRecord r;
      r.id = id;
      r.anchor = anchor;
      r.tol = tolerance(id, tol);
      recs_.push_back(r);
      nonfinite_.push_back(false);
    }
    const auto t0 = Clock::now();
    std::optional<double> v = f();
    CheckRecord& r = recs_[it->second];
    r.ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (!v) return;
    ++r.points;
    if (!std::isfinite(*v))
      nonfinite_[it->second] = true;
    else
      r.residual = std::max(r.residual, *v);
  }

  Report finish() {
    Report rep;
    rep.scenario = s_.name;
    for (std::size_t k = 0; k < recs_.size(); ++k) {
      CheckRecord r = recs_[k];
      if (r.points == 0) continue;
      if (nonfinite_[k]) r.residual = std::numeric_limits<double>::max();
      r.pass = r.residual <= r.tol;
      rep.checks.push_back(r);
    }
    return rep;
  }

  const Scenario& scenario() const { return s_; }
  const RunOptions& options() const { return opt_; }

 private:
  double tolerance(const std::string& id, double dflt) const {
    auto it = s_.tolerances.find(id);
    return (it == s_.tolerances.end() ? dflt : it->second) * opt_.tol_scale;
  }

  const Scenario& s_;
  RunOptions opt_;
  std::vector<CheckRecord> recs_;
  std::vector<bool> nonfinite_;
  std::map<std::string, std::size_t> index_;
};

bool lorentzian4(std::span<const int> sig) {
  return sig.size() == 4 && std::count(sig.begin(), sig.end(), -1) == 1;
}

// The Weyl d-tensor and P use the 4-dimensional normalization.
bool conformal_applicable(const Scenario& s) { return s.chart.dim() == 4; }

bool spin_applicable(const Scenario& s) {
  const auto& sig = s.chart.signature;
  if (s.chart.dim() == 4) return lorentzian4(sig);
  if (s.chart.n == 4 && s.chart.m == 4)
    return lorentzian4(std::span<const int>(sig).subspan(0, 4)) && lorentzian4(std::span<const int>(sig).subspan(4, 4));
  return false;
}

std::vector<ConnectionKind> dkinds(const Scenario& s) {
  if (s.kind == ScenarioKind::Finsler) return {ConnectionKind::Canonical, ConnectionKind::Cartan};
  return {ConnectionKind::Canonical};
}

// ---------------------------------------------------------------- frames

void frames_point(Runner& run, PointContext& c) {
  const Scenario& s = run.scenario();
  const auto& x = c.x();
  run.measure("frames.duality", "N-adapted frame and coframe are dual", 1e-12,
              [&] { return adapted_frames(s.dmetric.N, x).duality_residual(); });
  run.measure("frames.metric_split", "d-metric blocks and N recovered from the coordinate metric", 1e-10, [&] {
    RealArray G = assemble_metric(s.dmetric, x);
    SplitMetric sp = split_metric(G, s.chart.n, s.chart.m);
    const DMetricJets& J = c.jets();
    return std::max({max_abs_diff(sp.g, values(J.g)), max_abs_diff(sp.h, values(J.h)),
                     max_abs_diff(sp.N, values(J.N))});
  });
  run.measure("frames.signature", "declared signature matches the metric inertia", 0.0, [&] {
    Inertia got = inertia(assemble_metric(s.dmetric, x));
    Inertia want;
    for (int v : s.chart.signature) (v > 0 ? want.positive : want.negative)++;
    return got == want ? 0.0 : 1.0;
  });
  if (s.kind == ScenarioKind::Finsler) {
    const FinslerFunction& f = *s.finsler;
    run.measure("finsler.homogeneity", "F(x, b y) = b F, Euler identity and y y g = F^2", 1e-9, [&] {
      const double betas[] = {0.5, 2.0, 3.0};
      return homogeneity_check(f, x, betas).max();
    });
    run.measure("finsler.sasaki_blocks", "Sasaki lift carries the Hessian on both blocks", 0.0, [&] {
      const DMetricJets& J = c.jets();
      return max_abs_diff(values(J.g), values(J.h));
    });
  }
}

// ----------------------------------------------------------- connections

JetArray probe_vector(std::span<const double> x, int order) {
  auto u = coordinate_jets(x, order);
  JetArray V({4});
  V(0) = sin(0.7 * u[0] * u[1] + 0.2);
  V(1) = exp(0.3 * u[2]) * u[3];
  V(2) = cos(u[3] - 0.4 * u[0]);
  V(3) = 0.5 * u[1] * u[2] * u[0] + 0.3 * u[3] * u[3];
  return V;
}

void connections_point(Runner& run, PointContext& c) {
  const Scenario& s = run.scenario();
  for (ConnectionKind k : dkinds(s)) {
    const std::string suffix = std::string(".") + kind_id(k);
    run.measure("connections.metric_compatibility" + suffix, "metric compatibility D g = 0", 1e-8,
                [&] { return max_abs(values(nonmetricity(c.connection(k)))); });
    run.measure("connections.torsion_zeros" + suffix, "pure h- and pure v-torsion vanish", 1e-10, [&] {
      RealArray T = values(torsion(c.connection(k)));
      const int n = s.chart.n, d = s.chart.dim();
      double r = 0.0;
      for (int g = 0; g < d; ++g)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) {
            const bool hh = g < n && a < n && b < n, vv = g >= n && a >= n && b >= n;
            if (hh || vv) r = std::max(r, std::abs(T(g, a, b)));
          }
      return r;
    });
    run.measure("connections.distortion" + suffix,
                "curvature equals the Levi-Civita curvature plus distortion terms", 1e-8, [&] {
                  const DConnection& D = c.connection(k);
                  const DConnection& lc = c.connection(ConnectionKind::LeviCivita);
                  return max_abs_diff(values(c.curvature_of(k)), values(distorted_curvature(lc, distortion(D, lc))));
                });
    if (!c.finsler())
      run.measure("connections.ricci_identity" + suffix, "Ricci identity with torsion on a probe vector field", 1e-7,
                  [&] {
                    const DConnection& D = c.connection(k, true);
                    return commutator_residual(D, c.curvature_of(k, true), torsion(D), probe_vector(c.x(), 3));
                  });
  }
  run.measure("connections.levi_civita", "Levi-Civita connection is torsion-free and metric compatible", 1e-10, [&] {
    const DConnection& lc = c.connection(ConnectionKind::LeviCivita);
    return std::max(max_abs(values(torsion(lc))), max_abs(values(nonmetricity(lc))));
  });
  if (s.vacuum)
    run.measure("connections.vacuum_einstein.levi_civita", "vacuum Einstein tensor of the Levi-Civita connection",
                1e-7, [&] {
                  const DConnection& lc = c.connection(ConnectionKind::LeviCivita);
                  return max_abs(contractions(lc, c.curvature_of(ConnectionKind::LeviCivita)).einstein);
                });
}

// ------------------------------------------------------------- conformal

void conformal_point(Runner& run, PointContext& c) {
  const Scenario& s = run.scenario();
  std::vector<ConnectionKind> kinds = dkinds(s);
  kinds.push_back(ConnectionKind::LeviCivita);
  for (ConnectionKind k : kinds) {
    const std::string suffix = std::string(".") + kind_id(k);
    run.measure("conformal.weyl_traces" + suffix, "Weyl d-tensor is trace-free", 1e-10, [&] {
      return weyl_trace_residual(weyl_dtensor(c.connection(k), c.curvature_of(k)));
    });
    if (s.conformally_flat)
      run.measure("conformal.weyl_vanishes" + suffix, "Weyl d-tensor vanishes on a conformally flat metric", 1e-8,
                  [&] { return max_abs(weyl_dtensor(c.connection(k), c.curvature_of(k)).weyl_mixed); });
    run.measure("conformal.weyl_invariance" + suffix, "Weyl d-tensor unchanged under g -> w^2 g", 1e-6, [&] {
      return conformal_invariance_check(c.jets(), c.w(2), c.x(), builder_for(k)).mixed;
    });
  }
  run.measure("conformal.bianchi.levi_civita", "first and second Bianchi identities with the Weyl d-tensor", 1e-8,
              [&] {
                BianchiResidual b = bianchi_residual(c.connection(ConnectionKind::LeviCivita, true),
                                                     c.curvature_of(ConnectionKind::LeviCivita, true));
                return std::max(b.first, b.second);
              });
  run.measure("conformal.lambda_rescaling.levi_civita", "4 w^2 Lambda^ = 4 Lambda - box w / w", 1e-8, [&] {
    return lambda_rescaling(c.jets(), c.w(2), c.x(), levi_civita_adapted).residual_minus;
  });
}

// ------------------------------------------------------------------ spin

void spin_point4(Runner& run, PointContext& c) {
  const Scenario& s = run.scenario();
  const Soldering sol = build_soldering(c.jets());
  run.measure("spin.soldering", "g = gamma gamma eps eps in the orthonormal adapted tetrad", 1e-10,
              [&] { return sol.reconstruction_residual(); });
  const ConnectionKind lc = ConnectionKind::LeviCivita;
  std::optional<CurvatureSpinors> cs;
  auto spinors = [&]() -> const CurvatureSpinors& {
    if (!cs) cs = curvature_spinors(lowered_curvature(c.connection(lc), c.curvature_of(lc)).values, sol, false);
    return *cs;
  };
  run.measure("spin.decomposition.levi_civita", "curvature rebuilt from Psi, Phi and Lambda", 1e-7,
              [&] { return spinors().reconstruction; });
  run.measure("spin.symmetries.levi_civita", "Psi totally symmetric, Phi Hermitian, Lambda real", 1e-9, [&] {
    const CurvatureSpinors& k = spinors();
    return std::max({k.psi_symmetry, k.phi_symmetry, k.phi_hermiticity, k.lambda_imag});
  });
  run.measure("spin.lambda.levi_civita", "Lambda = R / 24", 1e-9, [&] {
    return std::abs(spinors().lambda - contractions(c.connection(lc), c.curvature_of(lc)).scalar / 24.0);
  });
  run.measure("spin.weyl_split.levi_civita", "Weyl spinor form splits into anti-self-dual and self-dual parts", 1e-8,
              [&] {
                WeylPackage w = weyl_dtensor(c.connection(lc), c.curvature_of(lc));
                return weyl_split(spinors(), w.weyl_lowered, sol).residual;
              });
  if (s.vacuum)
    run.measure("spin.vacuum.levi_civita", "vacuum: Phi and Lambda vanish", 1e-7,
                [&] { return std::max(max_abs(spinors().phi), std::abs(spinors().lambda)); });
  run.measure("spin.bianchi.levi_civita", "spinor Bianchi identities", 1e-5, [&] {
    SpinorBianchi b = spinor_bianchi_residual(c.jets(true), c.x(), levi_civita_adapted);
    return std::max(b.psi_phi, b.phi_lambda);
  });
  run.measure("spin.conformal_psi.levi_civita", "Psi^ = Psi under g -> w^2 g with eps^ = w eps", 1e-6,
              [&] { return conformal_psi_residual(c.jets(), c.w(2), c.x(), levi_civita_adapted); });
  // torsionful D: the decomposition applies only where the curvature has the
  // Riemann symmetries
  run.measure("spin.decomposition.canonical", "curvature rebuilt from Psi, Phi and Lambda where R is pair-symmetric",
              1e-7, [&]() -> std::optional<double> {
                const ConnectionKind k = ConnectionKind::Canonical;
                RealArray Rl = lowered_curvature(c.connection(k), c.curvature_of(k)).values;
                if (curvature_symmetry_residual(Rl) > 1e-6) return std::nullopt;
                return curvature_spinors(Rl, sol, false).reconstruction;
              });
}

void spin_point8(Runner& run, PointContext& c) {
  const ConnectionKind k = ConnectionKind::Cartan;
  BlockwiseSpinors b = finsler_blockwise_spinors(c.connection(k), c.curvature_of(k), false);
  run.measure("spin.block_soldering", "g = gamma gamma eps eps on the h- and v-blocks", 1e-10, [&] {
    return std::max(b.h_soldering.reconstruction_residual(), b.v_soldering.reconstruction_residual());
  });
  for (auto [name, cs] : {std::pair{"h", &b.h}, std::pair{"v", &b.v}})
    run.measure(std::string("spin.block_decomposition.") + name + ".cartan",
                "block curvature rebuilt from Psi, Phi and Lambda where it is pair-symmetric", 1e-7,
                [&]() -> std::optional<double> {
                  if (cs->symmetry > 1e-6) return std::nullopt;
                  return cs->reconstruction;
                });
}

// --------------------------------------------------------------- twistor

TwistorValue random_twistor(Lcg& rng) {
  std::array<cplx, 4> z;
  for (auto& v : z) v = cplx(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return TwistorValue::from_flat(z);
}

// Short straight path from x toward the box center.
Curve probe_line(const Scenario& s, std::span<const double> x) {
  static const double c[] = {0.7, 0.4, 0.5, 0.6};
  std::vector<double> from(x.begin(), x.end()), dir(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto [lo, hi] = s.box[k];
    const double toward = x[k] <= 0.5 * (lo + hi) ? 1.0 : -1.0;
    dir[k] = 0.1 * (hi - lo) * c[k % 4] * toward;
  }
  return Curve::line(from, dir);
}

void twistor_spirality(Runner& run, const Soldering& sol, const RealArray& ups, Lcg& rng) {
  TwistorValue Z = random_twistor(rng);
  run.measure("twistor.spirality_invariance", "spirality unchanged by the local conformal transform", 1e-9, [&] {
    return std::abs(spirality(conformal_transform(Z, ups, sol)) - spirality(Z));
  });
  run.measure("twistor.kinematics", "p null, M antisymmetric, S = s p", 1e-12, [&] {
    Kinematics k = kinematics(Z, sol);
    return std::max({k.null_residual, k.antisymmetry, k.imag, k.spin_residual});
  });
}

void twistor_point4(Runner& run, PointContext& c, int index, Lcg& rng) {
  const Scenario& s = run.scenario();
  const auto& x = c.x();
  const Soldering sol = build_soldering(c.jets());
  RealArray ups = conformal_dvector(s.dmetric.N, s.conformal_factor, x);
  twistor_spirality(run, sol, ups, rng);

  const ConnectionBuilder canon = canonical_dconnection;
  const Curve line = probe_line(s, x);
  const std::vector<double> end = line.points.back();
  const bool flat = certify_flat(s.dmetric, x, canon).ok() && certify_flat(s.dmetric, end, canon).ok();
  TwistorValue Z0 = random_twistor(rng);
  if (flat) {
    run.measure("twistor.flat_solution.canonical", "closed-form solution solves the twistor equation", 1e-10, [&] {
      return twistor_residual(flat_solution_field(Z0, s.dmetric, line.points.front()), s.dmetric, end, canon).max;
    });
    run.measure("twistor.transport_closed_form.canonical", "transport along a line reproduces the closed form", 1e-9,
                [&] {
                  Transport tr = twistor_transport(Z0, line, s.dmetric, 16, canon);
                  return max_abs_diff(tr.Z.back(), flat_twistor_solution(Z0, s.dmetric, end, canon, x));
                });
  }
  TwistorValue W = random_twistor(rng);
  W.dual = true;
  run.measure("twistor.dual_pairing.canonical", "W_a Z^a constant along transport", 1e-8, [&] {
    Transport tz = twistor_transport(Z0, line, s.dmetric, 16, canon);
    Transport tw = twistor_transport(W, line, s.dmetric, 16, canon);
    const cplx p0 = pairing(W, Z0);
    double r = 0.0;
    for (std::size_t k = 0; k < tz.Z.size(); ++k) r = std::max(r, std::abs(pairing(tw.Z[k], tz.Z[k]) - p0));
    return r;
  });

  // the expensive oracles run on the first few points only
  if (index >= 5) return;
  if (!flat)
    run.measure("twistor.transport_order.canonical", "RK4 transport converges at fourth order", 0.5,
                [&]() -> std::optional<double> {
                  // a line longer than the probe makes the step error dominate roundoff
                  Curve longer = line;
                  for (std::size_t k = 0; k < x.size(); ++k)
                    longer.points.back()[k] = x[k] + 5.0 * line.tangents[0][k];
                  for (auto& t : longer.tangents)
                    for (auto& v : t) v *= 5.0;
                  TwistorValue a = twistor_transport(Z0, longer, s.dmetric, 4, canon).Z.back();
                  TwistorValue b = twistor_transport(Z0, longer, s.dmetric, 8, canon).Z.back();
                  if (max_abs_diff(a, b) < 1e-11) return std::nullopt;  // generator nearly constant
                  return std::abs(transport_order(Z0, longer, s.dmetric, 4, canon) - 4.0);
                });
  std::vector<double> t(4, 0.0), v(4, 0.0);
  t[0] = 1.0;
  v[3] = 1.0;
  for (ConnectionKind k : {ConnectionKind::Canonical, ConnectionKind::LeviCivita}) {
    const std::string suffix = std::string(".") + kind_id(k);
    run.measure("twistor.curvature_holonomy" + suffix, "curvature formula agrees with the parallelogram holonomy", 1e-5,
                [&] {
                  auto adapted = [&](const std::vector<double>& u) {
                    RealArray a = twistor_connection(s.dmetric, x, u, builder_for(k)).adapted_tangent;
                    return std::vector<double>(a.data().begin(), a.data().end());
                  };
                  TwistorCurvature K = twistor_curvature(c.jets(true), x, adapted(t), adapted(v), builder_for(k));
                  Eigen::Matrix4cd H = twistor_holonomy(s.dmetric, x, t, v, builder_for(k));
                  return (K.K - H).cwiseAbs().maxCoeff();
                });
  }
  run.measure("twistor.block_triangular.levi_civita", "lower-left block of K vanishes and the Psi route agrees", 1e-10,
              [&] {
                std::vector<double> a{0.3, 1.0, -0.4, 0.2}, b{0.5, -0.2, 0.8, 1.0};
                TwistorCurvature K = twistor_curvature(c.jets(true), x, a, b, levi_civita_adapted);
                return std::max(K.lower_left, (K.K - K.K_psi).cwiseAbs().maxCoeff());
              });
}

void twistor_point8(Runner& run, PointContext& c, Lcg& rng) {
  const Scenario& s = run.scenario();
  const ConnectionKind k = ConnectionKind::Cartan;
  BlockwiseSpinors b = finsler_blockwise_spinors(c.connection(k), c.curvature_of(k), false);
  RealArray ups8 = conformal_dvector(s.dmetric.N, s.conformal_factor, c.x());
  RealArray ups({4});
  for (int a = 0; a < 4; ++a) ups(a) = ups8(a);
  twistor_spirality(run, b.h_soldering, ups, rng);
  TwistorValue Zh = random_twistor(rng), Zv = random_twistor(rng);
  FinslerTwistorBlocks fb = finsler_twistor_blocks(s.dmetric, c.x(), Zh, Zv, c.x(), false);
  run.measure("twistor.block_solution.cartan", "closed-form block solutions solve the block twistor equations", 1e-9,
              [&]() -> std::optional<double> {
                if (!fb.h_ok && !fb.v_ok) return std::nullopt;
                return std::max(fb.h_ok ? fb.residual_h : 0.0, fb.v_ok ? fb.residual_v : 0.0);
              });
}

void run_single(Runner& run, Suite suite) {
  const Scenario& s = run.scenario();
  const RunOptions& o = run.options();
  if ((suite == Suite::Spin || suite == Suite::Twistor) && !spin_applicable(s))
    fail(ErrorCode::SuiteInapplicable, std::string(suite_name(suite)) +
                                           " suite needs a Lorentzian 4-dimensional chart or 4+4 Lorentzian blocks");
  if (suite == Suite::Conformal && !conformal_applicable(s))
    fail(ErrorCode::SuiteInapplicable, "conformal suite needs a 4-dimensional chart");
  if (suite == Suite::Spin) run.measure("spin.clifford", "Dirac matrices satisfy the Clifford relation", 1e-14, [] {
    return clifford_residual();
  });
  Lcg rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto pts = sample_points(s, o.seed, o.points);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    PointContext c(s, pts[i]);
    switch (suite) {
      case Suite::Frames: frames_point(run, c); break;
      case Suite::Connections: connections_point(run, c); break;
      case Suite::Conformal: conformal_point(run, c); break;
      case Suite::Spin:
        if (s.chart.dim() == 4)
          spin_point4(run, c);
        else
          spin_point8(run, c);
        break;
      case Suite::Twistor:
        if (s.chart.dim() == 4)
          twistor_point4(run, c, static_cast<int>(i), rng);
        else
          twistor_point8(run, c, rng);
        break;
      case Suite::All: break;
    }
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

Report run_suite(const Scenario& s, Suite suite, const RunOptions& opt) {
  if (opt.points < 1 || opt.points > 200) fail(ErrorCode::InvalidArgument, "points must be in 1..200");
  if (!(opt.tol_scale > 0.0) || !std::isfinite(opt.tol_scale))
    fail(ErrorCode::InvalidArgument, "tolerance scale must be positive");
  Runner run(s, opt);
  if (suite == Suite::All) {
    for (Suite k : {Suite::Frames, Suite::Connections, Suite::Conformal, Suite::Spin, Suite::Twistor}) {
      if ((k == Suite::Spin || k == Suite::Twistor) && !spin_applicable(s)) continue;
      if (k == Suite::Conformal && !conformal_applicable(s)) continue;
      run_single(run, k);
    }
  } else {
    run_single(run, suite);
  }
  return run.finish();
}

Report crosscheck(const Scenario& s, const RunOptions& opt) {
  if (opt.points < 1 || opt.points > 200) fail(ErrorCode::InvalidArgument, "points must be in 1..200");
  Runner run(s, opt);
  const auto pts = sample_points(s, opt.seed, opt.points);
  for (const auto& x : pts)
    for (const auto& [label, f] : s.fields)
      run.measure("crosscheck." + label, "jet derivatives agree with central finite differences", 1e-6,
                  [&]() -> double {
                    CrosscheckResult r = jet_crosscheck(f, x, 2);
                    return r.converged ? r.residual : std::numeric_limits<double>::infinity();
                  });
  return run.finish();
}

std::string report_to_json(const Report& r) {
  // ordered so the file reads in schema order
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json k;
    k["id"] = c.id;
    k["anchor"] = c.anchor;
    k["residual"] = c.residual;
    k["tol"] = c.tol;
    k["pass"] = c.pass;
    k["points"] = c.points;
    k["ms"] = c.ms;
    checks.push_back(std::move(k));
  }
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["checks"] = std::move(checks);
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseFailure("JSON syntax in report", line, col);
  }
  auto bad = [](const std::string& w) { fail(ErrorCode::ValidationError, "report: " + w); };
  if (!j.is_object() || !j.contains("scenario") || !j["scenario"].is_string() || !j.contains("checks") ||
      !j["checks"].is_array())
    bad("expected {\"scenario\": str, \"checks\": [...]}");
  Report r;
  r.scenario = j["scenario"].get<std::string>();
  for (const auto& c : j["checks"]) {
    if (!c.is_object()) bad("check records must be objects");
    CheckRecord k;
    try {
      k.id = c.at("id").get<std::string>();
      k.anchor = c.at("anchor").get<std::string>();
      k.residual = c.at("residual").get<double>();
      k.tol = c.at("tol").get<double>();
      k.pass = c.at("pass").get<bool>();
      k.points = c.at("points").get<int>();
      k.ms = c.at("ms").get<double>();
    } catch (const json::exception& e) {
      bad(std::string("malformed check record: ") + e.what());
    }
    r.checks.push_back(k);
  }
  return r;
}

std::string report_to_text(const Report& r) {
  std::size_t w = 5;
  for (const auto& c : r.checks) w = std::max(w, c.id.size());
  std::ostringstream o;
  o << "scenario: " << r.scenario << "\n";
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  o << pad("check", w) << "  " << pad("residual", 11) << "  " << pad("tol", 11) << "  " << pad("result", 6) << "  "
    << pad("points", 6) << "  ms\n";
  for (const auto& c : r.checks)
    o << pad(c.id, w) << "  " << pad(fmt("%.3e", c.residual), 11) << "  " << pad(fmt("%.3e", c.tol), 11) << "  "
      << pad(c.pass ? "pass" : "FAIL", 6) << "  " << pad(std::to_string(c.points), 6) << "  " << fmt("%.1f", c.ms)
      << "\n";
  o << r.checks.size() << " checks, " << r.failed() << " failed\n";
  return o.str();
}

void write_report(const Report& r, const std::string& format, const std::string& path) {
  std::string body;
  if (format == "json")
    body = report_to_json(r);
  else if (format == "text")
    body = report_to_text(r);
  else
    fail(ErrorCode::InvalidArgument, "format must be json or text");
  if (path == "-" || path.empty()) {
    std::cout << body;
    std::cout.flush();
    if (!std::cout) fail(ErrorCode::IoError, "cannot write to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open \"" + path + "\" for writing");
  out << body;
  out.close();
  if (!out) fail(ErrorCode::IoError, "write to \"" + path + "\" failed");
}

}  // namespace nonholo
