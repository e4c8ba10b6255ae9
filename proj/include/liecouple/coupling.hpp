#pragma once

// Deciding whether TM couples with a Lie algebra bundle.
//
// Forward route: a Lie connection whose curvature is ad-valued yields new
// charts by radial parallel transport; their transitions are checked for
// delta-continuity (logarithmic derivative inner everywhere).
// Backward route: from delta-continuous transitions, flat local connections
// are blended with a partition of unity and their pairwise differences are
// certified to be inner.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "liecouple/bundle.hpp"
#include "liecouple/error.hpp"
#include "liecouple/geometry.hpp"
#include "liecouple/lie_algebra.hpp"
#include "liecouple/tolerances.hpp"

namespace liecouple {

enum class Verdict { exists, fails, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::exists: return "exists";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Relative residual: absolute residual over max(1, |reference|_F).
inline double relative(double residual, double reference_norm) { return residual / std::max(1.0, reference_norm); }

/// Classifies a family of relative residuals against the pass/fail deadband.
inline Verdict classify(const std::vector<double>& residuals, const Tolerances& tol) {
  bool all_pass = true;
  for (double r : residuals) {
    if (!(r < tol.fail)) return Verdict::fails;
    if (r > tol.pass) all_pass = false;
  }
  return all_pass ? Verdict::exists : Verdict::inconclusive;
}

struct DeltaSample {
  std::size_t index = 0;    // overlap sample index
  Vector coords;            // chart alpha coordinates
  Point point;
  int direction = 0;        // coordinate direction in chart alpha
  FiberEndo log_derivative;  // (d phi) phi^-1
  Vector witness;           // minimal-norm u with ad(u) closest to log_derivative
  double residual = 0.0;    // relative distance to ad g
  bool log_defined = true;
};

struct DeltaTransitionReport {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::vector<DeltaSample> samples;
  double max_residual = 0.0;
  bool passes = false;
};

/// Central-difference logarithmic derivative of every transition phi_ab
/// (a < b) at the overlap samples, along each coordinate direction of chart a,
/// tested for membership in ad g.
inline std::vector<DeltaTransitionReport> delta_continuity_test(const LieAlgebraBundle& b) {
  const Atlas& atlas = b.atlas();
  const Tolerances& tol = b.tolerances();
  const DerivationSpace& ds = b.derivations();
  const int d = atlas.dim();
  std::vector<DeltaTransitionReport> out;
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    for (std::size_t c = a + 1; c < atlas.size(); ++c) {
      const auto samples = atlas.overlap_samples(a, c);
      if (samples.empty()) continue;
      if (!b.has_transition(a, c)) {
        throw Error(ErrorKind::config, "charts '" + atlas.chart(a).id + "' and '" + atlas.chart(c).id +
                                           "' overlap but have no transition");
      }
      DeltaTransitionReport rep;
      rep.alpha = a;
      rep.beta = c;
      const TransitionFn phi = [&b, a, c](const Vector& y) { return b.transition(a, c, y); };
      const double h = tol.fd_step * atlas.chart(a).radius;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        for (int dir = 0; dir < d; ++dir) {
          const Vector e = Vector::Unit(d, dir);
          for (double sign : {-1.0, 1.0}) {
            const Point q = atlas.chart(a).to_point(s.coords + sign * h * e);
            if (!atlas.chart(a).contains(q) || !atlas.chart(c).contains(q)) {
              throw Error(ErrorKind::domain, "delta test stencil leaves the overlap of '" + atlas.chart(a).id +
                                                 "' and '" + atlas.chart(c).id + "'");
            }
          }
          DeltaSample ds_out;
          ds_out.index = i;
          ds_out.coords = s.coords;
          ds_out.point = s.point;
          ds_out.direction = dir;
          const auto dlog = log_derivative(phi, s.coords, e, h);
          if (dlog) {
            ds_out.log_derivative = *dlog;
            const InnerDecomposition dec = inner_test(ds, *dlog);
            ds_out.witness = dec.witness;
            ds_out.residual = relative(dec.residual, dlog->norm());
          } else {
            // phi jumps within the stencil: no logarithm, hence no derivative.
            const int n = b.rank();
            ds_out.log_derivative = FiberEndo::Zero(n, n);
            ds_out.witness = Vector::Zero(n);
            ds_out.residual = 1.0;
            ds_out.log_defined = false;
          }
          rep.max_residual = std::max(rep.max_residual, ds_out.residual);
          rep.samples.push_back(std::move(ds_out));
        }
      }
      rep.passes = rep.max_residual <= tol.pass;
      out.push_back(std::move(rep));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Certificates

struct Witness {
  std::string kind;      // curvature, delta, overlap, lie_condition, automorphism
  std::string location;  // chart id or "alpha->beta"
  std::size_t sample = 0;
  Vector point;
  Vector direction;
  double residual = 0.0;
};

struct PairResidual {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  double max_residual = 0.0;     // relative distance of the overlap difference to ad g
  double max_witness_gap = 0.0;  // |ad(h) - phi^-1 ad(u_delta) phi|_F
  std::size_t samples = 0;
};

struct CouplingCertificate {
  Verdict verdict = Verdict::inconclusive;
  std::string route;  // forward, backward, curvature
  Tolerances tol;
  Resolution res;

  // Supplied connection (forward route and curvature route only).
  bool connection_supplied = false;
  double lie_condition_residual = 0.0;
  double max_curvature_residual = 0.0;  // relative distance of R to ad g
  std::size_t curvature_samples = 0;

  // Transport charts (forward route).
  double transition_automorphism_residual = 0.0;
  double transition_cocycle_residual = 0.0;

  std::vector<DeltaTransitionReport> delta;

  // Backward construction.
  bool coupling_built = false;
  std::vector<double> outer_curvature_residuals;  // per chart, flat local forms
  std::vector<PairResidual> overlap;
  double blend_lie_residual = 0.0;
  double blend_inner_residual = 0.0;  // blended form minus flat local form, distance to ad g
  double witness_tolerance = 0.0;

  std::vector<Witness> witnesses;
  std::vector<std::string> notes;
  std::shared_ptr<const LieConnection> coupling;  // the blended representative
};

namespace detail {

constexpr std::size_t max_witnesses_per_family = 8;

inline std::string pair_label(const Atlas& atlas, std::size_t a, std::size_t b) {
  return atlas.chart(a).id + "->" + atlas.chart(b).id;
}

inline void add_delta_witnesses(CouplingCertificate& cert, const Atlas& atlas,
                                const std::vector<DeltaTransitionReport>& reports, const std::string& kind) {
  std::size_t added = 0;
  for (const auto& rep : reports) {
    for (const auto& s : rep.samples) {
      if (s.residual < cert.tol.fail || added >= max_witnesses_per_family) continue;
      cert.witnesses.push_back({kind, pair_label(atlas, rep.alpha, rep.beta), s.index, s.point,
                                Vector::Unit(atlas.dim(), s.direction), s.residual});
      ++added;
    }
  }
}

inline std::vector<double> delta_residuals(const std::vector<DeltaTransitionReport>& reports) {
  std::vector<double> out;
  for (const auto& rep : reports)
    for (const auto& s : rep.samples) out.push_back(s.residual);
  return out;
}

}  // namespace detail

/// Curvature of c at the chart samples, for every pair of coordinate
/// directions i < j.
struct CurvatureSample {
  std::size_t chart = 0;
  std::size_t index = 0;
  Vector coords;
  int i = 0;
  int j = 0;
  CurvatureValue value;
  double residual = 0.0;  // relative distance to ad g
};

inline std::vector<CurvatureSample> curvature_survey(const LieConnection& c) {
  const Atlas& atlas = c.bundle().atlas();
  const int d = atlas.dim();
  const double h = c.bundle().tolerances().curvature_fd;
  std::vector<CurvatureSample> out;
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    const auto samples = atlas.chart_samples(a);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
          CurvatureSample s;
          s.chart = a;
          s.index = k;
          s.coords = samples[k];
          s.i = i;
          s.j = j;
          s.value = curvature(c, a, samples[k], Vector::Unit(d, i), Vector::Unit(d, j), h);
          s.residual = relative(s.value.ad_residual, s.value.endo.norm());
          out.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

/// Largest derivation-identity residual of omega over chart samples and
/// coordinate directions.
inline double lie_condition_residual(const LieConnection& c) {
  const Atlas& atlas = c.bundle().atlas();
  const int d = atlas.dim();
  double worst = 0.0;
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    for (const auto& x : atlas.chart_samples(a)) {
      for (int i = 0; i < d; ++i) {
        worst = std::max(worst, derivation_residual(c.bundle().fiber(), c.omega(a, x, Vector::Unit(d, i))));
      }
    }
  }
  return worst;
}

/// The same bundle re-trivialized by radial parallel transport: the new
/// transition at x in the overlap of charts a and b is the transport along
/// the path from a's centre out to x and back to b's centre. Throws when the
/// curvature of c is not ad-valued at some sample.
inline std::shared_ptr<const LieAlgebraBundle> build_transport_charts(const LieConnection& c) {
  const LieAlgebraBundle& b = c.bundle();
  const Tolerances& tol = b.tolerances();
  for (const auto& s : curvature_survey(c)) {
    if (s.residual > tol.pass) {
      std::ostringstream msg;
      msg << "curvature is not in ad g at chart '" << b.atlas().chart(s.chart).id << "' sample " << s.index
          << " directions (" << s.i << "," << s.j << "): relative residual " << s.residual;
      throw Error(ErrorKind::numeric, msg.str());
    }
  }
  auto conn = std::make_shared<const LieConnection>(c);
  const auto atlas = b.atlas_ptr();
  const int steps = atlas->resolution().steps;
  std::vector<TransitionSpec> transitions;
  for (std::size_t a = 0; a < atlas->size(); ++a) {
    for (std::size_t m = a + 1; m < atlas->size(); ++m) {
      if (!atlas->overlaps(a, m)) continue;
      transitions.push_back({a, m, [conn, atlas, a, m, steps](const Vector& x) {
                               const Vector xm = atlas->change_coords(a, m, x);
                               const PiecewisePath path =
                                   compose_paths(radial_path_coords(atlas, a, x),
                                                 invert_path(radial_path_coords(atlas, m, xm)), 1e-6);
                               return parallel_transport(*conn, path, steps).map;
                             }});
    }
  }
  return std::make_shared<const LieAlgebraBundle>(b.fiber(), atlas, std::move(transitions), tol);
}

/// Backward construction from delta-continuous transitions.
inline CouplingCertificate build_coupling(std::shared_ptr<const LieAlgebraBundle> bundle,
                                          const std::vector<DeltaTransitionReport>& reports,
                                          const PartitionOfUnity& pu) {
  const LieAlgebraBundle& b = *bundle;
  const Atlas& atlas = b.atlas();
  const Tolerances& tol = b.tolerances();
  const DerivationSpace& ds = b.derivations();
  const int n = b.rank();
  const int d = atlas.dim();

  CouplingCertificate cert;
  cert.route = "backward";
  cert.tol = tol;
  cert.res = atlas.resolution();
  cert.delta = reports;
  // Agreement of the two witness computations: ten times the
  // finite-difference tolerance on connection data.
  cert.witness_tolerance = 10.0 * tol.conn;

  for (const auto& rep : reports) {
    if (!rep.passes) {
      cert.verdict = classify(detail::delta_residuals(reports), tol);
      if (cert.verdict == Verdict::exists) cert.verdict = Verdict::inconclusive;
      detail::add_delta_witnesses(cert, atlas, reports, "delta");
      cert.notes.push_back("transitions are not delta-continuous at every sample; no coupling was built");
      return cert;
    }
  }

  // Flat local connections: the form is zero in each chart's own frame, so
  // the in-chart curvature vanishes identically.
  std::vector<FormFn> locals(atlas.size(), zero_form(n));
  const LieConnection flat(bundle, locals);
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    double worst = 0.0;
    for (const auto& x : atlas.chart_samples(a)) {
      for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
          worst = std::max(worst, curvature(flat, a, x, Vector::Unit(d, i), Vector::Unit(d, j)).endo.norm());
        }
      }
    }
    cert.outer_curvature_residuals.push_back(worst);
  }

  // Overlap differences in chart alpha's frame: omega_beta expressed there
  // minus omega_alpha equals phi^-1 d phi. Computed from a plain central
  // difference of phi, independently of the logarithmic stencil.
  std::vector<double> family;
  for (const auto& rep : reports) {
    PairResidual pr;
    pr.alpha = rep.alpha;
    pr.beta = rep.beta;
    const double h = tol.fd_step * atlas.chart(rep.alpha).radius;
    for (const auto& s : rep.samples) {
      const Vector e = Vector::Unit(d, s.direction);
      const FiberEndo phi = b.transition(rep.alpha, rep.beta, s.coords);
      const FiberEndo phi_inv = phi.inverse();
      const FiberEndo dphi = (b.transition(rep.alpha, rep.beta, s.coords + h * e) -
                              b.transition(rep.alpha, rep.beta, s.coords - h * e)) /
                             (2.0 * h);
      const FiberEndo diff = phi_inv * dphi;
      const InnerDecomposition dec = inner_test(ds, diff);
      const double res = relative(dec.residual, diff.norm());
      const FiberEndo from_delta = phi_inv * ad(b.fiber(), s.witness) * phi;
      const double gap = (ad(b.fiber(), dec.witness) - from_delta).norm();
      pr.max_residual = std::max(pr.max_residual, res);
      pr.max_witness_gap = std::max(pr.max_witness_gap, gap);
      ++pr.samples;
      family.push_back(res);
      if (res >= tol.fail) {
        cert.witnesses.push_back({"overlap", detail::pair_label(atlas, rep.alpha, rep.beta), s.index, s.point, e, res});
      }
    }
    cert.overlap.push_back(pr);
  }

  auto blend = std::make_shared<const LieConnection>(global_connection_from_locals(bundle, locals, pu));
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    for (const auto& x : atlas.chart_samples(a)) {
      for (int i = 0; i < d; ++i) {
        const FiberEndo w = blend->omega(a, x, Vector::Unit(d, i));
        cert.blend_lie_residual = std::max(cert.blend_lie_residual, derivation_residual(b.fiber(), w));
        cert.blend_inner_residual =
            std::max(cert.blend_inner_residual, relative(inner_test(ds, w).residual, w.norm()));
      }
    }
  }
  cert.coupling = blend;
  cert.coupling_built = true;

  cert.verdict = classify(family, tol);
  if (cert.verdict == Verdict::exists) {
    bool gaps_ok = true;
    for (const auto& pr : cert.overlap) gaps_ok = gaps_ok && pr.max_witness_gap <= cert.witness_tolerance;
    if (!gaps_ok) {
      cert.verdict = Verdict::inconclusive;
      cert.notes.push_back("overlap witnesses disagree with the delta-test witnesses");
    }
    if (cert.blend_lie_residual > tol.alg) {
      cert.verdict = Verdict::inconclusive;
      cert.notes.push_back("blended connection violates the Lie condition");
    }
  }
  return cert;
}

/// Decides existence of a coupling, with a full certificate.
///
/// With a Lie connection whose sampled curvature lies in ad g, the forward
/// route re-trivializes by radial transport and then runs the backward
/// construction on the new transitions. Otherwise the supplied transitions are
/// tested directly. For an abelian fiber, curvature outside ad g (= 0) counts
/// as a decisive witness against the supplied data.
inline CouplingCertificate coupling_exists(std::shared_ptr<const LieAlgebraBundle> bundle,
                                           const std::optional<LieConnection>& connection = std::nullopt) {
  const LieAlgebraBundle& b = *bundle;
  const Atlas& atlas = b.atlas();
  const Tolerances& tol = b.tolerances();
  const PartitionOfUnity pu = build_partition(bundle->atlas_ptr());

  auto backward_on = [&](std::shared_ptr<const LieAlgebraBundle> target) {
    const auto reports = delta_continuity_test(*target);
    return build_coupling(std::move(target), reports, pu);
  };

  if (!connection) {
    CouplingCertificate cert = backward_on(bundle);
    cert.route = "backward";
    return cert;
  }

  const LieConnection& c = *connection;
  const double lie_res = lie_condition_residual(c);
  if (lie_res > tol.alg) {
    CouplingCertificate cert = backward_on(bundle);
    cert.route = "backward";
    cert.connection_supplied = true;
    cert.lie_condition_residual = lie_res;
    cert.notes.push_back("supplied connection is not a Lie connection; it was ignored");
    return cert;
  }

  const auto survey = curvature_survey(c);
  std::vector<double> curv;
  double curv_max = 0.0;
  for (const auto& s : survey) {
    curv.push_back(s.residual);
    curv_max = std::max(curv_max, s.residual);
  }

  CouplingCertificate cert;
  if (classify(curv, tol) == Verdict::exists) {
    const auto charts = build_transport_charts(c);
    const BundleReport br = check_bundle(*charts);
    cert = backward_on(charts);
    cert.route = "forward";
    cert.transition_automorphism_residual = br.max_automorphism;
    cert.transition_cocycle_residual = br.max_cocycle;
    if (!br.accepted && cert.verdict == Verdict::exists) {
      cert.verdict = Verdict::inconclusive;
      cert.notes.push_back("transport-chart transitions failed the bundle check");
    }
  } else {
    cert = backward_on(bundle);
    cert.route = "curvature";
    std::size_t added = 0;
    for (const auto& s : survey) {
      if (s.residual < tol.fail || added >= detail::max_witnesses_per_family) continue;
      Vector dir = Vector::Zero(atlas.dim());
      dir(s.i) = 1.0;
      dir(s.j) = 1.0;
      cert.witnesses.push_back({"curvature", atlas.chart(s.chart).id, s.index, atlas.chart(s.chart).to_point(s.coords),
                                dir, s.residual});
      ++added;
    }
    if (b.fiber().is_abelian() && added > 0 && cert.verdict != Verdict::exists) {
      // ad g = 0: no Lie connection is flat modulo ad g unless it is flat,
      // and the supplied transitions are not locally constant either.
      cert.verdict = Verdict::fails;
    }
    if (cert.verdict == Verdict::exists) {
      cert.notes.push_back("supplied connection has curvature outside ad g, but the supplied transitions are "
                           "delta-continuous");
    }
  }
  cert.connection_supplied = true;
  cert.lie_condition_residual = lie_res;
  cert.max_curvature_residual = curv_max;
  cert.curvature_samples = survey.size();
  return cert;
}

}  // namespace liecouple
