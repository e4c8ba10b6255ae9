#pragma once

// Lie algebra bundles given by transition functions on an atlas, connections
// given by local endomorphism-valued one-forms, and parallel transport.
//
// Frame conventions: phi_ab(x) maps fiber coordinates in chart a's frame to
// chart b's frame, so phi_ac = phi_bc * phi_ab. A local form omega_a(x, X) is
// the matrix with nabla_X s = ds(X) + omega_a(x, X) s in chart a's frame, so
//   omega_b = phi omega_a phi^-1 - (d_X phi) phi^-1
// on overlaps and transport solves P' = -omega(gamma, gamma') P.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liecouple/error.hpp"
#include "liecouple/geometry.hpp"
#include "liecouple/lie_algebra.hpp"
#include "liecouple/linalg.hpp"
#include "liecouple/tolerances.hpp"

namespace liecouple {

/// phi_ab as a function of chart a's coordinates.
using TransitionFn = std::function<FiberEndo(const Vector&)>;

struct TransitionSpec {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  TransitionFn map;
};

class LieAlgebraBundle {
 public:
  LieAlgebraBundle(LieAlgebra fiber, std::shared_ptr<const Atlas> atlas, std::vector<TransitionSpec> transitions,
                   Tolerances tol = {})
      : fiber_(std::move(fiber)),
        atlas_(std::move(atlas)),
        transitions_(std::move(transitions)),
        tol_(tol),
        ds_(std::make_shared<DerivationSpace>(derivation_space(fiber_, tol))) {
    if (!atlas_) throw Error(ErrorKind::config, "bundle without atlas");
    for (const auto& t : transitions_) {
      if (t.alpha >= atlas_->size() || t.beta >= atlas_->size() || t.alpha == t.beta) {
        throw Error(ErrorKind::config, "transition refers to an invalid chart pair");
      }
      if (find(t.beta, t.alpha)) {
        throw Error(ErrorKind::config, "transition given for both (" + atlas_->chart(t.alpha).id + ", " +
                                           atlas_->chart(t.beta).id + ") and its reverse");
      }
    }
  }

  const LieAlgebra& fiber() const { return fiber_; }
  const Atlas& atlas() const { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const { return atlas_; }
  const std::vector<TransitionSpec>& transitions() const { return transitions_; }
  const DerivationSpace& derivations() const { return *ds_; }
  const Tolerances& tolerances() const { return tol_; }
  int rank() const { return fiber_.dim(); }

  bool has_transition(std::size_t a, std::size_t b) const {
    return a == b || find(a, b) != nullptr || find(b, a) != nullptr;
  }

  /// phi_ab at the point with chart-a coordinates x. A pair stored in the
  /// opposite direction is inverted.
  FiberEndo transition(std::size_t a, std::size_t b, const Vector& x) const {
    const int n = fiber_.dim();
    if (a == b) return FiberEndo::Identity(n, n);
    if (const auto* t = find(a, b)) return checked(t->map(x), a, b);
    if (const auto* t = find(b, a)) {
      const FiberEndo m = checked(t->map(atlas_->change_coords(a, b, x)), b, a);
      return m.inverse();
    }
    throw Error(ErrorKind::config, "no transition between charts '" + atlas_->chart(a).id + "' and '" +
                                       atlas_->chart(b).id + "'");
  }

 private:
  const TransitionSpec* find(std::size_t a, std::size_t b) const {
    for (const auto& t : transitions_) {
      if (t.alpha == a && t.beta == b) return &t;
    }
    return nullptr;
  }

  FiberEndo checked(FiberEndo m, std::size_t a, std::size_t b) const {
    if (m.rows() != fiber_.dim() || m.cols() != fiber_.dim()) {
      throw Error(ErrorKind::dimension, "transition (" + atlas_->chart(a).id + ", " + atlas_->chart(b).id +
                                            ") has the wrong size");
    }
    return m;
  }

  LieAlgebra fiber_;
  std::shared_ptr<const Atlas> atlas_;
  std::vector<TransitionSpec> transitions_;
  Tolerances tol_;
  std::shared_ptr<const DerivationSpace> ds_;
};

/// (d_X phi)(x) phi(x)^-1 from logarithms of phi(x +- hX) phi(x)^-1. Each
/// logarithm of an automorphism near I is a derivation, so the result stays
/// in Der g up to roundoff. Returns nullopt when a logarithm does not exist.
inline std::optional<FiberEndo> log_derivative(const TransitionFn& phi, const Vector& x, const Vector& dir,
                                               double h) {
  const FiberEndo base_inv = phi(x).inverse();
  const auto up = principal_log(phi(x + h * dir) * base_inv);
  const auto down = principal_log(phi(x - h * dir) * base_inv);
  if (!up || !down) return std::nullopt;
  return FiberEndo((*up - *down) / (2.0 * h));
}

struct BundleReport {
  double max_automorphism = 0.0;  // over overlap samples and chart pairs
  double max_condition = 0.0;
  double max_cocycle = 0.0;       // |phi_ac - phi_bc phi_ab| over triple-overlap samples
  bool singular = false;
  bool accepted = false;
};

inline BundleReport check_bundle(const LieAlgebraBundle& b) {
  BundleReport r;
  const Atlas& atlas = b.atlas();
  const double tol = b.tolerances().alg;
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    for (std::size_t c = 0; c < atlas.size(); ++c) {
      if (a == c) continue;
      const auto samples = atlas.overlap_samples(a, c);
      if (samples.empty()) continue;
      for (const auto& s : samples) {
        const FiberEndo phi = b.transition(a, c, s.coords);
        const AutomorphismCheck chk = is_automorphism(b.fiber(), phi, tol);
        r.max_automorphism = std::max(r.max_automorphism, chk.residual);
        r.max_condition = std::max(r.max_condition, chk.condition);
        if (chk.status == AutomorphismStatus::singular) r.singular = true;
        for (std::size_t m = 0; m < atlas.size(); ++m) {
          if (m == a || m == c) continue;
          if (!atlas.chart(m).coords_of(s.point, 0.05 * atlas.chart(m).radius)) continue;
          const FiberEndo direct = b.transition(a, m, s.coords);
          const FiberEndo via = b.transition(c, m, atlas.change_coords(a, c, s.coords)) * phi;
          r.max_cocycle = std::max(r.max_cocycle, (direct - via).norm() / std::max(1.0, direct.norm()));
        }
      }
    }
  }
  r.accepted = !r.singular && r.max_automorphism <= tol && r.max_cocycle <= b.tolerances().geo;
  return r;
}

// ---------------------------------------------------------------------------
// Connections

/// omega_a(x, X): chart coordinates and a tangent vector in those coordinates.
using FormFn = std::function<FiberEndo(const Vector&, const Vector&)>;

/// Form sum_i X_i A_i(x) from one matrix-valued function per coordinate direction.
inline FormFn form_from_components(std::vector<std::function<FiberEndo(const Vector&)>> components) {
  return [components = std::move(components)](const Vector& x, const Vector& v) {
    FiberEndo out;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const FiberEndo a = components[i](x);
      if (i == 0) out = FiberEndo::Zero(a.rows(), a.cols());
      out += v(static_cast<Eigen::Index>(i)) * a;
    }
    return out;
  };
}

inline FormFn zero_form(int n) {
  return [n](const Vector&, const Vector&) { return FiberEndo::Zero(n, n); };
}

class LieConnection {
 public:
  LieConnection(std::shared_ptr<const LieAlgebraBundle> bundle, std::vector<FormFn> forms)
      : bundle_(std::move(bundle)), forms_(std::move(forms)) {
    if (!bundle_) throw Error(ErrorKind::config, "connection without bundle");
    if (forms_.size() != bundle_->atlas().size()) {
      throw Error(ErrorKind::config, "connection needs one local form per chart");
    }
  }

  const LieAlgebraBundle& bundle() const { return *bundle_; }
  const std::shared_ptr<const LieAlgebraBundle>& bundle_ptr() const { return bundle_; }
  const std::vector<FormFn>& forms() const { return forms_; }

  FiberEndo omega(std::size_t chart, const Vector& x, const Vector& v) const {
    FiberEndo m = forms_.at(chart)(x, v);
    const int n = bundle_->rank();
    if (m.rows() != n || m.cols() != n) throw Error(ErrorKind::dimension, "connection form has the wrong size");
    return m;
  }

 private:
  std::shared_ptr<const LieAlgebraBundle> bundle_;
  std::vector<FormFn> forms_;
};

struct ConnectionReport {
  double max_lie_residual = 0.0;       // derivation identity of omega values at chart samples
  double max_compatibility = 0.0;      // relative, at overlap samples
  bool accepted = false;
};

inline ConnectionReport check_connection(const LieConnection& c) {
  ConnectionReport r;
  const LieAlgebraBundle& b = c.bundle();
  const Atlas& atlas = b.atlas();
  const int d = atlas.dim();
  const Tolerances& tol = b.tolerances();
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    for (const auto& x : atlas.chart_samples(a)) {
      for (int i = 0; i < d; ++i) {
        r.max_lie_residual = std::max(r.max_lie_residual, derivation_residual(b.fiber(), c.omega(a, x, Vector::Unit(d, i))));
      }
    }
    for (std::size_t m = 0; m < atlas.size(); ++m) {
      if (m == a || !b.has_transition(a, m)) continue;
      const TransitionFn phi = [&b, a, m](const Vector& y) { return b.transition(a, m, y); };
      const double h = tol.fd_step * atlas.chart(a).radius;
      for (const auto& s : atlas.overlap_samples(a, m)) {
        const Vector xm = atlas.change_coords(a, m, s.coords);
        const Matrix jac = atlas.coord_jacobian(a, m, s.coords);
        const FiberEndo p = phi(s.coords);
        const FiberEndo p_inv = p.inverse();
        for (int i = 0; i < d; ++i) {
          const Vector e = Vector::Unit(d, i);
          const auto dlog = log_derivative(phi, s.coords, e, h);
          if (!dlog) {
            r.max_compatibility = std::numeric_limits<double>::infinity();
            continue;
          }
          const FiberEndo expected = p * c.omega(a, s.coords, e) * p_inv - *dlog;
          const FiberEndo actual = c.omega(m, xm, jac * e);
          r.max_compatibility =
              std::max(r.max_compatibility, (actual - expected).norm() / std::max(1.0, actual.norm()));
        }
      }
    }
  }
  r.accepted = r.max_lie_residual <= tol.alg && r.max_compatibility <= tol.conn;
  return r;
}

// ---------------------------------------------------------------------------
// Curvature

struct CurvatureValue {
  FiberEndo endo;
  std::optional<Vector> omega;  // present when endo is in ad g
  double ad_residual = 0.0;     // |endo - ad(witness)|_F
};

/// R(X,Y) = d_X omega(Y) - d_Y omega(X) + [omega(X), omega(Y)] in chart
/// coordinates, derivatives by central differences with step h.
inline CurvatureValue curvature(const LieConnection& c, std::size_t chart, const Vector& x, const Vector& X,
                                const Vector& Y, double h = Tolerances{}.curvature_fd) {
  const FiberEndo wx = c.omega(chart, x, X);
  const FiberEndo wy = c.omega(chart, x, Y);
  const FiberEndo dx_wy = (c.omega(chart, x + h * X, Y) - c.omega(chart, x - h * X, Y)) / (2.0 * h);
  const FiberEndo dy_wx = (c.omega(chart, x + h * Y, X) - c.omega(chart, x - h * Y, X)) / (2.0 * h);
  CurvatureValue out;
  out.endo = dx_wy - dy_wx + wx * wy - wy * wx;
  const InnerDecomposition dec = inner_test(c.bundle().derivations(), out.endo);
  out.ad_residual = dec.residual;
  if (dec.is_inner) out.omega = dec.witness;
  return out;
}

/// Same, at a base point; X and Y are in the coordinates of the first chart
/// containing p.
inline CurvatureValue curvature(const LieConnection& c, const Point& p, const Vector& X, const Vector& Y,
                                double h = Tolerances{}.curvature_fd) {
  const auto chart = c.bundle().atlas().find_chart(p);
  if (!chart) throw Error(ErrorKind::domain, "curvature: point outside all charts");
  return curvature(c, *chart, *c.bundle().atlas().chart(*chart).to_coord(p), X, Y, h);
}

// ---------------------------------------------------------------------------
// Parallel transport

struct TransportResult {
  FiberEndo map;               // P_gamma from the first segment's frame to the last segment's frame
  double lie_residual = 0.0;   // max |P[e_i,e_j] - [Pe_i, Pe_j]|
  int step_count = 0;          // total RK4 steps
  std::size_t start_chart = 0;
  std::size_t end_chart = 0;
};

inline double lie_residual(const LieAlgebra& g, const FiberEndo& p) { return is_automorphism(g, p, 0.0).residual; }

/// Cumulative transport at every RK4 node: nodes[k][j] is the map from the
/// start frame to chart k's frame at local parameter j/steps of segment k.
struct TransportTrace {
  std::vector<std::vector<FiberEndo>> nodes;
  FiberEndo map;
};

namespace detail {

inline void check_transport_inputs(const LieConnection& c, const PiecewisePath& path, int steps) {
  if (steps < 8) throw Error(ErrorKind::config, "parallel transport needs at least 8 steps per segment");
  if (&path.atlas() != &c.bundle().atlas() && path.atlas().name() != c.bundle().atlas().name()) {
    throw Error(ErrorKind::config, "path and connection live on different atlases");
  }
}

/// RK4 for P' = -omega(x(tau), x'(tau)) P over one segment.
template <typename Visit>
FiberEndo integrate_segment(const LieConnection& c, const PathSegment& seg, FiberEndo p, int steps, Visit&& visit) {
  const double dt = 1.0 / steps;
  auto rhs = [&](double tau, const FiberEndo& m) {
    const CoordSample s = seg.eval(tau);
    return FiberEndo(-c.omega(seg.chart, s.coords, s.velocity) * m);
  };
  visit(0, p);
  for (int j = 0; j < steps; ++j) {
    const double t = j * dt;
    const FiberEndo k1 = rhs(t, p);
    const FiberEndo k2 = rhs(t + 0.5 * dt, p + 0.5 * dt * k1);
    const FiberEndo k3 = rhs(t + 0.5 * dt, p + 0.5 * dt * k2);
    const FiberEndo k4 = rhs(t + dt, p + dt * k3);
    p += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    visit(j + 1, p);
  }
  return p;
}

template <typename Visit>
FiberEndo transport_impl(const LieConnection& c, const PiecewisePath& path, int steps, Visit&& visit) {
  check_transport_inputs(c, path, steps);
  const LieAlgebraBundle& b = c.bundle();
  const int n = b.rank();
  FiberEndo p = FiberEndo::Identity(n, n);
  const auto& segs = path.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (k > 0 && segs[k].chart != segs[k - 1].chart) {
      // Switch frames at the segment boundary, evaluated in the outgoing chart.
      p = b.transition(segs[k - 1].chart, segs[k].chart, segs[k - 1].eval(1.0).coords) * p;
    }
    p = integrate_segment(c, segs[k], p, steps, [&](int j, const FiberEndo& m) { visit(k, j, m); });
  }
  return p;
}

}  // namespace detail

inline TransportResult parallel_transport(const LieConnection& c, const PiecewisePath& path, int steps) {
  TransportResult r;
  r.map = detail::transport_impl(c, path, steps, [](std::size_t, int, const FiberEndo&) {});
  r.lie_residual = lie_residual(c.bundle().fiber(), r.map);
  r.step_count = steps * static_cast<int>(path.size());
  r.start_chart = path.segments().front().chart;
  r.end_chart = path.segments().back().chart;
  return r;
}

inline TransportTrace transport_trace(const LieConnection& c, const PiecewisePath& path, int steps) {
  TransportTrace tr;
  tr.nodes.assign(path.size(), std::vector<FiberEndo>(static_cast<std::size_t>(steps) + 1));
  tr.map = detail::transport_impl(c, path, steps, [&](std::size_t k, int j, const FiberEndo& m) {
    tr.nodes[k][static_cast<std::size_t>(j)] = m;
  });
  return tr;
}

struct CompositionReport {
  double composition = 0.0;  // |P_{g2 g1} - P_{g2} phi P_{g1}|_F, phi the junction frame change
  double inverse = 0.0;      // |P_{g1^-1} - P_{g1}^-1|_F
};

inline CompositionReport transport_composition_check(const LieConnection& c, const PiecewisePath& first,
                                                     const PiecewisePath& second, int steps) {
  const PiecewisePath joined = compose_paths(first, second);
  const FiberEndo p1 = parallel_transport(c, first, steps).map;
  const FiberEndo p2 = parallel_transport(c, second, steps).map;
  // Frame change where the first path's last chart differs from the second's first.
  const PathSegment& last = first.segments().back();
  const std::size_t next = second.segments().front().chart;
  const FiberEndo junction = last.chart == next
                                 ? FiberEndo(FiberEndo::Identity(p1.rows(), p1.cols()))
                                 : c.bundle().transition(last.chart, next, last.eval(1.0).coords);
  CompositionReport r;
  r.composition = (parallel_transport(c, joined, steps).map - p2 * junction * p1).norm();
  r.inverse = (parallel_transport(c, invert_path(first), steps).map - p1.inverse()).norm();
  return r;
}

struct HolonomyVariationReport {
  std::vector<double> s_values;    // interior grid points where both sides were compared
  std::vector<double> residuals;   // |LHS - RHS|_F at each
  double max_residual = 0.0;
  double max_lhs = 0.0;            // largest |d_s P| seen, for scale
};

/// Compares d_s P_{s,0} with (int_0^1 P_{s,t} R(d_t H, d_s H) P_{s,t}^-1 dt) P_{s,0}
/// on an (s_intervals x steps) grid. P_{s,t} transports from H(s,t) to H(s,1)
/// along h_s. The left side is a central difference in s, the right side a
/// per-segment trapezoid rule using one-sided velocities at corners.
inline HolonomyVariationReport holonomy_variation_check(const LieConnection& c, const Homotopy& h,
                                                        int s_intervals, int steps,
                                                        double curvature_step = Tolerances{}.curvature_fd,
                                                        double ds_fd = 1e-5) {
  if (s_intervals < 2) throw Error(ErrorKind::config, "holonomy check needs at least 2 s-intervals");
  const double ds = (h.s_max - h.s_min) / s_intervals;
  const PiecewisePath ref = h.path(h.s_min);
  const Tolerances tol = c.bundle().tolerances();
  std::vector<FiberEndo> hol(static_cast<std::size_t>(s_intervals) + 1);
  for (int i = 0; i <= s_intervals; ++i) {
    const PiecewisePath p = h.path(h.s_min + i * ds);
    const double scale = std::max(1.0, ref.start().norm());
    if ((p.start() - ref.start()).norm() > tol.geo * scale || (p.end() - ref.end()).norm() > tol.geo * scale) {
      throw Error(ErrorKind::domain, "holonomy check: homotopy endpoints move with s");
    }
    hol[static_cast<std::size_t>(i)] = parallel_transport(c, p, steps).map;
  }

  HolonomyVariationReport r;
  const int d = c.bundle().atlas().dim();
  for (int i = 1; i < s_intervals; ++i) {
    const double s = h.s_min + i * ds;
    const FiberEndo lhs = (hol[static_cast<std::size_t>(i) + 1] - hol[static_cast<std::size_t>(i) - 1]) / (2.0 * ds);

    const PiecewisePath path = h.path(s);
    const PiecewisePath up = h.path(s + ds_fd);
    const PiecewisePath down = h.path(s - ds_fd);
    const TransportTrace tr = transport_trace(c, path, steps);
    const FiberEndo& total = tr.map;
    FiberEndo integral = FiberEndo::Zero(total.rows(), total.cols());
    for (std::size_t k = 0; k < path.size(); ++k) {
      const PathSegment& seg = path.segments()[k];
      if (up.segments()[k].chart != seg.chart || down.segments()[k].chart != seg.chart) {
        throw Error(ErrorKind::domain, "holonomy check: chart structure changes with s");
      }
      for (int j = 0; j <= steps; ++j) {
        const double tau = static_cast<double>(j) / steps;
        const CoordSample at = seg.eval(tau);
        const Vector xs = (up.segments()[k].eval(tau).coords - down.segments()[k].eval(tau).coords) / (2.0 * ds_fd);
        if (at.velocity.size() != d) throw Error(ErrorKind::dimension, "holonomy check: velocity size");
        const FiberEndo rv = curvature(c, seg.chart, at.coords, at.velocity, xs, curvature_step).endo;
        const FiberEndo& u = tr.nodes[k][static_cast<std::size_t>(j)];
        const FiberEndo pst = total * u.inverse();
        const double w = (j == 0 || j == steps) ? 0.5 : 1.0;
        integral += (w / steps) * (pst * rv * pst.inverse());
      }
    }
    const FiberEndo rhs = integral * total;
    const double res = (lhs - rhs).norm();
    r.s_values.push_back(s);
    r.residuals.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
    r.max_lhs = std::max(r.max_lhs, lhs.norm());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Partition-of-unity blends

/// Connection whose local form in chart b is sum_a h_a(x) (omega_a expressed
/// in chart b's frame). Expressing a form in another frame includes the
/// inhomogeneous term -(d_X phi_ab) phi_ab^-1, taken from log_derivative.
inline LieConnection global_connection_from_locals(std::shared_ptr<const LieAlgebraBundle> bundle,
                                                   std::vector<FormFn> locals, PartitionOfUnity pu) {
  const Atlas& atlas = bundle->atlas();
  if (locals.size() != atlas.size()) throw Error(ErrorKind::config, "need one local connection per chart");
  if (atlas.size() == 1) return LieConnection(std::move(bundle), std::move(locals));

  auto shared_locals = std::make_shared<const std::vector<FormFn>>(std::move(locals));
  auto shared_pu = std::make_shared<const PartitionOfUnity>(std::move(pu));
  const LieAlgebraBundle* b = bundle.get();
  std::vector<FormFn> blended;
  for (std::size_t beta = 0; beta < atlas.size(); ++beta) {
    blended.push_back([b, beta, shared_locals, shared_pu](const Vector& x, const Vector& v) {
      const Atlas& at = b->atlas();
      const Point p = at.chart(beta).to_point(x);
      const std::vector<double> w = shared_pu->weights(p);
      const int n = b->rank();
      FiberEndo out = FiberEndo::Zero(n, n);
      for (std::size_t a = 0; a < at.size(); ++a) {
        if (w[a] < 1e-15) continue;
        if (a == beta) {
          out += w[a] * (*shared_locals)[a](x, v);
          continue;
        }
        if (!b->has_transition(a, beta)) {
          throw Error(ErrorKind::config, "blend needs a transition between '" + at.chart(a).id + "' and '" +
                                             at.chart(beta).id + "'");
        }
        const Vector xa = *at.chart(a).to_coord(p);
        const Vector va = at.coord_jacobian(beta, a, x) * v;
        const TransitionFn phi = [b, a, beta](const Vector& y) { return b->transition(a, beta, y); };
        const FiberEndo f = phi(xa);
        FiberEndo term = f * (*shared_locals)[a](xa, va) * f.inverse();
        const double len = va.norm();
        if (len > 0.0) {
          const double h = b->tolerances().fd_step * at.chart(a).radius;
          const auto dlog = log_derivative(phi, xa, va / len, h);
          if (!dlog) throw Error(ErrorKind::numeric, "blend: transition logarithm does not exist");
          term -= len * *dlog;
        }
        out += w[a] * term;
      }
      return out;
    });
  }
  return LieConnection(std::move(bundle), std::move(blended));
}

}  // namespace liecouple
