#pragma once

// Builtin bundles with known answers.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liecouple/algebra_catalog.hpp"
#include "liecouple/bundle.hpp"
#include "liecouple/coupling.hpp"
#include "liecouple/error.hpp"
#include "liecouple/geometry.hpp"

namespace liecouple {

struct ScenarioOptions {
  Resolution res;
  Tolerances tol;
};

struct Scenario {
  std::string name;
  std::string description;
  std::shared_ptr<const LieAlgebraBundle> bundle;
  std::optional<LieConnection> connection;
  std::optional<Verdict> expected;
  std::optional<PiecewisePath> loop;   // used by transport
  std::optional<Homotopy> homotopy;    // used by the holonomy-variation check

  const Atlas& atlas() const { return bundle->atlas(); }
};

/// N-fold concatenation of a loop.
inline PiecewisePath repeat_loop(const PiecewisePath& loop, int times) {
  if (times < 1) throw Error(ErrorKind::config, "loop count must be positive");
  std::vector<PathSegment> segs;
  std::vector<double> breaks{0.0};
  const double share = 1.0 / times;
  for (int r = 0; r < times; ++r) {
    for (std::size_t k = 0; k < loop.size(); ++k) {
      segs.push_back(loop.segments()[k]);
      breaks.push_back(share * (r + loop.breaks()[k + 1]));
    }
  }
  breaks.back() = 1.0;
  return PiecewisePath(loop.atlas_ptr(), std::move(segs), std::move(breaks));
}

namespace scenarios {

namespace detail {

constexpr double pi = std::numbers::pi;

inline Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

/// Rotation exp(t ad e3) on so(3) with [e1,e2]=e3 and cyclic.
inline FiberEndo rot3(double t) {
  FiberEndo r = FiberEndo::Identity(3, 3);
  r(0, 0) = std::cos(t);
  r(0, 1) = -std::sin(t);
  r(1, 0) = std::sin(t);
  r(1, 1) = std::cos(t);
  return r;
}

/// Loop around S^1 based at angle 0: c0 from 0 to pi/2, c1 across pi, c0 back.
inline PiecewisePath circle_loop(std::shared_ptr<const Atlas> atlas) {
  auto pt = [](double u) { return Vector::Constant(1, u); };
  return PiecewisePath(atlas, {straight_segment(0, pt(0.0), pt(pi / 2)), straight_segment(1, pt(-pi / 2), pt(pi / 2)),
                               straight_segment(0, pt(-pi / 2), pt(0.0))});
}

inline PiecewisePath torus_loop(std::shared_ptr<const Atlas> atlas) {
  auto pt = [](double u, double v) {
    Vector x(2);
    x << u, v;
    return x;
  };
  return PiecewisePath(atlas, {straight_segment(0, pt(0.0, 0.0), pt(pi / 2, 0.3)),
                               straight_segment(2, pt(-pi / 2, 0.3), pt(pi / 2, 0.6)),
                               straight_segment(0, pt(-pi / 2, 0.6), pt(0.0, 0.0))});
}

/// Homotopy through a short arc of the first overlap component of c0, c1.
inline Homotopy circle_homotopy(std::shared_ptr<const Atlas> atlas) {
  const PiecewisePath c(atlas, {straight_segment(0, Vector::Constant(1, pi / 2 - 0.2), Vector::Constant(1, pi / 2 + 0.2))});
  return overlap_homotopy(atlas, 0, 1, c);
}

/// Piecewise transition on the circle overlap: `pos` on the arc where the c0
/// coordinate is positive, `neg` on the other arc.
inline TransitionFn by_arc(std::function<FiberEndo(double)> pos, std::function<FiberEndo(double)> neg) {
  return [pos = std::move(pos), neg = std::move(neg)](const Vector& x) { return x(0) > 0.0 ? pos(x(0)) : neg(x(0)); };
}

/// sigma = log(2 / (1 + r^2)): conformal factor of the round metric in
/// stereographic coordinates.
inline Vector grad_sigma(const Vector& x) { return -2.0 * x / (1.0 + x.squaredNorm()); }

/// Levi-Civita form of the round sphere in the coordinate frame.
inline FiberEndo levi_civita(const Vector& x, const Vector& v) {
  const Vector g = grad_sigma(x);
  return v.dot(g) * FiberEndo::Identity(2, 2) + v * g.transpose() - g * v.transpose();
}

/// Derivative of w = 1/z (complex), i.e. multiplication by -1/z^2.
inline FiberEndo inversion_jacobian(const Vector& x) {
  const double u = x(0);
  const double v = x(1);
  const double r4 = std::pow(u * u + v * v, 2);
  const double a = (v * v - u * u) / r4;
  const double b = 2.0 * u * v / r4;
  FiberEndo m(2, 2);
  m << a, -b, b, a;
  return m;
}

}  // namespace detail

/// so(3) over S^1: transitions exp(ad((k1 - k0) e3)) from chart gauges
/// k0(u) = 0.4 sin u, k1(v) = 0.25 v^2, and the gauge transforms of the
/// global form X ad(a(theta)).
inline Scenario so3_circle(const ScenarioOptions& opt = {}, bool lie = true) {
  using namespace detail;
  auto atlas = atlases::circle(opt.res);
  const LieAlgebra g = catalog::so3();
  auto kappa = [](std::size_t chart, double x) { return chart == 0 ? 0.4 * std::sin(x) : 0.25 * x * x; };
  auto dkappa = [](std::size_t chart, double x) { return chart == 0 ? 0.4 * std::cos(x) : 0.5 * x; };
  const Atlas* at = atlas.get();
  TransitionFn phi = [at, kappa](const Vector& x) {
    const double v = at->change_coords(0, 1, x)(0);
    return rot3(kappa(1, v) - kappa(0, x(0)));
  };
  auto bundle = std::make_shared<const LieAlgebraBundle>(g, atlas, std::vector<TransitionSpec>{{0, 1, phi}}, opt.tol);
  std::vector<FormFn> forms;
  for (std::size_t k = 0; k < 2; ++k) {
    const double center = k == 0 ? 0.0 : pi;
    forms.push_back([g, k, center, kappa, dkappa, lie](const Vector& x, const Vector& v) {
      const double th = center + x(0);
      const Vector a = vec3(0.3 * std::cos(th), 0.2 * std::sin(2.0 * th), 0.5);
      const Vector u = rot3(kappa(k, x(0))) * a - dkappa(k, x(0)) * vec3(0, 0, 1);
      FiberEndo w = v(0) * ad(g, u);
      if (!lie) w += v(0) * 0.5 * FiberEndo::Identity(3, 3);
      return w;
    });
  }
  Scenario s;
  s.name = lie ? "so3-circle" : "so3-circle-nonlie";
  s.description = lie ? "so(3) over the circle, x-dependent inner transitions, Lie connection"
                      : "so3-circle with a non-derivation term added to the connection (negative control)";
  s.bundle = bundle;
  s.connection = LieConnection(bundle, std::move(forms));
  s.expected = Verdict::exists;
  s.loop = circle_loop(atlas);
  s.homotopy = circle_homotopy(atlas);
  return s;
}

/// sl(2) over S^1 with the outer automorphism diag(1,-1,-1) on one overlap arc.
inline Scenario sl2_circle(const ScenarioOptions& opt = {}) {
  using namespace detail;
  auto atlas = atlases::circle(opt.res);
  FiberEndo flip = FiberEndo::Identity(3, 3);
  flip(1, 1) = -1.0;
  flip(2, 2) = -1.0;
  TransitionFn phi = by_arc([flip](double) { return flip; }, [](double) { return FiberEndo::Identity(3, 3); });
  auto bundle = std::make_shared<const LieAlgebraBundle>(catalog::sl2(), atlas,
                                                         std::vector<TransitionSpec>{{0, 1, phi}}, opt.tol);
  Scenario s;
  s.name = "sl2-circle";
  s.description = "sl(2) over the circle, constant outer transition on one arc";
  s.bundle = bundle;
  s.connection = LieConnection(bundle, {zero_form(3), zero_form(3)});
  s.expected = Verdict::exists;
  s.loop = circle_loop(atlas);
  s.homotopy = circle_homotopy(atlas);
  return s;
}

/// Heisenberg algebra over S^1 with transitions exp(f ad e1) (inner) or
/// exp(f D) with the outer derivation D = diag(1,0,1).
inline Scenario heis_circle(const ScenarioOptions& opt = {}, bool outer = false) {
  using namespace detail;
  auto atlas = atlases::circle(opt.res);
  const LieAlgebra g = catalog::heisenberg3();
  FiberEndo gen = outer ? FiberEndo(Vector(vec3(1.0, 0.0, 1.0)).asDiagonal()) : ad(g, vec3(1, 0, 0));
  TransitionFn phi = by_arc([gen](double u) { return exp_derivation(std::sin(u) * gen); },
                            [](double) { return FiberEndo::Identity(3, 3); });
  auto bundle = std::make_shared<const LieAlgebraBundle>(g, atlas, std::vector<TransitionSpec>{{0, 1, phi}}, opt.tol);
  Scenario s;
  s.name = outer ? "heis-circle-outer" : "heis-circle";
  s.description = outer ? "Heisenberg algebra over the circle, transition generated by an outer derivation"
                        : "Heisenberg algebra over the circle, inner x-dependent transition";
  s.bundle = bundle;
  s.expected = outer ? Verdict::fails : Verdict::exists;
  s.loop = circle_loop(atlas);
  s.homotopy = circle_homotopy(atlas);
  return s;
}

/// Abelian R^2 over the torus with constant transitions g_b g_a^-1.
inline Scenario abelian_torus_flat(const ScenarioOptions& opt = {}) {
  using namespace detail;
  auto atlas = atlases::torus(opt.res);
  std::vector<FiberEndo> gauge(4);
  gauge[0] = FiberEndo::Identity(2, 2);
  gauge[1] = (FiberEndo(2, 2) << 0, -1, 1, 0).finished();
  gauge[2] = (FiberEndo(2, 2) << 2, 0, 0, 1).finished();
  gauge[3] = (FiberEndo(2, 2) << 1, 1, 0, 1).finished();
  std::vector<TransitionSpec> ts;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      const FiberEndo m = gauge[b] * gauge[a].inverse();
      ts.push_back({a, b, [m](const Vector&) { return m; }});
    }
  }
  auto bundle = std::make_shared<const LieAlgebraBundle>(catalog::abelian(2), atlas, std::move(ts), opt.tol);
  Scenario s;
  s.name = "abelian-torus-flat";
  s.description = "abelian R^2 over the torus, constant transitions";
  s.bundle = bundle;
  s.expected = Verdict::exists;
  s.loop = torus_loop(atlas);
  const PiecewisePath c(atlas, {straight_segment(0, (Vector(2) << 1.2, 1.2).finished(),
                                                  (Vector(2) << 1.8, 1.6).finished())});
  s.homotopy = overlap_homotopy(atlas, 0, 3, c);
  return s;
}

/// The tangent bundle of S^2 as an abelian rank-2 bundle, with the
/// Levi-Civita connection of the round metric.
inline Scenario ts2(const ScenarioOptions& opt = {}) {
  using namespace detail;
  auto atlas = atlases::sphere2(opt.res);
  auto bundle = std::make_shared<const LieAlgebraBundle>(
      catalog::abelian(2), atlas, std::vector<TransitionSpec>{{0, 1, inversion_jacobian}}, opt.tol);
  Scenario s;
  s.name = "ts2";
  s.description = "tangent bundle of the 2-sphere, abelian fiber, Levi-Civita connection";
  s.bundle = bundle;
  s.connection = LieConnection(bundle, {levi_civita, levi_civita});
  s.expected = Verdict::fails;
  s.loop = sector_loop(atlas, 0, 1.0, pi / 2);
  s.homotopy = sector_loop_family(atlas, 0, 0.75, 1.0, pi / 2);
  return s;
}

/// so(3) over S^2: the orthonormal frame bundle's rotation acting on e1, e2
/// and fixing e3. Curvature is -lambda^2 ad e3, hence inner.
inline Scenario so3_sphere(const ScenarioOptions& opt = {}) {
  using namespace detail;
  auto atlas = atlases::sphere2(opt.res);
  const LieAlgebra g = catalog::so3();
  TransitionFn phi = [](const Vector& x) {
    FiberEndo m = FiberEndo::Identity(3, 3);
    const FiberEndo j = inversion_jacobian(x);
    m.topLeftCorner(2, 2) = j / std::sqrt(j.determinant());
    return m;
  };
  FormFn form = [](const Vector& x, const Vector& v) {
    const Vector gs = grad_sigma(x);
    FiberEndo m = FiberEndo::Zero(3, 3);
    m.topLeftCorner(2, 2) = v * gs.transpose() - gs * v.transpose();
    return m;
  };
  auto bundle = std::make_shared<const LieAlgebraBundle>(g, atlas, std::vector<TransitionSpec>{{0, 1, phi}}, opt.tol);
  Scenario s;
  s.name = "so3-sphere";
  s.description = "so(3) over the 2-sphere, rotations of the tangent frame, curvature in ad g";
  s.bundle = bundle;
  s.connection = LieConnection(bundle, {form, form});
  s.expected = Verdict::exists;
  s.loop = sector_loop(atlas, 0, 1.0, pi / 2);
  s.homotopy = sector_loop_family(atlas, 0, 0.75, 1.0, pi / 2);
  return s;
}

/// Single-chart so(3) bundle over a 2-box with a non-flat Lie connection.
inline Scenario trivial_box(const ScenarioOptions& opt = {}) {
  using namespace detail;
  auto atlas = atlases::box(2, 2.0, opt.res);
  const LieAlgebra g = catalog::so3();
  auto bundle = std::make_shared<const LieAlgebraBundle>(g, atlas, std::vector<TransitionSpec>{}, opt.tol);
  FormFn form = [g](const Vector& x, const Vector& v) {
    return FiberEndo(v(0) * ad(g, vec3(0.0, x(1), 0.3)) + v(1) * ad(g, vec3(x(0) * x(0), 0.0, 0.2)));
  };
  Scenario s;
  s.name = "so3-box";
  s.description = "so(3) over a square, one chart, curved Lie connection";
  s.bundle = bundle;
  s.connection = LieConnection(bundle, {form});
  s.expected = Verdict::exists;
  s.loop = sector_loop(atlas, 0, 1.0, pi / 2);
  s.homotopy = sector_loop_family(atlas, 0, 0.5, 1.0, 2.0 * pi);
  return s;
}

inline std::vector<std::string> names() {
  return {"so3-circle", "so3-circle-nonlie", "sl2-circle", "heis-circle", "heis-circle-outer",
          "abelian-torus-flat", "ts2", "so3-sphere", "so3-box"};
}

inline std::optional<Scenario> find(const std::string& name, const ScenarioOptions& opt = {}) {
  if (name == "so3-circle") return so3_circle(opt);
  if (name == "so3-circle-nonlie") return so3_circle(opt, false);
  if (name == "sl2-circle") return sl2_circle(opt);
  if (name == "heis-circle") return heis_circle(opt, false);
  if (name == "heis-circle-outer") return heis_circle(opt, true);
  if (name == "abelian-torus-flat") return abelian_torus_flat(opt);
  if (name == "ts2") return ts2(opt);
  if (name == "so3-sphere") return so3_sphere(opt);
  if (name == "so3-box") return trivial_box(opt);
  return std::nullopt;
}

}  // namespace scenarios
}  // namespace liecouple
