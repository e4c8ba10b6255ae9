#pragma once

// Base manifolds represented by chart atlases. Points live in a model space
// chosen per manifold (unit vectors for circle and sphere, angle pairs as
// (cos, sin, cos, sin) for the torus, plain coordinates for boxes); every
// other computation happens in chart coordinates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "liecouple/error.hpp"
#include "liecouple/expression.hpp"
#include "liecouple/linalg.hpp"
#include "liecouple/tolerances.hpp"

namespace liecouple {

using Point = Eigen::VectorXd;

/// Shape of a chart's coordinate image: open ball or open cube of `radius`.
enum class ChartShape { ball, cube };

struct Chart {
  std::string id;
  int dim = 0;
  ChartShape shape = ChartShape::ball;
  double radius = 1.0;       // coordinate image is the open ball/cube of this radius
  double core_radius = 1.0;  // partition bump equals 1 inside this radius
  std::function<Point(const Vector&)> to_point;
  std::function<std::optional<Vector>(const Point&)> to_coord;

  double coord_norm(const Vector& x) const {
    return shape == ChartShape::ball ? x.norm() : x.lpNorm<Eigen::Infinity>();
  }

  bool contains_coords(const Vector& x, double margin = 0.0) const {
    return x.size() == dim && coord_norm(x) < radius - margin;
  }

  /// Coordinates of p if p lies in the chart domain. Points off the manifold
  /// fail the round trip through to_point.
  std::optional<Vector> coords_of(const Point& p, double margin = 0.0) const {
    auto c = to_coord(p);
    if (!c || !contains_coords(*c, margin)) return std::nullopt;
    if ((to_point(*c) - p).norm() > 1e-8 * std::max(1.0, p.norm())) return std::nullopt;
    return c;
  }

  bool contains(const Point& p) const { return coords_of(p).has_value(); }

  Point center() const { return to_point(Vector::Zero(dim)); }
};

struct OverlapSample {
  Vector coords;  // in the first chart of the pair
  Point point;
};

namespace detail {

inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Deterministic (Halton) or seeded random points in the cube [-1,1]^dim.
class CubeSequence {
 public:
  CubeSequence(int dim, std::optional<std::uint64_t> seed, std::uint64_t stream)
      : dim_(dim), seed_(seed) {
    if (seed_) rng_.seed(*seed_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  Vector next() {
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13};
    Vector v(dim_);
    ++index_;
    for (int d = 0; d < dim_; ++d) {
      const double u = seed_ ? std::uniform_real_distribution<double>(0.0, 1.0)(rng_)
                             : radical_inverse(index_, primes[d % 6]);
      v(d) = 2.0 * u - 1.0;
    }
    return v;
  }

 private:
  int dim_;
  std::optional<std::uint64_t> seed_;
  std::mt19937_64 rng_;
  std::uint64_t index_ = 0;
};

}  // namespace detail

class Atlas {
 public:
  Atlas(std::string name, int ambient_dim, std::vector<Chart> charts, Resolution res = {})
      : name_(std::move(name)), ambient_dim_(ambient_dim), charts_(std::move(charts)), res_(res) {
    if (charts_.empty()) throw Error(ErrorKind::config, "atlas '" + name_ + "' has no charts");
    dim_ = charts_.front().dim;
    for (const auto& c : charts_) {
      if (c.dim != dim_) throw Error(ErrorKind::config, "atlas '" + name_ + "': charts of different dimension");
      if (c.dim < 1 || c.dim > 4) throw Error(ErrorKind::config, "atlas '" + name_ + "': dimension must be 1..4");
    }
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }
  std::size_t size() const { return charts_.size(); }
  const std::vector<Chart>& charts() const { return charts_; }
  const Chart& chart(std::size_t i) const { return charts_.at(i); }
  const Resolution& resolution() const { return res_; }

  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < charts_.size(); ++i) {
      if (charts_[i].id == id) return i;
    }
    throw Error(ErrorKind::config, "atlas '" + name_ + "' has no chart '" + id + "'");
  }

  std::optional<std::size_t> find_chart(const Point& p) const {
    for (std::size_t i = 0; i < charts_.size(); ++i) {
      if (charts_[i].contains(p)) return i;
    }
    return std::nullopt;
  }

  Vector change_coords(std::size_t from, std::size_t to, const Vector& x) const {
    if (from == to) return x;
    auto y = chart(to).coords_of(chart(from).to_point(x));
    if (!y) {
      throw Error(ErrorKind::domain, "point of chart '" + chart(from).id + "' is outside chart '" +
                                         chart(to).id + "'");
    }
    return *y;
  }

  /// d(x_to)/d(x_from) by central differences.
  Matrix coord_jacobian(std::size_t from, std::size_t to, const Vector& x) const {
    const int n = dim_;
    if (from == to) return Matrix::Identity(n, n);
    const double h = 1e-6 * std::max(1.0, chart(from).radius);
    Matrix j(n, n);
    for (int i = 0; i < n; ++i) {
      const Vector e = Vector::Unit(n, i) * h;
      j.col(i) = (change_coords(from, to, x + e) - change_coords(from, to, x - e)) / (2.0 * h);
    }
    return j;
  }

  /// Sample coordinates inside chart alpha (within 90% of its radius).
  std::vector<Vector> chart_samples(std::size_t alpha) const {
    const Chart& c = chart(alpha);
    detail::CubeSequence seq(dim_, res_.seed, alpha);
    std::vector<Vector> out;
    const double r = 0.9 * c.radius;
    for (int guard = 0; static_cast<int>(out.size()) < res_.chart_samples && guard < 100000; ++guard) {
      Vector x = r * seq.next();
      if (c.shape == ChartShape::ball && x.norm() >= r) continue;
      out.push_back(std::move(x));
    }
    return out;
  }

  /// Registered base points: the union of all chart samples.
  std::vector<Point> sample_points() const {
    std::vector<Point> out;
    for (std::size_t a = 0; a < charts_.size(); ++a) {
      for (const auto& x : chart_samples(a)) out.push_back(chart(a).to_point(x));
    }
    return out;
  }

  /// Points of U_alpha and U_beta, kept 5% of the radius away from both chart
  /// boundaries so that finite-difference stencils stay inside.
  std::vector<OverlapSample> overlap_samples(std::size_t alpha, std::size_t beta) const {
    std::vector<OverlapSample> out;
    if (alpha == beta) return out;
    const Chart& a = chart(alpha);
    const Chart& b = chart(beta);
    detail::CubeSequence seq(dim_, res_.seed, 1000 + alpha * 97 + beta);
    const double r = 0.95 * a.radius;
    for (int guard = 0; static_cast<int>(out.size()) < res_.overlap_samples && guard < 200000; ++guard) {
      Vector x = r * seq.next();
      if (!a.contains_coords(x, 0.05 * a.radius)) continue;
      Point p = a.to_point(x);
      if (!b.coords_of(p, 0.05 * b.radius)) continue;
      out.push_back({std::move(x), std::move(p)});
    }
    return out;
  }

  bool overlaps(std::size_t alpha, std::size_t beta) const {
    return alpha != beta && !overlap_samples(alpha, beta).empty();
  }

 private:
  std::string name_;
  int dim_ = 0;
  int ambient_dim_ = 0;
  std::vector<Chart> charts_;
  Resolution res_;
};

struct AtlasReport {
  double max_roundtrip = 0.0;     // |to_coord(to_point(x)) - x| over chart samples
  double max_overlap_miss = 0.0;  // 1 if some overlap sample fails a domain test
  bool centers_inside = true;
  bool covered = true;            // every registered point lies in some chart
  bool accepted = false;
};

inline AtlasReport validate_atlas(const Atlas& atlas, double tol = Tolerances{}.geo) {
  AtlasReport r;
  for (std::size_t a = 0; a < atlas.size(); ++a) {
    const Chart& c = atlas.chart(a);
    if (!c.contains(c.center())) r.centers_inside = false;
    for (const auto& x : atlas.chart_samples(a)) {
      auto back = c.to_coord(c.to_point(x));
      const double err = back ? (*back - x).norm() : std::numeric_limits<double>::infinity();
      r.max_roundtrip = std::max(r.max_roundtrip, err);
    }
    for (std::size_t b = 0; b < atlas.size(); ++b) {
      for (const auto& s : atlas.overlap_samples(a, b)) {
        if (!atlas.chart(a).contains(s.point) || !atlas.chart(b).contains(s.point)) r.max_overlap_miss = 1.0;
      }
    }
  }
  for (const auto& p : atlas.sample_points()) {
    if (!atlas.find_chart(p)) r.covered = false;
  }
  r.accepted = r.max_roundtrip <= tol && r.max_overlap_miss == 0.0 && r.centers_inside && r.covered;
  return r;
}

// ---------------------------------------------------------------------------
// Builtin atlases

namespace atlases {

inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a + pi, 2.0 * pi);
  if (a < 0.0) a += 2.0 * pi;
  return a - pi;
}

/// Angular chart on S^1 centred at angle `center`, coordinate range |u| < 3pi/4.
inline Chart circle_chart(std::string id, double center) {
  constexpr double pi = std::numbers::pi;
  Chart c;
  c.id = std::move(id);
  c.dim = 1;
  c.shape = ChartShape::ball;
  c.radius = 0.75 * pi;
  c.core_radius = 0.5 * pi;
  c.to_point = [center](const Vector& x) {
    Point p(2);
    p << std::cos(center + x(0)), std::sin(center + x(0));
    return p;
  };
  c.to_coord = [center](const Point& p) -> std::optional<Vector> {
    if (p.size() != 2 || p.norm() < 1e-12) return std::nullopt;
    Vector x(1);
    x(0) = wrap_angle(std::atan2(p(1), p(0)) - center);
    return x;
  };
  return c;
}

/// Two angular charts centred at 0 and pi. Their overlap is two arcs.
inline std::shared_ptr<const Atlas> circle(Resolution res = {}) {
  return std::make_shared<const Atlas>(
      "circle", 2,
      std::vector<Chart>{circle_chart("c0", 0.0), circle_chart("c1", std::numbers::pi)}, res);
}

/// Stereographic charts on the unit sphere. "north" is centred at (0,0,1),
/// "south" at (0,0,-1); as complex coordinates z_south = 1/z_north, so the
/// atlas is oriented. Coordinate radius 2.5; the equator is |z| = 1.
inline std::shared_ptr<const Atlas> sphere2(Resolution res = {}) {
  auto make = [](std::string id, double sign) {
    Chart c;
    c.id = std::move(id);
    c.dim = 2;
    c.shape = ChartShape::ball;
    c.radius = 2.5;
    c.core_radius = 1.0;
    c.to_point = [sign](const Vector& x) {
      const double r2 = x.squaredNorm();
      Point p(3);
      p << 2.0 * x(0) / (1.0 + r2), sign * 2.0 * x(1) / (1.0 + r2), sign * (1.0 - r2) / (1.0 + r2);
      return p;
    };
    c.to_coord = [sign](const Point& p) -> std::optional<Vector> {
      if (p.size() != 3) return std::nullopt;
      const double den = 1.0 + sign * p(2);
      if (den < 1e-12) return std::nullopt;
      Vector x(2);
      x << p(0) / den, sign * p(1) / den;
      return x;
    };
    return c;
  };
  return std::make_shared<const Atlas>("sphere2", 3,
                                       std::vector<Chart>{make("north", 1.0), make("south", -1.0)}, res);
}

/// Product of two circle atlases; four cube-shaped charts c00, c01, c10, c11.
inline std::shared_ptr<const Atlas> torus(Resolution res = {}) {
  constexpr double pi = std::numbers::pi;
  std::vector<Chart> charts;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double ca = a * pi;
      const double cb = b * pi;
      Chart c;
      c.id = "c" + std::to_string(a) + std::to_string(b);
      c.dim = 2;
      c.shape = ChartShape::cube;
      c.radius = 0.75 * pi;
      c.core_radius = 0.5 * pi;
      c.to_point = [ca, cb](const Vector& x) {
        Point p(4);
        p << std::cos(ca + x(0)), std::sin(ca + x(0)), std::cos(cb + x(1)), std::sin(cb + x(1));
        return p;
      };
      c.to_coord = [ca, cb](const Point& p) -> std::optional<Vector> {
        if (p.size() != 4) return std::nullopt;
        Vector x(2);
        x << wrap_angle(std::atan2(p(1), p(0)) - ca), wrap_angle(std::atan2(p(3), p(2)) - cb);
        return x;
      };
      charts.push_back(std::move(c));
    }
  }
  return std::make_shared<const Atlas>("torus", 4, std::move(charts), res);
}

/// The open cube (-radius, radius)^n with the identity chart.
inline std::shared_ptr<const Atlas> box(int n, double radius = 2.0, Resolution res = {}) {
  Chart c;
  c.id = "box";
  c.dim = n;
  c.shape = ChartShape::cube;
  c.radius = radius;
  c.core_radius = radius;
  c.to_point = [](const Vector& x) { return Point(x); };
  c.to_coord = [n](const Point& p) -> std::optional<Vector> {
    if (p.size() != n) return std::nullopt;
    return Vector(p);
  };
  return std::make_shared<const Atlas>("box" + std::to_string(n), n, std::vector<Chart>{c}, res);
}

/// Chart given by expression strings: `to_point` has one expression per
/// ambient coordinate in variables x1..x<dim>, `to_coord` one per chart
/// coordinate in variables x1..x<ambient>.
inline Chart expression_chart(std::string id, int dim, int ambient, const std::vector<Expression>& to_point,
                              const std::vector<Expression>& to_coord, double radius, double core_radius,
                              ChartShape shape) {
  if (static_cast<int>(to_point.size()) != ambient || static_cast<int>(to_coord.size()) != dim) {
    throw Error(ErrorKind::config, "chart '" + id + "': expression counts do not match dimensions");
  }
  for (const auto& e : to_point) {
    if (e.max_variable() > dim) throw Error(ErrorKind::config, "chart '" + id + "': to_point uses x" + std::to_string(e.max_variable()));
  }
  for (const auto& e : to_coord) {
    if (e.max_variable() > ambient) throw Error(ErrorKind::config, "chart '" + id + "': to_coord uses x" + std::to_string(e.max_variable()));
  }
  Chart c;
  c.id = std::move(id);
  c.dim = dim;
  c.shape = shape;
  c.radius = radius;
  c.core_radius = core_radius;
  c.to_point = [to_point](const Vector& x) {
    Point p(static_cast<Eigen::Index>(to_point.size()));
    for (std::size_t i = 0; i < to_point.size(); ++i) {
      p(static_cast<Eigen::Index>(i)) = evaluate(to_point[i], std::span<const double>(x.data(), x.size()));
    }
    return p;
  };
  c.to_coord = [to_coord, ambient](const Point& p) -> std::optional<Vector> {
    if (p.size() != ambient) return std::nullopt;
    Vector x(static_cast<Eigen::Index>(to_coord.size()));
    try {
      for (std::size_t i = 0; i < to_coord.size(); ++i) {
        x(static_cast<Eigen::Index>(i)) = evaluate(to_coord[i], std::span<const double>(p.data(), p.size()));
      }
    } catch (const Error&) {
      return std::nullopt;
    }
    return x;
  };
  return c;
}

}  // namespace atlases

// ---------------------------------------------------------------------------
// Paths

/// Position and velocity of a segment in its chart's coordinates. The velocity
/// is the derivative with respect to the segment's own parameter in [0, 1].
struct CoordSample {
  Vector coords;
  Vector velocity;
};

using CurveFn = std::function<CoordSample(double)>;

/// A smooth piece of a path, described in the coordinates of one chart.
struct PathSegment {
  std::size_t chart = 0;
  CurveFn curve;
  bool reversed = false;

  CoordSample eval(double tau) const {
    if (!reversed) return curve(tau);
    CoordSample s = curve(1.0 - tau);
    s.velocity = -s.velocity;
    return s;
  }
};

inline PathSegment straight_segment(std::size_t chart, const Vector& from, const Vector& to) {
  return {chart, [from, to](double t) { return CoordSample{from + t * (to - from), to - from}; }};
}

/// Arc of the coordinate circle |x| = radius from angle a0 to a1 (2-D charts).
inline PathSegment arc_segment(std::size_t chart, double radius, double a0, double a1) {
  return {chart, [radius, a0, a1](double t) {
            const double a = a0 + t * (a1 - a0);
            Vector x(2), v(2);
            x << radius * std::cos(a), radius * std::sin(a);
            v << -radius * std::sin(a) * (a1 - a0), radius * std::cos(a) * (a1 - a0);
            return CoordSample{x, v};
          }};
}

/// Segment through sampled coordinates at uniform parameters j/(N-1). Node
/// velocities are central differences with step equal to the grid spacing
/// (second-order one-sided at the ends); positions between nodes are cubic
/// Hermite interpolants.
inline PathSegment sampled_segment(std::size_t chart, std::vector<Vector> nodes) {
  if (nodes.size() < 3) throw Error(ErrorKind::config, "sampled segment needs at least 3 nodes");
  const std::size_t m = nodes.size();
  const double dt = 1.0 / static_cast<double>(m - 1);
  std::vector<Vector> vel(m);
  vel[0] = (-3.0 * nodes[0] + 4.0 * nodes[1] - nodes[2]) / (2.0 * dt);
  vel[m - 1] = (3.0 * nodes[m - 1] - 4.0 * nodes[m - 2] + nodes[m - 3]) / (2.0 * dt);
  for (std::size_t j = 1; j + 1 < m; ++j) vel[j] = (nodes[j + 1] - nodes[j - 1]) / (2.0 * dt);
  return {chart, [nodes = std::move(nodes), vel = std::move(vel), dt, m](double t) {
            const double u = std::clamp(t, 0.0, 1.0) / dt;
            std::size_t j = std::min(static_cast<std::size_t>(u), m - 2);
            const double s = u - static_cast<double>(j);
            const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
            const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
            const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
            const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
            CoordSample out;
            out.coords = h00 * nodes[j] + h10 * dt * vel[j] + h01 * nodes[j + 1] + h11 * dt * vel[j + 1];
            out.velocity = (d00 * nodes[j] + d10 * dt * vel[j] + d01 * nodes[j + 1] + d11 * dt * vel[j + 1]) / dt;
            return out;
          }};
}

class PiecewisePath {
 public:
  PiecewisePath() = default;

  /// `breaks` are the global parameters of the segment boundaries, from 0 to
  /// 1; empty means equal shares.
  PiecewisePath(std::shared_ptr<const Atlas> atlas, std::vector<PathSegment> segments,
                std::vector<double> breaks = {})
      : atlas_(std::move(atlas)), segments_(std::move(segments)), breaks_(std::move(breaks)) {
    if (!atlas_) throw Error(ErrorKind::config, "path without atlas");
    if (segments_.empty()) throw Error(ErrorKind::config, "path needs at least one segment");
    for (const auto& s : segments_) {
      if (s.chart >= atlas_->size()) throw Error(ErrorKind::config, "path segment refers to unknown chart");
    }
    if (breaks_.empty()) {
      const double k = static_cast<double>(segments_.size());
      for (std::size_t i = 0; i <= segments_.size(); ++i) breaks_.push_back(static_cast<double>(i) / k);
    }
    if (breaks_.size() != segments_.size() + 1) throw Error(ErrorKind::config, "path breaks do not match segments");
  }

  const Atlas& atlas() const { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const { return atlas_; }
  const std::vector<PathSegment>& segments() const { return segments_; }
  const std::vector<double>& breaks() const { return breaks_; }
  std::size_t size() const { return segments_.size(); }

  Point segment_point(std::size_t k, double tau) const {
    const auto& seg = segments_.at(k);
    return atlas_->chart(seg.chart).to_point(seg.eval(tau).coords);
  }

  Point start() const { return segment_point(0, 0.0); }
  Point end() const { return segment_point(segments_.size() - 1, 1.0); }

  /// Segment index and local parameter for global parameter t.
  std::pair<std::size_t, double> locate(double t) const {
    t = std::clamp(t, 0.0, 1.0);
    std::size_t k = 0;
    while (k + 1 < segments_.size() && t >= breaks_[k + 1]) ++k;
    const double span = breaks_[k + 1] - breaks_[k];
    return {k, span > 0.0 ? (t - breaks_[k]) / span : 0.0};
  }

  Point point(double t) const {
    const auto [k, tau] = locate(t);
    return segment_point(k, tau);
  }

  /// Points at tau = j/per_segment, j = 0..per_segment, for every segment.
  std::vector<Point> samples(int per_segment) const {
    std::vector<Point> out;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      for (int j = 0; j <= per_segment; ++j) out.push_back(segment_point(k, static_cast<double>(j) / per_segment));
    }
    return out;
  }

 private:
  std::shared_ptr<const Atlas> atlas_;
  std::vector<PathSegment> segments_;
  std::vector<double> breaks_;
};

struct PathReport {
  double max_gap = 0.0;                // distance between consecutive segment endpoints
  double max_velocity_mismatch = 0.0;  // |velocity - central difference| over the sample grid
};

inline PathReport validate_path(const PiecewisePath& path, int per_segment = 512) {
  PathReport r;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    r.max_gap = std::max(r.max_gap, (path.segment_point(k, 1.0) - path.segment_point(k + 1, 0.0)).norm());
  }
  const double dt = 1.0 / per_segment;
  for (const auto& seg : path.segments()) {
    for (int j = 1; j < per_segment; ++j) {
      const double t = j * dt;
      const Vector fd = (seg.eval(t + dt).coords - seg.eval(t - dt).coords) / (2.0 * dt);
      r.max_velocity_mismatch = std::max(r.max_velocity_mismatch, (fd - seg.eval(t).velocity).norm());
    }
  }
  return r;
}

/// gamma(t) = f^-1(t f(x)): from the chart centre to x.
inline PiecewisePath radial_path_coords(std::shared_ptr<const Atlas> atlas, std::size_t chart, const Vector& x) {
  if (!atlas->chart(chart).contains_coords(x)) {
    throw Error(ErrorKind::domain, "radial path target outside chart '" + atlas->chart(chart).id + "'");
  }
  return PiecewisePath(std::move(atlas), {straight_segment(chart, Vector::Zero(x.size()), x)});
}

inline PiecewisePath radial_path(std::shared_ptr<const Atlas> atlas, std::size_t chart, const Point& x) {
  auto c = atlas->chart(chart).coords_of(x);
  if (!c) throw Error(ErrorKind::domain, "point outside chart '" + atlas->chart(chart).id + "'");
  return radial_path_coords(std::move(atlas), chart, *c);
}

/// gamma^-1(t) = gamma(1 - t).
inline PiecewisePath invert_path(const PiecewisePath& path) {
  std::vector<PathSegment> segs(path.segments().rbegin(), path.segments().rend());
  for (auto& s : segs) s.reversed = !s.reversed;
  std::vector<double> breaks;
  for (auto it = path.breaks().rbegin(); it != path.breaks().rend(); ++it) breaks.push_back(1.0 - *it);
  return PiecewisePath(path.atlas_ptr(), std::move(segs), std::move(breaks));
}

/// second * first: runs `first` on [0, 1/2] and `second` on [1/2, 1].
inline PiecewisePath compose_paths(const PiecewisePath& first, const PiecewisePath& second,
                                   double tol = Tolerances{}.geo) {
  const double gap = (first.end() - second.start()).norm();
  if (gap > tol * std::max(1.0, first.end().norm())) {
    throw Error(ErrorKind::domain, "compose_paths: endpoints differ by " + std::to_string(gap));
  }
  std::vector<PathSegment> segs = first.segments();
  segs.insert(segs.end(), second.segments().begin(), second.segments().end());
  std::vector<double> breaks;
  for (double b : first.breaks()) breaks.push_back(0.5 * b);
  for (std::size_t i = 1; i < second.breaks().size(); ++i) breaks.push_back(0.5 + 0.5 * second.breaks()[i]);
  return PiecewisePath(first.atlas_ptr(), std::move(segs), std::move(breaks));
}

/// Replaces each segment parameter tau by phi(tau), phi a strictly increasing
/// map of [0,1] onto itself with derivative dphi.
inline PiecewisePath reparameterize(const PiecewisePath& path, std::function<double(double)> phi,
                                    std::function<double(double)> dphi) {
  std::vector<PathSegment> segs;
  for (const auto& s : path.segments()) {
    segs.push_back({s.chart, [s, phi, dphi](double t) {
                      CoordSample c = s.eval(phi(t));
                      c.velocity *= dphi(t);
                      return c;
                    }});
  }
  return PiecewisePath(path.atlas_ptr(), std::move(segs), path.breaks());
}

/// Re-expresses segment k in the coordinates of another chart. Velocities come
/// from the chart-change Jacobian.
inline PathSegment rechart_segment(const Atlas& atlas, const PathSegment& seg, std::size_t to) {
  const Atlas* a = &atlas;
  return {to, [a, seg, to](double t) {
            const CoordSample c = seg.eval(t);
            return CoordSample{a->change_coords(seg.chart, to, c.coords),
                               a->coord_jacobian(seg.chart, to, c.coords) * c.velocity};
          }};
}

// ---------------------------------------------------------------------------
// Homotopies

/// Family s -> h_s of piecewise smooth paths with identical segment/chart
/// structure for every s in [s_min, s_max].
struct Homotopy {
  double s_min = 0.0;
  double s_max = 1.0;
  std::function<PiecewisePath(double)> family;

  PiecewisePath path(double s) const { return family(s); }
  Point at(double s, double t) const { return family(s).point(t); }

  /// d/ds of segment k's coordinates at local parameter tau (central difference).
  Vector s_derivative(double s, std::size_t k, double tau, double ds = 1e-5) const {
    const PiecewisePath up = family(s + ds);
    const PiecewisePath down = family(s - ds);
    return (up.segments().at(k).eval(tau).coords - down.segments().at(k).eval(tau).coords) / (2.0 * ds);
  }
};

/// Two-piece homotopy through c(s): chart alpha's radial path out to c(s),
/// then chart beta's radial path back to beta's centre. s runs over c's
/// parameter interval [0, 1].
inline Homotopy overlap_homotopy(std::shared_ptr<const Atlas> atlas, std::size_t alpha, std::size_t beta,
                                 const PiecewisePath& c, int checks = 64) {
  for (int i = 0; i <= checks; ++i) {
    const Point p = c.point(static_cast<double>(i) / checks);
    if (!atlas->chart(alpha).contains(p) || !atlas->chart(beta).contains(p)) {
      throw Error(ErrorKind::domain, "overlap_homotopy: curve leaves the overlap of '" +
                                         atlas->chart(alpha).id + "' and '" + atlas->chart(beta).id + "'");
    }
  }
  Homotopy h;
  h.s_min = 0.0;
  h.s_max = 1.0;
  h.family = [atlas, alpha, beta, c](double s) {
    const Point p = c.point(std::clamp(s, 0.0, 1.0));
    // The family is evaluated slightly outside [0,1] by s_derivative; extend
    // linearly in chart coordinates there.
    Vector xa = *atlas->chart(alpha).to_coord(p);
    Vector xb = *atlas->chart(beta).to_coord(p);
    if (s < 0.0 || s > 1.0) {
      const double edge = std::clamp(s, 0.0, 1.0);
      const double ds = 1e-6;
      const double inner = edge == 0.0 ? ds : 1.0 - ds;
      const Point q = c.point(inner);
      const Vector qa = *atlas->chart(alpha).to_coord(q);
      const Vector qb = *atlas->chart(beta).to_coord(q);
      const double factor = (s - edge) / (edge - inner);
      xa += factor * (xa - qa);
      xb += factor * (xb - qb);
    }
    return compose_paths(radial_path_coords(atlas, alpha, xa),
                         invert_path(radial_path_coords(atlas, beta, xb)), 1e-6);
  };
  return h;
}

/// Loop based at the chart centre: out along angle 0 to radius rho, along the
/// coordinate circle |x| = rho to angle `angle`, and back to the centre.
inline PiecewisePath sector_loop(std::shared_ptr<const Atlas> atlas, std::size_t chart, double rho, double angle) {
  Vector zero = Vector::Zero(2);
  Vector a(2), b(2);
  a << rho, 0.0;
  b << rho * std::cos(angle), rho * std::sin(angle);
  return PiecewisePath(std::move(atlas), {straight_segment(chart, zero, a), arc_segment(chart, rho, 0.0, angle),
                                          straight_segment(chart, b, zero)});
}

/// Sector loops with radius s in [rho_min, rho_max]; both ends stay at the
/// chart centre.
inline Homotopy sector_loop_family(std::shared_ptr<const Atlas> atlas, std::size_t chart, double rho_min,
                                   double rho_max, double angle) {
  if (atlas->dim() != 2) throw Error(ErrorKind::config, "sector loops need a 2-dimensional base");
  Homotopy h;
  h.s_min = rho_min;
  h.s_max = rho_max;
  h.family = [atlas, chart, angle](double s) { return sector_loop(atlas, chart, s, angle); };
  return h;
}

// ---------------------------------------------------------------------------
// Partition of unity

/// 6r^5 - 15r^4 + 10r^3 on [0,1], clamped outside.
inline double smoothstep5(double r) {
  r = std::clamp(r, 0.0, 1.0);
  return r * r * r * (r * (6.0 * r - 15.0) + 10.0);
}

inline double radial_bump(double r, double core, double radius) {
  if (r >= radius) return 0.0;
  if (r <= core) return 1.0;
  return 1.0 - smoothstep5((r - core) / (radius - core));
}

/// Unnormalized bump of chart c: radial profile for balls, product of 1-D
/// profiles for cubes. Vanishes outside the chart domain.
inline double chart_bump(const Chart& c, const Vector& x) {
  if (c.shape == ChartShape::ball) return radial_bump(x.norm(), c.core_radius, c.radius);
  double b = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) b *= radial_bump(std::abs(x(i)), c.core_radius, c.radius);
  return b;
}

class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(std::shared_ptr<const Atlas> atlas) : atlas_(std::move(atlas)) {}

  const Atlas& atlas() const { return *atlas_; }

  /// h_alpha(p) for every chart; throws if p is in no chart's support.
  std::vector<double> weights(const Point& p) const {
    std::vector<double> w(atlas_->size(), 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < atlas_->size(); ++a) {
      const Chart& c = atlas_->chart(a);
      if (auto x = c.coords_of(p)) {
        w[a] = chart_bump(c, *x);
        total += w[a];
      }
    }
    if (!(total > 0.0)) throw Error(ErrorKind::domain, "point not covered by the partition of unity");
    for (double& v : w) v /= total;
    return w;
  }

 private:
  std::shared_ptr<const Atlas> atlas_;
};

inline PartitionOfUnity build_partition(std::shared_ptr<const Atlas> atlas) {
  PartitionOfUnity pu(atlas);
  for (const auto& p : atlas->sample_points()) {
    try {
      (void)pu.weights(p);
    } catch (const Error&) {
      throw Error(ErrorKind::domain, "atlas '" + atlas->name() + "' does not cover a registered sample point");
    }
  }
  return pu;
}

}  // namespace liecouple
