#include <gtest/gtest.h>

#include <complex>
#include <cmath>
#include <numbers>

#include "liecouple/geometry.hpp"

using namespace liecouple;

namespace {

constexpr double pi = std::numbers::pi;

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

// R^2 with the identity chart and a chart shifted by (1,0).
std::shared_ptr<const Atlas> shifted_plane() {
  auto make = [](std::string id, double shift) {
    Chart c;
    c.id = std::move(id);
    c.dim = 2;
    c.radius = 2.0;
    c.core_radius = 1.0;
    c.to_point = [shift](const Vector& x) { return Point(x + v2(shift, 0.0)); };
    c.to_coord = [shift](const Point& p) -> std::optional<Vector> { return Vector(p - v2(shift, 0.0)); };
    return c;
  };
  return std::make_shared<const Atlas>("plane", 2, std::vector<Chart>{make("a", 0.0), make("b", 1.0)});
}

}  // namespace

TEST(Geometry, BuiltinAtlasesValidate) {
  for (const auto& atlas : {atlases::circle(), atlases::sphere2(), atlases::torus(), atlases::box(1),
                            atlases::box(2), atlases::box(4), shifted_plane()}) {
    const AtlasReport r = validate_atlas(*atlas);
    EXPECT_TRUE(r.accepted) << atlas->name();
    EXPECT_LE(r.max_roundtrip, 1e-12) << atlas->name();
  }
}

TEST(Geometry, AtlasRejectsBadCharts) {
  EXPECT_THROW(Atlas("empty", 1, {}), Error);
  std::vector<Chart> mixed{atlases::circle_chart("a", 0.0), atlases::box(2)->chart(0)};
  EXPECT_THROW(Atlas("mixed", 2, mixed), Error);
  EXPECT_THROW(atlases::circle()->index_of("nope"), Error);
}

TEST(Geometry, CircleChartChange) {
  const auto atlas = atlases::circle();
  for (double u : {1.0, 2.0, 1.5, -1.0, -2.0}) {
    const Vector x = (Vector(1) << u).finished();
    const Vector y = atlas->change_coords(0, 1, x);
    EXPECT_NEAR(y(0), atlases::wrap_angle(u - pi), 1e-14);
    EXPECT_NEAR(atlas->coord_jacobian(0, 1, x)(0, 0), 1.0, 1e-8);
    EXPECT_NEAR(atlas->change_coords(1, 0, y)(0), u, 1e-14);
  }
  EXPECT_THROW(atlas->change_coords(0, 1, (Vector(1) << 0.0).finished()), Error);
}

TEST(Geometry, SphereChartChangeIsInversion) {
  const auto atlas = atlases::sphere2();
  for (const Vector& x : {v2(0.8, 0.3), v2(-1.2, 0.5), v2(0.4, -1.5)}) {
    const Vector y = atlas->change_coords(0, 1, x);
    // z_south = 1 / z_north as complex numbers.
    const std::complex<double> z(x(0), x(1));
    const std::complex<double> w = 1.0 / z;
    EXPECT_NEAR(y(0), w.real(), 1e-14);
    EXPECT_NEAR(y(1), w.imag(), 1e-14);
    // Holomorphic change: the Jacobian is a rotation-scaling with positive determinant.
    const Matrix j = atlas->coord_jacobian(0, 1, x);
    const std::complex<double> dw = -1.0 / (z * z);
    EXPECT_NEAR(j(0, 0), dw.real(), 1e-7);
    EXPECT_NEAR(j(1, 0), dw.imag(), 1e-7);
    EXPECT_GT(j.determinant(), 0.0);
  }
}

TEST(Geometry, OverlapSamplesLieInBothCharts) {
  for (const auto& atlas : {atlases::circle(), atlases::sphere2(), atlases::torus()}) {
    for (std::size_t a = 0; a < atlas->size(); ++a) {
      for (std::size_t b = 0; b < atlas->size(); ++b) {
        for (const auto& s : atlas->overlap_samples(a, b)) {
          EXPECT_TRUE(atlas->chart(a).coords_of(s.point, 0.05 * atlas->chart(a).radius).has_value());
          EXPECT_TRUE(atlas->chart(b).coords_of(s.point, 0.05 * atlas->chart(b).radius).has_value());
          EXPECT_LE((atlas->chart(a).to_point(s.coords) - s.point).norm(), 1e-15);
        }
      }
    }
  }
  EXPECT_EQ(atlases::circle()->overlap_samples(0, 1).size(), 32u);
  EXPECT_TRUE(atlases::torus()->overlaps(0, 3));
}

TEST(Geometry, SamplingIsDeterministicAndSeedable) {
  const auto a1 = atlases::sphere2();
  const auto a2 = atlases::sphere2();
  const auto s1 = a1->overlap_samples(0, 1);
  const auto s2 = a2->overlap_samples(0, 1);
  ASSERT_EQ(s1.size(), s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_EQ(s1[i].coords, s2[i].coords);

  Resolution seeded;
  seeded.seed = 42;
  const auto r1 = atlases::sphere2(seeded)->overlap_samples(0, 1);
  const auto r2 = atlases::sphere2(seeded)->overlap_samples(0, 1);
  ASSERT_EQ(r1.size(), s1.size());
  for (std::size_t i = 0; i < r1.size(); ++i) EXPECT_EQ(r1[i].coords, r2[i].coords);
  EXPECT_NE(r1[0].coords, s1[0].coords);
}

TEST(Geometry, RadialPathScalesCoordinates) {
  const auto atlas = atlases::sphere2();
  const Vector x = v2(1.1, -0.7);
  const Point target = atlas->chart(0).to_point(x);
  const PiecewisePath p = radial_path(atlas, 0, target);
  for (int i = 0; i <= 16; ++i) {
    const double t = i / 16.0;
    const Vector y = *atlas->chart(0).to_coord(p.point(t));
    EXPECT_LE((y - t * x).norm(), 1e-13);
  }
  EXPECT_LE((p.start() - atlas->chart(0).center()).norm(), 1e-15);
  EXPECT_LE((p.end() - target).norm(), 1e-14);
  EXPECT_THROW(radial_path_coords(atlas, 0, v2(3.0, 0.0)), Error);
  EXPECT_THROW(radial_path(atlas, 0, atlas->chart(1).center()), Error);
}

TEST(Geometry, InvertAndCompose) {
  const auto atlas = atlases::sphere2();
  const PiecewisePath loop = sector_loop(atlas, 0, 1.0, pi / 2);
  const PiecewisePath inv = invert_path(loop);
  const PiecewisePath twice = invert_path(inv);
  for (int i = 0; i <= 40; ++i) {
    const double t = i / 40.0;
    EXPECT_LE((inv.point(t) - loop.point(1.0 - t)).norm(), 1e-14) << t;
    EXPECT_LE((twice.point(t) - loop.point(t)).norm(), 1e-14) << t;
  }
  const PiecewisePath out = radial_path_coords(atlas, 0, v2(1.0, 0.0));
  const PiecewisePath joined = compose_paths(out, invert_path(out));
  for (int i = 0; i <= 20; ++i) {
    const double t = i / 40.0;
    EXPECT_LE((joined.point(t) - out.point(2.0 * t)).norm(), 1e-14);
    EXPECT_LE((joined.point(0.5 + t) - out.point(1.0 - 2.0 * t)).norm(), 1e-14);
  }
  EXPECT_THROW(compose_paths(out, out), Error);
}

TEST(Geometry, SectorLoopIsClosedAndConsistent) {
  const auto atlas = atlases::sphere2();
  const PiecewisePath loop = sector_loop(atlas, 0, 0.8, 2.0);
  EXPECT_LE((loop.start() - loop.end()).norm(), 1e-15);
  const PathReport r = validate_path(loop);
  EXPECT_LE(r.max_gap, 1e-15);
  EXPECT_LE(r.max_velocity_mismatch, 1e-5);
}

TEST(Geometry, SampledSegmentInterpolatesSmoothCurve) {
  std::vector<Vector> nodes;
  const int m = 65;
  for (int j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / (m - 1);
    nodes.push_back(v2(std::cos(t), std::sin(2.0 * t)));
  }
  const PathSegment seg = sampled_segment(0, nodes);
  // Node velocities carry O(h^2) error: h^2 M3 / 3 at the one-sided ends, with
  // M3 = 8 bounding the third derivative. Hermite weights scale it by h/4.
  const double h = 1.0 / (m - 1);
  const double pos_bound = 0.25 * h * (h * h * 8.0 / 3.0);
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const CoordSample s = seg.eval(t);
    EXPECT_LE((s.coords - v2(std::cos(t), std::sin(2.0 * t))).norm(), pos_bound);
    EXPECT_LE((s.velocity - v2(-std::sin(t), 2.0 * std::cos(2.0 * t))).norm(), 2e-3);
  }
  EXPECT_THROW(sampled_segment(0, {v2(0, 0), v2(1, 1)}), Error);
}

TEST(Geometry, ReparameterizationKeepsImage) {
  const auto atlas = atlases::sphere2();
  const PiecewisePath loop = sector_loop(atlas, 0, 1.0, 1.0);
  const PiecewisePath re = reparameterize(loop, [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
  for (std::size_t k = 0; k < loop.size(); ++k) {
    for (double tau : {0.0, 0.3, 0.7, 1.0}) {
      EXPECT_LE((re.segment_point(k, tau) - loop.segment_point(k, tau * tau)).norm(), 1e-15);
    }
  }
  EXPECT_LE(validate_path(re).max_velocity_mismatch, 1e-5);
}

TEST(Geometry, RechartSegment) {
  const auto atlas = atlases::sphere2();
  const PathSegment seg = straight_segment(0, v2(0.8, 0.1), v2(1.2, 0.6));
  const PathSegment other = rechart_segment(*atlas, seg, 1);
  const PiecewisePath p(atlas, {seg});
  const PiecewisePath q(atlas, {other});
  for (double t : {0.0, 0.25, 0.5, 1.0}) EXPECT_LE((p.point(t) - q.point(t)).norm(), 1e-14);
  EXPECT_LE(validate_path(q).max_velocity_mismatch, 1e-5);
}

TEST(Geometry, OverlapHomotopyFlatExample) {
  const auto atlas = shifted_plane();
  const PiecewisePath c(atlas, {straight_segment(0, v2(0.5, -0.5), v2(0.5, 0.5))});
  const Homotopy h = overlap_homotopy(atlas, 0, 1, c);
  for (double s : {0.0, 0.25, 0.5, 1.0}) {
    const Point cs = c.point(s);
    EXPECT_LE((h.at(s, 0.0) - v2(0.0, 0.0)).norm(), 1e-15);
    EXPECT_LE((h.at(s, 0.5) - cs).norm(), 1e-15);
    EXPECT_LE((h.at(s, 1.0) - v2(1.0, 0.0)).norm(), 1e-15);
    EXPECT_LE((h.at(s, 0.25) - 0.5 * cs).norm(), 1e-15);
    EXPECT_LE((h.at(s, 0.75) - 0.5 * (cs + v2(1.0, 0.0))).norm(), 1e-15);
  }
  // d/ds of the first segment's endpoint is c'(s) = (0, 1), also at the ends.
  for (double s : {0.0, 0.5, 1.0}) EXPECT_LE((h.s_derivative(s, 0, 1.0) - v2(0.0, 1.0)).norm(), 1e-8);

  const PiecewisePath outside(atlas, {straight_segment(0, v2(0.5, 0.0), v2(-1.5, 0.0))});
  EXPECT_THROW(overlap_homotopy(atlas, 0, 1, outside), Error);
}

TEST(Geometry, SectorFamilyKeepsEndpoints) {
  const auto atlas = atlases::sphere2();
  const Homotopy h = sector_loop_family(atlas, 0, 0.5, 1.0, pi / 2);
  for (double s : {0.5, 0.7, 1.0}) {
    EXPECT_LE((h.at(s, 0.0) - atlas->chart(0).center()).norm(), 1e-15);
    EXPECT_LE((h.at(s, 1.0) - atlas->chart(0).center()).norm(), 1e-15);
  }
  EXPECT_THROW(sector_loop_family(atlases::circle(), 0, 0.5, 1.0, 1.0), Error);
}

TEST(Geometry, BumpProfile) {
  EXPECT_DOUBLE_EQ(smoothstep5(0.0), 0.0);
  EXPECT_DOUBLE_EQ(smoothstep5(1.0), 1.0);
  EXPECT_DOUBLE_EQ(smoothstep5(0.5), 0.5);
  EXPECT_DOUBLE_EQ(radial_bump(0.5, 1.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(radial_bump(2.0, 1.0, 2.0), 0.0);
  // C^2 at the joins: the first and second differences vanish there.
  const double h = 1e-4;
  EXPECT_NEAR((smoothstep5(h) - smoothstep5(0.0)) / h, 0.0, 1e-6);
  EXPECT_NEAR((smoothstep5(1.0) - smoothstep5(1.0 - h)) / h, 0.0, 1e-6);
}

TEST(Geometry, PartitionSumsToOneOnCircle) {
  const auto atlas = atlases::circle();
  const PartitionOfUnity pu = build_partition(atlas);
  for (int i = 0; i < 1024; ++i) {
    const double a = 2.0 * pi * i / 1024.0;
    const Point p = v2(std::cos(a), std::sin(a));
    const auto w = pu.weights(p);
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      EXPECT_GE(w[k], 0.0);
      if (!atlas->chart(k).contains(p)) {
        EXPECT_EQ(w[k], 0.0);
      }
      sum += w[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
}

TEST(Geometry, PartitionSumsToOneOnSphereAndTorus) {
  for (const auto& atlas : {atlases::sphere2(), atlases::torus()}) {
    const PartitionOfUnity pu = build_partition(atlas);
    for (const auto& p : atlas->sample_points()) {
      const auto w = pu.weights(p);
      double sum = 0.0;
      for (double v : w) sum += v;
      EXPECT_NEAR(sum, 1.0, 1e-14) << atlas->name();
    }
  }
  const PartitionOfUnity pu = build_partition(atlases::sphere2());
  const auto w = pu.weights(atlases::sphere2()->chart(0).center());
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_THROW(pu.weights((Point(3) << 0.0, 0.0, 0.0).finished()), Error);
}

TEST(Geometry, ExpressionChart) {
  const auto to_point = std::vector<Expression>{parse_expression("x1 + 1"), parse_expression("x2")};
  const auto to_coord = std::vector<Expression>{parse_expression("x1 - 1"), parse_expression("x2")};
  const Chart c = atlases::expression_chart("e", 2, 2, to_point, to_coord, 1.0, 0.5, ChartShape::cube);
  EXPECT_LE((c.to_point(v2(0.2, 0.3)) - v2(1.2, 0.3)).norm(), 1e-15);
  EXPECT_TRUE(c.contains(v2(1.5, 0.9)));
  EXPECT_FALSE(c.contains(v2(2.5, 0.0)));
  EXPECT_THROW(atlases::expression_chart("e", 2, 2, {parse_expression("x3"), parse_expression("x1")}, to_coord,
                                         1.0, 0.5, ChartShape::ball),
               Error);
}
