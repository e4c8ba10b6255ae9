#pragma once

#include <cstdint>
#include <optional>

namespace liecouple {

/// Numerical thresholds shared by all modules. Defaults are tuned for double
/// precision on algebras and bases of dimension <= 4.
struct Tolerances {
  double alg = 1e-10;        // absolute: antisymmetry, Jacobi, derivation and automorphism identities
  double inner = 1e-8;       // relative: membership in ad g
  double exp = 1e-13;        // relative accuracy of the matrix exponential
  double rank = 1e-9;        // relative to the largest singular value
  double geo = 1e-9;         // coordinate round trips, path endpoint matching
  double conn = 1e-6;        // connection compatibility on overlaps
  double transport = 1e-7;   // composition / inverse / reparameterization of transport
  double pass = 1e-6;        // coupling verdict: relative residual counted as zero
  double fail = 1e-2;        // coupling verdict: relative residual counted as decisive
  double fd_step = 1e-4;     // transition derivatives, fraction of chart radius
  double curvature_fd = 1e-4;  // curvature central differences, coordinate units
};

/// Discretization knobs.
struct Resolution {
  int steps = 512;             // RK4 steps per path segment
  int overlap_samples = 32;    // sample points per chart overlap
  int chart_samples = 32;      // sample points per chart (curvature, Lie condition)
  std::optional<std::uint64_t> seed;  // random sample placement instead of Halton points
};

}  // namespace liecouple
