#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace liecouple {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Linear endomorphism of a Lie algebra in the standard basis, acting on
/// coordinate columns. Elements of Der g, Aut g and ad g are all FiberEndo.
using FiberEndo = Eigen::MatrixXd;

/// Column-major flattening, vec(A)[i + n*j] = A(i, j).
inline Vector flatten(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix unflatten(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

struct NullspaceResult {
  Matrix basis;            // orthonormal columns spanning the numerical nullspace
  Vector singular_values;  // descending
  double threshold = 0.0;  // singular values <= threshold are treated as zero
  int rank = 0;
  bool ambiguous = false;  // some singular value lies within a factor 10 of the threshold
};

/// Numerical nullspace by SVD. The rank threshold is relative_tol times the
/// largest singular value.
inline NullspaceResult nullspace(const Matrix& m, double relative_tol) {
  NullspaceResult out;
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0 || cols == 0) {
    out.basis = Matrix::Identity(cols, cols);
    out.singular_values = Vector(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  out.threshold = relative_tol * smax;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    const double s = out.singular_values(i);
    if (s > out.threshold) ++out.rank;
    if (out.threshold > 0.0 && s > out.threshold / 10.0 && s < out.threshold * 10.0) {
      out.ambiguous = true;
    }
  }
  out.basis = svd.matrixV().rightCols(cols - out.rank);
  return out;
}

/// Minimal-norm least-squares pseudoinverse with a relative singular value cut.
inline Matrix pseudo_inverse(const Matrix& m, double relative_tol) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = relative_tol * (s.size() > 0 ? s(0) : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
/// The scaled matrix has 1-norm <= 1/2, where 30 terms are far below 1e-16.
inline Matrix exp_matrix(const Matrix& d) {
  const Eigen::Index n = d.rows();
  const double norm1 = n == 0 ? 0.0 : d.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix a = d / std::ldexp(1.0, squarings);

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
    if (term.isZero(0.0) || term.norm() <= 1e-18 * sum.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Principal square root via the Denman-Beavers iteration. Assumes no
/// eigenvalues on the closed negative real axis.
inline Matrix sqrt_matrix(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Matrix y = a;
  Matrix z = Matrix::Identity(n, n);
  for (int it = 0; it < 100; ++it) {
    const Matrix y_inv = y.inverse();
    const Matrix z_inv = z.inverse();
    Matrix y_next = 0.5 * (y + z_inv);
    z = 0.5 * (z + y_inv);
    const double change = (y_next - y).norm();
    y = std::move(y_next);
    if (change <= 1e-15 * y.norm()) break;
  }
  return y;
}

/// Principal logarithm of C, defined when the spectral radius of C - I is
/// below one (the region where the Mercator series converges). Returns
/// nullopt outside that region.
inline std::optional<Matrix> principal_log(const Matrix& c) {
  const Eigen::Index n = c.rows();
  const Matrix id = Matrix::Identity(n, n);
  if (spectral_radius(c - id) >= 1.0) return std::nullopt;

  Matrix x = c;
  int roots = 0;
  while ((x - id).norm() > 0.25 && roots < 40) {
    x = sqrt_matrix(x);
    ++roots;
  }
  const Matrix e = x - id;
  Matrix power = e;
  Matrix sum = e;
  for (int k = 2; k <= 200; ++k) {
    power = power * e;
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    const Matrix term = sign * power / static_cast<double>(k);
    sum += term;
    if (term.norm() <= 1e-18 * std::max(sum.norm(), 1e-300)) break;
  }
  return std::ldexp(1.0, roots) * sum;
}

}  // namespace liecouple
