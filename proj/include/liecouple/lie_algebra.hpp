#pragma once

// Finite-dimensional real Lie algebras given by structure constants, together
// with derivations, inner derivations, the exponential map and the
// automorphism / inner-coset tests built on them.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "liecouple/error.hpp"
#include "liecouple/linalg.hpp"
#include "liecouple/tolerances.hpp"

namespace liecouple {

/// One bracket entry [e_i, e_j] = sum_k coeffs[k] e_k, with 0-based indices.
struct BracketEntry {
  int i = 0;
  int j = 0;
  std::vector<double> coeffs;
};

class LieAlgebra {
 public:
  LieAlgebra() = default;

  /// Raw structure tensor, c[(i*n + j)*n + k] = c_ij^k. No validation: use
  /// validate_algebra() to check the axioms.
  LieAlgebra(std::string name, int dim, std::vector<double> structure)
      : name_(std::move(name)), dim_(dim), c_(std::move(structure)) {
    if (dim_ <= 0) throw Error(ErrorKind::dimension, "Lie algebra dimension must be positive");
    if (c_.size() != static_cast<std::size_t>(dim_) * dim_ * dim_) {
      throw Error(ErrorKind::dimension, "structure tensor must have dim^3 entries");
    }
  }

  /// Builds the tensor from bracket entries and fills in [e_j, e_i] = -[e_i, e_j].
  /// Unlisted pairs are zero. An entry given for both (i,j) and (j,i) must
  /// agree up to sign, otherwise the definition is rejected.
  static LieAlgebra from_brackets(std::string name, int dim,
                                  const std::vector<BracketEntry>& entries) {
    if (dim <= 0) throw Error(ErrorKind::dimension, "Lie algebra dimension must be positive");
    const auto n = static_cast<std::size_t>(dim);
    std::vector<double> c(n * n * n, 0.0);
    std::vector<bool> set(n * n, false);
    for (const auto& e : entries) {
      if (e.i < 0 || e.j < 0 || e.i >= dim || e.j >= dim) {
        throw Error(ErrorKind::config, "bracket index out of range in algebra '" + name + "'");
      }
      if (e.coeffs.size() != n) {
        throw Error(ErrorKind::config, "bracket coefficient vector has wrong length in algebra '" +
                                           name + "'");
      }
      if (e.i == e.j) {
        for (double v : e.coeffs) {
          if (v != 0.0) {
            throw Error(ErrorKind::config, "nonzero self-bracket [e" + std::to_string(e.i + 1) +
                                               ", e" + std::to_string(e.i + 1) + "]");
          }
        }
        continue;
      }
      const std::size_t ij = static_cast<std::size_t>(e.i) * n + e.j;
      const std::size_t ji = static_cast<std::size_t>(e.j) * n + e.i;
      for (std::size_t k = 0; k < n; ++k) {
        if (set[ij] && c[ij * n + k] != e.coeffs[k]) {
          throw Error(ErrorKind::config, "bracket [e" + std::to_string(e.i + 1) + ", e" +
                                             std::to_string(e.j + 1) +
                                             "] specified inconsistently");
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        c[ij * n + k] = e.coeffs[k];
        c[ji * n + k] = -e.coeffs[k];
      }
      set[ij] = true;
      set[ji] = true;
    }
    return LieAlgebra(std::move(name), dim, std::move(c));
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }

  double c(int i, int j, int k) const {
    return c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }

  const std::vector<double>& structure() const { return c_; }

  bool is_abelian() const {
    for (double v : c_) {
      if (v != 0.0) return false;
    }
    return true;
  }

 private:
  std::string name_;
  int dim_ = 0;
  std::vector<double> c_;
};

inline void require_dim(const LieAlgebra& g, Eigen::Index size, const char* what) {
  if (size != g.dim()) {
    throw Error(ErrorKind::dimension, std::string(what) + ": expected length " +
                                          std::to_string(g.dim()) + ", got " +
                                          std::to_string(size));
  }
}

inline Vector bracket(const LieAlgebra& g, const Vector& x, const Vector& y) {
  require_dim(g, x.size(), "bracket");
  require_dim(g, y.size(), "bracket");
  const int n = g.dim();
  Vector out = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (x(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double w = x(i) * y(j);
      if (w == 0.0) continue;
      for (int k = 0; k < n; ++k) out(k) += w * g.c(i, j, k);
    }
  }
  return out;
}

struct AlgebraReport {
  double antisymmetry = 0.0;  // max |c_ij^k + c_ji^k|
  double jacobi = 0.0;        // max Jacobi defect over index quadruples
  bool accepted = false;
};

inline AlgebraReport validate_algebra(const LieAlgebra& g, double tol = Tolerances{}.alg) {
  AlgebraReport r;
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        r.antisymmetry = std::max(r.antisymmetry, std::abs(g.c(i, j, k) + g.c(j, i, k)));

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) {
            s += g.c(i, j, m) * g.c(m, k, l) + g.c(j, k, m) * g.c(m, i, l) +
                 g.c(k, i, m) * g.c(m, j, l);
          }
          r.jacobi = std::max(r.jacobi, std::abs(s));
        }
  r.accepted = r.antisymmetry <= tol && r.jacobi <= tol;
  return r;
}

/// Matrix of x -> [u, x].
inline FiberEndo ad(const LieAlgebra& g, const Vector& u) {
  require_dim(g, u.size(), "ad");
  const int n = g.dim();
  FiberEndo m = FiberEndo::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (u(i) == 0.0) continue;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) m(k, j) += u(i) * g.c(i, j, k);
  }
  return m;
}

/// max over i<j of |D[e_i,e_j] - [De_i,e_j] - [e_i,De_j]|.
inline double derivation_residual(const LieAlgebra& g, const FiberEndo& d) {
  const int n = g.dim();
  if (d.rows() != n || d.cols() != n) throw Error(ErrorKind::dimension, "derivation_residual: endomorphism size");
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vector ei = Vector::Unit(n, i);
      const Vector ej = Vector::Unit(n, j);
      const Vector lhs = d * bracket(g, ei, ej);
      const Vector rhs = bracket(g, d.col(i), ej) + bracket(g, ei, d.col(j));
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

/// Linear operator D -> (D[e_i,e_j] - [De_i,e_j] - [e_i,De_j])_{i<j} acting on
/// vec(D). Its nullspace is Der g.
inline Matrix derivation_operator(const LieAlgebra& g) {
  const int n = g.dim();
  const int pairs = n * (n - 1) / 2;
  Matrix op = Matrix::Zero(static_cast<Eigen::Index>(pairs) * n, static_cast<Eigen::Index>(n) * n);
  int row_block = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++row_block) {
      // D[e_i,e_j] component k: sum_m c_ij^m D(k,m)
      // [De_i, e_j] component k: sum_m D(m,i) c_mj^k
      // [e_i, De_j] component k: sum_m D(m,j) c_im^k
      for (int k = 0; k < n; ++k) {
        const Eigen::Index row = static_cast<Eigen::Index>(row_block) * n + k;
        for (int m = 0; m < n; ++m) {
          op(row, k + n * m) += g.c(i, j, m);
          op(row, m + n * i) -= g.c(m, j, k);
          op(row, m + n * j) -= g.c(i, m, k);
        }
      }
    }
  }
  return op;
}

/// Der g and ad g for a fixed algebra, plus the precomputed pseudoinverse used
/// by inner_test.
struct DerivationSpace {
  LieAlgebra algebra;
  std::vector<FiberEndo> der_basis;  // orthonormal in the Frobenius inner product
  std::vector<FiberEndo> ad_basis;   // orthonormal, spans {ad u}
  int center_dim = 0;                // dim ker(u -> ad u)
  bool ambiguous = false;            // a rank decision sat within a factor 10 of tau_rank
  Matrix ad_map;                     // n^2 x n, column i is vec(ad e_i)
  Matrix ad_pinv;                    // n x n^2 minimal-norm pseudoinverse of ad_map
  Tolerances tol;

  int der_dim() const { return static_cast<int>(der_basis.size()); }
  int ad_dim() const { return static_cast<int>(ad_basis.size()); }
};

inline DerivationSpace derivation_space(const LieAlgebra& g, const Tolerances& tol = {}) {
  DerivationSpace ds;
  ds.algebra = g;
  ds.tol = tol;
  const int n = g.dim();

  const NullspaceResult der = nullspace(derivation_operator(g), tol.rank);
  for (Eigen::Index c = 0; c < der.basis.cols(); ++c) {
    ds.der_basis.push_back(unflatten(der.basis.col(c), n, n));
  }

  ds.ad_map = Matrix::Zero(static_cast<Eigen::Index>(n) * n, n);
  for (int i = 0; i < n; ++i) ds.ad_map.col(i) = flatten(ad(g, Vector::Unit(n, i)));

  // Range of ad_map gives ad g, its kernel gives the center; both from one SVD
  // so that dim ad = n - dim center holds exactly.
  if (ds.ad_map.isZero(0.0)) {
    ds.center_dim = n;
  } else {
    Eigen::JacobiSVD<Matrix> svd(ds.ad_map, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const double cut = tol.rank * s(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cut) ++rank;
      if (s(i) > cut / 10.0 && s(i) < cut * 10.0) ds.ambiguous = true;
    }
    for (int c = 0; c < rank; ++c) ds.ad_basis.push_back(unflatten(svd.matrixU().col(c), n, n));
    ds.center_dim = n - rank;
  }
  ds.ambiguous = ds.ambiguous || der.ambiguous;
  ds.ad_pinv = pseudo_inverse(ds.ad_map, tol.rank);
  return ds;
}

struct InnerDecomposition {
  Vector witness;         // minimal-norm u with ad(u) closest to D
  double residual = 0.0;  // |D - ad(witness)|_F
  bool is_inner = false;  // residual <= tau_inner * max(1, |D|_F)
};

inline InnerDecomposition inner_test(const DerivationSpace& ds, const FiberEndo& d) {
  const int n = ds.algebra.dim();
  if (d.rows() != n || d.cols() != n) throw Error(ErrorKind::dimension, "inner_test: endomorphism size");
  InnerDecomposition out;
  out.witness = ds.ad_pinv * flatten(d);
  out.residual = (d - ad(ds.algebra, out.witness)).norm();
  out.is_inner = out.residual <= ds.tol.inner * std::max(1.0, d.norm());
  return out;
}

/// exp on Der g (any square matrix is accepted).
inline FiberEndo exp_derivation(const FiberEndo& d) { return exp_matrix(d); }

enum class AutomorphismStatus { accepted, not_homomorphism, singular };

struct AutomorphismCheck {
  double residual = 0.0;   // max |A[e_i,e_j] - [Ae_i, Ae_j]|
  double condition = 0.0;  // 2-norm condition number (inf when singular)
  AutomorphismStatus status = AutomorphismStatus::accepted;

  bool accepted() const { return status == AutomorphismStatus::accepted; }
};

inline AutomorphismCheck is_automorphism(const LieAlgebra& g, const FiberEndo& a,
                                         double tol = Tolerances{}.alg) {
  const int n = g.dim();
  if (a.rows() != n || a.cols() != n) throw Error(ErrorKind::dimension, "is_automorphism: endomorphism size");
  AutomorphismCheck out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vector ei = Vector::Unit(n, i);
      const Vector ej = Vector::Unit(n, j);
      const Vector diff = a * bracket(g, ei, ej) - bracket(g, a.col(i), a.col(j));
      out.residual = std::max(out.residual, diff.norm());
    }
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  out.condition = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 1e-12 * s(0))) {
    out.status = AutomorphismStatus::singular;
  } else if (out.residual > tol) {
    out.status = AutomorphismStatus::not_homomorphism;
  }
  return out;
}

enum class CosetRelation { same, different, inconclusive };

inline const char* to_string(CosetRelation r) {
  switch (r) {
    case CosetRelation::same: return "same";
    case CosetRelation::different: return "different";
    case CosetRelation::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Decides whether A and B lie in the same coset of Int g, but only locally:
/// C = A B^-1 must be close enough to I for the principal logarithm to exist.
/// Elsewhere the answer is inconclusive.
inline CosetRelation same_inner_coset(const DerivationSpace& ds, const FiberEndo& a,
                                      const FiberEndo& b) {
  const Eigen::FullPivLU<Matrix> lu(b);
  if (!lu.isInvertible()) return CosetRelation::inconclusive;
  const Matrix c = a * lu.inverse();
  const auto log_c = principal_log(c);
  if (!log_c) return CosetRelation::inconclusive;
  return inner_test(ds, *log_c).is_inner ? CosetRelation::same : CosetRelation::different;
}

}  // namespace liecouple
