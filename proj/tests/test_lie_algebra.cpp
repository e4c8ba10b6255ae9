#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "liecouple/algebra_catalog.hpp"
#include "liecouple/lie_algebra.hpp"
#include "oracles.hpp"

using namespace liecouple;

namespace {

Matrix cross_matrix(const Vector& u) {
  Matrix k(3, 3);
  k << 0, -u(2), u(1), u(2), 0, -u(0), -u(1), u(0), 0;
  return k;
}

}  // namespace

TEST(LieAlgebra, BracketExamples) {
  const LieAlgebra so3 = catalog::so3();
  EXPECT_TRUE(bracket(so3, Vector::Unit(3, 0), Vector::Unit(3, 1)).isApprox(Vector::Unit(3, 2)));
  const LieAlgebra sl2 = catalog::sl2();
  EXPECT_TRUE(bracket(sl2, Vector::Unit(3, 0), Vector::Unit(3, 1)).isApprox(2.0 * Vector::Unit(3, 1)));
  EXPECT_TRUE(bracket(sl2, Vector::Unit(3, 1), Vector::Unit(3, 2)).isApprox(Vector::Unit(3, 0)));
  EXPECT_THROW(bracket(so3, Vector::Zero(2), Vector::Zero(3)), Error);
}

TEST(LieAlgebra, So3BracketIsCrossProduct) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const LieAlgebra g = catalog::so3();
  for (int t = 0; t < 20; ++t) {
    Eigen::Vector3d x(nd(rng), nd(rng), nd(rng)), y(nd(rng), nd(rng), nd(rng));
    const Vector expect = x.cross(y);
    EXPECT_LE((bracket(g, x, y) - expect).norm(), 1e-14);
    EXPECT_LE((ad(g, x) - cross_matrix(x)).norm(), 1e-15);
  }
}

TEST(LieAlgebra, ValidateAcceptsBuiltins) {
  for (const auto& g : catalog::all()) {
    const AlgebraReport r = validate_algebra(g);
    EXPECT_TRUE(r.accepted) << g.name();
    EXPECT_LE(r.antisymmetry, 1e-12);
    EXPECT_LE(r.jacobi, 1e-12);
  }
}

TEST(LieAlgebra, ValidateRejectsJacobiFailure) {
  const LieAlgebra g = LieAlgebra::from_brackets(
      "bad", 3, {{0, 1, {0, 1, 0}}, {0, 2, {0, 0, 1}}, {1, 2, {1, 0, 0}}});
  const AlgebraReport r = validate_algebra(g);
  EXPECT_FALSE(r.accepted);
  EXPECT_NEAR(r.jacobi, 2.0, 1e-12);
}

TEST(LieAlgebra, ValidateRejectsAntisymmetryFailure) {
  std::vector<double> c(8, 0.0);
  c[(0 * 2 + 1) * 2 + 1] = 1.0;  // [e1,e2]=e2 but [e2,e1] left zero
  const AlgebraReport r = validate_algebra(LieAlgebra("raw", 2, c));
  EXPECT_FALSE(r.accepted);
  EXPECT_DOUBLE_EQ(r.antisymmetry, 1.0);
}

TEST(LieAlgebra, FromBracketsRejectsBadInput) {
  EXPECT_THROW(LieAlgebra::from_brackets("x", 2, {{0, 2, {0, 1}}}), Error);
  EXPECT_THROW(LieAlgebra::from_brackets("x", 2, {{0, 1, {0, 1, 0}}}), Error);
  EXPECT_THROW(LieAlgebra::from_brackets("x", 2, {{0, 0, {1, 0}}}), Error);
  EXPECT_THROW(LieAlgebra::from_brackets("x", 2, {{0, 1, {0, 1}}, {0, 1, {1, 0}}}), Error);
  EXPECT_THROW(LieAlgebra::from_brackets("x", 0, {}), Error);
}

TEST(LieAlgebra, AdIsDerivationAndHomomorphism) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (const auto& g : catalog::all()) {
    const int n = g.dim();
    for (int t = 0; t < 10; ++t) {
      Vector u(n), v(n);
      for (int i = 0; i < n; ++i) {
        u(i) = nd(rng);
        v(i) = nd(rng);
      }
      EXPECT_LE(derivation_residual(g, ad(g, u)), 1e-12) << g.name();
      const Matrix lhs = ad(g, bracket(g, u, v));
      const Matrix rhs = ad(g, u) * ad(g, v) - ad(g, v) * ad(g, u);
      EXPECT_LE((lhs - rhs).norm(), 1e-12) << g.name();
    }
  }
}

TEST(LieAlgebra, DerivationDimensionsMatchExactOracle) {
  for (const auto& g : oracle::suite()) {
    const DerivationSpace ds = derivation_space(g);
    EXPECT_EQ(ds.der_dim(), oracle::der_dim(g)) << g.name();
    EXPECT_EQ(ds.ad_dim(), oracle::ad_dim(g)) << g.name();
    EXPECT_EQ(ds.ad_dim() + ds.center_dim, g.dim()) << g.name();
    EXPECT_FALSE(ds.ambiguous) << g.name();
  }
}

TEST(LieAlgebra, KnownDerivationDimensions) {
  EXPECT_EQ(derivation_space(catalog::so3()).der_dim(), 3);
  EXPECT_EQ(derivation_space(catalog::sl2()).der_dim(), 3);
  EXPECT_EQ(derivation_space(catalog::heisenberg3()).der_dim(), 6);
  EXPECT_EQ(derivation_space(catalog::heisenberg3()).ad_dim(), 2);
  EXPECT_EQ(derivation_space(catalog::affine2()).der_dim(), 2);
  EXPECT_EQ(derivation_space(catalog::abelian(3)).der_dim(), 9);
  EXPECT_EQ(derivation_space(catalog::abelian(3)).ad_dim(), 0);
}

TEST(LieAlgebra, DerivationBasisSatisfiesIdentity) {
  for (const auto& g : catalog::all()) {
    const DerivationSpace ds = derivation_space(g);
    for (const auto& d : ds.der_basis) {
      EXPECT_LE(derivation_residual(g, d), 1e-12) << g.name();
      EXPECT_NEAR(d.norm(), 1.0, 1e-12);
    }
  }
}

TEST(LieAlgebra, InnerTestExamples) {
  const LieAlgebra h = catalog::heisenberg3();
  const DerivationSpace ds = derivation_space(h);
  const InnerDecomposition inner = inner_test(ds, ad(h, Vector::Unit(3, 0)));
  EXPECT_TRUE(inner.is_inner);
  EXPECT_LE(inner.residual, 1e-12);
  EXPECT_LE((ad(h, inner.witness) - ad(h, Vector::Unit(3, 0))).norm(), 1e-12);

  Matrix outer = Matrix::Zero(3, 3);
  outer.diagonal() << 1, 0, 1;
  EXPECT_LE(derivation_residual(h, outer), 1e-15);
  const InnerDecomposition o = inner_test(ds, outer);
  EXPECT_FALSE(o.is_inner);
  EXPECT_NEAR(o.residual, std::sqrt(2.0), 1e-12);

  const DerivationSpace ab = derivation_space(catalog::abelian(2));
  EXPECT_TRUE(inner_test(ab, Matrix::Zero(2, 2)).is_inner);
  EXPECT_FALSE(inner_test(ab, Matrix::Identity(2, 2)).is_inner);
  EXPECT_THROW(inner_test(ab, Matrix::Zero(3, 3)), Error);
}

TEST(LieAlgebra, InnerWitnessIsMinimalNorm) {
  // The center of heis is spanned by e3, so the minimal-norm witness has no e3 part.
  const LieAlgebra h = catalog::heisenberg3();
  const DerivationSpace ds = derivation_space(h);
  const Vector u = (Vector(3) << 0.3, -1.2, 5.0).finished();
  const InnerDecomposition dec = inner_test(ds, ad(h, u));
  EXPECT_NEAR(dec.witness(2), 0.0, 1e-12);
  EXPECT_NEAR(dec.witness(0), 0.3, 1e-12);
  EXPECT_NEAR(dec.witness(1), -1.2, 1e-12);
}

TEST(LieAlgebra, ExpMatchesRodrigues) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const LieAlgebra g = catalog::so3();
  for (int t = 0; t < 50; ++t) {
    Vector u(3);
    u << nd(rng), nd(rng), nd(rng);
    u *= 2.0;
    const double th = u.norm();
    const Matrix k = cross_matrix(u);
    const Matrix rod = Matrix::Identity(3, 3) + std::sin(th) / th * k + (1 - std::cos(th)) / (th * th) * k * k;
    EXPECT_LE((exp_derivation(ad(g, u)) - rod).norm(), 1e-13 * std::max(1.0, rod.norm()));
  }
}

TEST(LieAlgebra, ExpMatchesEigenMatrixFunction) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int n : {1, 2, 3, 4}) {
    for (int t = 0; t < 20; ++t) {
      Matrix a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 3.0 * nd(rng);
      const Matrix ref = a.exp();
      EXPECT_LE((exp_matrix(a) - ref).norm(), 1e-12 * std::max(1.0, ref.norm()));
    }
  }
  EXPECT_TRUE(exp_matrix(Matrix::Zero(3, 3)).isIdentity(0.0));
}

TEST(LieAlgebra, ExpOfDerivationIsAutomorphism) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  for (const auto& g : catalog::all()) {
    const DerivationSpace ds = derivation_space(g);
    for (int t = 0; t < 10; ++t) {
      Matrix d = Matrix::Zero(g.dim(), g.dim());
      for (const auto& b : ds.der_basis) d += nd(rng) * b;
      const AutomorphismCheck chk = is_automorphism(g, exp_derivation(d), 1e-9);
      EXPECT_TRUE(chk.accepted()) << g.name() << " residual " << chk.residual;
    }
  }
}

TEST(LieAlgebra, AutomorphismRejections) {
  const LieAlgebra g = catalog::so3();
  Matrix scale = Matrix::Identity(3, 3);
  scale(0, 0) = 2.0;
  EXPECT_EQ(is_automorphism(g, scale).status, AutomorphismStatus::not_homomorphism);
  EXPECT_EQ(is_automorphism(g, Matrix::Zero(3, 3)).status, AutomorphismStatus::singular);
  EXPECT_TRUE(is_automorphism(catalog::abelian(2), Matrix::Identity(2, 2) * 3.0).accepted());
  EXPECT_THROW(is_automorphism(g, Matrix::Identity(2, 2)), Error);
}

TEST(LieAlgebra, SameInnerCoset) {
  const LieAlgebra h = catalog::heisenberg3();
  const DerivationSpace ds = derivation_space(h);
  const Matrix inner = exp_derivation(ad(h, (Vector(3) << 0.2, -0.1, 0.0).finished()));
  Matrix outer_gen = Matrix::Zero(3, 3);
  outer_gen.diagonal() << 1, 0, 1;
  const Matrix outer = exp_derivation(0.3 * outer_gen);
  const Matrix id = Matrix::Identity(3, 3);
  EXPECT_EQ(same_inner_coset(ds, inner, id), CosetRelation::same);
  EXPECT_EQ(same_inner_coset(ds, outer * inner, outer), CosetRelation::same);
  EXPECT_EQ(same_inner_coset(ds, outer, id), CosetRelation::different);
  EXPECT_EQ(same_inner_coset(derivation_space(catalog::abelian(2)), -Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
            CosetRelation::inconclusive);
  EXPECT_EQ(same_inner_coset(ds, id, Matrix::Zero(3, 3)), CosetRelation::inconclusive);
}

TEST(LieAlgebra, CatalogLookup) {
  for (const auto& name : catalog::names()) {
    const auto g = catalog::find(name);
    ASSERT_TRUE(g.has_value()) << name;
    EXPECT_EQ(g->name(), name);
  }
  EXPECT_FALSE(catalog::find("e8").has_value());
  EXPECT_FALSE(catalog::find("abelian9").has_value());
  EXPECT_TRUE(catalog::abelian(2).is_abelian());
  EXPECT_FALSE(catalog::so3().is_abelian());
}
