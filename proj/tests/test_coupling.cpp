#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "liecouple/coupling.hpp"
#include "liecouple/report.hpp"
#include "liecouple/scenarios.hpp"

using namespace liecouple;

namespace {

std::shared_ptr<const LieAlgebraBundle> line_bundle(TransitionFn phi, Tolerances tol = {}) {
  return std::make_shared<const LieAlgebraBundle>(catalog::abelian(1), atlases::circle(),
                                                  std::vector<TransitionSpec>{{0, 1, std::move(phi)}}, tol);
}

}  // namespace

TEST(Coupling, Classify) {
  const Tolerances tol;
  EXPECT_EQ(classify({}, tol), Verdict::exists);
  EXPECT_EQ(classify({0.0, 1e-7}, tol), Verdict::exists);
  EXPECT_EQ(classify({1e-7, 1e-4}, tol), Verdict::inconclusive);
  EXPECT_EQ(classify({1e-4, 0.5}, tol), Verdict::fails);
  EXPECT_EQ(classify({std::numeric_limits<double>::quiet_NaN()}, tol), Verdict::fails);
  EXPECT_DOUBLE_EQ(relative(1.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(relative(1.0, 4.0), 0.25);
}

TEST(Coupling, ScenarioVerdicts) {
  for (const auto& name : scenarios::names()) {
    const Scenario s = *scenarios::find(name);
    const CouplingCertificate cert = coupling_exists(s.bundle, s.connection);
    ASSERT_TRUE(s.expected.has_value());
    EXPECT_EQ(cert.verdict, *s.expected) << name << " route " << cert.route;
  }
}

TEST(Coupling, DeltaTestExamples) {
  const auto inner = delta_continuity_test(*scenarios::find("heis-circle")->bundle);
  ASSERT_EQ(inner.size(), 1u);
  EXPECT_TRUE(inner[0].passes);
  EXPECT_LE(inner[0].max_residual, 1e-6);
  EXPECT_EQ(inner[0].samples.size(), 32u);

  const auto outer = delta_continuity_test(*scenarios::find("heis-circle-outer")->bundle);
  EXPECT_FALSE(outer[0].passes);
  EXPECT_GE(outer[0].max_residual, 1e-2);

  // Locally constant transitions, even outer ones, are delta-continuous.
  const auto sl2 = delta_continuity_test(*scenarios::find("sl2-circle")->bundle);
  EXPECT_TRUE(sl2[0].passes);
  EXPECT_LE(sl2[0].max_residual, 1e-12);
}

TEST(Coupling, DeltaWitnessReproducesLogDerivative) {
  // phi = exp(sin(u) ad e1): (d phi) phi^-1 = cos(u) ad e1, witness cos(u) e1.
  const Scenario s = *scenarios::find("heis-circle");
  const auto reports = delta_continuity_test(*s.bundle);
  for (const auto& smp : reports[0].samples) {
    const double u = smp.coords(0);
    if (u > 0.0) {
      EXPECT_NEAR(smp.witness(0), std::cos(u), 1e-7);
      EXPECT_NEAR(smp.witness(1), 0.0, 1e-7);
    } else {
      EXPECT_LE(smp.witness.norm(), 1e-12);
    }
  }
}

TEST(Coupling, DeltaStencilMustStayInOverlap) {
  Tolerances tol;
  tol.fd_step = 0.2;
  const auto b = line_bundle([](const Vector&) { return FiberEndo::Identity(1, 1); }, tol);
  EXPECT_THROW(delta_continuity_test(*b), Error);
}

TEST(Coupling, MissingTransitionIsConfigError) {
  const auto b = std::make_shared<const LieAlgebraBundle>(catalog::abelian(1), atlases::circle(),
                                                          std::vector<TransitionSpec>{});
  try {
    delta_continuity_test(*b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(Coupling, AbelianNonconstantTransitionFails) {
  const auto b = line_bundle([](const Vector& x) { return FiberEndo::Constant(1, 1, std::exp(std::sin(x(0)))); });
  const CouplingCertificate cert = coupling_exists(b);
  EXPECT_EQ(cert.verdict, Verdict::fails);
  EXPECT_FALSE(cert.coupling_built);
  EXPECT_FALSE(cert.witnesses.empty());
  for (const auto& w : cert.witnesses) EXPECT_EQ(w.kind, "delta");
}

TEST(Coupling, AbelianConstantTransitionExists) {
  const auto b = line_bundle([](const Vector& x) { return FiberEndo::Constant(1, 1, x(0) > 0 ? -1.0 : 2.0); });
  const CouplingCertificate cert = coupling_exists(b);
  EXPECT_EQ(cert.verdict, Verdict::exists);
  EXPECT_TRUE(cert.coupling_built);
}

TEST(Coupling, BackwardWitnessesAgree) {
  for (const char* name : {"heis-circle", "so3-circle", "so3-sphere", "sl2-circle"}) {
    const Scenario s = *scenarios::find(name);
    const auto reports = delta_continuity_test(*s.bundle);
    const CouplingCertificate cert = build_coupling(s.bundle, reports, build_partition(s.bundle->atlas_ptr()));
    EXPECT_EQ(cert.verdict, Verdict::exists) << name;
    EXPECT_DOUBLE_EQ(cert.witness_tolerance, 1e-5);
    for (const auto& pr : cert.overlap) {
      EXPECT_LE(pr.max_residual, 1e-6) << name;
      EXPECT_LE(pr.max_witness_gap, cert.witness_tolerance) << name;
    }
    for (double r : cert.outer_curvature_residuals) EXPECT_EQ(r, 0.0);
  }
}

TEST(Coupling, BlendIsCompatibleLieConnection) {
  const Scenario s = *scenarios::find("heis-circle");
  const CouplingCertificate cert = coupling_exists(s.bundle);
  ASSERT_TRUE(cert.coupling);
  const ConnectionReport r = check_connection(*cert.coupling);
  EXPECT_TRUE(r.accepted) << r.max_compatibility;
  EXPECT_LE(cert.blend_lie_residual, 1e-10);
  EXPECT_LE(cert.blend_inner_residual, 1e-6);
}

TEST(Coupling, ForwardRouteOnSo3Circle) {
  const Scenario s = *scenarios::find("so3-circle");
  const auto charts = build_transport_charts(*s.connection);
  const BundleReport br = check_bundle(*charts);
  EXPECT_LE(br.max_automorphism, 1e-7);
  for (const auto& rep : delta_continuity_test(*charts)) EXPECT_LE(rep.max_residual, 1e-6);

  const CouplingCertificate cert = coupling_exists(s.bundle, s.connection);
  EXPECT_EQ(cert.route, "forward");
  EXPECT_EQ(cert.verdict, Verdict::exists);
  EXPECT_LE(cert.transition_automorphism_residual, 1e-7);
}

TEST(Coupling, TransportChartsRejectOuterCurvature) {
  const Scenario s = *scenarios::find("ts2");
  try {
    build_transport_charts(*s.connection);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
  }
}

TEST(Coupling, Ts2FailsWithCurvatureWitnesses) {
  const Scenario s = *scenarios::find("ts2");
  const CouplingCertificate cert = coupling_exists(s.bundle, s.connection);
  EXPECT_EQ(cert.verdict, Verdict::fails);
  EXPECT_EQ(cert.route, "curvature");
  bool curvature_witness = false;
  for (const auto& w : cert.witnesses) {
    EXPECT_GE(w.residual, s.bundle->tolerances().fail);
    curvature_witness = curvature_witness || w.kind == "curvature";
  }
  EXPECT_TRUE(curvature_witness);
}

TEST(Coupling, NonLieConnectionIsIgnored) {
  const Scenario s = *scenarios::find("so3-circle-nonlie");
  const CouplingCertificate cert = coupling_exists(s.bundle, s.connection);
  EXPECT_EQ(cert.route, "backward");
  EXPECT_GT(cert.lie_condition_residual, 0.1);
  EXPECT_FALSE(cert.notes.empty());
}

TEST(Coupling, VerdictStableUnderSeededSampling) {
  for (const char* name : {"heis-circle", "heis-circle-outer", "ts2"}) {
    ScenarioOptions opt;
    opt.res.seed = 99;
    const Scenario s = *scenarios::find(name, opt);
    EXPECT_EQ(coupling_exists(s.bundle, s.connection).verdict, *s.expected) << name;
  }
}

TEST(Coupling, CertificateIsDeterministic) {
  for (const char* name : {"heis-circle-outer", "sl2-circle"}) {
    const Scenario a = *scenarios::find(name);
    const Scenario b = *scenarios::find(name);
    const std::string ta = certificate_text(coupling_exists(a.bundle, a.connection), a.atlas(), a.name);
    const std::string tb = certificate_text(coupling_exists(b.bundle, b.connection), b.atlas(), b.name);
    EXPECT_EQ(ta, tb);
  }
}
