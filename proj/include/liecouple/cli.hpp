#pragma once

// Command-line front end. run_command() takes the arguments after the
// program name and writes to the given streams, so it can be driven in-process.

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liecouple/algebra_catalog.hpp"
#include "liecouple/bundle.hpp"
#include "liecouple/config.hpp"
#include "liecouple/coupling.hpp"
#include "liecouple/report.hpp"
#include "liecouple/scenarios.hpp"

namespace liecouple {

namespace exit_code {
constexpr int ok = 0;
constexpr int fails = 2;
constexpr int inconclusive = 3;
constexpr int config = 4;
constexpr int numeric = 5;
}  // namespace exit_code

inline int exit_code_for(Verdict v) {
  switch (v) {
    case Verdict::exists: return exit_code::ok;
    case Verdict::fails: return exit_code::fails;
    case Verdict::inconclusive: return exit_code::inconclusive;
  }
  return exit_code::inconclusive;
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::syntax:
    case ErrorKind::config:
    case ErrorKind::dimension: return exit_code::config;
    case ErrorKind::evaluation:
    case ErrorKind::domain:
    case ErrorKind::numeric: return exit_code::numeric;
  }
  return exit_code::config;
}

namespace detail {

struct CommonFlags {
  int steps = Resolution{}.steps;
  int samples = Resolution{}.overlap_samples;
  std::optional<std::uint64_t> seed;
  Tolerances tol;
  std::string config;
  std::string scenario;
  std::string csv;
  std::string out;
  int loops = 1;
  int s_steps = 64;
  std::string algebra;

  ScenarioOptions options() const {
    ScenarioOptions o;
    o.res.steps = steps;
    o.res.overlap_samples = samples;
    o.res.chart_samples = samples;
    o.res.seed = seed;
    o.tol = tol;
    return o;
  }
};

inline void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--steps", f.steps, "RK4 steps per path segment")->check(CLI::Range(8, 1 << 20));
  cmd->add_option("--samples", f.samples, "sample points per chart and per overlap")->check(CLI::Range(1, 100000));
  cmd->add_option("--fd-step", f.tol.fd_step, "transition finite-difference step, fraction of chart radius");
  cmd->add_option("--tol-pass", f.tol.pass, "relative residual counted as zero");
  cmd->add_option("--tol-fail", f.tol.fail, "relative residual counted as a decisive witness");
  cmd->add_option("--tol-inner", f.tol.inner, "relative tolerance for membership in ad g");
  cmd->add_option("--tol-alg", f.tol.alg, "absolute tolerance for algebraic identities");
  cmd->add_option("--tol-conn", f.tol.conn, "connection compatibility tolerance");
  cmd->add_option("--tol-transport", f.tol.transport, "transport consistency tolerance");
  cmd->add_option("--seed", f.seed, "random sample placement with this seed instead of Halton points");
  cmd->add_option("--config", f.config, "JSON experiment document");
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

inline void print_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "  [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s% .12f", c ? ", " : "", m(r, c));
      out << buf;
    }
    out << "]\n";
  }
}

inline std::optional<ConfigDocument> load_if_given(const CommonFlags& f) {
  if (f.config.empty()) return std::nullopt;
  return load_config_file(f.config, f.options());
}

inline Scenario resolve_scenario(const CommonFlags& f) {
  if (f.scenario.empty()) throw Error(ErrorKind::config, "--scenario is required");
  if (auto doc = load_if_given(f)) {
    if (const Scenario* s = doc->find_scenario(f.scenario)) return *s;
  }
  if (auto s = scenarios::find(f.scenario, f.options())) return *s;
  throw Error(ErrorKind::config, "unknown scenario '" + f.scenario + "'");
}

inline LieAlgebra resolve_algebra(const CommonFlags& f) {
  if (auto doc = load_if_given(f)) {
    if (auto it = doc->algebras.find(f.algebra); it != doc->algebras.end()) return it->second;
  }
  if (auto g = catalog::find(f.algebra)) return *g;
  throw Error(ErrorKind::config, "unknown algebra '" + f.algebra + "'");
}

inline int cmd_algebra_check(const CommonFlags& f, std::ostream& out) {
  const LieAlgebra g = resolve_algebra(f);
  const AlgebraReport r = validate_algebra(g, f.tol.alg);
  out << "algebra: " << g.name() << "\n"
      << "dim: " << g.dim() << "\n"
      << "antisymmetry_residual: " << fmt(r.antisymmetry) << "\n"
      << "jacobi_residual: " << fmt(r.jacobi) << "\n"
      << "accepted: " << (r.accepted ? "yes" : "no") << "\n";
  return r.accepted ? exit_code::ok : exit_code::numeric;
}

inline int cmd_algebra_derivations(const CommonFlags& f, std::ostream& out) {
  const LieAlgebra g = resolve_algebra(f);
  const DerivationSpace ds = derivation_space(g, f.tol);
  out << "algebra: " << g.name() << "\n"
      << "dim_der: " << ds.der_dim() << "\n"
      << "dim_ad: " << ds.ad_dim() << "\n"
      << "dim_center: " << ds.center_dim << "\n"
      << "dim_outer: " << ds.der_dim() - ds.ad_dim() << "\n"
      << "rank_ambiguous: " << (ds.ambiguous ? "yes" : "no") << "\n";
  double worst = 0.0;
  for (const auto& d : ds.der_basis) worst = std::max(worst, derivation_residual(g, d));
  out << "max_basis_derivation_residual: " << fmt(worst) << "\n";
  for (std::size_t i = 0; i < ds.der_basis.size(); ++i) {
    out << "der_basis[" << i + 1 << "]:\n";
    print_matrix(out, ds.der_basis[i]);
  }
  return ds.ambiguous ? exit_code::inconclusive : exit_code::ok;
}

inline int cmd_scenario_list(const CommonFlags& f, std::ostream& out) {
  if (auto doc = load_if_given(f)) {
    for (const auto& s : doc->scenarios) {
      out << s.name << "  expected=" << (s.expected ? to_string(*s.expected) : "-") << "  " << s.description << "\n";
    }
  }
  for (const auto& name : scenarios::names()) {
    const Scenario s = *scenarios::find(name, f.options());
    out << s.name << "  expected=" << (s.expected ? to_string(*s.expected) : "-") << "  " << s.description << "\n";
  }
  return exit_code::ok;
}

inline int cmd_bundle_check(const CommonFlags& f, std::ostream& out) {
  const Scenario s = resolve_scenario(f);
  const AtlasReport ar = validate_atlas(s.atlas(), f.tol.geo);
  const BundleReport br = check_bundle(*s.bundle);
  out << "scenario: " << s.name << "\n"
      << "atlas: " << s.atlas().name() << " (" << s.atlas().size() << " charts, dim " << s.atlas().dim() << ")\n"
      << "atlas_roundtrip_residual: " << fmt(ar.max_roundtrip) << "\n"
      << "atlas_accepted: " << (ar.accepted ? "yes" : "no") << "\n"
      << "fiber: " << s.bundle->fiber().name() << "\n"
      << "automorphism_residual: " << fmt(br.max_automorphism) << "\n"
      << "cocycle_residual: " << fmt(br.max_cocycle) << "\n"
      << "bundle_accepted: " << (br.accepted ? "yes" : "no") << "\n";
  bool ok = ar.accepted && br.accepted;
  if (s.connection) {
    const ConnectionReport cr = check_connection(*s.connection);
    out << "connection_lie_residual: " << fmt(cr.max_lie_residual) << "\n"
        << "connection_compatibility_residual: " << fmt(cr.max_compatibility) << "\n"
        << "connection_accepted: " << (cr.accepted ? "yes" : "no") << "\n";
    ok = ok && cr.accepted;
  }
  return ok ? exit_code::ok : exit_code::numeric;
}

inline const LieConnection& require_connection(const Scenario& s) {
  if (!s.connection) throw Error(ErrorKind::config, "scenario '" + s.name + "' has no connection");
  return *s.connection;
}

inline int cmd_bundle_transport(const CommonFlags& f, std::ostream& out) {
  const Scenario s = resolve_scenario(f);
  const LieConnection& c = require_connection(s);
  if (!s.loop) throw Error(ErrorKind::config, "scenario '" + s.name + "' has no default loop");
  const PiecewisePath loop = repeat_loop(*s.loop, f.loops);
  const TransportResult r = parallel_transport(c, loop, f.steps);
  out << "scenario: " << s.name << "\n"
      << "loops: " << f.loops << "\n"
      << "segments: " << loop.size() << "\n"
      << "steps: " << r.step_count << "\n"
      << "frames: " << s.atlas().chart(r.start_chart).id << " -> " << s.atlas().chart(r.end_chart).id << "\n"
      << "transport:\n";
  print_matrix(out, r.map);
  out << "lie_residual: " << fmt(r.lie_residual) << "\n";
  return r.lie_residual <= f.tol.transport ? exit_code::ok : exit_code::numeric;
}

inline int cmd_bundle_curvature(const CommonFlags& f, std::ostream& out) {
  const Scenario s = resolve_scenario(f);
  const LieConnection& c = require_connection(s);
  const auto survey = curvature_survey(c);
  double max_norm = 0.0;
  double max_res = 0.0;
  const CurvatureSample* worst = nullptr;
  for (const auto& cs : survey) {
    max_norm = std::max(max_norm, cs.value.endo.norm());
    if (!worst || cs.residual > max_res) {
      max_res = cs.residual;
      worst = &cs;
    }
  }
  out << "scenario: " << s.name << "\n"
      << "samples: " << survey.size() << "\n"
      << "max_curvature_norm: " << fmt(max_norm) << "\n"
      << "max_outer_residual: " << fmt(max_res) << "\n"
      << "ad_valued: " << (max_res <= f.tol.pass ? "yes" : "no") << "\n";
  if (worst) {
    out << "worst_sample: chart " << s.atlas().chart(worst->chart).id << " #" << worst->index << " directions ("
        << worst->i + 1 << "," << worst->j + 1 << ")\n"
        << "worst_value:\n";
    print_matrix(out, worst->value.endo);
    if (worst->value.omega) {
      out << "omega_witness:";
      for (Eigen::Index i = 0; i < worst->value.omega->size(); ++i) out << " " << fmt((*worst->value.omega)(i));
      out << "\n";
    }
  }
  return exit_code::ok;
}

inline int cmd_bundle_holonomy(const CommonFlags& f, std::ostream& out) {
  const Scenario s = resolve_scenario(f);
  const LieConnection& c = require_connection(s);
  if (!s.homotopy) throw Error(ErrorKind::config, "scenario '" + s.name + "' has no default homotopy");
  const HolonomyVariationReport r = holonomy_variation_check(c, *s.homotopy, f.s_steps, f.steps);
  out << "scenario: " << s.name << "\n"
      << "grid: " << f.s_steps << " x " << f.steps << "\n"
      << "s_range: [" << s.homotopy->s_min << ", " << s.homotopy->s_max << "]\n"
      << "max_dsP_norm: " << fmt(r.max_lhs) << "\n"
      << "max_residual: " << fmt(r.max_residual) << "\n";
  return exit_code::ok;
}

inline void emit_certificate(const CommonFlags& f, const CouplingCertificate& cert, const Scenario& s,
                             std::ostream& out) {
  const std::string text = certificate_text(cert, s.atlas(), s.name);
  if (f.out.empty()) {
    out << text;
  } else {
    std::ofstream file(f.out, std::ios::binary);
    if (!file) throw Error(ErrorKind::config, "cannot write '" + f.out + "'");
    file << text;
    out << "verdict: " << to_string(cert.verdict) << "\n";
  }
  if (!f.csv.empty()) {
    std::ofstream file(f.csv, std::ios::binary);
    if (!file) throw Error(ErrorKind::config, "cannot write '" + f.csv + "'");
    write_csv(file, cert, s.atlas());
  }
}

inline int cmd_coupling(const CommonFlags& f, bool build_only, std::ostream& out) {
  const Scenario s = resolve_scenario(f);
  CouplingCertificate cert;
  if (build_only) {
    const auto reports = delta_continuity_test(*s.bundle);
    cert = build_coupling(s.bundle, reports, build_partition(s.bundle->atlas_ptr()));
  } else {
    cert = coupling_exists(s.bundle, s.connection);
  }
  emit_certificate(f, cert, s, out);
  return exit_code_for(cert.verdict);
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lie algebra bundles, Lie connections and couplings with the tangent bundle", "liecouple"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 exists/pass, 2 verdict fails, 3 inconclusive, 4 config or usage error, "
      "5 numeric validation failure.\n"
      "CSV columns (--csv): pair,sample,point,direction,residual. point is the model point with "
      "coordinates separated by ';', direction is the 1-based coordinate index in the first chart of the pair, "
      "residual is the relative distance of the logarithmic derivative to ad g.");

  detail::CommonFlags f;
  enum class Cmd { none, alg_check, alg_der, b_check, b_transport, b_curv, b_hol, c_test, c_build, s_list };
  Cmd cmd = Cmd::none;

  auto* algebra = app.add_subcommand("algebra", "Lie algebra checks")->require_subcommand(1);
  auto* a_check = algebra->add_subcommand("check", "validate antisymmetry and the Jacobi identity");
  auto* a_der = algebra->add_subcommand("derivations", "dimensions of Der g, ad g and the center");
  for (auto* c : {a_check, a_der}) {
    c->add_option("name", f.algebra, "catalog name or algebra defined in --config")->required();
    detail::add_common(c, f);
  }
  a_check->callback([&] { cmd = Cmd::alg_check; });
  a_der->callback([&] { cmd = Cmd::alg_der; });

  auto* bundle = app.add_subcommand("bundle", "bundle and connection checks")->require_subcommand(1);
  auto* b_check = bundle->add_subcommand("check", "automorphism, cocycle and connection residuals");
  auto* b_transport = bundle->add_subcommand("transport", "parallel transport around the scenario loop");
  auto* b_curv = bundle->add_subcommand("curvature", "curvature at chart samples and its ad g component");
  auto* b_hol = bundle->add_subcommand("holonomy", "holonomy variation along the scenario homotopy");
  for (auto* c : {b_check, b_transport, b_curv, b_hol}) {
    c->add_option("--scenario", f.scenario, "builtin scenario or one defined in --config")->required();
    detail::add_common(c, f);
  }
  b_transport->add_option("--loops", f.loops, "number of times the loop is traversed")->check(CLI::Range(1, 1000));
  b_hol->add_option("--s-steps", f.s_steps, "intervals of the homotopy parameter")->check(CLI::Range(2, 100000));
  b_check->callback([&] { cmd = Cmd::b_check; });
  b_transport->callback([&] { cmd = Cmd::b_transport; });
  b_curv->callback([&] { cmd = Cmd::b_curv; });
  b_hol->callback([&] { cmd = Cmd::b_hol; });

  auto* coupling = app.add_subcommand("coupling", "coupling decision and certificate")->require_subcommand(1);
  auto* c_test = coupling->add_subcommand("test", "decide existence, using the connection when one is given");
  auto* c_build = coupling->add_subcommand("build", "backward construction from the given transitions only");
  for (auto* c : {c_test, c_build}) {
    c->add_option("--scenario", f.scenario, "builtin scenario or one defined in --config")->required();
    c->add_option("--csv", f.csv, "write per-sample delta-test residuals as CSV");
    c->add_option("--out", f.out, "write the certificate here instead of stdout");
    detail::add_common(c, f);
  }
  c_test->callback([&] { cmd = Cmd::c_test; });
  c_build->callback([&] { cmd = Cmd::c_build; });

  auto* scenario = app.add_subcommand("scenario", "scenario catalog")->require_subcommand(1);
  auto* s_list = scenario->add_subcommand("list", "list builtin and configured scenarios");
  detail::add_common(s_list, f);
  s_list->callback([&] { cmd = Cmd::s_list; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::config;
  }

  try {
    switch (cmd) {
      case Cmd::alg_check: return detail::cmd_algebra_check(f, out);
      case Cmd::alg_der: return detail::cmd_algebra_derivations(f, out);
      case Cmd::b_check: return detail::cmd_bundle_check(f, out);
      case Cmd::b_transport: return detail::cmd_bundle_transport(f, out);
      case Cmd::b_curv: return detail::cmd_bundle_curvature(f, out);
      case Cmd::b_hol: return detail::cmd_bundle_holonomy(f, out);
      case Cmd::c_test: return detail::cmd_coupling(f, false, out);
      case Cmd::c_build: return detail::cmd_coupling(f, true, out);
      case Cmd::s_list: return detail::cmd_scenario_list(f, out);
      case Cmd::none: break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  err << "error: no command\n";
  return exit_code::config;
}

}  // namespace liecouple
