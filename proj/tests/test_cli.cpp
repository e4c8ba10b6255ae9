#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "liecouple/cli.hpp"

using namespace liecouple;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string config_path = std::string(LIECOUPLE_CONFIG_DIR) + "/affine-circle.json";

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("liecouple_test_" + name);
}

}  // namespace

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(Verdict::exists), 0);
  EXPECT_EQ(exit_code_for(Verdict::fails), 2);
  EXPECT_EQ(exit_code_for(Verdict::inconclusive), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::syntax), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::config), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::dimension), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::evaluation), 5);
  EXPECT_EQ(exit_code_for(ErrorKind::domain), 5);
  EXPECT_EQ(exit_code_for(ErrorKind::numeric), 5);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 4);
  EXPECT_EQ(run({"frobnicate"}).code, 4);
  EXPECT_EQ(run({"coupling", "test"}).code, 4);
  EXPECT_EQ(run({"coupling", "test", "--scenario", "nope"}).code, 4);
  EXPECT_EQ(run({"coupling", "test", "--scenario", "ts2", "--steps", "2"}).code, 4);
  EXPECT_EQ(run({"algebra", "check", "e8"}).code, 4);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, AlgebraCommands) {
  const CliRun check = run({"algebra", "check", "sl2"});
  EXPECT_EQ(check.code, 0);
  EXPECT_NE(check.out.find("jacobi"), std::string::npos);
  const CliRun der = run({"algebra", "derivations", "heisenberg3"});
  EXPECT_EQ(der.code, 0);
  EXPECT_NE(der.out.find("dim_der: 6"), std::string::npos) << der.out;
  EXPECT_EQ(run({"algebra", "derivations", "aff", "--config", config_path}).code, 0);
}

TEST(Cli, CouplingTestVerdicts) {
  EXPECT_EQ(run({"coupling", "test", "--scenario", "ts2"}).code, 2);
  EXPECT_EQ(run({"coupling", "test", "--scenario", "heis-circle"}).code, 0);
  EXPECT_EQ(run({"coupling", "test", "--scenario", "heis-circle-outer"}).code, 2);
  EXPECT_EQ(run({"coupling", "build", "--scenario", "sl2-circle"}).code, 0);
}

TEST(Cli, InconclusiveWhenDeadbandIsWide) {
  // Every nonzero residual lands between pass and fail.
  EXPECT_EQ(run({"coupling", "test", "--scenario", "heis-circle-outer", "--tol-pass", "1e-12", "--tol-fail", "100"}).code,
            3);
}

TEST(Cli, CertificateContents) {
  const CliRun r = run({"coupling", "test", "--scenario", "ts2"});
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["verdict"], "fails");
  EXPECT_EQ(j["scenario"], "ts2");
  EXPECT_EQ(j["route"], "curvature");
  EXPECT_GE(j["witnesses"].size(), 1u);
  EXPECT_TRUE(j["connection"]["supplied"].get<bool>());
}

TEST(Cli, CertificateIsByteIdentical) {
  for (const char* name : {"ts2", "so3-circle", "abelian-torus-flat"}) {
    const CliRun a = run({"coupling", "test", "--scenario", name, "--steps", "64"});
    const CliRun b = run({"coupling", "test", "--scenario", name, "--steps", "64"});
    EXPECT_EQ(a.out, b.out) << name;
  }
}

TEST(Cli, OutAndCsvFiles) {
  const auto out = temp_file("cert.json");
  const auto csv = temp_file("delta.csv");
  const CliRun r = run({"coupling", "test", "--scenario", "heis-circle-outer", "--out", out.string(), "--csv", csv.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("verdict: fails"), std::string::npos);
  std::ifstream cert(out);
  EXPECT_EQ(nlohmann::json::parse(cert)["verdict"], "fails");
  std::ifstream table(csv);
  std::string header, row;
  std::getline(table, header);
  EXPECT_EQ(header, "pair,sample,point,direction,residual");
  std::size_t rows = 0;
  while (std::getline(table, row)) {
    ++rows;
    EXPECT_EQ(row.rfind("c0->c1,", 0), 0u) << row;
  }
  EXPECT_EQ(rows, 32u);
  std::filesystem::remove(out);
  std::filesystem::remove(csv);
}

TEST(Cli, BundleCommands) {
  EXPECT_EQ(run({"bundle", "check", "--scenario", "so3-sphere"}).code, 0);
  const CliRun tr = run({"bundle", "transport", "--scenario", "ts2", "--loops", "2"});
  EXPECT_EQ(tr.code, 0);
  EXPECT_NE(tr.out.find("lie_residual"), std::string::npos);
  EXPECT_EQ(run({"bundle", "transport", "--scenario", "so3-circle-nonlie"}).code, 5);
  EXPECT_EQ(run({"bundle", "transport", "--scenario", "heis-circle"}).code, 4);
  EXPECT_EQ(run({"bundle", "curvature", "--scenario", "so3-box", "--samples", "4"}).code, 0);
  EXPECT_EQ(run({"bundle", "holonomy", "--scenario", "so3-box", "--s-steps", "4", "--steps", "32"}).code, 0);
}

TEST(Cli, ScenarioList) {
  const CliRun r = run({"scenario", "list"});
  EXPECT_EQ(r.code, 0);
  for (const auto& name : scenarios::names()) EXPECT_NE(r.out.find(name), std::string::npos);
  const CliRun c = run({"scenario", "list", "--config", config_path});
  EXPECT_NE(c.out.find("aff-inner"), std::string::npos);
}

TEST(Config, SampleDocumentLoads) {
  const ConfigDocument doc = load_config_file(config_path);
  EXPECT_EQ(doc.scenarios.size(), 3u);
  ASSERT_NE(doc.find_scenario("aff-inner"), nullptr);
  EXPECT_EQ(doc.find_scenario("missing"), nullptr);
  for (const auto& s : doc.scenarios) {
    EXPECT_TRUE(check_bundle(*s.bundle).accepted) << s.name;
    if (s.connection) EXPECT_TRUE(check_connection(*s.connection).accepted) << s.name;
    EXPECT_EQ(coupling_exists(s.bundle, s.connection).verdict, *s.expected) << s.name;
  }
}

TEST(Config, ConfiguredScenarioThroughCli) {
  EXPECT_EQ(run({"coupling", "test", "--config", config_path, "--scenario", "aff-inner"}).code, 0);
  EXPECT_EQ(run({"coupling", "test", "--config", config_path, "--scenario", "heis-outer"}).code, 2);
}

TEST(Config, Errors) {
  auto kind_of = [](const std::string& text) {
    try {
      load_config(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::numeric;
  };
  EXPECT_EQ(kind_of("{"), ErrorKind::syntax);
  EXPECT_EQ(kind_of("[]"), ErrorKind::config);
  EXPECT_EQ(kind_of(R"({"atlases": [{"name": "a", "builtin": "klein"}]})"), ErrorKind::config);
  EXPECT_EQ(kind_of(R"({"algebras": [{"name": "bad", "dim": 3, "brackets": [
      {"i": 1, "j": 2, "coeffs": [0, 1, 0]}, {"i": 1, "j": 3, "coeffs": [0, 0, 1]},
      {"i": 2, "j": 3, "coeffs": [1, 0, 0]}]}]})"),
            ErrorKind::numeric);
  EXPECT_EQ(kind_of(R"({"atlases": [{"name": "S1", "builtin": "circle"}],
      "bundles": [{"name": "b", "fiber": "so3", "base": "S1", "transitions": [
        {"from": "c0", "to": "c1", "pieces": [{"matrix": [["1"]]}]}]}]})"),
            ErrorKind::config);
  EXPECT_EQ(kind_of(R"({"atlases": [{"name": "S1", "builtin": "circle"}],
      "bundles": [{"name": "b", "fiber": "abelian1", "base": "S1", "transitions": [
        {"from": "c0", "to": "c1", "pieces": [{"matrix": [["x2"]]}]}]}]})"),
            ErrorKind::config);
  EXPECT_EQ(kind_of(R"({"atlases": [{"name": "S1", "builtin": "circle"}],
      "bundles": [{"name": "b", "fiber": "abelian1", "base": "S1", "transitions": [
        {"from": "c0", "to": "c1", "pieces": [{"matrix": [["sin("]]}]}]}]})"),
            ErrorKind::syntax);
  EXPECT_EQ(kind_of(R"({"bundles": [{"name": "b", "fiber": "so3", "base": "nowhere"}]})"), ErrorKind::config);
}

TEST(Config, ExpressionAtlas) {
  const ConfigDocument doc = load_config(R"({
    "atlases": [{"name": "line", "dim": 1, "ambient": 1, "charts": [
      {"id": "a", "to_point": ["x1"], "to_coord": ["x1"], "radius": 1.0},
      {"id": "b", "to_point": ["x1 + 1"], "to_coord": ["x1 - 1"], "radius": 1.0, "core_radius": 0.5}]}],
    "bundles": [{"name": "b", "fiber": "abelian1", "base": "line", "transitions": [
      {"from": "a", "to": "b", "pieces": [{"range": [[0, 1]], "matrix": [["2"]]}]}]}],
    "scenarios": [{"name": "s", "bundle": "b", "expected": "exists"}]
  })");
  const Scenario* s = doc.find_scenario("s");
  ASSERT_NE(s, nullptr);
  EXPECT_TRUE(validate_atlas(s->atlas()).accepted);
  EXPECT_EQ(coupling_exists(s->bundle).verdict, Verdict::exists);
}
