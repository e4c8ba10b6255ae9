#pragma once

// JSON experiment documents. Layout:
//
// {
//   "algebras":    [{"name", "dim", "brackets": [{"i", "j", "coeffs": [...]}]}],
//   "atlases":     [{"name", "builtin": "circle" | "sphere2" | "torus" | "box", "dim"?, "radius"?}
//                   or {"name", "dim", "ambient", "charts": [{"id", "to_point": [expr...],
//                       "to_coord": [expr...], "radius", "core_radius"?, "shape"?}]}],
//   "bundles":     [{"name", "fiber", "base", "transitions": [{"from", "to",
//                       "pieces": [{"range"?: [[lo, hi], ...], "matrix": [[expr...]...]}]}]}],
//   "connections": [{"name", "bundle", "forms": [{"chart", "components": [matrix per direction]}]}],
//   "scenarios":   [{"name", "bundle", "connection"?, "expected"?, "description"?}]
// }
//
// Bracket indices are 1-based. Expressions use variables x1..xd: chart
// coordinates for transitions and forms (the "from" chart for transitions),
// ambient coordinates in to_coord. A matrix entry may be a number or an
// expression string. Fibers may name a catalog algebra.

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liecouple/algebra_catalog.hpp"
#include "liecouple/bundle.hpp"
#include "liecouple/error.hpp"
#include "liecouple/expression.hpp"
#include "liecouple/geometry.hpp"
#include "liecouple/scenarios.hpp"

namespace liecouple {

struct ConfigDocument {
  std::map<std::string, LieAlgebra> algebras;
  std::map<std::string, std::shared_ptr<const Atlas>> atlases;
  std::map<std::string, std::shared_ptr<const LieAlgebraBundle>> bundles;
  std::map<std::string, LieConnection> connections;
  std::vector<Scenario> scenarios;

  const Scenario* find_scenario(const std::string& name) const {
    for (const auto& s : scenarios) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
};

namespace detail {

using json = nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorKind::config, where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorKind::config, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorKind::config, where + ": expected a number");
  return v.get<double>();
}

inline int require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw Error(ErrorKind::config, where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

inline const json& section(const json& doc, const char* key) {
  static const json empty = json::array();
  if (!doc.contains(key)) return empty;
  const json& s = doc.at(key);
  if (!s.is_array()) throw Error(ErrorKind::config, std::string("section '") + key + "' must be an array");
  return s;
}

inline Expression to_expression(const json& v, const std::string& where) {
  if (v.is_number()) return Expression::literal(v.get<double>());
  if (!v.is_string()) throw Error(ErrorKind::config, where + ": expected a number or an expression string");
  try {
    return parse_expression(v.get<std::string>());
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

/// Matrix of expressions, row-major, size n x n.
inline std::function<FiberEndo(const Vector&)> matrix_function(const json& m, int n, int max_var,
                                                              const std::string& where) {
  if (!m.is_array() || static_cast<int>(m.size()) != n) {
    throw Error(ErrorKind::config, where + ": matrix must have " + std::to_string(n) + " rows");
  }
  std::vector<Expression> entries;
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (!m[r].is_array() || static_cast<int>(m[r].size()) != n) {
      throw Error(ErrorKind::config, where + ": row " + std::to_string(r + 1) + " must have " + std::to_string(n) +
                                         " entries");
    }
    for (const auto& e : m[r]) {
      Expression ex = to_expression(e, where);
      if (ex.max_variable() > max_var) {
        throw Error(ErrorKind::config, where + ": variable x" + std::to_string(ex.max_variable()) +
                                           " exceeds the chart dimension");
      }
      entries.push_back(std::move(ex));
    }
  }
  return [entries = std::move(entries), n](const Vector& x) {
    FiberEndo out(n, n);
    const std::span<const double> vars(x.data(), static_cast<std::size_t>(x.size()));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) out(r, c) = evaluate(entries[static_cast<std::size_t>(r * n + c)], vars);
    return out;
  };
}

inline LieAlgebra parse_algebra(const json& a) {
  const std::string name = require_string(a, "name", "algebra");
  const std::string where = "algebra '" + name + "'";
  const int dim = require_int(a, "dim", where);
  std::vector<BracketEntry> entries;
  if (a.contains("brackets")) {
    for (const auto& b : a.at("brackets")) {
      BracketEntry e;
      e.i = require_int(b, "i", where) - 1;
      e.j = require_int(b, "j", where) - 1;
      for (const auto& c : require(b, "coeffs", where)) e.coeffs.push_back(require_number(c, where));
      entries.push_back(std::move(e));
    }
  }
  return LieAlgebra::from_brackets(name, dim, entries);
}

inline std::shared_ptr<const Atlas> parse_atlas(const json& a, const Resolution& res) {
  const std::string name = require_string(a, "name", "atlas");
  const std::string where = "atlas '" + name + "'";
  if (a.contains("builtin")) {
    const std::string kind = require_string(a, "builtin", where);
    if (kind == "circle") return atlases::circle(res);
    if (kind == "sphere2") return atlases::sphere2(res);
    if (kind == "torus") return atlases::torus(res);
    if (kind == "box") {
      const int dim = require_int(a, "dim", where);
      const double radius = a.contains("radius") ? require_number(a.at("radius"), where) : 2.0;
      if (dim < 1 || dim > 4) throw Error(ErrorKind::config, where + ": box dimension must be 1..4");
      return atlases::box(dim, radius, res);
    }
    throw Error(ErrorKind::config, where + ": unknown builtin '" + kind + "'");
  }
  const int dim = require_int(a, "dim", where);
  const int ambient = require_int(a, "ambient", where);
  std::vector<Chart> charts;
  for (const auto& c : require(a, "charts", where)) {
    const std::string id = require_string(c, "id", where);
    const std::string cw = where + " chart '" + id + "'";
    std::vector<Expression> to_point, to_coord;
    for (const auto& e : require(c, "to_point", cw)) to_point.push_back(to_expression(e, cw));
    for (const auto& e : require(c, "to_coord", cw)) to_coord.push_back(to_expression(e, cw));
    const double radius = require_number(require(c, "radius", cw), cw);
    const double core = c.contains("core_radius") ? require_number(c.at("core_radius"), cw) : 0.5 * radius;
    ChartShape shape = ChartShape::ball;
    if (c.contains("shape")) {
      const std::string sh = require_string(c, "shape", cw);
      if (sh == "cube") shape = ChartShape::cube;
      else if (sh != "ball") throw Error(ErrorKind::config, cw + ": shape must be 'ball' or 'cube'");
    }
    if (!(core > 0.0 && core <= radius)) {
      throw Error(ErrorKind::config, cw + ": need 0 < core_radius <= radius");
    }
    charts.push_back(atlases::expression_chart(id, dim, ambient, to_point, to_coord, radius, core, shape));
  }
  return std::make_shared<const Atlas>(name, ambient, std::move(charts), res);
}

inline LieAlgebra resolve_algebra(const std::map<std::string, LieAlgebra>& defined, const std::string& name) {
  if (auto it = defined.find(name); it != defined.end()) return it->second;
  if (auto g = catalog::find(name)) return *g;
  throw Error(ErrorKind::config, "unknown algebra '" + name + "'");
}

template <typename Map>
const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const char* what) {
  auto it = m.find(name);
  if (it == m.end()) throw Error(ErrorKind::config, std::string("unknown ") + what + " '" + name + "'");
  return it->second;
}

inline TransitionFn parse_transition_pieces(const json& t, int n, int d, const std::string& where) {
  struct Piece {
    std::vector<std::pair<double, double>> range;
    std::function<FiberEndo(const Vector&)> map;
  };
  std::vector<Piece> pieces;
  for (const auto& p : require(t, "pieces", where)) {
    Piece piece;
    if (p.contains("range")) {
      const json& r = p.at("range");
      if (!r.is_array() || static_cast<int>(r.size()) != d) {
        throw Error(ErrorKind::config, where + ": range needs one [lo, hi] per coordinate");
      }
      for (const auto& iv : r) {
        if (!iv.is_array() || iv.size() != 2) throw Error(ErrorKind::config, where + ": range entries are [lo, hi]");
        piece.range.emplace_back(require_number(iv[0], where), require_number(iv[1], where));
      }
    }
    piece.map = matrix_function(require(p, "matrix", where), n, d, where);
    pieces.push_back(std::move(piece));
  }
  if (pieces.empty()) throw Error(ErrorKind::config, where + ": transition needs at least one piece");
  return [pieces = std::move(pieces), where](const Vector& x) {
    for (const auto& p : pieces) {
      bool inside = true;
      for (std::size_t i = 0; i < p.range.size(); ++i) {
        const double v = x(static_cast<Eigen::Index>(i));
        inside = inside && v >= p.range[i].first && v <= p.range[i].second;
      }
      if (inside) return p.map(x);
    }
    throw Error(ErrorKind::domain, where + ": no piece covers the point");
  };
}

inline std::optional<Verdict> parse_verdict(const std::string& s, const std::string& where) {
  if (s == "exists") return Verdict::exists;
  if (s == "fails") return Verdict::fails;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw Error(ErrorKind::config, where + ": expected verdict must be exists, fails or inconclusive");
}

/// Default loop for a user atlas: a sector in chart 0 for surfaces, an out-and-back
/// segment otherwise.
inline PiecewisePath default_loop(const std::shared_ptr<const Atlas>& atlas) {
  const std::string& n = atlas->name();
  if (n == "circle") return scenarios::detail::circle_loop(atlas);
  if (n == "torus") return scenarios::detail::torus_loop(atlas);
  const double rho = 0.5 * atlas->chart(0).radius;
  if (atlas->dim() == 2) return sector_loop(atlas, 0, rho, std::numbers::pi / 2);
  const Vector far = Vector::Unit(atlas->dim(), 0) * rho;
  const PiecewisePath out = radial_path_coords(atlas, 0, far);
  return compose_paths(out, invert_path(out));
}

}  // namespace detail

inline ConfigDocument load_config(const std::string& text, const ScenarioOptions& opt = {}) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::syntax, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");

  ConfigDocument out;
  try {
    for (const auto& a : detail::section(doc, "algebras")) {
      LieAlgebra g = detail::parse_algebra(a);
      const AlgebraReport rep = validate_algebra(g, opt.tol.alg);
      if (!rep.accepted) throw Error(ErrorKind::numeric, "algebra '" + g.name() + "' violates the Lie algebra axioms");
      out.algebras[g.name()] = std::move(g);
    }
    for (const auto& a : detail::section(doc, "atlases")) {
      auto atlas = detail::parse_atlas(a, opt.res);
      out.atlases[detail::require_string(a, "name", "atlas")] = atlas;
    }
    for (const auto& b : detail::section(doc, "bundles")) {
      const std::string name = detail::require_string(b, "name", "bundle");
      const std::string where = "bundle '" + name + "'";
      const LieAlgebra fiber = detail::resolve_algebra(out.algebras, detail::require_string(b, "fiber", where));
      const auto& atlas = detail::lookup(out.atlases, detail::require_string(b, "base", where), "atlas");
      std::vector<TransitionSpec> ts;
      if (b.contains("transitions")) {
        for (const auto& t : b.at("transitions")) {
          const std::size_t from = atlas->index_of(detail::require_string(t, "from", where));
          const std::size_t to = atlas->index_of(detail::require_string(t, "to", where));
          const std::string tw = where + " transition " + atlas->chart(from).id + "->" + atlas->chart(to).id;
          ts.push_back({from, to, detail::parse_transition_pieces(t, fiber.dim(), atlas->dim(), tw)});
        }
      }
      out.bundles[name] = std::make_shared<const LieAlgebraBundle>(fiber, atlas, std::move(ts), opt.tol);
    }
    for (const auto& c : detail::section(doc, "connections")) {
      const std::string name = detail::require_string(c, "name", "connection");
      const std::string where = "connection '" + name + "'";
      const auto& bundle = detail::lookup(out.bundles, detail::require_string(c, "bundle", where), "bundle");
      const Atlas& atlas = bundle->atlas();
      std::vector<FormFn> forms(atlas.size(), zero_form(bundle->rank()));
      for (const auto& f : detail::require(c, "forms", where)) {
        const std::size_t chart = atlas.index_of(detail::require_string(f, "chart", where));
        const std::string fw = where + " chart '" + atlas.chart(chart).id + "'";
        const json& comps = detail::require(f, "components", fw);
        if (!comps.is_array() || static_cast<int>(comps.size()) != atlas.dim()) {
          throw Error(ErrorKind::config, fw + ": need one matrix per coordinate direction");
        }
        std::vector<std::function<FiberEndo(const Vector&)>> parts;
        for (const auto& m : comps) parts.push_back(detail::matrix_function(m, bundle->rank(), atlas.dim(), fw));
        forms[chart] = form_from_components(std::move(parts));
      }
      out.connections.emplace(name, LieConnection(bundle, std::move(forms)));
    }
    for (const auto& s : detail::section(doc, "scenarios")) {
      Scenario sc;
      sc.name = detail::require_string(s, "name", "scenario");
      const std::string where = "scenario '" + sc.name + "'";
      sc.bundle = detail::lookup(out.bundles, detail::require_string(s, "bundle", where), "bundle");
      if (s.contains("connection")) {
        sc.connection = detail::lookup(out.connections, detail::require_string(s, "connection", where), "connection");
      }
      if (s.contains("expected")) sc.expected = detail::parse_verdict(detail::require_string(s, "expected", where), where);
      if (s.contains("description")) sc.description = detail::require_string(s, "description", where);
      sc.loop = detail::default_loop(sc.bundle->atlas_ptr());
      out.scenarios.push_back(std::move(sc));
    }
  } catch (const detail::json::exception& e) {
    throw Error(ErrorKind::config, std::string("config: ") + e.what());
  }
  return out;
}

inline ConfigDocument load_config_file(const std::string& path, const ScenarioOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str(), opt);
}

}  // namespace liecouple
