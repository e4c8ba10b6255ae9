#pragma once

// Certificate serialization. Key order and number formatting are fixed so
// that identical runs produce identical bytes.

#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "liecouple/coupling.hpp"
#include "liecouple/geometry.hpp"

#ifndef LIECOUPLE_VERSION
#define LIECOUPLE_VERSION "1.0.0"
#endif

namespace liecouple {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline ordered_json to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ordered_json to_json(const Tolerances& t) {
  return ordered_json{{"alg", t.alg},   {"inner", t.inner}, {"exp", t.exp},           {"rank", t.rank},
                      {"geo", t.geo},   {"conn", t.conn},   {"transport", t.transport}, {"pass", t.pass},
                      {"fail", t.fail}, {"fd_step", t.fd_step}, {"curvature_fd", t.curvature_fd}};
}

inline ordered_json to_json(const Resolution& r) {
  ordered_json j{{"steps", r.steps}, {"overlap_samples", r.overlap_samples}, {"chart_samples", r.chart_samples}};
  if (r.seed) j["seed"] = *r.seed;
  else j["seed"] = nullptr;
  return j;
}

/// Machine-readable certificate for one coupling decision.
inline ordered_json certificate_json(const CouplingCertificate& cert, const Atlas& atlas, const std::string& scenario) {
  ordered_json j;
  j["version"] = LIECOUPLE_VERSION;
  j["scenario"] = scenario;
  j["verdict"] = to_string(cert.verdict);
  j["route"] = cert.route;
  j["tolerances"] = to_json(cert.tol);
  j["resolution"] = to_json(cert.res);

  ordered_json conn;
  conn["supplied"] = cert.connection_supplied;
  if (cert.connection_supplied) {
    conn["lie_condition_residual"] = cert.lie_condition_residual;
    conn["curvature_samples"] = cert.curvature_samples;
    conn["max_curvature_outer_residual"] = cert.max_curvature_residual;
  }
  j["connection"] = conn;

  if (cert.route == "forward") {
    j["transport_charts"] = ordered_json{{"max_automorphism_residual", cert.transition_automorphism_residual},
                                         {"max_cocycle_residual", cert.transition_cocycle_residual}};
  }

  ordered_json delta = ordered_json::array();
  for (const auto& rep : cert.delta) {
    delta.push_back(ordered_json{{"pair", atlas.chart(rep.alpha).id + "->" + atlas.chart(rep.beta).id},
                                 {"samples", rep.samples.size()},
                                 {"max_residual", rep.max_residual},
                                 {"passes", rep.passes}});
  }
  j["delta_continuity"] = delta;

  ordered_json coupling;
  coupling["built"] = cert.coupling_built;
  if (cert.coupling_built) {
    ordered_json curv;
    for (std::size_t a = 0; a < cert.outer_curvature_residuals.size(); ++a) {
      curv[atlas.chart(a).id] = cert.outer_curvature_residuals[a];
    }
    coupling["local_curvature"] = curv;
    ordered_json overlap = ordered_json::array();
    for (const auto& pr : cert.overlap) {
      overlap.push_back(ordered_json{{"pair", atlas.chart(pr.alpha).id + "->" + atlas.chart(pr.beta).id},
                                     {"samples", pr.samples},
                                     {"max_inner_residual", pr.max_residual},
                                     {"max_witness_gap", pr.max_witness_gap}});
    }
    coupling["overlap"] = overlap;
    coupling["witness_tolerance"] = cert.witness_tolerance;
    coupling["blend_lie_residual"] = cert.blend_lie_residual;
    coupling["blend_inner_residual"] = cert.blend_inner_residual;
  }
  j["coupling"] = coupling;

  ordered_json witnesses = ordered_json::array();
  for (const auto& w : cert.witnesses) {
    witnesses.push_back(ordered_json{{"kind", w.kind},
                                     {"location", w.location},
                                     {"sample", w.sample},
                                     {"point", to_json(w.point)},
                                     {"direction", to_json(w.direction)},
                                     {"residual", w.residual}});
  }
  j["witnesses"] = witnesses;
  j["notes"] = cert.notes;
  return j;
}

inline std::string certificate_text(const CouplingCertificate& cert, const Atlas& atlas, const std::string& scenario) {
  return certificate_json(cert, atlas, scenario).dump(2) + "\n";
}

/// One row per delta-test sample: pair,sample,point,direction,residual. The
/// point is the ambient model point with coordinates joined by ';'; the
/// direction is the 1-based coordinate index in the pair's first chart.
inline void write_csv(std::ostream& out, const CouplingCertificate& cert, const Atlas& atlas) {
  out << "pair,sample,point,direction,residual\n";
  for (const auto& rep : cert.delta) {
    const std::string pair = atlas.chart(rep.alpha).id + "->" + atlas.chart(rep.beta).id;
    for (const auto& s : rep.samples) {
      std::ostringstream pt;
      pt.precision(17);
      for (Eigen::Index i = 0; i < s.point.size(); ++i) pt << (i ? ";" : "") << s.point(i);
      std::ostringstream res;
      res.precision(17);
      res << s.residual;
      out << pair << ',' << s.index << ',' << pt.str() << ',' << (s.direction + 1) << ',' << res.str() << '\n';
    }
  }
}

}  // namespace liecouple
