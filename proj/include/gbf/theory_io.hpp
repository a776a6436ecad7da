/**
 * This code is part of gbfkit.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE.txt file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 *
 * Any modifications or derivative works of this code must retain this
 * copyright notice, and modified files need to carry a notice indicating
 * that they have been altered from the originals.
 */

#ifndef GBF_THEORY_IO_HPP
#define GBF_THEORY_IO_HPP

#include <ctime>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gbf/report.hpp"
#include "gbf/theory.hpp"

namespace gbf {

using json = nlohmann::json;

inline json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("complex numbers must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json cvec_to_json(const cvec& v) {
  json out = json::array();
  for (long n = 0; n < v.size(); ++n) out.push_back(complex_to_json(v(n)));
  return out;
}

inline cvec cvec_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("coefficient arrays must be JSON arrays");
  cvec v(static_cast<long>(j.size()));
  for (std::size_t n = 0; n < j.size(); ++n) v(static_cast<long>(n)) = complex_from_json(j[n]);
  return v;
}

inline json theory_to_json(const Theory& th) {
  json out;
  out["format"] = "gbf-theoryspec";
  out["version"] = 1;
  out["metadata"] = {{"name", th.name}, {"seed", th.seed}, {"main_region", th.main_region}};

  json hyp = json::array();
  for (const auto& [id, h] : th.system.hypersurfaces) {
    json e;
    e["id"] = id;
    if (h.empty_surface) e["empty"] = true;
    if (!h.components.empty()) {
      json comps = json::array();
      for (const auto& c : h.components) comps.push_back(c.str());
      e["components"] = comps;
    }
    if (h.copy_of) e["copy_of"] = *h.copy_of;
    if (!h.metadata.empty()) e["metadata"] = h.metadata;
    hyp.push_back(e);
  }
  out["hypersurfaces"] = hyp;

  json regs = json::array();
  for (const auto& [id, r] : th.system.regions) {
    json e;
    e["id"] = id;
    e["boundary"] = r.boundary.str();
    if (r.slice_of) e["slice_of"] = *r.slice_of;
    if (!r.metadata.empty()) e["metadata"] = r.metadata;
    regs.push_back(e);
  }
  out["regions"] = regs;

  json decs = json::array();
  for (const auto& d : th.system.decompositions) {
    json e;
    e["whole"] = d.whole.str();
    json parts = json::array();
    for (const auto& p : d.parts) parts.push_back(p.str());
    e["parts"] = parts;
    decs.push_back(e);
  }
  out["decompositions"] = decs;

  json glu = json::array();
  for (const auto& g : th.system.gluings) {
    json e;
    e["id"] = g.id;
    e["kind"] = (g.kind == GluingKind::SelfGluing) ? "self" : "disjoint";
    json ins = json::array();
    for (const auto& in : g.inputs) ins.push_back(in.str());
    e["inputs"] = ins;
    if (g.kind == GluingKind::SelfGluing) {
      e["sigma"] = g.sigma.str();
      e["sigma_bar_prime"] = g.sigma_bar_prime.str();
    }
    e["result"] = g.result.str();
    glu.push_back(e);
  }
  out["gluings"] = glu;

  json spaces = json::object();
  for (const auto& [id, sp] : th.registry.atoms) {
    spaces[id] = {{"dim", sp.dim}, {"fdeg", sp.fdeg}, {"sig", sp.sig}, {"labels", sp.labels}};
  }
  out["spaces"] = spaces;

  json amps = json::object();
  for (const auto& [id, coeffs] : th.amplitudes) amps[id] = cvec_to_json(coeffs);
  out["amplitudes"] = amps;

  json obs = json::object();
  for (const auto& [id, o] : th.observables) {
    json e;
    e["region"] = o.region.str();
    if (o.fdeg) e["fdeg"] = *o.fdeg;
    e["coeffs"] = cvec_to_json(o.coeffs);
    obs[id] = e;
  }
  out["observables"] = obs;

  json ano = json::object();
  for (const auto& [id, c] : th.anomalies) ano[id] = complex_to_json(c);
  out["anomalies"] = ano;
  return out;
}

inline Theory theory_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "gbf-theoryspec")
    throw std::invalid_argument("not a gbf-theoryspec document");
  if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported theoryspec version");

  Theory th;
  const json& meta = j.value("metadata", json::object());
  th.name = meta.value("name", "");
  th.seed = meta.value("seed", std::uint64_t{0});
  th.main_region = meta.value("main_region", "");

  for (const auto& e : j.value("hypersurfaces", json::array())) {
    Hypersurface h;
    h.id = e.at("id").get<std::string>();
    h.empty_surface = e.value("empty", false);
    for (const auto& c : e.value("components", json::array()))
      h.components.push_back(HRef::parse(c.get<std::string>()));
    if (e.contains("copy_of")) h.copy_of = e["copy_of"].get<std::string>();
    h.metadata = e.value("metadata", "");
    th.system.hypersurfaces.emplace(h.id, std::move(h));
  }
  for (const auto& e : j.value("regions", json::array())) {
    Region r;
    r.id = e.at("id").get<std::string>();
    r.boundary = HRef::parse(e.at("boundary").get<std::string>());
    if (e.contains("slice_of")) r.slice_of = e["slice_of"].get<std::string>();
    r.metadata = e.value("metadata", "");
    th.system.regions.emplace(r.id, std::move(r));
  }
  for (const auto& e : j.value("decompositions", json::array())) {
    Decomposition d;
    d.whole = HRef::parse(e.at("whole").get<std::string>());
    for (const auto& p : e.at("parts")) d.parts.push_back(HRef::parse(p.get<std::string>()));
    th.system.decompositions.push_back(std::move(d));
  }
  for (const auto& e : j.value("gluings", json::array())) {
    GluingRecord g;
    g.id = e.at("id").get<std::string>();
    std::string kind = e.at("kind").get<std::string>();
    if (kind == "self") g.kind = GluingKind::SelfGluing;
    else if (kind == "disjoint") g.kind = GluingKind::DisjointUnion;
    else throw std::invalid_argument("unknown gluing kind: " + kind);
    for (const auto& in : e.at("inputs")) g.inputs.push_back(RRef::parse(in.get<std::string>()));
    if (g.kind == GluingKind::SelfGluing) {
      g.sigma = HRef::parse(e.at("sigma").get<std::string>());
      g.sigma_bar_prime = HRef::parse(e.at("sigma_bar_prime").get<std::string>());
    }
    g.result = RRef::parse(e.at("result").get<std::string>());
    th.system.gluings.push_back(std::move(g));
  }
  const json spaces_j = j.value("spaces", json::object());
  for (const auto& [id, e] : spaces_j.items()) {
    th.registry.atoms[id] = KreinSpace::make(
        e.at("dim").get<int>(), e.value("fdeg", std::vector<int>{}),
        e.value("sig", std::vector<int>{}), e.value("labels", std::vector<std::string>{}));
  }
  const json amps_j = j.value("amplitudes", json::object());
  for (const auto& [id, e] : amps_j.items()) th.amplitudes[id] = cvec_from_json(e);
  const json obs_j = j.value("observables", json::object());
  for (const auto& [id, e] : obs_j.items()) {
    ObservableMap o;
    o.region = RRef::parse(e.at("region").get<std::string>());
    if (e.contains("fdeg") && !e["fdeg"].is_null()) o.fdeg = e["fdeg"].get<int>();
    o.coeffs = cvec_from_json(e.at("coeffs"));
    th.observables.emplace(id, std::move(o));
  }
  const json ano_j = j.value("anomalies", json::object());
  for (const auto& [id, e] : ano_j.items()) th.anomalies[id] = complex_from_json(e);

  // Shape checks: amplitude and observable lengths against their spaces.
  for (const auto& [id, coeffs] : th.amplitudes) {
    const ProductSpace& sp = th.boundary_space({id, false});
    if (coeffs.size() != sp.dim)
      throw std::invalid_argument("amplitude for " + id + " has wrong length");
  }
  for (const auto& [id, o] : th.observables) {
    const ProductSpace& sp = th.boundary_space(o.region);
    if (o.coeffs.size() != sp.dim)
      throw std::invalid_argument("observable " + id + " has wrong length");
  }
  for (const auto& [id, c] : th.anomalies)
    if (c == cplx(0, 0)) throw std::invalid_argument("anomaly for " + id + " must be nonzero");
  return th;
}

inline void save_theory(const Theory& th, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << theory_to_json(th).dump(2) << "\n";
}

inline Theory load_theory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return theory_from_json(j);
}

inline json report_to_json(const Report& rep, const std::string& suite,
                           const std::string& theory_name, bool with_timestamp = true) {
  json out;
  out["format"] = "gbf-report";
  out["suite"] = suite;
  out["theory"] = theory_name;
  if (with_timestamp) {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out["generated_at"] = buf;
  }
  out["pass"] = rep.pass();
  out["max_deviation"] = rep.max_deviation();
  json results = json::array();
  for (const auto& r : rep.results) {
    results.push_back({{"check", r.id},
                       {"subject", r.subject},
                       {"max_deviation", r.max_deviation},
                       {"pass", r.pass},
                       {"details", r.details}});
  }
  out["results"] = results;
  return out;
}

}  // namespace gbf

#endif  // GBF_THEORY_IO_HPP
