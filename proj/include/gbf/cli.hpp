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

#ifndef GBF_CLI_HPP
#define GBF_CLI_HPP

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbf/measurement.hpp"
#include "gbf/suite.hpp"
#include "gbf/theory_io.hpp"
#include "gbf/theory_library.hpp"

namespace gbf::cli {

inline std::uint64_t effective_seed(std::uint64_t from_flag) {
  if (const char* env = std::getenv("GBF_SEED")) return std::strtoull(env, nullptr, 10);
  return from_flag;
}

inline int cmd_generate(const std::string& kind, int dim, std::uint64_t seed, int intervals,
                        const std::vector<int>& fdeg, const std::vector<int>& sig,
                        const std::string& out_path) {
  if (dim < 1) {
    std::cerr << "error: dimension must be at least 1\n";
    return 2;
  }
  try {
    Theory th;
    Rng rng(seed);
    if (kind == "interval") {
      IntervalTheoryConfig cfg;
      cfg.dim = dim;
      cfg.seed = seed;
      cfg.fdeg = fdeg;
      cfg.sig = sig;
      cfg.name = "interval-d" + std::to_string(dim) + "-s" + std::to_string(seed);
      for (int k = 0; k < std::max(1, intervals); ++k)
        cfg.unitaries.push_back(rng.haar_unitary(dim));
      th = build_interval_theory(cfg);
    } else if (kind == "fermionic-toy") {
      FermionicToyConfig cfg;
      cfg.dim = dim;
      cfg.seed = seed;
      cfg.fdeg = fdeg;
      cfg.sig = sig;
      if (cfg.fdeg.empty()) {
        cfg.fdeg.assign(dim, 0);
        for (int i = 1; i < dim; i += 2) cfg.fdeg[i] = 1;
      }
      if (cfg.sig.empty()) cfg.sig.assign(dim, 0);
      cfg.name = "fermionic-d" + std::to_string(dim) + "-s" + std::to_string(seed);
      KreinSpace space = KreinSpace::make(dim, cfg.fdeg, cfg.sig);
      cfg.evolution = graded_evolution(rng, space);
      th = build_fermionic_toy(cfg);
    } else if (kind == "disjoint-union") {
      Theory t1 = random_bosonic_theory(seed, dim);
      Theory t2 = random_fermionic_theory(seed + 1, dim);
      th = disjoint_union(t1, t2);
      th.seed = seed;
    } else {
      std::cerr << "error: unknown kind " << kind << "\n";
      return 2;
    }
    save_theory(th, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

inline int cmd_check(const std::string& spec_path, const std::string& suite_name, double tol_eq,
                     double tol_cone, std::uint64_t seed, const std::string& report_path) {
  Theory th;
  SuiteKind kind;
  try {
    th = load_theory(spec_path);
    kind = parse_suite(suite_name);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  SuiteOptions opt;
  opt.tol.eq = tol_eq;
  opt.tol.cone = tol_cone;
  opt.seed = seed;
  Report rep = run_suite(th, kind, opt);
  for (const auto& r : rep.results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.id << " [" << r.subject
              << "] max_deviation=" << r.max_deviation << "\n";
  }
  std::cout << (rep.pass() ? "SUITE PASS" : "SUITE FAIL") << " checks=" << rep.results.size()
            << " max_deviation=" << rep.max_deviation() << "\n";
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "error: cannot write " << report_path << "\n";
      return 2;
    }
    out << report_to_json(rep, suite_name, th.name).dump(2) << "\n";
  }
  return rep.pass() ? 0 : 1;
}

inline int cmd_query(const std::string& spec_path, const std::string& query_path,
                     const std::string& out_path) {
  Theory th;
  json queries;
  try {
    th = load_theory(spec_path);
    std::ifstream in(query_path);
    if (!in) throw std::runtime_error("cannot read " + query_path);
    in >> queries;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  json results = json::array();
  for (const auto& q : queries.value("queries", json::array())) {
    json r;
    r["id"] = q.value("id", "");
    try {
      std::string kind = q.at("kind").get<std::string>();
      RRef region = RRef::parse(q.value("region", th.main_region));
      const ProductSpace& sp = th.boundary_space(region);
      auto read_span = [&](const json& arr) {
        std::vector<cvec> out;
        for (const auto& v : arr) out.push_back(cvec_from_json(v));
        return out;
      };
      if (kind == "probability") {
        Subspace a = Subspace::span(sp, read_span(q.at("a")));
        Subspace s = Subspace::span(sp, read_span(q.at("s")));
        ProbabilityResult res = probability(th, region, a, s);
        r["value"] = res.value;
        r["defined"] = res.defined;
        r["cross_check_deviation"] = res.cross_check_deviation;
      } else if (kind == "expectation") {
        const ObservableMap& o = th.observable(q.at("observable").get<std::string>());
        Subspace s = Subspace::span(sp, read_span(q.at("s")));
        ExpectationResult res = observable_expectation(th, o, s);
        r["value"] = complex_to_json(res.value);
        r["defined"] = res.defined;
        r["cross_check_deviation"] = res.cross_check_deviation;
      } else if (kind == "born") {
        ProbabilityResult res = born_recovery(th, region, cvec_from_json(q.at("psi_in")),
                                              cvec_from_json(q.at("phi_out")));
        r["value"] = res.value;
        r["defined"] = res.defined;
        r["cross_check_deviation"] = res.cross_check_deviation;
      } else {
        r["error"] = "unknown query kind: " + kind;
      }
    } catch (const std::exception& e) {
      r["error"] = e.what();
      r["defined"] = false;
    }
    results.push_back(r);
  }
  json out;
  out["format"] = "gbf-query-results";
  out["results"] = results;
  if (out_path.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 2;
    }
    f << out.dump(2) << "\n";
  }
  return 0;
}

inline int cmd_describe(const std::string& spec_path) {
  try {
    Theory th = load_theory(spec_path);
    json out;
    out["name"] = th.name;
    out["main_region"] = th.main_region;
    out["hypersurfaces"] = th.system.hypersurfaces.size();
    out["regions"] = th.system.regions.size();
    out["decompositions"] = th.system.decompositions.size();
    out["gluings"] = th.system.gluings.size();
    out["amplitudes"] = th.amplitudes.size();
    out["observables"] = th.observables.size();
    json spaces = json::object();
    for (const auto& [id, sp] : th.registry.atoms)
      spaces[id] = {{"dim", sp.dim}, {"fdeg", sp.fdeg}, {"sig", sp.sig}};
    out["spaces"] = spaces;
    auto violations = validate(th.system);
    out["validation_violations"] = violations.size();
    std::cout << out.dump(2) << "\n";
    return violations.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

/// Entry point shared by the binary and the in-process tests.
inline int run(std::vector<std::string> args) {
  CLI::App app{"finite-dimensional general-boundary quantum theory toolkit"};
  app.require_subcommand(1);

  std::string kind = "interval", out_path = "theory.json";
  int dim = 2, intervals = 1;
  std::uint64_t seed = 1;
  std::vector<int> fdeg, sig;
  auto* gen = app.add_subcommand("generate", "generate an example theory spec");
  gen->add_option("--kind", kind, "interval | fermionic-toy | disjoint-union");
  gen->add_option("--dim", dim, "space dimension per point");
  gen->add_option("--seed", seed, "rng seed (GBF_SEED overrides)");
  gen->add_option("--intervals", intervals, "number of chained intervals");
  gen->add_option("--fdeg", fdeg, "f-degree per basis index")->delimiter(',');
  gen->add_option("--sig", sig, "signature per basis index")->delimiter(',');
  gen->add_option("--out", out_path, "output path");

  std::string spec_path, suite_name = "all", report_path;
  double tol_eq = 1e-9, tol_cone = 1e-10;
  auto* chk = app.add_subcommand("check", "run axiom suites on a theory spec");
  chk->add_option("spec", spec_path, "theory spec file")->required();
  chk->add_option("--suite", suite_name, "T | P | O | E | all");
  chk->add_option("--tol-eq", tol_eq, "equality tolerance");
  chk->add_option("--tol-cone", tol_cone, "cone/eigenvalue tolerance");
  chk->add_option("--seed", seed, "rng seed for property checks");
  chk->add_option("--report", report_path, "write JSON report here");

  std::string query_path, qout_path;
  auto* qry = app.add_subcommand("query", "evaluate measurement queries");
  qry->add_option("spec", spec_path, "theory spec file")->required();
  qry->add_option("queries", query_path, "query file")->required();
  qry->add_option("--out", qout_path, "output path (stdout when omitted)");

  auto* dsc = app.add_subcommand("describe", "summarize a theory spec");
  dsc->add_option("spec", spec_path, "theory spec file")->required();

  std::vector<const char*> argv;
  std::string prog = "gbf";
  argv.push_back(prog.c_str());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (gen->parsed())
    return cmd_generate(kind, dim, effective_seed(seed), intervals, fdeg, sig, out_path);
  if (chk->parsed())
    return cmd_check(spec_path, suite_name, tol_eq, tol_cone, effective_seed(seed), report_path);
  if (qry->parsed()) return cmd_query(spec_path, query_path, qout_path);
  if (dsc->parsed()) return cmd_describe(spec_path);
  return 2;
}

}  // namespace gbf::cli

#endif  // GBF_CLI_HPP
