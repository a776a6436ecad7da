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

#ifndef GBF_SUITE_HPP
#define GBF_SUITE_HPP

#include <string>

#include "gbf/amplitude.hpp"
#include "gbf/positive.hpp"
#include "gbf/report.hpp"
#include "gbf/theory.hpp"

namespace gbf {

enum class SuiteKind { T, P, O, E, All };

inline SuiteKind parse_suite(const std::string& s) {
  if (s == "T") return SuiteKind::T;
  if (s == "P") return SuiteKind::P;
  if (s == "O") return SuiteKind::O;
  if (s == "E") return SuiteKind::E;
  if (s == "all") return SuiteKind::All;
  throw std::invalid_argument("unknown suite: " + s + " (expected T, P, O, E or all)");
}

struct SuiteOptions {
  Tolerances tol;
  SignMode mode = SignMode::Full;
  std::uint64_t seed = 1;
  int random_trials = 40;  // random draws for property-style checks
};

namespace detail {

inline std::vector<RRef> regions_with_amplitudes(const Theory& th) {
  std::vector<RRef> out;
  for (const auto& [id, coeffs] : th.amplitudes) out.push_back({id, false});
  return out;
}

inline std::vector<RRef> slice_regions(const Theory& th) {
  std::vector<RRef> out;
  for (const auto& [id, r] : th.system.regions)
    if (r.slice_of && th.amplitudes.count(id)) out.push_back({id, false});
  return out;
}

/// Observables living on a given region, sorted by id for determinism.
inline std::vector<std::pair<std::string, const ObservableMap*>> observables_on(
    const Theory& th, const RRef& region) {
  std::vector<std::pair<std::string, const ObservableMap*>> out;
  for (const auto& [id, o] : th.observables)
    if (o.region == region) out.push_back({id, &o});
  return out;
}

inline void run_structure_checks(const Theory& th, const SuiteOptions& opt, Report& rep) {
  Rng rng(opt.seed * 41 + 5);
  // Conjugation: involution and the adopted isometry convention, on every
  // region boundary space.
  for (const auto& r : regions_with_amplitudes(th)) {
    const ProductSpace& sp = th.boundary_space(r);
    double worst = 0;
    for (int trial = 0; trial < 8; ++trial) {
      cvec x = rng.random_vector(sp.dim), y = rng.random_vector(sp.dim);
      cvec ix = iota(sp, x), iy = iota(sp, y);
      worst = std::max(worst, (iota(sp, ix) - x).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(sp.inner(ix, iy) - sp.inner(y, x)));
    }
    rep.add(make_result("T1b", r.str(), worst, opt.tol.eq));
  }

  // tau: isometry and the f-graded transposition over registered
  // decompositions.
  int dec_index = 0;
  for (const auto& dec : th.system.decompositions) {
    const SpaceCache& spaces = th.spaces();
    const ProductSpace& whole = spaces.boundary(dec.whole);
    std::vector<const ProductSpace*> parts;
    for (const auto& p : dec.parts) parts.push_back(&spaces.boundary(p));
    double worst = 0;
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<cvec> xs, ys;
      for (const auto* p : parts) {
        xs.push_back(rng.random_vector(p->dim));
        ys.push_back(rng.random_vector(p->dim));
      }
      cvec tx = tau(parts, xs, whole, opt.mode);
      cvec ty = tau(parts, ys, whole, opt.mode);
      cplx lhs = whole.inner(tx, ty);
      cplx rhs = 1;
      for (std::size_t k = 0; k < parts.size(); ++k) rhs *= parts[k]->inner(xs[k], ys[k]);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    if (parts.size() == 2) {
      for (int fa = 0; fa <= 1; ++fa)
        for (int fb = 0; fb <= 1; ++fb) {
          cvec xa = cvec::Zero(parts[0]->dim), xb = cvec::Zero(parts[1]->dim);
          bool ha = false, hb = false;
          for (long n = 0; n < parts[0]->dim; ++n)
            if (parts[0]->fdeg(n) == fa) xa(n) = rng.cnormal(), ha = true;
          for (long n = 0; n < parts[1]->dim; ++n)
            if (parts[1]->fdeg(n) == fb) xb(n) = rng.cnormal(), hb = true;
          if (!ha || !hb) continue;
          cvec ab = tau({parts[0], parts[1]}, {xa, xb}, whole, opt.mode);
          cvec ba = tau({parts[1], parts[0]}, {xb, xa}, whole, opt.mode);
          double sign = (fa && fb) ? -1.0 : 1.0;
          worst = std::max(worst, (ab - sign * ba).cwiseAbs().maxCoeff());
        }
    }
    rep.add(make_result("T2", "decomposition#" + std::to_string(dec_index++), worst, opt.tol.eq));
  }
}

inline void run_t_suite(const Theory& th, const SuiteOptions& opt, Report& rep) {
  {
    auto violations = validate(th.system);
    std::string details;
    for (std::size_t i = 0; i < violations.size() && i < 4; ++i)
      details += violations[i].record + ":" + violations[i].rule + "; ";
    rep.add(make_result("validate", th.name.empty() ? "theory" : th.name,
                        static_cast<double>(violations.size()), 0.0, details));
  }
  run_structure_checks(th, opt, rep);
  for (const auto& r : detail::regions_with_amplitudes(th)) {
    rep.add(check_f_even(th, r, opt.tol.eq));
    rep.add(check_amplor(th, r, opt.tol.eq));
  }
  for (const auto& r : detail::slice_regions(th))
    rep.add(check_T3x(th, r, opt.tol.eq, opt.mode));
  Rng rng(opt.seed * 97 + 3);
  for (const auto& g : th.system.gluings) {
    if (g.kind == GluingKind::DisjointUnion) {
      if (th.has_amplitude(g.result)) rep.add(check_T5a(th, g, opt.tol.eq, opt.mode));
    } else {
      AnomalySolveResult res = check_T5b_and_solve_anomaly(th, g, opt.tol.eq, opt.mode);
      rep.add(res.check);
      // Basis independence of the gluing sum under graded rotations.
      GluingContext ctx = GluingContext::make(th, g);
      if (ctx.h_sigma->dim <= 36 && th.has_amplitude(ctx.m)) {
        cmat u = block_haar(*ctx.h_sigma, rng);
        AmplitudeMap rho_m = th.amplitude(ctx.m);
        cvec canonical = glue_functional(ctx, rho_m.coeffs, opt.mode);
        cvec rotated = glue_functional(ctx, rho_m.coeffs, opt.mode, &u);
        double dev = (canonical - rotated).cwiseAbs().maxCoeff();
        rep.add(make_result("T5b-basis", g.id, dev, opt.tol.eq));
      }
    }
  }
}

inline void run_p_suite(const Theory& th, const SuiteOptions& opt, Report& rep) {
  Rng rng(opt.seed * 131 + 7);
  rep.add(check_P1_P2(th, opt.tol.cone, rng));
  for (const auto& r : detail::regions_with_amplitudes(th))
    rep.add(check_P4_properties(th, r, opt.tol.eq, opt.tol.cone, rng, opt.random_trials));
  for (const auto& r : detail::slice_regions(th))
    rep.add(check_P3x(th, r, opt.tol.eq, opt.mode));
  for (const auto& g : th.system.gluings) {
    if (g.kind == GluingKind::DisjointUnion) {
      if (th.has_amplitude(g.result)) rep.add(check_P5a(th, g, opt.tol.eq, opt.mode, &rng));
    } else {
      if (!th.has_amplitude(g.inputs.at(0)) || !th.has_amplitude(g.result)) continue;
      AnomalySolveResult amp = check_T5b_and_solve_anomaly(th, g, opt.tol.eq, opt.mode);
      if (!amp.solvable) {
        rep.add(make_result("P5b", g.id, amp.check.max_deviation, opt.tol.eq,
                            "no solvable gluing anomaly at the amplitude level"));
        continue;
      }
      P5bResult res = check_P5b(th, g, amp.c, opt.tol.eq, opt.mode, &rng);
      rep.add(res.check);
    }
  }
}

inline void run_o_suite(const Theory& th, const SuiteOptions& opt, Report& rep) {
  Rng rng(opt.seed * 163 + 11);
  for (const auto& g : th.system.gluings) {
    if (g.kind == GluingKind::DisjointUnion && th.has_amplitude(g.result)) {
      // Composing the input amplitudes reproduces the union amplitude.
      std::vector<AmplitudeMap> amps;
      std::vector<ObservableMap> as_obs;
      for (const auto& in : g.inputs) amps.push_back(th.amplitude(in));
      for (const auto& a : amps) as_obs.push_back({a.region, 0, a.coeffs});
      std::vector<const ObservableMap*> ptrs;
      for (const auto& o : as_obs) ptrs.push_back(&o);
      ObservableMap composed = compose_observables_disjoint(th, ptrs, g, opt.mode);
      double dev =
          (composed.coeffs - th.amplitude(g.result).coeffs).cwiseAbs().maxCoeff();
      rep.add(make_result("O2a", g.id, dev, opt.tol.eq));

      // Order dependence for homogeneous observables on the inputs.
      if (g.inputs.size() == 2) {
        auto obs1 = detail::observables_on(th, g.inputs[0]);
        auto obs2 = detail::observables_on(th, g.inputs[1]);
        double worst = 0;
        bool ran = false;
        for (const auto& [id1, o1] : obs1)
          for (const auto& [id2, o2] : obs2) {
            if (!o1->fdeg || !o2->fdeg) continue;
            ObservableMap fwd = compose_observables_disjoint(th, {o1, o2}, g, opt.mode);
            GluingRecord swapped = g;
            std::swap(swapped.inputs[0], swapped.inputs[1]);
            ObservableMap bwd = compose_observables_disjoint(th, {o2, o1}, swapped, opt.mode);
            double sign = (*o1->fdeg && *o2->fdeg) ? -1.0 : 1.0;
            worst = std::max(worst, (fwd.coeffs - sign * bwd.coeffs).cwiseAbs().maxCoeff());
            ran = true;
          }
        if (ran) rep.add(make_result("O2a-order", g.id, worst, opt.tol.eq));
      }
    }
    if (g.kind == GluingKind::SelfGluing && th.has_amplitude(g.inputs.at(0)) &&
        th.has_amplitude(g.result)) {
      AnomalySolveResult amp = check_T5b_and_solve_anomaly(th, g, opt.tol.eq, opt.mode);
      if (!amp.solvable) continue;
      // Gluing the amplitude as an observable reproduces the result
      // amplitude (consistency with the gluing identity).
      AmplitudeMap rho_m = th.amplitude(g.inputs[0]);
      ObservableMap as_obs{rho_m.region, 0, rho_m.coeffs};
      ObservableMap glued = glue_observable(th, as_obs, g, amp.c, opt.mode);
      double dev = (glued.coeffs - th.amplitude(g.result).coeffs).cwiseAbs().maxCoeff();
      rep.add(make_result("O2b", g.id, dev, opt.tol.eq));

      // Basis independence for every observable on the glued region.
      GluingContext ctx = GluingContext::make(th, g);
      if (ctx.h_sigma->dim <= 36) {
        cmat u = block_haar(*ctx.h_sigma, rng);
        double worst = 0;
        for (const auto& [id, o] : detail::observables_on(th, g.inputs[0])) {
          cvec canonical = glue_functional(ctx, o->coeffs, opt.mode);
          cvec rotated = glue_functional(ctx, o->coeffs, opt.mode, &u);
          worst = std::max(worst, (canonical - rotated).cwiseAbs().maxCoeff());
        }
        rep.add(make_result("O2b-basis", g.id, worst, opt.tol.eq));
      }
    }
  }
}

inline void run_e_suite(const Theory& th, const SuiteOptions& opt, Report& rep) {
  for (const auto& r : detail::regions_with_amplitudes(th))
    rep.add(check_E1(th, r, opt.tol.eq));
  for (const auto& [id, o] : th.observables) {
    rep.add(check_expmor(th, o, opt.tol.eq));
    if (o.fdeg && *o.fdeg == 1) rep.add(check_odd_vanishing(th, id, opt.tol.eq));
  }
  for (const auto& g : th.system.gluings) {
    if (g.kind == GluingKind::DisjointUnion && th.has_amplitude(g.result) &&
        g.inputs.size() == 2) {
      auto obs1 = detail::observables_on(th, g.inputs[0]);
      auto obs2 = detail::observables_on(th, g.inputs[1]);
      for (const auto& [id1, o1] : obs1)
        for (const auto& [id2, o2] : obs2)
          rep.add(check_E2a(th, g, {o1, o2}, opt.tol.eq, opt.mode));
      if (obs1.empty() || obs2.empty()) {
        // Fall back to the amplitudes themselves: (E2a) reduces to (P5a).
        AmplitudeMap a1 = th.amplitude(g.inputs[0]);
        AmplitudeMap a2 = th.amplitude(g.inputs[1]);
        ObservableMap o1{a1.region, 0, a1.coeffs}, o2{a2.region, 0, a2.coeffs};
        rep.add(check_E2a(th, g, {&o1, &o2}, opt.tol.eq, opt.mode));
      }
    }
    if (g.kind == GluingKind::SelfGluing && th.has_amplitude(g.inputs.at(0)) &&
        th.has_amplitude(g.result)) {
      AnomalySolveResult amp = check_T5b_and_solve_anomaly(th, g, opt.tol.eq, opt.mode);
      if (!amp.solvable) continue;
      auto obs = detail::observables_on(th, g.inputs[0]);
      if (obs.empty()) {
        AmplitudeMap a = th.amplitude(g.inputs[0]);
        ObservableMap as_obs{a.region, 0, a.coeffs};
        rep.add(check_E2b(th, g, as_obs, amp.c, opt.tol.eq, opt.mode));
      } else {
        for (const auto& [id, o] : obs)
          rep.add(check_E2b(th, g, *o, amp.c, opt.tol.eq, opt.mode));
      }
    }
  }
}

}  // namespace detail

/// Run the selected verification suite over a theory. Deterministic for a
/// fixed seed; results come back sorted by check id.
inline Report run_suite(const Theory& th, SuiteKind kind, const SuiteOptions& opt = {}) {
  Report rep;
  if (kind == SuiteKind::T || kind == SuiteKind::All) detail::run_t_suite(th, opt, rep);
  if (kind == SuiteKind::P || kind == SuiteKind::All) detail::run_p_suite(th, opt, rep);
  if (kind == SuiteKind::O || kind == SuiteKind::All) detail::run_o_suite(th, opt, rep);
  if (kind == SuiteKind::E || kind == SuiteKind::All) detail::run_e_suite(th, opt, rep);
  rep.sort_by_id();
  return rep;
}

}  // namespace gbf

#endif  // GBF_SUITE_HPP
