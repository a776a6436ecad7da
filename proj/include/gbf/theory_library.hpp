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

#ifndef GBF_THEORY_LIBRARY_HPP
#define GBF_THEORY_LIBRARY_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "gbf/amplitude.hpp"
#include "gbf/theory.hpp"

namespace gbf {

/// Qudit evolution on a chain of interval regions. Incoming points enter
/// the boundary orientation-reversed, outgoing points as they are; the
/// amplitude on basis vectors is rho(e~_i (x) e_j) = (-1)^{sig_i} V_{ij}
/// with V the backward kernel (the inverse of the evolution operator), so
/// that rho(iota(psi) (x) phi) = <psi, V phi>.
struct IntervalTheoryConfig {
  int dim = 2;
  std::vector<int> fdeg;       // default all even
  std::vector<int> sig;        // default all positive
  std::vector<cmat> unitaries; // one per interval; identity when empty
  bool circle = true;          // close a single interval into a circle
  std::string name = "interval";
  std::uint64_t seed = 0;
};

struct FermionicToyConfig {
  int dim = 2;
  std::vector<int> fdeg = {0, 1};
  std::vector<int> sig;
  cmat evolution;  // parity-preserving; identity when empty
  std::string name = "fermionic-toy";
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string atom_name(int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%03d", k);
  return buf;
}

inline cvec interval_amplitude(const KreinSpace& space, const cmat& backward) {
  int d = space.dim;
  cvec coeffs(static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      coeffs(static_cast<long>(i) * d + j) =
          (space.sig[i] ? -1.0 : 1.0) * backward(i, j);
  return coeffs;
}

inline void check_unitary_shape(const cmat& u, int dim) {
  if (u.rows() != dim || u.cols() != dim)
    throw std::invalid_argument("evolution matrix has wrong shape");
  cmat probe = u;  // non-invertible evolutions are rejected up front
  Eigen::FullPivLU<cmat> lu(probe);
  if (!lu.isInvertible()) throw std::invalid_argument("evolution matrix is singular");
}

}  // namespace detail

/// [OP] build_interval_theory. Points become atomic hypersurfaces, each
/// interval a region with boundary ~start u end. A single interval gets
/// closed into a circle (amplitude induced from the gluing sum, c = 1);
/// longer chains get the disjoint union of the first two intervals plus the
/// middle self-gluing, whose result carries the composed evolution. A slice
/// region on the first point carries the canonical pairing amplitude.
inline Theory build_interval_theory(const IntervalTheoryConfig& cfg) {
  if (cfg.dim < 1) throw std::invalid_argument("dimension must be positive");
  int n = cfg.unitaries.empty() ? 1 : static_cast<int>(cfg.unitaries.size());

  Theory th;
  th.name = cfg.name;
  th.seed = cfg.seed;

  KreinSpace space = KreinSpace::make(cfg.dim, cfg.fdeg, cfg.sig);
  std::vector<cmat> backward;
  for (int k = 0; k < n; ++k) {
    cmat u = cfg.unitaries.empty() ? cmat(cmat::Identity(cfg.dim, cfg.dim)) : cfg.unitaries[k];
    detail::check_unitary_shape(u, cfg.dim);
    backward.push_back(u.inverse());
  }

  // Atoms: interval k runs from point 2k to point 2k+1; consecutive start
  // points are copies of the previous end point.
  auto& sys = th.system;
  std::vector<std::string> starts, ends;
  for (int k = 0; k < n; ++k) {
    std::string s = detail::atom_name(2 * k), e = detail::atom_name(2 * k + 1);
    sys.add_atom(s, k > 0 ? std::optional<std::string>(detail::atom_name(2 * k - 1))
                          : std::nullopt);
    sys.add_atom(e);
    th.registry.atoms[s] = space;
    th.registry.atoms[e] = space;
    starts.push_back(s);
    ends.push_back(e);
  }

  std::vector<std::string> interval_regions;
  for (int k = 0; k < n; ++k) {
    std::string bd = "bdM" + std::to_string(k);
    sys.add_composite(bd, {{starts[k], true}, {ends[k], false}});
    sys.decompositions.push_back({{bd, false}, {{starts[k], true}, {ends[k], false}}});
    std::string rid = "M" + std::to_string(k);
    sys.add_region(rid, {bd, false});
    th.amplitudes[rid] = detail::interval_amplitude(space, backward[k]);
    interval_regions.push_back(rid);
  }
  th.main_region = interval_regions[0];

  // Slice region on the first point, with the canonical pairing amplitude.
  {
    std::string slice_id = make_slice(sys, {starts[0], false});
    th.registry.atoms[starts[0] + "'"] = space;
    th.amplitudes[slice_id] = slice_amplitude(th, {slice_id, false});
  }

  if (n == 1 && cfg.circle) {
    // Close the interval: glue ~p000 to p001 (the end is a copy of the
    // start). The circle amplitude is induced by the gluing sum with c=1.
    sys.hypersurfaces[ends[0]].copy_of = starts[0];
    sys.add_empty("void");
    std::string circle = "C0";
    sys.add_region(circle, {"void", false});
    GluingRecord g;
    g.id = "glue:circle";
    g.kind = GluingKind::SelfGluing;
    g.inputs = {{interval_regions[0], false}};
    g.sigma = {starts[0], true};
    g.sigma_bar_prime = {ends[0], false};
    g.result = {circle, false};
    sys.gluings.push_back(g);
    sys.decompositions.push_back(
        {{"bdM0", false}, {{"void", false}, {starts[0], true}, {ends[0], false}}});
    AnomalySolveResult solved = check_T5b_and_solve_anomaly(th, g, 1e-9);
    th.amplitudes[circle] = solved.induced;
    th.anomalies[g.id] = cplx(1, 0);
  }

  if (n >= 2) {
    // Disjoint union of the first two intervals, then the middle gluing.
    std::string ubd = "bdU0";
    {
      std::vector<HRef> atoms;
      for (int k = 0; k < 2; ++k) {
        atoms.push_back({starts[k], true});
        atoms.push_back({ends[k], false});
      }
      sys.add_composite(ubd, atoms);
    }
    std::string uregion = "U0";
    sys.add_region(uregion, {ubd, false});
    sys.decompositions.push_back({{ubd, false}, {{"bdM0", false}, {"bdM1", false}}});
    GluingRecord gu;
    gu.id = "union:0";
    gu.kind = GluingKind::DisjointUnion;
    gu.inputs = {{interval_regions[0], false}, {interval_regions[1], false}};
    gu.result = {uregion, false};
    sys.gluings.push_back(gu);
    {
      AmplitudeMap a0 = th.amplitude({interval_regions[0], false});
      AmplitudeMap a1 = th.amplitude({interval_regions[1], false});
      ObservableMap o0{a0.region, 0, a0.coeffs}, o1{a1.region, 0, a1.coeffs};
      th.amplitudes[uregion] = compose_observables_disjoint(th, {&o0, &o1}, gu).coeffs;
    }

    // Middle self-gluing: glue end of M0 to start of M1 (a copy of it).
    std::string jbd = "bdJ0";
    sys.add_composite(jbd, {{starts[0], true}, {ends[1], false}});
    std::string jregion = "J0";
    sys.add_region(jregion, {jbd, false});
    th.amplitudes[jregion] = detail::interval_amplitude(space, cmat(backward[0] * backward[1]));
    GluingRecord gm;
    gm.id = "glue:mid0";
    gm.kind = GluingKind::SelfGluing;
    gm.inputs = {{uregion, false}};
    gm.sigma = {ends[0], false};
    gm.sigma_bar_prime = {starts[1], true};
    gm.result = {jregion, false};
    sys.gluings.push_back(gm);
    sys.decompositions.push_back(
        {{ubd, false}, {{jbd, false}, {ends[0], false}, {starts[1], true}}});
    th.anomalies[gm.id] = cplx(1, 0);
  }

  return th;
}

/// Parity-preserving unitary (Krein-unitary per signature block) for graded
/// spaces: Haar within each f-degree block, metric-preserving when the
/// block's signature is mixed.
inline cmat graded_evolution(Rng& rng, const KreinSpace& space) {
  int d = space.dim;
  cmat u = cmat::Zero(d, d);
  for (int parity = 0; parity <= 1; ++parity) {
    std::vector<int> idx;
    for (int i = 0; i < d; ++i)
      if (space.fdeg[i] == parity) idx.push_back(i);
    if (idx.empty()) continue;
    std::vector<int> sub_sig;
    for (int i : idx) sub_sig.push_back(space.sig[i]);
    bool mixed = std::any_of(sub_sig.begin(), sub_sig.end(), [](int s) { return s == 1; });
    cmat block = mixed ? krein_unitary(rng, sub_sig) : rng.haar_unitary(static_cast<int>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) u(idx[r], idx[c]) = block(r, c);
  }
  return u;
}

/// [OP] build_fermionic_toy: an interval theory over a graded (and possibly
/// Krein) space, closed into a circle, with one even and one odd observable
/// on the interval.
inline Theory build_fermionic_toy(const FermionicToyConfig& cfg) {
  if (std::none_of(cfg.fdeg.begin(), cfg.fdeg.end(), [](int f) { return f == 1; }))
    throw std::invalid_argument("fermionic toy needs at least one odd basis vector");
  if (std::all_of(cfg.fdeg.begin(), cfg.fdeg.end(), [](int f) { return f == 1; }))
    throw std::invalid_argument("fermionic toy needs at least one even basis vector");

  IntervalTheoryConfig base;
  base.dim = cfg.dim;
  base.fdeg = cfg.fdeg;
  base.sig = cfg.sig;
  base.name = cfg.name;
  base.seed = cfg.seed;
  if (cfg.evolution.size() > 0) base.unitaries = {cfg.evolution};
  Theory th = build_interval_theory(base);

  // Observables on the interval: an even one (amplitude composed with a
  // parity-preserving boundary operator) and an odd one (composed with a
  // parity-swapping operator).
  const RRef m0{"M0", false};
  const ProductSpace& bd = th.boundary_space(m0);
  Rng rng(cfg.seed + 17);
  cmat q_even = cmat::Zero(bd.dim, bd.dim);
  cmat q_odd = cmat::Zero(bd.dim, bd.dim);
  for (long r = 0; r < bd.dim; ++r)
    for (long c = 0; c < bd.dim; ++c) {
      if (bd.fdeg(r) == bd.fdeg(c)) q_even(r, c) = rng.cnormal();
      else q_odd(r, c) = rng.cnormal();
    }
  const cvec& rho = th.amplitudes.at("M0");
  th.observables["obs:even"] = {m0, 0, cvec(q_even.transpose() * rho)};
  th.observables["obs:odd"] = {m0, 1, cvec(q_odd.transpose() * rho)};
  return th;
}

/// [OP] disjoint_union: relabel both theories apart, take the union of the
/// catalogs, and register the disjoint union of the two main regions with
/// the product amplitude.
inline Theory disjoint_union(const Theory& t1, const Theory& t2) {
  auto relabel = [](const Theory& src, const std::string& prefix, Theory& dst) {
    auto ren = [&prefix](const std::string& id) { return prefix + id; };
    auto ren_ref = [&](const ORef& r) { return ORef{ren(r.id), r.rev}; };
    for (const auto& [id, h] : src.system.hypersurfaces) {
      Hypersurface copy = h;
      copy.id = ren(id);
      for (auto& c : copy.components) c.id = ren(c.id);
      if (copy.copy_of) copy.copy_of = ren(*copy.copy_of);
      dst.system.hypersurfaces.emplace(copy.id, std::move(copy));
    }
    for (const auto& [id, r] : src.system.regions) {
      Region copy = r;
      copy.id = ren(id);
      copy.boundary = ren_ref(copy.boundary);
      if (copy.slice_of) {
        ORef s = ORef::parse(*copy.slice_of);
        copy.slice_of = ren_ref(s).str();
      }
      dst.system.regions.emplace(copy.id, std::move(copy));
    }
    for (const auto& d : src.system.decompositions) {
      Decomposition copy = d;
      copy.whole = ren_ref(copy.whole);
      for (auto& p : copy.parts) p = ren_ref(p);
      dst.system.decompositions.push_back(std::move(copy));
    }
    for (const auto& g : src.system.gluings) {
      GluingRecord copy = g;
      copy.id = prefix + g.id;
      for (auto& in : copy.inputs) in = ren_ref(in);
      copy.sigma = ren_ref(copy.sigma);
      copy.sigma_bar_prime = ren_ref(copy.sigma_bar_prime);
      copy.result = ren_ref(copy.result);
      dst.system.gluings.push_back(std::move(copy));
    }
    for (const auto& [id, sp] : src.registry.atoms) dst.registry.atoms[ren(id)] = sp;
    for (const auto& [id, c] : src.amplitudes) dst.amplitudes[ren(id)] = c;
    for (const auto& [id, o] : src.observables) {
      ObservableMap copy = o;
      copy.region = ren_ref(copy.region);
      dst.observables[prefix + id] = std::move(copy);
    }
    for (const auto& [id, c] : src.anomalies) dst.anomalies[prefix + id] = c;
  };

  Theory out;
  out.name = t1.name + "+" + t2.name;
  out.seed = t1.seed;
  relabel(t1, "a:", out);
  relabel(t2, "b:", out);

  RRef m1{"a:" + t1.main_region, false}, m2{"b:" + t2.main_region, false};
  HRef b1 = out.system.boundary_of(m1), b2 = out.system.boundary_of(m2);
  std::vector<HRef> atoms = out.system.atoms_of(b1);
  for (const auto& a : out.system.atoms_of(b2)) atoms.push_back(a);
  out.system.add_composite("bdUnion", atoms);
  out.system.add_region("Union", {"bdUnion", false});
  out.system.decompositions.push_back({{"bdUnion", false}, {b1, b2}});
  GluingRecord gu;
  gu.id = "union:main";
  gu.kind = GluingKind::DisjointUnion;
  gu.inputs = {m1, m2};
  gu.result = {"Union", false};
  out.system.gluings.push_back(gu);
  {
    AmplitudeMap a1 = out.amplitude(m1);
    AmplitudeMap a2 = out.amplitude(m2);
    ObservableMap o1{a1.region, 0, a1.coeffs}, o2{a2.region, 0, a2.coeffs};
    out.amplitudes["Union"] = compose_observables_disjoint(out, {&o1, &o2}, gu).coeffs;
  }
  out.main_region = "Union";
  return out;
}

/// Reproducibly random theory for the verification suites.
inline Theory random_bosonic_theory(std::uint64_t seed, int max_dim = 4, bool two_intervals = false) {
  Rng rng(seed);
  IntervalTheoryConfig cfg;
  cfg.dim = 1 + static_cast<int>(rng.integer(max_dim));
  cfg.seed = seed;
  cfg.name = "bosonic-" + std::to_string(seed);
  int n = two_intervals ? 2 : 1;
  for (int k = 0; k < n; ++k) cfg.unitaries.push_back(rng.haar_unitary(cfg.dim));
  return build_interval_theory(cfg);
}

inline Theory random_fermionic_theory(std::uint64_t seed, int max_dim = 4) {
  Rng rng(seed);
  FermionicToyConfig cfg;
  cfg.dim = 2 + static_cast<int>(rng.integer(std::max(1, max_dim - 1)));
  cfg.seed = seed;
  cfg.name = "fermionic-" + std::to_string(seed);
  cfg.fdeg.assign(cfg.dim, 0);
  cfg.sig.assign(cfg.dim, 0);
  cfg.fdeg[cfg.dim - 1] = 1;  // at least one odd direction
  for (int i = 0; i < cfg.dim - 1; ++i) cfg.fdeg[i] = static_cast<int>(rng.integer(2));
  if (std::all_of(cfg.fdeg.begin(), cfg.fdeg.end(), [](int f) { return f == 1; }))
    cfg.fdeg[0] = 0;
  for (int i = 0; i < cfg.dim; ++i) cfg.sig[i] = static_cast<int>(rng.integer(2));
  KreinSpace space = KreinSpace::make(cfg.dim, cfg.fdeg, cfg.sig);
  cfg.evolution = graded_evolution(rng, space);
  return build_fermionic_toy(cfg);
}

}  // namespace gbf

#endif  // GBF_THEORY_LIBRARY_HPP
