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

#ifndef GBF_SPACETIME_HPP
#define GBF_SPACETIME_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbf {

/// Oriented reference to a catalogued hypersurface or region.
/// The string form uses a leading '~' for the orientation-reversed copy,
/// so reversal is an involution on references by construction.
struct ORef {
  std::string id;
  bool rev = false;

  friend bool operator==(const ORef&, const ORef&) = default;
  friend auto operator<=>(const ORef&, const ORef&) = default;

  std::string str() const { return rev ? "~" + id : id; }

  static ORef parse(const std::string& s) {
    if (!s.empty() && s.front() == '~') return {s.substr(1), true};
    return {s, false};
  }

  ORef reversed() const { return {id, !rev}; }
};

using HRef = ORef;  // hypersurface reference
using RRef = ORef;  // region reference

inline HRef reverse(const HRef& h) { return h.reversed(); }

/// A catalogued hypersurface. Atomic hypersurfaces (single connected
/// component) carry no component list; composite ones list their components
/// as oriented references to atomic hypersurfaces. The empty hypersurface
/// (boundary of a closed region) is the unique record flagged `empty`.
struct Hypersurface {
  std::string id;
  std::vector<HRef> components;  // oriented atoms; empty for atomic records
  bool empty_surface = false;
  std::optional<std::string> copy_of;  // set on fresh copies, bases transfer
  std::string metadata;                // opaque; the theory may interpret it

  bool atomic() const { return components.empty() && !empty_surface; }
};

struct Region {
  std::string id;
  HRef boundary;
  std::optional<std::string> slice_of;  // set when the region is a slice of a hypersurface
  std::string metadata;
};

/// Registered decomposition of a hypersurface into an ordered list of parts.
struct Decomposition {
  HRef whole;
  std::vector<HRef> parts;
};

enum class GluingKind { DisjointUnion, SelfGluing };

/// Record of a gluing. For self-gluing, the boundary of `inputs[0]`
/// decomposes as Sigma1 u Sigma u ~Sigma', with Sigma' a copy of Sigma and
/// Sigma1 the boundary of `result`.
struct GluingRecord {
  std::string id;
  GluingKind kind = GluingKind::SelfGluing;
  std::vector<RRef> inputs;
  HRef sigma;            // self-gluing only
  HRef sigma_bar_prime;  // self-gluing only; reversal of the copy
  RRef result;
};

struct Violation {
  std::string record;
  std::string rule;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Combinatorial spacetime catalog: hypersurfaces, regions, decompositions
/// and gluing records. Values are immutable once built; every operation on
/// a const system is a pure function.
class SpacetimeSystem {
 public:
  std::map<std::string, Hypersurface> hypersurfaces;
  std::map<std::string, Region> regions;
  std::vector<Decomposition> decompositions;
  std::vector<GluingRecord> gluings;

  bool has_hypersurface(const HRef& h) const { return hypersurfaces.count(h.id) > 0; }
  bool has_region(const RRef& r) const { return regions.count(r.id) > 0; }

  const Hypersurface& hypersurface(const HRef& h) const {
    auto it = hypersurfaces.find(h.id);
    if (it == hypersurfaces.end())
      throw std::invalid_argument("unknown hypersurface: " + h.str());
    return it->second;
  }

  const Region& region(const RRef& r) const {
    auto it = regions.find(r.id);
    if (it == regions.end()) throw std::invalid_argument("unknown region: " + r.str());
    return it->second;
  }

  HRef boundary_of(const RRef& r) const {
    HRef b = region(r).boundary;
    return r.rev ? b.reversed() : b;
  }

  /// Flat oriented atom list of a hypersurface reference, in canonical
  /// (lexicographic by atom id) order. Reversal flips every atom's flag and
  /// leaves the order untouched.
  std::vector<HRef> atoms_of(const HRef& h) const {
    const Hypersurface& rec = hypersurface(h);
    std::vector<HRef> out;
    if (rec.empty_surface) return out;
    if (rec.atomic()) {
      out.push_back(h);
      return out;
    }
    out = rec.components;
    if (h.rev)
      for (auto& a : out) a.rev = !a.rev;
    std::sort(out.begin(), out.end(),
              [](const HRef& a, const HRef& b) { return a.id < b.id; });
    return out;
  }

  /// Follow copy-of links down to the original atom id.
  std::string base_atom(const std::string& atom_id) const {
    std::string cur = atom_id;
    std::set<std::string> seen;
    while (true) {
      auto it = hypersurfaces.find(cur);
      if (it == hypersurfaces.end() || !it->second.copy_of) return cur;
      if (!seen.insert(cur).second) return cur;  // cycle guard; validator flags it
      cur = *it->second.copy_of;
    }
  }

  const Decomposition* find_decomposition(const HRef& whole,
                                          const std::vector<HRef>& parts) const {
    for (const auto& d : decompositions)
      if (d.whole == whole && d.parts == parts) return &d;
    // Also accept the mirrored registration: reversing whole and every part.
    HRef rw = whole.reversed();
    std::vector<HRef> rp(parts);
    for (auto& p : rp) p = p.reversed();
    for (const auto& d : decompositions)
      if (d.whole == rw && d.parts == rp) return &d;
    return nullptr;
  }

  // --- construction helpers -------------------------------------------

  Hypersurface& add_atom(const std::string& id, std::optional<std::string> copy_of = {}) {
    Hypersurface h;
    h.id = id;
    h.copy_of = std::move(copy_of);
    return hypersurfaces.emplace(id, std::move(h)).first->second;
  }

  Hypersurface& add_composite(const std::string& id, std::vector<HRef> components) {
    Hypersurface h;
    h.id = id;
    std::sort(components.begin(), components.end(),
              [](const HRef& a, const HRef& b) { return a.id < b.id; });
    h.components = std::move(components);
    return hypersurfaces.emplace(id, std::move(h)).first->second;
  }

  Hypersurface& add_empty(const std::string& id) {
    Hypersurface h;
    h.id = id;
    h.empty_surface = true;
    return hypersurfaces.emplace(id, std::move(h)).first->second;
  }

  Region& add_region(const std::string& id, HRef boundary) {
    Region r;
    r.id = id;
    r.boundary = std::move(boundary);
    return regions.emplace(id, std::move(r)).first->second;
  }
};

/// [OP] reverse on catalogued hypersurfaces. The reversal shares components
/// and differs only in the orientation flag of the reference, so this is an
/// involution and a bijection on the catalog.
inline HRef reverse(const SpacetimeSystem& sys, const HRef& h) {
  if (!sys.has_hypersurface(h)) throw std::invalid_argument("unknown hypersurface: " + h.str());
  return h.reversed();
}

namespace detail {

inline bool oriented_atoms_partition(const SpacetimeSystem& sys, const HRef& whole,
                                     const std::vector<HRef>& parts) {
  std::multiset<std::pair<std::string, bool>> lhs, rhs;
  for (const auto& a : sys.atoms_of(whole)) lhs.insert({a.id, a.rev});
  for (const auto& p : parts)
    for (const auto& a : sys.atoms_of(p)) rhs.insert({a.id, a.rev});
  return lhs == rhs;
}

}  // namespace detail

/// [OP] validate. Violations are data, not failures; the list is empty iff
/// every structural invariant holds. Running it twice on unchanged data
/// yields identical lists.
inline std::vector<Violation> validate(const SpacetimeSystem& sys) {
  std::vector<Violation> out;
  auto flag = [&](const std::string& rec, const std::string& rule, const std::string& msg) {
    out.push_back({rec, rule, msg});
  };

  for (const auto& [id, h] : sys.hypersurfaces) {
    if (h.empty_surface) {
      if (!h.components.empty())
        flag(id, "empty-surface", "empty hypersurface must have no components");
      continue;
    }
    if (h.atomic()) continue;
    if (h.components.empty())
      flag(id, "nonempty-components", "composite hypersurface has no components");
    std::set<std::string> bases;
    for (const auto& c : h.components) {
      auto it = sys.hypersurfaces.find(c.id);
      if (it == sys.hypersurfaces.end()) {
        flag(id, "dangling-component", "component " + c.str() + " is not registered");
        continue;
      }
      if (!it->second.atomic())
        flag(id, "atomic-components", "component " + c.str() + " is not atomic");
      if (!bases.insert(c.id).second)
        flag(id, "disjoint-components", "component " + c.id + " repeated");
    }
    if (!std::is_sorted(h.components.begin(), h.components.end(),
                        [](const HRef& a, const HRef& b) { return a.id < b.id; }))
      flag(id, "canonical-order", "components not in canonical order");
  }

  for (const auto& [id, r] : sys.regions) {
    if (!sys.has_hypersurface(r.boundary))
      flag(id, "dangling-boundary", "boundary " + r.boundary.str() + " is not registered");
  }

  for (std::size_t i = 0; i < sys.decompositions.size(); ++i) {
    const auto& d = sys.decompositions[i];
    std::string rec = "decomposition#" + std::to_string(i);
    bool refs_ok = sys.has_hypersurface(d.whole);
    if (!refs_ok) flag(rec, "dangling-whole", "whole " + d.whole.str() + " is not registered");
    for (const auto& p : d.parts)
      if (!sys.has_hypersurface(p)) {
        flag(rec, "dangling-part", "part " + p.str() + " is not registered");
        refs_ok = false;
      }
    if (refs_ok && !detail::oriented_atoms_partition(sys, d.whole, d.parts))
      flag(rec, "disjoint-partition",
           "parts do not partition the components of " + d.whole.str());
  }

  for (const auto& g : sys.gluings) {
    if (!sys.has_region(g.result))
      flag(g.id, "dangling-result", "result region " + g.result.str() + " is not registered");
    for (const auto& in : g.inputs)
      if (!sys.has_region(in))
        flag(g.id, "dangling-input", "input region " + in.str() + " is not registered");
    if (g.kind == GluingKind::SelfGluing) {
      if (g.inputs.size() != 1) {
        flag(g.id, "self-gluing-arity", "self-gluing must have exactly one input region");
        continue;
      }
      if (!sys.has_hypersurface(g.sigma) || !sys.has_hypersurface(g.sigma_bar_prime)) {
        flag(g.id, "dangling-glued-pair", "glued pair references unregistered hypersurface");
        continue;
      }
      if (!sys.has_region(g.inputs[0]) || !sys.has_region(g.result)) continue;
      // Sigma' must be a copy of Sigma (or vice versa), atom by atom.
      auto sa = sys.atoms_of(g.sigma);
      auto sb = sys.atoms_of(g.sigma_bar_prime);
      if (sa.size() != sb.size()) {
        flag(g.id, "glued-pair-shape", "glued hypersurfaces have different component counts");
      } else {
        for (std::size_t k = 0; k < sa.size(); ++k) {
          if (sb[k].rev == sa[k].rev)
            flag(g.id, "glued-pair-orientation",
                 "glued pair components must carry opposite orientations");
          if (sys.base_atom(sa[k].id) != sys.base_atom(sb[k].id))
            flag(g.id, "copy-link", "glued atoms " + sa[k].id + ", " + sb[k].id +
                                        " are not linked as copies");
        }
      }
      // The boundary of the input must decompose as [bd(result), sigma, ~sigma'].
      HRef bd_m = sys.boundary_of(g.inputs[0]);
      HRef bd_m1 = sys.boundary_of(g.result);
      std::vector<HRef> parts = {bd_m1, g.sigma, g.sigma_bar_prime};
      if (!sys.find_decomposition(bd_m, parts))
        flag(g.id, "gluing-decomposition",
             "no registered decomposition of " + bd_m.str() + " into residual + glued pair");
    } else {
      if (g.inputs.size() < 2)
        flag(g.id, "union-arity", "disjoint union needs at least two inputs");
      bool ok = sys.has_region(g.result);
      for (const auto& in : g.inputs) ok = ok && sys.has_region(in);
      if (ok) {
        std::vector<HRef> parts;
        for (const auto& in : g.inputs) parts.push_back(sys.boundary_of(in));
        if (!sys.find_decomposition(sys.boundary_of(g.result), parts))
          flag(g.id, "union-decomposition",
               "no registered decomposition of the union boundary into input boundaries");
      }
    }
  }

  for (const auto& [id, h] : sys.hypersurfaces) {
    if (h.copy_of && !sys.hypersurfaces.count(*h.copy_of))
      flag(id, "dangling-copy", "copy-of target " + *h.copy_of + " is not registered");
  }

  return out;
}

/// [OP] make_slice: register a fresh copy Sigma' of Sigma and the slice
/// region with boundary ~Sigma u Sigma'. Returns the slice region id.
/// Fresh copy atoms get a trailing prime so repeated slicing stays distinct.
inline std::string make_slice(SpacetimeSystem& sys, const HRef& sigma) {
  if (!sys.has_hypersurface(sigma))
    throw std::invalid_argument("unknown hypersurface: " + sigma.str());

  auto fresh = [&](const std::string& base) {
    std::string id = base + "'";
    while (sys.hypersurfaces.count(id)) id += "'";
    return id;
  };

  std::vector<HRef> prime_atoms;
  std::vector<HRef> sigma_atoms = sys.atoms_of(sigma);
  for (const auto& a : sigma_atoms) {
    std::string pid = fresh(a.id);
    sys.add_atom(pid, a.id);
    prime_atoms.push_back({pid, a.rev});
  }

  HRef sigma_prime;
  if (sigma_atoms.empty()) {
    throw std::invalid_argument("cannot slice the empty hypersurface");
  } else if (sigma_atoms.size() == 1 && !sigma_atoms[0].rev) {
    sigma_prime = prime_atoms[0];
  } else {
    std::string pid = fresh(sigma.id);
    std::vector<HRef> comps = prime_atoms;
    if (sigma.rev)
      for (auto& c : comps) c.rev = !c.rev;  // store in as-registered orientation
    sys.add_composite(pid, comps);
    sigma_prime = {pid, sigma.rev};
  }

  // Boundary ~Sigma u Sigma' as a composite of the combined atoms.
  std::vector<HRef> bd_atoms;
  for (const auto& a : sigma_atoms) bd_atoms.push_back(a.reversed());
  for (const auto& a : prime_atoms) bd_atoms.push_back(a);
  std::string bd_id = "bd:slice:" + sigma.str();
  while (sys.hypersurfaces.count(bd_id)) bd_id += "'";
  sys.add_composite(bd_id, bd_atoms);

  std::string slice_id = "slice:" + sigma.str();
  while (sys.regions.count(slice_id)) slice_id += "'";
  Region& r = sys.add_region(slice_id, {bd_id, false});
  r.slice_of = sigma.str();
  sys.decompositions.push_back({{bd_id, false}, {sigma.reversed(), sigma_prime}});
  return slice_id;
}

}  // namespace gbf

#endif  // GBF_SPACETIME_HPP
