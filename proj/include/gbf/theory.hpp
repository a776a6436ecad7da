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

#ifndef GBF_THEORY_HPP
#define GBF_THEORY_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "gbf/krein.hpp"
#include "gbf/numerics.hpp"
#include "gbf/spacetime.hpp"

namespace gbf {

/// Linear functional on the boundary space of a region, stored as dense
/// coefficients in the canonical product basis. Amplitude maps must vanish
/// on the f-degree odd part of the boundary space.
struct AmplitudeMap {
  RRef region;
  cvec coeffs;
};

/// Observable map on a region's boundary space, optionally declared
/// homogeneous of a fixed f-degree.
struct ObservableMap {
  RRef region;
  std::optional<int> fdeg;
  cvec coeffs;
};

/// Nonzero gluing anomaly constant attached to a self-gluing record.
struct GluingAnomaly {
  std::string gluing_id;
  cplx c{1.0, 0.0};
};

/// A complete finite-dimensional theory: the spacetime catalog, the spaces
/// on its atoms, the amplitudes, observables and anomaly constants.
/// Immutable once built; move-only so the space cache never dangles.
class Theory {
 public:
  SpacetimeSystem system;
  SpaceRegistry registry;
  std::map<std::string, cvec> amplitudes;  // region id -> coefficients (as registered)
  std::map<std::string, ObservableMap> observables;
  std::map<std::string, cplx> anomalies;  // gluing id -> c
  std::string name;
  std::string main_region;  // designated region for measurement queries
  std::uint64_t seed = 0;

  Theory() = default;
  Theory(const Theory&) = delete;
  Theory& operator=(const Theory&) = delete;
  Theory(Theory&& o) noexcept { *this = std::move(o); }
  Theory& operator=(Theory&& o) noexcept {
    system = std::move(o.system);
    registry = std::move(o.registry);
    amplitudes = std::move(o.amplitudes);
    observables = std::move(o.observables);
    anomalies = std::move(o.anomalies);
    name = std::move(o.name);
    main_region = std::move(o.main_region);
    seed = o.seed;
    cache_.reset();
    o.cache_.reset();
    return *this;
  }

  const SpaceCache& spaces() const {
    if (!cache_) cache_ = std::make_unique<SpaceCache>(system, registry);
    return *cache_;
  }

  const ProductSpace& boundary_space(const RRef& r) const {
    return spaces().boundary(system.boundary_of(r));
  }

  bool has_amplitude(const RRef& r) const { return amplitudes.count(r.id) > 0; }

  /// Amplitude functional of a region reference. For the reversed region the
  /// coefficients are produced by orientation conjugation.
  AmplitudeMap amplitude(const RRef& r) const {
    auto it = amplitudes.find(r.id);
    if (it == amplitudes.end())
      throw std::invalid_argument("no amplitude declared for region " + r.id);
    if (!r.rev) return {r, it->second};
    return orientation_conjugate({{r.id, false}, it->second});
  }

  /// rho_{~M}(eta) = conj(rho_M(iota(eta))), realized coefficientwise as
  /// coeff'_J = twist(J) conj(coeff_J). Involutive.
  AmplitudeMap orientation_conjugate(const AmplitudeMap& a) const {
    const ProductSpace& sp = boundary_space(a.region);
    cvec out(sp.dim);
    for (long n = 0; n < sp.dim; ++n)
      out(n) = double(sp.twist(n)) * std::conj(a.coeffs(n));
    return {a.region.reversed(), std::move(out)};
  }

  ObservableMap orientation_conjugate(const ObservableMap& o) const {
    const ProductSpace& sp = boundary_space(o.region);
    cvec out(sp.dim);
    for (long n = 0; n < sp.dim; ++n)
      out(n) = double(sp.twist(n)) * std::conj(o.coeffs(n));
    return {o.region.reversed(), o.fdeg, std::move(out)};
  }

  const ObservableMap& observable(const std::string& id) const {
    auto it = observables.find(id);
    if (it == observables.end()) throw std::invalid_argument("unknown observable: " + id);
    return it->second;
  }

  std::optional<cplx> anomaly(const std::string& gluing_id) const {
    auto it = anomalies.find(gluing_id);
    if (it == anomalies.end()) return std::nullopt;
    return it->second;
  }

  const GluingRecord& gluing(const std::string& id) const {
    for (const auto& g : system.gluings)
      if (g.id == id) return g;
    throw std::invalid_argument("unknown gluing record: " + id);
  }

 private:
  mutable std::unique_ptr<SpaceCache> cache_;
};

/// tau against the catalog: the part list must be a registered decomposition
/// of the target hypersurface.
inline cvec tau_registered(const Theory& th, const std::vector<HRef>& parts,
                           const std::vector<cvec>& vecs, const HRef& whole,
                           SignMode mode = SignMode::Full) {
  if (!th.system.find_decomposition(whole, parts))
    throw std::invalid_argument("decomposition of " + whole.str() + " is not registered");
  const SpaceCache& spaces = th.spaces();
  std::vector<const ProductSpace*> part_spaces;
  for (const auto& p : parts) part_spaces.push_back(&spaces.boundary(p));
  return tau(part_spaces, vecs, spaces.boundary(whole), mode);
}

/// Apply a functional to a vector of its space.
inline cplx evaluate(const cvec& functional, const cvec& v) {
  if (functional.size() != v.size())
    throw std::invalid_argument("evaluate: functional/vector space mismatch");
  return (functional.array() * v.array()).sum();
}

inline cplx evaluate(const AmplitudeMap& a, const cvec& v) { return evaluate(a.coeffs, v); }
inline cplx evaluate(const ObservableMap& o, const cvec& v) { return evaluate(o.coeffs, v); }

/// Largest amplitude coefficient sitting in the f-odd part; zero for a
/// well-formed amplitude map.
inline double f_even_violation(const ProductSpace& sp, const cvec& coeffs) {
  double worst = 0;
  for (long n = 0; n < sp.dim; ++n)
    if (sp.fdeg(n)) worst = std::max(worst, std::abs(coeffs(n)));
  return worst;
}

/// Violation of a declared homogeneous degree for an observable map.
inline double homogeneity_violation(const ProductSpace& sp, const ObservableMap& o) {
  if (!o.fdeg) return 0;
  double worst = 0;
  for (long n = 0; n < sp.dim; ++n)
    if (sp.fdeg(n) != *o.fdeg) worst = std::max(worst, std::abs(o.coeffs(n)));
  return worst;
}

/// Canonical slice amplitude: the unique functional on the slice boundary
/// with rho(tau(iota(zeta_I) (x) zeta'_J)) = <zeta_I, zeta_J>.
inline cvec slice_amplitude(const Theory& th, const RRef& slice_region) {
  const Region& reg = th.system.region(slice_region);
  if (!reg.slice_of)
    throw std::invalid_argument("region " + slice_region.id + " is not a slice region");
  HRef sigma = HRef::parse(*reg.slice_of);
  const SpaceCache& spaces = th.spaces();
  const ProductSpace& hs = spaces.boundary(sigma);
  const ProductSpace& bd = spaces.boundary(th.system.boundary_of(slice_region));

  const Decomposition* dec = nullptr;
  for (const auto& d : th.system.decompositions)
    if (d.whole == th.system.boundary_of(slice_region) && d.parts.size() == 2) {
      dec = &d;
      break;
    }
  if (!dec) throw std::invalid_argument("slice boundary decomposition not registered");
  const ProductSpace& p0 = spaces.boundary(dec->parts[0]);  // ~Sigma
  const ProductSpace& p1 = spaces.boundary(dec->parts[1]);  // Sigma'

  std::vector<HRef> slots = p0.slots;
  slots.insert(slots.end(), p1.slots.begin(), p1.slots.end());
  ProductSpace src = ProductSpace::make(slots, [&] {
    std::vector<const KreinSpace*> f = p0.factors;
    f.insert(f.end(), p1.factors.begin(), p1.factors.end());
    return f;
  }());
  SignedReorder reorder = SignedReorder::make(src, bd);

  cvec out = cvec::Zero(bd.dim);
  for (long i = 0; i < hs.dim; ++i) {
    long flat = i * hs.dim + i;  // iota(zeta_I) (x) zeta'_I
    auto [dst, sgn] = reorder.map_basis(flat);
    // iota contributes twist(I); the required value is the inner product.
    out(dst) = double(sgn) * double(hs.twist(i)) * hs.metric(i);
  }
  return out;
}

}  // namespace gbf

#endif  // GBF_THEORY_HPP
