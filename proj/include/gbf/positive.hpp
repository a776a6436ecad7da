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

#ifndef GBF_POSITIVE_HPP
#define GBF_POSITIVE_HPP

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gbf/amplitude.hpp"
#include "gbf/report.hpp"
#include "gbf/theory.hpp"

namespace gbf {

/// Functional on the doubled space D_{bd M} = H (x) H~ of rank-one form
/// F(b_IJ) = left_I right_J. Probability maps have left = rho and
/// right_J = twist(J) conj(rho_J); expectation maps replace left by the
/// observable coefficients.
struct DoubledFunctional {
  RRef region;
  cvec left;
  cvec right;

  cplx pair_value(long i, long j) const { return left(i) * right(j); }

  cplx evaluate(const Doubled& d, const cvec& sigma) const {
    if (sigma.size() != d.dim())
      throw std::invalid_argument("doubled functional: space mismatch");
    cplx acc = 0;
    for (long i = 0; i < d.hdim(); ++i) {
      if (left(i) == cplx(0, 0)) continue;
      cplx row = 0;
      for (long j = 0; j < d.hdim(); ++j) row += right(j) * sigma(d.pair(i, j));
      acc += left(i) * row;
    }
    return acc;
  }

  cvec dense(const Doubled& d) const {
    cvec out(d.dim());
    for (long i = 0; i < d.hdim(); ++i)
      for (long j = 0; j < d.hdim(); ++j) out(d.pair(i, j)) = left(i) * right(j);
    return out;
  }
};

using ProbabilityMap = DoubledFunctional;
using ExpectationMap = DoubledFunctional;

namespace detail {

inline cvec conjugate_side(const ProductSpace& sp, const cvec& rho) {
  cvec out(sp.dim);
  for (long n = 0; n < sp.dim; ++n) out(n) = double(sp.twist(n)) * std::conj(rho(n));
  return out;
}

}  // namespace detail

/// [OP] probability_map: A_M(psi (x) eta) = rho_M(psi) rho_{~M}(eta).
inline ProbabilityMap probability_map(const Theory& th, const RRef& region) {
  AmplitudeMap rho = th.amplitude(region);
  const ProductSpace& sp = th.boundary_space(region);
  return {region, rho.coeffs, detail::conjugate_side(sp, rho.coeffs)};
}

/// [OP] expectation_map: A^O_M(psi (x) eta) = rho^O_M(psi) rho_{~M}(eta).
inline ExpectationMap expectation_map(const Theory& th, const ObservableMap& o) {
  AmplitudeMap rho = th.amplitude(o.region);
  const ProductSpace& sp = th.boundary_space(o.region);
  return {o.region, o.coeffs, detail::conjugate_side(sp, rho.coeffs)};
}

/// Independent route for A_M: the literal operator sum
///   A_M(sigma) = sum_n conj(rho(zeta_n)) rho(op(sigma) zeta_n).
inline cplx probability_map_operator_sum(const Theory& th, const RRef& region, const Doubled& d,
                                         const cvec& sigma) {
  AmplitudeMap rho = th.amplitude(region);
  cmat m = op_from_tensor(d, sigma);
  cplx acc = 0;
  for (long n = 0; n < d.hdim(); ++n) {
    cplx val = 0;
    for (long k = 0; k < d.hdim(); ++k) val += rho.coeffs(k) * m(k, n);
    acc += std::conj(rho.coeffs(n)) * val;
  }
  return acc;
}

/// Same literal sum for an expectation map.
inline cplx expectation_map_operator_sum(const Theory& th, const ObservableMap& o,
                                         const Doubled& d, const cvec& sigma) {
  AmplitudeMap rho = th.amplitude(o.region);
  cmat m = op_from_tensor(d, sigma);
  cplx acc = 0;
  for (long n = 0; n < d.hdim(); ++n) {
    cplx val = 0;
    for (long k = 0; k < d.hdim(); ++k) val += o.coeffs(k) * m(k, n);
    acc += std::conj(rho.coeffs(n)) * val;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// P-suite checks
// ---------------------------------------------------------------------------

/// [OP] check_P3x: A of the slice region, through tau*, restricts to the
/// Hilbert-Schmidt pairing: A(tau*(iota*(s') (x) s)) = <<s', s>>.
inline CheckResult check_P3x(const Theory& th, const RRef& slice_region, double tol,
                             SignMode mode = SignMode::Full) {
  const Region& reg = th.system.region(slice_region);
  if (!reg.slice_of) throw std::invalid_argument("not a slice region: " + slice_region.id);
  HRef sigma = HRef::parse(*reg.slice_of);
  const SpaceCache& spaces = th.spaces();

  const Decomposition* dec = nullptr;
  for (const auto& d : th.system.decompositions)
    if (d.whole == th.system.boundary_of(slice_region) && d.parts.size() == 2 &&
        d.parts[0] == sigma.reversed()) {
      dec = &d;
      break;
    }
  if (!dec) throw std::invalid_argument("slice decomposition missing for " + slice_region.id);
  HRef sigma_prime = dec->parts[1];

  Doubled d_sigma = Doubled::make(spaces, sigma);
  Doubled d_mirror = Doubled::make(spaces, sigma.reversed());
  Doubled d_prime = Doubled::make(spaces, sigma_prime);
  Doubled d_bd = Doubled::make(spaces, th.system.boundary_of(slice_region));

  ProbabilityMap a = probability_map(th, slice_region);
  cvec a_dense = a.dense(d_bd);
  cvec g = detail::pullback_functional({d_mirror.full, d_prime.full}, *d_bd.full, a_dense, mode);

  long n = d_sigma.hdim();
  double worst = 0;
  for (long p = 0; p < d_sigma.dim(); ++p) {
    long pi = p / n, pj = p % n;
    double t = double(d_sigma.half->twist(pi)) * double(d_sigma.half->twist(pj));
    if (mode != SignMode::NoKoszul && d_sigma.d_fdeg(pi) && d_sigma.d_fdeg(pj)) t = -t;
    for (long q = 0; q < d_sigma.dim(); ++q) {
      cplx lhs = t * g(p * d_sigma.dim() + q);
      cplx rhs = (p == q) ? cplx(d_sigma.hs_metric(pi, pj), 0) : cplx(0, 0);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return make_result("P3x", slice_region.str(), worst, tol);
}

/// [OP] check_P5a: factorization of the probability map of a disjoint union
/// over the full doubled product basis, plus positivity transport.
inline CheckResult check_P5a(const Theory& th, const GluingRecord& g, double tol,
                             SignMode mode = SignMode::Full, Rng* rng = nullptr) {
  if (g.kind != GluingKind::DisjointUnion)
    throw std::invalid_argument("gluing " + g.id + " is not a disjoint union");
  const SpaceCache& spaces = th.spaces();
  Doubled d_m = Doubled::make(spaces, th.system.boundary_of(g.result));
  ProbabilityMap a_m = probability_map(th, g.result);
  cvec a_dense = a_m.dense(d_m);

  std::vector<Doubled> dparts;
  std::vector<ProbabilityMap> aparts;
  std::vector<const ProductSpace*> fulls;
  for (const auto& in : g.inputs) {
    dparts.push_back(Doubled::make(spaces, th.system.boundary_of(in)));
    aparts.push_back(probability_map(th, in));
    fulls.push_back(dparts.back().full);
  }
  cvec gl = detail::pullback_functional(fulls, *d_m.full, a_dense, mode);

  std::vector<long> dims;
  for (const auto& dp : dparts) dims.push_back(dp.dim());
  double worst = 0;
  for (long flat = 0; flat < gl.size(); ++flat) {
    long rest = flat;
    cplx rhs = 1;
    for (long k = static_cast<long>(dparts.size()) - 1; k >= 0; --k) {
      long sub = rest % dims[k];
      rest /= dims[k];
      long i = sub / dparts[k].hdim(), j = sub % dparts[k].hdim();
      rhs *= aparts[k].pair_value(i, j);
    }
    worst = std::max(worst, std::abs(gl(flat) - rhs));
  }

  // Positivity transport: tensor products of positive even elements stay
  // in the cone.
  if (rng && dparts.size() == 2) {
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<cvec> xs;
      for (auto& dp : dparts) {
        cmat gm = rng->random_matrix(static_cast<int>(dp.hdim()));
        // Zero the blocks mixing f-parities so the element is f-even.
        for (long r = 0; r < dp.hdim(); ++r)
          for (long c = 0; c < dp.hdim(); ++c)
            if (dp.d_fdeg(r) != dp.d_fdeg(c)) gm(r, c) = 0;
        cmat psd = gm.adjoint() * gm;
        xs.push_back(tensor_from_op(dp, psd));
      }
      cvec image = tau({dparts[0].full, dparts[1].full}, xs, *d_m.full, mode);
      if (!is_positive(d_m, image, 1e-9))
        worst = std::max(worst, 1.0);
    }
  }
  return make_result("P5a", g.id, worst, tol);
}

struct P5bResult {
  CheckResult check;
  double c2_recovered = 1.0;  // |c|^2 solved at the positive level
};

/// [OP] check_P5b: the self-gluing identity for probability maps,
///   A_{M1}(sigma) |c|^2 = sum_q w(q) A_M(tau*(sigma (x) xi_q (x) mirror(xi_q))),
/// with w the Hilbert-Schmidt metric of the doubled basis. Verified on every
/// basis sigma of D_{bd M1}; optionally re-run in a graded-rotated basis.
inline P5bResult check_P5b(const Theory& th, const GluingRecord& g, cplx c_amplitude, double tol,
                           SignMode mode = SignMode::Full, Rng* rng = nullptr) {
  GluingContext ctx = GluingContext::make(th, g);
  const SpaceCache& spaces = th.spaces();
  Doubled d_m = Doubled::make(spaces, th.system.boundary_of(ctx.m));
  Doubled d_m1 = Doubled::make(spaces, th.system.boundary_of(ctx.m1));
  Doubled d_s = Doubled::make(spaces, ctx.sigma);
  Doubled d_sbp = Doubled::make(spaces, ctx.sbp);

  ProbabilityMap a_m = probability_map(th, ctx.m);
  ProbabilityMap a_m1 = probability_map(th, ctx.m1);
  cvec a_dense = a_m.dense(d_m);
  cvec gl = detail::pullback_functional({d_m1.full, d_s.full, d_sbp.full}, *d_m.full, a_dense,
                                        mode);

  long ns = d_s.hdim();
  long dsq = d_s.dim();
  double c2 = std::norm(c_amplitude);

  // Per-basis weight: hs metric, with the mirror-realization sign of the
  // basis element folded in.
  auto weight = [&](long q) {
    long k = q / ns, l = q % ns;
    double w = double(d_s.half->twist(k)) * double(d_s.half->twist(l));
    if (mode != SignMode::NoKoszul && d_s.d_fdeg(k) && d_s.d_fdeg(l)) w = -w;
    int fpart = d_s.d_fdeg(l);
    int spart = d_s.d_sig(k) + d_s.d_sig(l);
    if (mode == SignMode::NoSignatureFactors) spart = 0;
    if ((fpart + spart) % 2) w = -w;
    return w;
  };

  double worst = 0;
  std::vector<cplx> lhs_list(d_m1.dim());
  for (long p = 0; p < d_m1.dim(); ++p) {
    cplx acc = 0;
    for (long q = 0; q < dsq; ++q) acc += weight(q) * gl((p * dsq + q) * dsq + q);
    lhs_list[p] = acc;
    long i = p / d_m1.hdim(), j = p % d_m1.hdim();
    cplx rhs = a_m1.pair_value(i, j) * c2;
    worst = std::max(worst, std::abs(acc - rhs));
  }

  // Independent |c|^2 at the positive level, least squares over the basis.
  double num = 0, den = 0;
  for (long p = 0; p < d_m1.dim(); ++p) {
    long i = p / d_m1.hdim(), j = p % d_m1.hdim();
    cplx av = a_m1.pair_value(i, j);
    num += std::real(std::conj(av) * lhs_list[p]);
    den += std::norm(av);
  }
  P5bResult out;
  out.c2_recovered = (den > 0) ? num / den : c2;
  double c2_dev = (den > 0) ? std::abs(out.c2_recovered - c2) : 0.0;

  // Basis independence: same sum in a graded-block-rotated basis of D_Sigma.
  double rot_dev = 0;
  if (rng && dsq <= 64) {
    cmat u = cmat::Zero(dsq, dsq);
    {
      std::map<std::array<int, 4>, std::vector<long>> blocks;
      for (long q = 0; q < dsq; ++q) {
        long k = q / ns, l = q % ns;
        blocks[{d_s.d_fdeg(k), d_s.d_fdeg(l), d_s.d_sig(k), d_s.d_sig(l)}].push_back(q);
      }
      for (auto& [key, idx] : blocks) {
        cmat b = rng->haar_unitary(static_cast<int>(idx.size()));
        for (std::size_t r = 0; r < idx.size(); ++r)
          for (std::size_t c = 0; c < idx.size(); ++c) u(idx[r], idx[c]) = b(r, c);
      }
    }
    long p_samples = std::min<long>(d_m1.dim(), 4);
    for (long p = 0; p < p_samples; ++p) {
      cplx acc = 0;
      for (long col = 0; col < dsq; ++col) {
        cvec xi = u.col(col);
        cvec mir = mirror_realize(d_s, xi, mode);
        long k0 = col / ns, l0 = col % ns;
        int fpart = d_s.d_fdeg(l0);
        int spart = d_s.d_sig(k0) + d_s.d_sig(l0);
        if (mode == SignMode::NoSignatureFactors) spart = 0;
        double w = ((fpart + spart) % 2) ? -1.0 : 1.0;
        cplx term = 0;
        for (long q = 0; q < dsq; ++q) {
          if (xi(q) == cplx(0, 0)) continue;
          for (long r = 0; r < dsq; ++r) {
            if (mir(r) == cplx(0, 0)) continue;
            term += xi(q) * mir(r) * gl((p * dsq + q) * dsq + r);
          }
        }
        acc += w * term;
      }
      rot_dev = std::max(rot_dev, std::abs(acc - lhs_list[p]));
    }
  }

  double total = std::max({worst, c2_dev, rot_dev});
  out.check = make_result("P5b", g.id, total, tol,
                          "identity dev " + std::to_string(worst) + ", |c|^2 dev " +
                              std::to_string(c2_dev) + ", rotated-basis dev " +
                              std::to_string(rot_dev));
  return out;
}

/// [OP] check_P1_P2: order and inner-product structure of the doubled
/// spaces, plus tau* isometry/positivity over registered decompositions.
inline CheckResult check_P1_P2(const Theory& th, double tol, Rng& rng) {
  const SpaceCache& spaces = th.spaces();
  double worst = 0;
  std::string details;

  std::vector<HRef> surfaces;
  std::set<std::string> seen;
  auto add_surface = [&](const HRef& h) {
    const auto& atoms = th.system.atoms_of(h);
    std::string key;
    for (const auto& a : atoms) key += a.str() + "|";
    if (seen.insert(key).second) surfaces.push_back(h);
  };
  for (const auto& [id, rec] : th.system.hypersurfaces)
    if (rec.atomic()) add_surface({id, false});
  for (const auto& [id, reg] : th.system.regions) add_surface(th.system.boundary_of({id, false}));

  for (const auto& h : surfaces) {
    Doubled d = Doubled::make(spaces, h);
    long n = d.hdim();
    if (n == 0) continue;

    for (int trial = 0; trial < 6; ++trial) {
      // Generating proper cone on the dagger-fixed subspace.
      cvec raw = rng.random_vector(d.dim());
      cvec sa = (raw + dagger(d, raw)) / 2.0;
      if (sa.norm() > 10 * tol) {
        if (is_positive(d, sa, tol) && is_positive(d, cvec(-sa), tol))
          worst = std::max(worst, 1.0);
      }
      auto [plus, minus] = spectral_split(d, sa);
      if (!is_positive(d, plus, tol) || !is_positive(d, minus, tol))
        worst = std::max(worst, 1.0);
      worst = std::max(worst, (sa - (plus - minus)).cwiseAbs().maxCoeff());

      // Inner product positive on pairs from the bi-graded cone.
      auto bi_psd = [&]() {
        cmat gm = rng.random_matrix(static_cast<int>(n));
        for (long r = 0; r < n; ++r)
          for (long c = 0; c < n; ++c)
            if (d.d_fdeg(r) || d.d_fdeg(c) || d.d_sig(r) != d.d_sig(c)) gm(r, c) = 0;
        return tensor_from_op(d, cmat(gm.adjoint() * gm));
      };
      cvec p1 = bi_psd(), p2 = bi_psd();
      cplx ip = hs_inner(d, p1, p2);
      worst = std::max(worst, std::max(0.0, -std::real(ip)));
      worst = std::max(worst, std::abs(std::imag(ip)));

      // hs via the operator sum agrees with the diagonal metric route.
      cvec r1 = rng.random_vector(d.dim()), r2 = rng.random_vector(d.dim());
      worst = std::max(worst, std::abs(hs_inner(d, r1, r2) - hs_inner_diag(d, r1, r2)));

      // Real on dagger-fixed even pairs.
      cvec e1 = rng.random_vector(d.dim());
      for (long q = 0; q < d.dim(); ++q)
        if (d.full->fdeg(q)) e1(q) = 0;
      cvec fix1 = (e1 + dagger(d, e1)) / 2.0;
      cvec e2 = rng.random_vector(d.dim());
      for (long q = 0; q < d.dim(); ++q)
        if (d.full->fdeg(q)) e2(q) = 0;
      cvec fix2 = (e2 + dagger(d, e2)) / 2.0;
      worst = std::max(worst, std::abs(std::imag(hs_inner(d, fix1, fix2))));
    }
  }

  // tau* over registered decompositions: isometry on product vectors,
  // positivity transport, graded transposition for two parts.
  for (const auto& dec : th.system.decompositions) {
    Doubled dw = Doubled::make(spaces, dec.whole);
    std::vector<Doubled> dp;
    for (const auto& p : dec.parts) dp.push_back(Doubled::make(spaces, p));
    std::vector<const ProductSpace*> fulls;
    for (auto& x : dp) fulls.push_back(x.full);

    for (int trial = 0; trial < 3; ++trial) {
      std::vector<cvec> xs, ys;
      for (auto& x : dp) {
        xs.push_back(rng.random_vector(x.dim()));
        ys.push_back(rng.random_vector(x.dim()));
      }
      cvec tx = tau(fulls, xs, *dw.full);
      cvec ty = tau(fulls, ys, *dw.full);
      cplx lhs = hs_inner(dw, tx, ty);
      cplx rhs = 1;
      for (std::size_t k = 0; k < dp.size(); ++k) rhs *= hs_inner(dp[k], xs[k], ys[k]);
      worst = std::max(worst, std::abs(lhs - rhs));
    }

    if (dp.size() == 2) {
      // f-graded transposition on homogeneous doubled elements.
      for (int fa = 0; fa <= 1; ++fa)
        for (int fb = 0; fb <= 1; ++fb) {
          cvec xa = cvec::Zero(dp[0].dim()), xb = cvec::Zero(dp[1].dim());
          bool has_a = false, has_b = false;
          for (long q = 0; q < dp[0].dim(); ++q)
            if (dp[0].full->fdeg(q) == fa) {
              xa(q) = rng.cnormal();
              has_a = true;
            }
          for (long q = 0; q < dp[1].dim(); ++q)
            if (dp[1].full->fdeg(q) == fb) {
              xb(q) = rng.cnormal();
              has_b = true;
            }
          if (!has_a || !has_b) continue;
          cvec ab = tau({dp[0].full, dp[1].full}, {xa, xb}, *dw.full);
          cvec ba = tau({dp[1].full, dp[0].full}, {xb, xa}, *dw.full);
          double sign = (fa && fb) ? -1.0 : 1.0;
          worst = std::max(worst, (ab - sign * ba).cwiseAbs().maxCoeff());
        }

      // Positivity transport through tau* on f-even positive elements.
      for (int trial = 0; trial < 2; ++trial) {
        std::vector<cvec> xs;
        for (auto& x : dp) {
          cmat gm = rng.random_matrix(static_cast<int>(x.hdim()));
          for (long r = 0; r < x.hdim(); ++r)
            for (long c = 0; c < x.hdim(); ++c)
              if (x.d_fdeg(r) != x.d_fdeg(c)) gm(r, c) = 0;
          xs.push_back(tensor_from_op(x, cmat(gm.adjoint() * gm)));
        }
        cvec image = tau(fulls, xs, *dw.full);
        if (!is_positive(dw, image, 1e-9)) worst = std::max(worst, 1.0);
      }
    }
  }

  return make_result("P1P2", th.name.empty() ? "theory" : th.name, worst, tol);
}

/// Realness, positivity, route agreement, phase erasure and f-grading of a
/// region's probability map.
inline CheckResult check_P4_properties(const Theory& th, const RRef& region, double tol_eq,
                                       double tol_cone, Rng& rng, int n_random = 50) {
  const SpaceCache& spaces = th.spaces();
  Doubled d = Doubled::make(spaces, th.system.boundary_of(region));
  ProbabilityMap a = probability_map(th, region);
  long n = d.hdim();
  double worst = 0;

  for (int trial = 0; trial < n_random; ++trial) {
    // Self-adjoint f-even element: A real.
    cvec raw = rng.random_vector(d.dim());
    for (long q = 0; q < d.dim(); ++q)
      if (d.full->fdeg(q)) raw(q) = 0;
    cvec sa = (raw + dagger(d, raw)) / 2.0;
    worst = std::max(worst, std::abs(std::imag(a.evaluate(d, sa))));

    // Positive even element: A nonnegative.
    cmat gm = rng.random_matrix(static_cast<int>(n));
    for (long r = 0; r < n; ++r)
      for (long c = 0; c < n; ++c)
        if (d.d_fdeg(r) != d.d_fdeg(c)) gm(r, c) = 0;
    cvec pos = tensor_from_op(d, cmat(gm.adjoint() * gm));
    double val = std::real(a.evaluate(d, pos));
    worst = std::max(worst, std::abs(std::imag(a.evaluate(d, pos))));
    if (val < -tol_cone) worst = std::max(worst, -val);

    // Conjugation compatibility on arbitrary elements.
    cvec any = rng.random_vector(d.dim());
    worst = std::max(worst,
                     std::abs(a.evaluate(d, dagger(d, any)) - std::conj(a.evaluate(d, any))));

    // Tensor route against the literal operator sum.
    worst = std::max(worst, std::abs(a.evaluate(d, any) -
                                     probability_map_operator_sum(th, region, d, any)));
  }

  // Global phase of the amplitude never reaches the probability map.
  {
    cplx phase = std::exp(cplx(0, rng.uniform(0, 6.283185307179586)));
    ProbabilityMap b = a;
    b.left *= phase;
    b.right *= std::conj(phase);  // the conjugate side picks up conj(phase)
    for (int trial = 0; trial < 8; ++trial) {
      cvec any = rng.random_vector(d.dim());
      worst = std::max(worst, std::abs(a.evaluate(d, any) - b.evaluate(d, any)));
    }
  }

  // f-graded: vanishes on the combined-odd part; the stronger bi-graded
  // statement is reported informationally.
  double odd_dev = 0, bigraded_dev = 0;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      double v = std::abs(a.pair_value(i, j));
      if ((d.d_fdeg(i) + d.d_fdeg(j)) % 2) odd_dev = std::max(odd_dev, v);
      if (d.d_fdeg(i) || d.d_fdeg(j)) bigraded_dev = std::max(bigraded_dev, v);
    }
  worst = std::max(worst, odd_dev);

  return make_result("P4", region.str(), worst, tol_eq,
                     "bi-graded vanishing (informational): " + std::to_string(bigraded_dev));
}

// ---------------------------------------------------------------------------
// E-suite checks
// ---------------------------------------------------------------------------

/// A_M is itself an expectation map (E1).
inline CheckResult check_E1(const Theory& th, const RRef& region, double tol) {
  AmplitudeMap rho = th.amplitude(region);
  ObservableMap as_obs{region, 0, rho.coeffs};
  ExpectationMap e = expectation_map(th, as_obs);
  ProbabilityMap a = probability_map(th, region);
  double dev = std::max((e.left - a.left).cwiseAbs().maxCoeff(),
                        (e.right - a.right).cwiseAbs().maxCoeff());
  return make_result("E1", region.str(), dev, tol);
}

/// [OP] check_E2a: factorization of composed expectation maps over a
/// disjoint union, and the graded order sign of the composition.
inline CheckResult check_E2a(const Theory& th, const GluingRecord& g,
                             const std::vector<const ObservableMap*>& obs, double tol,
                             SignMode mode = SignMode::Full) {
  const SpaceCache& spaces = th.spaces();
  ObservableMap composed = compose_observables_disjoint(th, obs, g, mode);
  ExpectationMap e = expectation_map(th, composed);
  Doubled d_m = Doubled::make(spaces, th.system.boundary_of(g.result));
  cvec e_dense = e.dense(d_m);

  std::vector<Doubled> dparts;
  std::vector<ExpectationMap> eparts;
  std::vector<const ProductSpace*> fulls;
  for (std::size_t k = 0; k < g.inputs.size(); ++k) {
    dparts.push_back(Doubled::make(spaces, th.system.boundary_of(g.inputs[k])));
    eparts.push_back(expectation_map(th, *obs[k]));
    fulls.push_back(dparts.back().full);
  }
  cvec gl = detail::pullback_functional(fulls, *d_m.full, e_dense, mode);

  std::vector<long> dims;
  for (const auto& dp : dparts) dims.push_back(dp.dim());
  double worst = 0;
  for (long flat = 0; flat < gl.size(); ++flat) {
    long rest = flat;
    cplx rhs = 1;
    for (long k = static_cast<long>(dparts.size()) - 1; k >= 0; --k) {
      long sub = rest % dims[k];
      rest /= dims[k];
      rhs *= eparts[k].pair_value(sub / dparts[k].hdim(), sub % dparts[k].hdim());
    }
    worst = std::max(worst, std::abs(gl(flat) - rhs));
  }

  // Order dependence of the composition for homogeneous observables.
  if (g.inputs.size() == 2 && obs[0]->fdeg && obs[1]->fdeg) {
    GluingRecord swapped = g;
    std::swap(swapped.inputs[0], swapped.inputs[1]);
    ObservableMap reversed = compose_observables_disjoint(th, {obs[1], obs[0]}, swapped, mode);
    double sign = (*obs[0]->fdeg && *obs[1]->fdeg) ? -1.0 : 1.0;
    worst = std::max(worst,
                     (composed.coeffs - sign * reversed.coeffs).cwiseAbs().maxCoeff());
  }
  return make_result("E2a", g.id, worst, tol);
}

/// [OP] check_E2b: the self-gluing identity for expectation maps with the
/// signature-weighted doubled basis sum.
inline CheckResult check_E2b(const Theory& th, const GluingRecord& g, const ObservableMap& o,
                             cplx c, double tol, SignMode mode = SignMode::Full) {
  GluingContext ctx = GluingContext::make(th, g);
  const SpaceCache& spaces = th.spaces();
  Doubled d_m = Doubled::make(spaces, th.system.boundary_of(ctx.m));
  Doubled d_m1 = Doubled::make(spaces, th.system.boundary_of(ctx.m1));
  Doubled d_s = Doubled::make(spaces, ctx.sigma);
  Doubled d_sbp = Doubled::make(spaces, ctx.sbp);

  ObservableMap glued = glue_observable(th, o, g, c, mode);
  ExpectationMap e_glued = expectation_map(th, glued);
  ExpectationMap e_m = expectation_map(th, o);
  cvec e_dense = e_m.dense(d_m);
  cvec gl = detail::pullback_functional({d_m1.full, d_s.full, d_sbp.full}, *d_m.full, e_dense,
                                        mode);

  long ns = d_s.hdim();
  long dsq = d_s.dim();
  double c2 = std::norm(c);
  double worst = 0;
  for (long p = 0; p < d_m1.dim(); ++p) {
    cplx acc = 0;
    for (long q = 0; q < dsq; ++q) {
      long k = q / ns, l = q % ns;
      double w = double(d_s.half->twist(k)) * double(d_s.half->twist(l));
      if (mode != SignMode::NoKoszul && d_s.d_fdeg(k) && d_s.d_fdeg(l)) w = -w;
      int fpart = d_s.d_fdeg(l);
      int spart = d_s.d_sig(k) + d_s.d_sig(l);
      if (mode == SignMode::NoSignatureFactors) spart = 0;
      if ((fpart + spart) % 2) w = -w;
      acc += w * gl((p * dsq + q) * dsq + q);
    }
    cplx rhs = e_glued.pair_value(p / d_m1.hdim(), p % d_m1.hdim()) * c2;
    worst = std::max(worst, std::abs(acc - rhs));
  }
  return make_result("E2b", g.id + ":" + (o.fdeg ? std::to_string(*o.fdeg) : "?"), worst, tol);
}

/// Orientation relation for expectation maps:
/// A^O_{~M}(mirror(sigma)) = conj(A^O_M(sigma)).
inline CheckResult check_expmor(const Theory& th, const ObservableMap& o, double tol) {
  const SpaceCache& spaces = th.spaces();
  Doubled d = Doubled::make(spaces, th.system.boundary_of(o.region));
  Doubled d_rev = Doubled::make(spaces, th.system.boundary_of(o.region).reversed());
  ExpectationMap fwd = expectation_map(th, o);
  ExpectationMap rev = expectation_map(th, th.orientation_conjugate(o));

  double worst = 0;
  long n = d.hdim();
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      cvec basis = cvec::Zero(d.dim());
      basis(d.pair(i, j)) = 1;
      cvec mir = mirror_realize(d, basis);
      cplx lhs = rev.evaluate(d_rev, mir);
      cplx rhs = std::conj(fwd.pair_value(i, j));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return make_result("expmor", o.region.str(), worst, tol);
}

/// Fermionic superselection: an f-odd observable has vanishing expectation
/// pairings on the f-even doubled sector.
inline CheckResult check_odd_vanishing(const Theory& th, const std::string& obs_id, double tol) {
  const ObservableMap& o = th.observable(obs_id);
  const SpaceCache& spaces = th.spaces();
  Doubled d = Doubled::make(spaces, th.system.boundary_of(o.region));
  ExpectationMap e = expectation_map(th, o);
  double worst = 0;
  for (long i = 0; i < d.hdim(); ++i)
    for (long j = 0; j < d.hdim(); ++j)
      if (d.d_fdeg(i) == 0 && d.d_fdeg(j) == 0)
        worst = std::max(worst, std::abs(e.pair_value(i, j)));
  return make_result("odd-vanishing", obs_id, worst, tol);
}

}  // namespace gbf

#endif  // GBF_POSITIVE_HPP
