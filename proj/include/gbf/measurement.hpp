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

#ifndef GBF_MEASUREMENT_HPP
#define GBF_MEASUREMENT_HPP

#include <string>
#include <utility>
#include <vector>

#include "gbf/positive.hpp"
#include "gbf/theory.hpp"

namespace gbf {

/// Closed subspace of a boundary space, held as an orthonormal frame with
/// respect to the Hilbertized inner product.
class Subspace {
 public:
  const ProductSpace* space = nullptr;
  cmat frame;  // dim x k, orthonormal columns

  static Subspace span(const ProductSpace& sp, const std::vector<cvec>& vectors,
                       double tol = 1e-12) {
    Subspace s;
    s.space = &sp;
    s.frame = cmat(sp.dim, 0);
    for (const auto& v : vectors) {
      if (v.size() != sp.dim) throw std::invalid_argument("subspace vector has wrong dimension");
      cvec w = v;
      if (s.frame.cols() > 0) w -= s.frame * (s.frame.adjoint() * v);
      double n = w.norm();
      if (n > std::max(tol, 1e-12)) {
        s.frame.conservativeResize(Eigen::NoChange, s.frame.cols() + 1);
        s.frame.col(s.frame.cols() - 1) = w / n;
      }
    }
    return s;
  }

  long dim() const { return frame.cols(); }

  cmat projector() const { return frame * frame.adjoint(); }

  /// Containment via the projector criterion |P_S P_A - P_A| <= tol.
  bool contained_in(const Subspace& s, double tol) const {
    if (space != s.space) return false;
    cmat pa = projector(), ps = s.projector();
    return (ps * pa - pa).cwiseAbs().maxCoeff() <= tol;
  }
};

/// Superselection admissibility of a quantum boundary condition: support in
/// the f-even part and compatibility with the signature decomposition.
/// Only binding when the space actually carries odd degrees or mixed
/// signature.
inline bool superselection_ok(const ProductSpace& sp, const cmat& projector, double tol) {
  bool graded = false, mixed = false;
  for (long n = 0; n < sp.dim; ++n) {
    if (sp.fdeg(n)) graded = true;
    if (sp.sig(n)) mixed = true;
  }
  if (!graded && !mixed) return true;
  double worst = 0;
  for (long r = 0; r < sp.dim; ++r)
    for (long c = 0; c < sp.dim; ++c) {
      if (sp.fdeg(r) || sp.fdeg(c)) worst = std::max(worst, std::abs(projector(r, c)));
      if (sp.sig(r) != sp.sig(c)) worst = std::max(worst, std::abs(projector(r, c)));
    }
  return worst <= tol;
}

/// Quotient result; `defined` is false when the denominator vanishes.
struct ProbabilityResult {
  double value = 0;
  bool defined = false;
  double cross_check_deviation = 0;
};

struct ExpectationResult {
  cplx value{0, 0};
  bool defined = false;
  double cross_check_deviation = 0;
};

struct WeightedQuestion {
  std::vector<std::pair<Subspace, double>> components;
  bool probability_ensemble = false;  // enforce 0 < a_i <= 1 and sum 1
};

namespace detail {

/// A_M applied to an operator: sum_{mn} M_{mn} rho_m conj(rho_n).
inline cplx apply_map_operator(const cvec& left, const cvec& rho, const cmat& m) {
  return (left.transpose() * m * rho.conjugate())(0, 0);
}

/// Orthonormal extension: start from the columns of `head` and absorb the
/// extra vectors; optionally fill up to a full basis with coordinate
/// vectors.
inline cmat orthonormal_completion(const ProductSpace& sp, cmat head,
                                   const std::vector<cvec>& extra, bool fill = false) {
  auto absorb = [&](const cvec& v) {
    cvec w = v;
    if (head.cols() > 0) w -= head * (head.adjoint() * v);
    double n = w.norm();
    if (n > 1e-10) {
      head.conservativeResize(Eigen::NoChange, head.cols() + 1);
      head.col(head.cols() - 1) = w / n;
    }
  };
  for (const auto& v : extra) absorb(v);
  for (long j = 0; fill && j < sp.dim && head.cols() < sp.dim; ++j) {
    cvec e = cvec::Zero(sp.dim);
    e(j) = 1;
    absorb(e);
  }
  return head;
}

}  // namespace detail

/// [OP] probability P(A|S) = A_M(P_A) / A_M(P_S), cross-checked against the
/// direct quadratic formula in a basis adapted to A within S.
inline ProbabilityResult probability(const Theory& th, const RRef& region, const Subspace& a,
                                     const Subspace& s, const Tolerances& tol = {},
                                     bool relax_superselection = false) {
  const ProductSpace& sp = th.boundary_space(region);
  if (a.space != &sp || s.space != &sp)
    throw std::invalid_argument("subspaces do not live on the region boundary");
  if (!a.contained_in(s, tol.eq)) throw std::invalid_argument("question A is not contained in S");
  if (!relax_superselection) {
    if (!superselection_ok(sp, a.projector(), tol.eq) ||
        !superselection_ok(sp, s.projector(), tol.eq))
      throw std::invalid_argument("superselection violation in A or S");
  }

  AmplitudeMap rho = th.amplitude(region);
  cplx num = detail::apply_map_operator(rho.coeffs, rho.coeffs, a.projector());
  cplx den = detail::apply_map_operator(rho.coeffs, rho.coeffs, s.projector());

  ProbabilityResult out;
  if (std::abs(den) <= tol.cone) return out;  // undefined, never NaN
  out.defined = true;
  out.value = std::real(num) / std::real(den);

  // Direct route: an orthonormal basis of A, extended to one of S; the
  // quadratic sums over the adapted basis give the same quotient.
  std::vector<cvec> scols;
  for (long j = 0; j < s.frame.cols(); ++j) scols.push_back(s.frame.col(j));
  cmat adapted_s = detail::orthonormal_completion(sp, a.frame, scols);
  long na = a.frame.cols(), ns = adapted_s.cols();
  double num_direct = 0, den_direct = 0;
  for (long j = 0; j < ns; ++j) {
    double w = std::norm(evaluate(rho.coeffs, cvec(adapted_s.col(j))));
    if (j < na) num_direct += w;
    den_direct += w;
  }
  if (den_direct > 0)
    out.cross_check_deviation = std::abs(out.value - num_direct / den_direct);
  return out;
}

/// [OP] ensemble_expectation: sum a_i P(A_i|S) = A_M(Q)/A_M(P_S) with
/// Q = sum a_i P_{A_i}. The linearity identity doubles as the cross-check.
inline ProbabilityResult ensemble_expectation(const Theory& th, const RRef& region,
                                              const WeightedQuestion& q, const Subspace& s,
                                              const Tolerances& tol = {},
                                              bool relax_superselection = false) {
  const ProductSpace& sp = th.boundary_space(region);
  if (q.probability_ensemble) {
    double total = 0;
    for (const auto& [sub, w] : q.components) {
      if (w <= 0 || w > 1 + tol.eq)
        throw std::invalid_argument("ensemble weights must lie in (0, 1]");
      total += w;
    }
    if (std::abs(total - 1.0) > tol.eq)
      throw std::invalid_argument("ensemble weights must sum to one");
  }
  cmat qop = cmat::Zero(sp.dim, sp.dim);
  for (const auto& [sub, w] : q.components) {
    if (!sub.contained_in(s, tol.eq))
      throw std::invalid_argument("ensemble component not contained in S");
    qop += w * sub.projector();
  }
  if (!relax_superselection && !superselection_ok(sp, s.projector(), tol.eq))
    throw std::invalid_argument("superselection violation in S");

  AmplitudeMap rho = th.amplitude(region);
  cplx num = detail::apply_map_operator(rho.coeffs, rho.coeffs, qop);
  cplx den = detail::apply_map_operator(rho.coeffs, rho.coeffs, s.projector());
  ProbabilityResult out;
  if (std::abs(den) <= tol.cone) return out;
  out.defined = true;
  out.value = std::real(num) / std::real(den);

  double linear = 0;
  bool all_defined = true;
  for (const auto& [sub, w] : q.components) {
    ProbabilityResult p = probability(th, region, sub, s, tol, relax_superselection);
    if (!p.defined) all_defined = false;
    linear += w * p.value;
  }
  if (all_defined) out.cross_check_deviation = std::abs(out.value - linear);
  return out;
}

/// [OP] observable_expectation <O>_S = A^O_M(P_S) / A_M(P_S), cross-checked
/// against the direct double sum over an adapted basis of S.
inline ExpectationResult observable_expectation(const Theory& th, const ObservableMap& o,
                                                const Subspace& s, const Tolerances& tol = {},
                                                bool relax_superselection = false) {
  const ProductSpace& sp = th.boundary_space(o.region);
  if (s.space != &sp) throw std::invalid_argument("S does not live on the region boundary");
  if (!relax_superselection && !superselection_ok(sp, s.projector(), tol.eq))
    throw std::invalid_argument("superselection violation in S");

  AmplitudeMap rho = th.amplitude(o.region);
  cplx num = detail::apply_map_operator(o.coeffs, rho.coeffs, s.projector());
  cplx den = detail::apply_map_operator(rho.coeffs, rho.coeffs, s.projector());
  ExpectationResult out;
  if (std::abs(den) <= tol.cone) return out;
  out.defined = true;
  out.value = num / std::real(den);

  cplx num_direct = 0;
  double den_direct = 0;
  for (long j = 0; j < s.frame.cols(); ++j) {
    cvec xi = s.frame.col(j);
    num_direct += std::conj(evaluate(rho.coeffs, xi)) * evaluate(o.coeffs, xi);
    den_direct += std::norm(evaluate(rho.coeffs, xi));
  }
  if (den_direct > 0) out.cross_check_deviation = std::abs(out.value - num_direct / den_direct);
  return out;
}

// ---------------------------------------------------------------------------
// Standard-formulation mixed-state layer.
// ---------------------------------------------------------------------------

struct MixedState {
  const ProductSpace* space = nullptr;
  cmat op;
};

/// [OP] mixed_state: sigma = sum_i p_i |psi_i><psi_i|.
inline MixedState mixed_state(const ProductSpace& sp,
                              const std::vector<std::pair<cvec, double>>& ensemble,
                              double tol = 1e-9) {
  double total = 0;
  cmat op = cmat::Zero(sp.dim, sp.dim);
  for (const auto& [psi, p] : ensemble) {
    if (p < -tol || p > 1 + tol) throw std::invalid_argument("ensemble weight outside [0,1]");
    if (std::abs(psi.norm() - 1.0) > tol)
      throw std::invalid_argument("ensemble states must be normalized");
    op += p * (psi * psi.adjoint());
    total += p;
  }
  if (std::abs(total - 1.0) > tol) throw std::invalid_argument("ensemble weights must sum to one");
  return {&sp, op};
}

/// [OP] hs_transition: Hilbert-Schmidt pairing of two mixed states; for
/// pure projectors this is |<psi_2, psi_1>|^2.
inline double hs_transition(const MixedState& s2, const MixedState& s1) {
  if (s2.space != s1.space) throw std::invalid_argument("mixed states on different spaces");
  cplx tr = (s2.op.adjoint() * s1.op).trace();
  return std::real(tr);
}

/// [OP] evolve_mixed: conjugation by a unitary, trace and positivity
/// preserving.
inline MixedState evolve_mixed(const cmat& u, const MixedState& s, double tol = 1e-9) {
  cmat gram = u.adjoint() * u;
  if ((gram - cmat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("evolution operator is not unitary");
  return {s.space, cmat(u * s.op * u.adjoint())};
}

/// [OP] born_recovery: for an interval-shaped region, the GBF probability
/// with S = iota(psi) (x) (full out space) and A = iota(psi) (x) phi equals
/// the Born rule |<phi, U psi>|^2.
inline ProbabilityResult born_recovery(const Theory& th, const RRef& region, const cvec& psi_in,
                                       const cvec& phi_out, const Tolerances& tol = {}) {
  const ProductSpace& sp = th.boundary_space(region);
  if (sp.nslots() != 2)
    throw std::invalid_argument("born_recovery needs an interval-shaped region");
  int in_slot = -1, out_slot = -1;
  for (int k = 0; k < 2; ++k) (sp.slots[k].rev ? in_slot : out_slot) = k;
  if (in_slot < 0 || out_slot < 0)
    throw std::invalid_argument("born_recovery needs one incoming and one outgoing point");
  long d_in = sp.factors[in_slot]->dim, d_out = sp.factors[out_slot]->dim;
  if (psi_in.size() != d_in || phi_out.size() != d_out)
    throw std::invalid_argument("state dimensions do not match the interval boundary");

  auto product_vec = [&](const cvec& in_part, const cvec& out_part) {
    cvec v(sp.dim);
    std::vector<int> t(2);
    for (long n = 0; n < sp.dim; ++n) {
      sp.decode(n, t);
      v(n) = in_part(t[in_slot]) * out_part(t[out_slot]);
    }
    return v;
  };

  cvec psi_rev = psi_in.conjugate();  // iota on an atomic space
  std::vector<cvec> s_span;
  for (long j = 0; j < d_out; ++j) {
    cvec e = cvec::Zero(d_out);
    e(j) = 1;
    s_span.push_back(product_vec(psi_rev, e));
  }
  Subspace s = Subspace::span(sp, s_span);
  Subspace a = Subspace::span(sp, {product_vec(psi_rev, phi_out)});
  return probability(th, region, a, s, tol, true);
}

}  // namespace gbf

#endif  // GBF_MEASUREMENT_HPP
