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

#include <catch2/catch_amalgamated.hpp>

#include "gbf/amplitude.hpp"
#include "gbf/theory_library.hpp"

using namespace gbf;
using Catch::Approx;

namespace {

Theory qubit_identity() {
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  return build_interval_theory(cfg);
}

}  // namespace

TEST_CASE("evaluate: identity evolution amplitude is the basis pairing") {
  Theory th = qubit_identity();
  AmplitudeMap rho = th.amplitude({"M0", false});
  const ProductSpace& sp = th.boundary_space({"M0", false});
  for (long i = 0; i < 2; ++i)
    for (long j = 0; j < 2; ++j) {
      cvec v = cvec::Zero(sp.dim);
      v(i * 2 + j) = 1;
      CHECK(evaluate(rho, v) == cplx(i == j ? 1 : 0, 0));
    }
  CHECK(evaluate(rho, cvec(cvec::Zero(sp.dim))) == cplx(0, 0));
  CHECK_THROWS_AS(evaluate(rho, cvec(cvec::Zero(3))), std::invalid_argument);
}

TEST_CASE("amplitude maps vanish on the f-odd part") {
  FermionicToyConfig cfg;
  cfg.dim = 3;
  cfg.fdeg = {0, 1, 1};
  Theory th = build_fermionic_toy(cfg);
  const ProductSpace& sp = th.boundary_space({"M0", false});
  AmplitudeMap rho = th.amplitude({"M0", false});
  for (long n = 0; n < sp.dim; ++n)
    if (sp.fdeg(n)) CHECK(rho.coeffs(n) == cplx(0, 0));
  CHECK(check_f_even(th, {"M0", false}, 1e-12).pass);
}

TEST_CASE("orientation conjugation is a coefficientwise involution") {
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  cmat u = cmat::Identity(2, 2);
  u(1, 1) = cplx(0, 1);
  cfg.unitaries = {u};
  Theory th = build_interval_theory(cfg);

  AmplitudeMap rho = th.amplitude({"M0", false});
  AmplitudeMap rev = th.amplitude({"M0", true});
  // On an interval boundary (one odd factor at most per index) the reversal
  // is plain conjugation.
  for (long n = 0; n < rho.coeffs.size(); ++n)
    CHECK(rev.coeffs(n) == std::conj(rho.coeffs(n)));
  AmplitudeMap twice = th.orientation_conjugate(rev);
  CHECK((twice.coeffs - rho.coeffs).cwiseAbs().maxCoeff() == 0.0);

  // diag(1, i) has backward kernel diag(1, -i); reversal conjugates again.
  CHECK(rho.coeffs(3) == cplx(0, -1));
  CHECK(rev.coeffs(3) == cplx(0, 1));

  // Real coefficients are untouched.
  Theory id_th = qubit_identity();
  AmplitudeMap a = id_th.amplitude({"M0", false});
  AmplitudeMap ar = id_th.amplitude({"M0", true});
  CHECK((a.coeffs - ar.coeffs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("check_T3x: canonical slices pass, defects are flagged") {
  Theory th = qubit_identity();
  CheckResult ok = check_T3x(th, {"slice:p000", false}, 1e-12);
  CHECK(ok.pass);
  CHECK(ok.max_deviation == 0.0);

  // Injecting a 1e-3 defect surfaces as a deviation of that size.
  th.amplitudes["slice:p000"](0) += 1e-3;
  CheckResult bad = check_T3x(th, {"slice:p000", false}, 1e-9);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_deviation == Approx(1e-3).margin(1e-9));
}

TEST_CASE("check_T3x: Krein slice reproduces the negative pairing entry") {
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  cfg.sig = {0, 1};
  Theory th = build_interval_theory(cfg);
  CHECK(check_T3x(th, {"slice:p000", false}, 1e-12).pass);
  // rho(iota(e1) (x) e1') = <e1, e1> = -1: the coefficient sits at index 3
  // of the slice boundary space.
  const cvec& rho = th.amplitudes.at("slice:p000");
  CHECK(rho(3) == cplx(-1, 0));
  CHECK(rho(0) == cplx(1, 0));
}

TEST_CASE("check_T5a: factorization over the product basis") {
  Rng rng(5);
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  cfg.unitaries = {rng.haar_unitary(2), rng.haar_unitary(2)};
  Theory th = build_interval_theory(cfg);
  const GluingRecord& g = th.gluing("union:0");
  CheckResult ok = check_T5a(th, g, 1e-12);
  CHECK(ok.pass);

  th.amplitudes["U0"](0) += 1e-4;
  CheckResult bad = check_T5a(th, g, 1e-9);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_deviation >= 1e-4 - 1e-12);
}

TEST_CASE("check_T5b: circle value and anomaly solve") {
  // Identity qubit: the gluing sum for the empty boundary gives the trace 2,
  // and the declared circle amplitude solves c = 1.
  Theory th = qubit_identity();
  CHECK(th.amplitudes.at("C0")(0) == cplx(2, 0));
  AnomalySolveResult res = check_T5b_and_solve_anomaly(th, th.gluing("glue:circle"), 1e-12);
  CHECK(res.check.pass);
  CHECK(std::abs(res.c - cplx(1, 0)) < 1e-14);

  // Generic unitary: the circle carries tr(U^{-1}).
  Rng rng(7);
  IntervalTheoryConfig cfg;
  cfg.dim = 3;
  cfg.unitaries = {rng.haar_unitary(3)};
  Theory th2 = build_interval_theory(cfg);
  cplx oracle = cfg.unitaries[0].inverse().trace();
  CHECK(std::abs(th2.amplitudes.at("C0")(0) - oracle) < 1e-13);

  // Krein toy with sig = (0,1): the signature factor cancels the metric in
  // the amplitude, leaving the plain trace; dropping it leaves the
  // sig-weighted trace instead (the load-bearing negative control).
  IntervalTheoryConfig kc;
  kc.dim = 2;
  kc.sig = {0, 1};
  Theory kth = build_interval_theory(kc);
  CHECK(kth.amplitudes.at("C0")(0) == cplx(2, 0));
  AnomalySolveResult broken =
      check_T5b_and_solve_anomaly(kth, kth.gluing("glue:circle"), 1e-9,
                                  SignMode::NoSignatureFactors);
  CHECK(broken.check.max_deviation > 1e-3);
}

TEST_CASE("check_T5b: rotated orthonormal basis gives the same sum") {
  Rng rng(11);
  IntervalTheoryConfig cfg;
  cfg.dim = 4;
  cfg.sig = {0, 1, 0, 1};
  cfg.unitaries = {krein_unitary(rng, cfg.sig)};
  Theory th = build_interval_theory(cfg);
  GluingContext ctx = GluingContext::make(th, th.gluing("glue:circle"));
  AmplitudeMap rho = th.amplitude(ctx.m);
  cmat u = block_haar(*ctx.h_sigma, rng);
  cvec canonical = glue_functional(ctx, rho.coeffs);
  cvec rotated = glue_functional(ctx, rho.coeffs, SignMode::Full, &u);
  CHECK((canonical - rotated).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("check_T5b: all-zero declared amplitude with nonzero sum is flagged") {
  Theory th = qubit_identity();
  th.amplitudes["C0"](0) = 0;
  AnomalySolveResult res = check_T5b_and_solve_anomaly(th, th.gluing("glue:circle"), 1e-9);
  CHECK_FALSE(res.solvable);
  CHECK_FALSE(res.check.pass);
}

TEST_CASE("induced middle amplitude equals the composed evolution") {
  Rng rng(13);
  IntervalTheoryConfig cfg;
  cfg.dim = 3;
  cfg.unitaries = {rng.haar_unitary(3), rng.haar_unitary(3)};
  Theory th = build_interval_theory(cfg);
  // Declared amplitude of the glued region is built from U2 U1; the gluing
  // sum must solve c = 1 against it with tiny residual.
  AnomalySolveResult res = check_T5b_and_solve_anomaly(th, th.gluing("glue:mid0"), 1e-12);
  CHECK(res.check.pass);
  CHECK(std::abs(res.c - cplx(1, 0)) < 1e-12);

  // Independent oracle: the backward kernel of the composition.
  cmat v = cfg.unitaries[0].inverse() * cfg.unitaries[1].inverse();
  const ProductSpace& sp = th.boundary_space({"J0", false});
  const cvec& rho = th.amplitudes.at("J0");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(rho(i * 3 + j) - v(i, j)) < 1e-12);
  (void)sp;
}

TEST_CASE("compose_observables_disjoint: products, order signs") {
  FermionicToyConfig c1, c2;
  c1.seed = 3;
  c2.seed = 4;
  Theory t1 = build_fermionic_toy(c1);
  Theory t2 = build_fermionic_toy(c2);
  Theory u = disjoint_union(t1, t2);
  const GluingRecord& g = u.gluing("union:main");

  // Amplitudes compose to the union amplitude.
  AmplitudeMap a1 = u.amplitude(g.inputs[0]);
  AmplitudeMap a2 = u.amplitude(g.inputs[1]);
  ObservableMap o1{a1.region, 0, a1.coeffs}, o2{a2.region, 0, a2.coeffs};
  ObservableMap both = compose_observables_disjoint(u, {&o1, &o2}, g);
  CHECK((both.coeffs - u.amplitudes.at("Union")).cwiseAbs().maxCoeff() < 1e-13);

  auto swapped_record = [&] {
    GluingRecord s = g;
    std::swap(s.inputs[0], s.inputs[1]);
    return s;
  }();

  // Odd (x) odd is order-reversing, even (x) odd is symmetric.
  const ObservableMap& odd1 = u.observable("a:obs:odd");
  const ObservableMap& odd2 = u.observable("b:obs:odd");
  const ObservableMap& even1 = u.observable("a:obs:even");
  ObservableMap oo = compose_observables_disjoint(u, {&odd1, &odd2}, g);
  ObservableMap oo_swapped = compose_observables_disjoint(u, {&odd2, &odd1}, swapped_record);
  CHECK((oo.coeffs + oo_swapped.coeffs).cwiseAbs().maxCoeff() < 1e-13);
  REQUIRE(oo.fdeg.has_value());
  CHECK(*oo.fdeg == 0);

  ObservableMap eo = compose_observables_disjoint(u, {&even1, &odd2}, g);
  ObservableMap eo_swapped = compose_observables_disjoint(u, {&odd2, &even1}, swapped_record);
  CHECK((eo.coeffs - eo_swapped.coeffs).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("glue_observable: amplitude reproduces the glued amplitude") {
  Rng rng(17);
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  cfg.unitaries = {rng.haar_unitary(2)};
  Theory th = build_interval_theory(cfg);
  const GluingRecord& g = th.gluing("glue:circle");
  AmplitudeMap rho = th.amplitude({"M0", false});
  ObservableMap as_obs{rho.region, 0, rho.coeffs};
  ObservableMap glued = glue_observable(th, as_obs, g, cplx(1, 0));
  CHECK((glued.coeffs - th.amplitudes.at("C0")).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS_AS(glue_observable(th, as_obs, g, cplx(0, 0)), std::invalid_argument);
}

TEST_CASE("glue_observable: middle insertion matches the matrix contraction oracle") {
  Rng rng(19);
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  cfg.unitaries = {rng.haar_unitary(2), rng.haar_unitary(2)};
  Theory th = build_interval_theory(cfg);
  const GluingRecord& gu = th.gluing("union:0");
  const GluingRecord& gm = th.gluing("glue:mid0");

  // Insert Q at the outgoing end of the first interval.
  cmat q = rng.random_matrix(2);
  const ProductSpace& bd0 = th.boundary_space({"M0", false});
  cmat q_full = cmat::Zero(bd0.dim, bd0.dim);
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < 2; ++k) q_full(i * 2 + m, i * 2 + k) = q(m, k);
  AmplitudeMap a0 = th.amplitude({"M0", false});
  AmplitudeMap a1 = th.amplitude({"M1", false});
  ObservableMap o0{a0.region, 0, cvec(q_full.transpose() * a0.coeffs)};
  ObservableMap o1{a1.region, 0, a1.coeffs};
  ObservableMap on_union = compose_observables_disjoint(th, {&o0, &o1}, gu);
  ObservableMap glued = glue_observable(th, on_union, gm, cplx(1, 0));

  // Direct contraction: backward kernels with Q inserted in between.
  cmat v = cfg.unitaries[0].inverse() * q * cfg.unitaries[1].inverse();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(glued.coeffs(i * 2 + j) - v(i, j)) < 1e-12);
}

TEST_CASE("compose_observables_disjoint: associativity on a triple union") {
  FermionicToyConfig c1, c2, c3;
  c1.seed = 31;
  c2.seed = 32;
  c3.seed = 33;
  Theory t12 = disjoint_union(build_fermionic_toy(c1), build_fermionic_toy(c2));
  Theory u = disjoint_union(std::move(t12), build_fermionic_toy(c3));

  // Register a flat three-input union with the same result region.
  GluingRecord flat;
  flat.id = "union:flat3";
  flat.kind = GluingKind::DisjointUnion;
  flat.inputs = {{"a:a:M0", false}, {"a:b:M0", false}, {"b:M0", false}};
  flat.result = {"Union", false};
  u.system.gluings.push_back(flat);
  u.system.decompositions.push_back(
      {u.system.boundary_of(flat.result),
       {u.system.boundary_of(flat.inputs[0]), u.system.boundary_of(flat.inputs[1]),
        u.system.boundary_of(flat.inputs[2])}});
  REQUIRE(validate(u.system).empty());

  const ObservableMap& o1 = u.observable("a:a:obs:odd");
  const ObservableMap& o2 = u.observable("a:b:obs:odd");
  const ObservableMap& o3 = u.observable("b:obs:even");

  ObservableMap flat3 = compose_observables_disjoint(u, {&o1, &o2, &o3}, flat);
  ObservableMap inner12 =
      compose_observables_disjoint(u, {&o1, &o2}, u.gluing("a:union:main"));
  ObservableMap nested =
      compose_observables_disjoint(u, {&inner12, &o3}, u.gluing("union:main"));
  CHECK((flat3.coeffs - nested.coeffs).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(flat3.fdeg.has_value());
  CHECK(*flat3.fdeg == 0);
}

TEST_CASE("anomaly conjugation under orientation reversal") {
  Rng rng(37);
  IntervalTheoryConfig cfg;
  cfg.dim = 2;
  cfg.unitaries = {rng.haar_unitary(2)};
  Theory th = build_interval_theory(cfg);

  // Rescale the circle amplitude so the anomaly is a nontrivial complex
  // number w, then build the reversed gluing record by hand.
  cplx w(0.8, 0.6);
  th.amplitudes["C0"] /= w;
  th.anomalies["glue:circle"] = w;
  REQUIRE(check_T5b_and_solve_anomaly(th, th.gluing("glue:circle"), 1e-10).check.pass);

  GluingRecord rev;
  rev.id = "glue:circle-rev";
  rev.kind = GluingKind::SelfGluing;
  rev.inputs = {{"M0", true}};
  rev.sigma = {"p000", false};
  rev.sigma_bar_prime = {"p001", true};
  rev.result = {"C0", true};
  th.system.gluings.push_back(rev);
  th.system.decompositions.push_back(
      {th.system.boundary_of({"M0", true}),
       {{"void", false}, {"p000", false}, {"p001", true}}});
  th.anomalies[rev.id] = std::conj(w);

  AnomalySolveResult res = check_T5b_and_solve_anomaly(th, th.gluing(rev.id), 1e-10);
  CHECK(res.check.pass);
  CHECK(std::abs(res.c - std::conj(w)) < 1e-12);
}

TEST_CASE("tau_registered enforces the catalog") {
  SpacetimeSystem sys;
  sys.add_atom("x");
  sys.add_atom("y");
  sys.add_composite("xy", {{"x", false}, {"y", false}});
  sys.decompositions.push_back({{"xy", false}, {{"x", false}, {"y", false}}});
  Theory th;
  th.system = std::move(sys);
  th.registry.atoms["x"] = KreinSpace::make(2);
  th.registry.atoms["y"] = KreinSpace::make(2);

  Rng rng(47);
  cvec a = rng.random_vector(2), b = rng.random_vector(2);
  cvec ok = tau_registered(th, {{"x", false}, {"y", false}}, {a, b}, {"xy", false});
  CHECK(ok.size() == 4);
  // The mirrored registration is accepted as well.
  cvec rev = tau_registered(th, {{"x", true}, {"y", true}}, {a, b}, {"xy", true});
  CHECK(rev.size() == 4);
  // An unregistered ordering is rejected.
  CHECK_THROWS_AS(
      tau_registered(th, {{"y", false}, {"x", false}}, {b, a}, {"xy", false}),
      std::invalid_argument);
}
