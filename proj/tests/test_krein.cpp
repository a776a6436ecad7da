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

#include "gbf/krein.hpp"

using namespace gbf;
using Catch::Approx;

namespace {

/// Three atoms with graded spaces, plus the composites used below.
struct Fixture {
  SpacetimeSystem sys;
  SpaceRegistry reg;
  std::unique_ptr<SpaceCache> cache;

  Fixture() {
    sys.add_atom("a");
    sys.add_atom("b");
    sys.add_atom("c");
    sys.add_composite("ab", {{"a", false}, {"b", false}});
    sys.add_composite("bc", {{"b", false}, {"c", false}});
    sys.add_composite("abc", {{"a", false}, {"b", false}, {"c", false}});
    reg.atoms["a"] = KreinSpace::make(2, {0, 1}, {0, 0});
    reg.atoms["b"] = KreinSpace::make(2, {0, 1}, {0, 1});
    reg.atoms["c"] = KreinSpace::make(2, {1, 0}, {0, 0});
    cache = std::make_unique<SpaceCache>(sys, reg);
  }

  const ProductSpace& space(const std::string& ref) { return cache->boundary(HRef::parse(ref)); }
};

cvec basis(const ProductSpace& sp, long n) {
  cvec v = cvec::Zero(sp.dim);
  v(n) = 1;
  return v;
}

}  // namespace

TEST_CASE("indefinite inner product") {
  Fixture f;
  const ProductSpace& b = f.space("b");  // sig = (0, 1)
  CHECK(b.inner(basis(b, 0), basis(b, 0)) == cplx(1, 0));
  CHECK(b.inner(basis(b, 1), basis(b, 1)) == cplx(-1, 0));

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    cvec x = rng.random_vector(b.dim), y = rng.random_vector(b.dim);
    CHECK(std::abs(b.inner(x, y) - std::conj(b.inner(y, x))) < 1e-14);
  }
}

TEST_CASE("signature map") {
  Fixture f;
  const ProductSpace& a = f.space("a");  // all positive
  const ProductSpace& b = f.space("b");
  Rng rng(5);
  cvec x = rng.random_vector(a.dim);
  CHECK((a.signature_map(x) - x).norm() == 0.0);

  cvec e1 = basis(b, 1);
  CHECK((b.signature_map(e1) + e1).norm() == 0.0);  // I e1 = -e1 on the negative direction
  cvec y = rng.random_vector(b.dim), z = rng.random_vector(b.dim);
  CHECK((b.signature_map(b.signature_map(y)) - y).norm() < 1e-15);
  // <I psi, phi> is the Hilbertized inner product.
  CHECK(std::abs(b.inner(b.signature_map(y), z) - b.inner_hilbert(y, z)) < 1e-14);
}

TEST_CASE("iota: conjugate-linear involutive isometry") {
  Fixture f;
  const ProductSpace& ab = f.space("ab");
  const ProductSpace& ab_rev = f.cache->of_slots({{"a", true}, {"b", true}});
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    cvec x = rng.random_vector(ab.dim), y = rng.random_vector(ab.dim);
    cvec ix = iota(ab, x), iy = iota(ab, y);
    CHECK((iota(ab_rev, ix) - x).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(ab_rev.inner(ix, iy) - ab.inner(y, x)) < 1e-13);
  }
  // Conjugate linearity on an atomic space: iota(i e0) = -i e0~.
  const ProductSpace& a = f.space("a");
  cvec v = cplx(0, 1) * basis(a, 0);
  CHECK((iota(a, v) - cplx(0, -1) * basis(a, 0)).norm() == 0.0);
  // Real coefficients map to identical coefficients on atomic spaces.
  cvec r = basis(a, 0) + 2.0 * basis(a, 1);
  CHECK((iota(a, r) - r).norm() == 0.0);
}

TEST_CASE("tau: graded transposition signs") {
  Fixture f;
  const ProductSpace& a = f.space("a");
  const ProductSpace& b = f.space("b");
  const ProductSpace& ab = f.space("ab");

  // Two f-even vectors commute without sign.
  cvec xe = basis(a, 0), ye = basis(b, 0);
  cvec fwd = tau({&a, &b}, {xe, ye}, ab);
  cvec bwd = tau({&b, &a}, {ye, xe}, ab);
  CHECK((fwd - bwd).norm() == 0.0);

  // Two f-odd vectors anticommute.
  cvec xo = basis(a, 1), yo = basis(b, 1);
  fwd = tau({&a, &b}, {xo, yo}, ab);
  bwd = tau({&b, &a}, {yo, xo}, ab);
  CHECK((fwd + bwd).norm() == 0.0);

  // Isometry on random vectors.
  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    cvec x = rng.random_vector(a.dim), y = rng.random_vector(b.dim);
    cvec x2 = rng.random_vector(a.dim), y2 = rng.random_vector(b.dim);
    cplx lhs = ab.inner(tau({&a, &b}, {x, y}, ab), tau({&a, &b}, {x2, y2}, ab));
    cplx rhs = a.inner(x, x2) * b.inner(y, y2);
    CHECK(std::abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("tau: associativity of both bracketings") {
  Fixture f;
  const ProductSpace& a = f.space("a");
  const ProductSpace& b = f.space("b");
  const ProductSpace& c = f.space("c");
  const ProductSpace& ab = f.space("ab");
  const ProductSpace& bc = f.space("bc");
  const ProductSpace& abc = f.space("abc");

  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    cvec x = rng.random_vector(a.dim), y = rng.random_vector(b.dim), z = rng.random_vector(c.dim);
    cvec left = tau({&ab, &c}, {tau({&a, &b}, {x, y}, ab), z}, abc);
    cvec right = tau({&a, &bc}, {x, tau({&b, &c}, {y, z}, bc)}, abc);
    cvec flat = tau({&a, &b, &c}, {x, y, z}, abc);
    CHECK((left - right).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((left - flat).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("op_from_tensor on atomic doubled spaces") {
  Fixture f;
  Doubled d = Doubled::make(*f.cache, {"b", false});
  long n = d.hdim();

  // Basis elements act as matrix units; the twist is trivial on atoms.
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      cvec sigma = cvec::Zero(d.dim());
      sigma(d.pair(i, j)) = 1;
      cmat m = op_from_tensor(d, sigma);
      cmat unit = cmat::Zero(n, n);
      unit(i, j) = 1;
      CHECK((m - unit).cwiseAbs().maxCoeff() == 0.0);
    }

  // sum_k e_k (x) f_k is the identity operator.
  cvec diag = cvec::Zero(d.dim());
  for (long k = 0; k < n; ++k) diag(d.pair(k, k)) = 1;
  CHECK((op_from_tensor(d, diag) - cmat::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);

  // Round-trip through the operator picture.
  Rng rng(17);
  cvec s = rng.random_vector(d.dim());
  CHECK((tensor_from_op(d, op_from_tensor(d, s)) - s).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dagger: involution, operator adjoint, graded tensor rule") {
  Fixture f;
  Doubled d = Doubled::make(*f.cache, {"b", false});
  Rng rng(19);

  for (int t = 0; t < 20; ++t) {
    cvec s = rng.random_vector(d.dim());
    CHECK((dagger(d, dagger(d, s)) - s).cwiseAbs().maxCoeff() < 1e-15);
    // Through the operator picture the dagger is the Hilbertized adjoint.
    cmat lhs = op_from_tensor(d, dagger(d, s));
    cmat rhs = op_from_tensor(d, s).adjoint();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
  }

  // Graded tensor rule on a two-component doubled space:
  // tau*(s1~ (x) s2~) = (-1)^{|s1||s2|} (tau*(s1 (x) s2))~.
  Doubled d1 = Doubled::make(*f.cache, {"a", false});
  Doubled d2 = Doubled::make(*f.cache, {"b", false});
  Doubled dw = Doubled::make(*f.cache, {"ab", false});
  for (int f1 = 0; f1 <= 1; ++f1)
    for (int f2 = 0; f2 <= 1; ++f2) {
      cvec s1 = cvec::Zero(d1.dim()), s2 = cvec::Zero(d2.dim());
      for (long q = 0; q < d1.dim(); ++q)
        if (d1.full->fdeg(q) == f1) s1(q) = rng.cnormal();
      for (long q = 0; q < d2.dim(); ++q)
        if (d2.full->fdeg(q) == f2) s2(q) = rng.cnormal();
      cvec lhs = tau({d1.full, d2.full}, {dagger(d1, s1), dagger(d2, s2)}, *dw.full);
      cvec rhs = dagger(dw, tau({d1.full, d2.full}, {s1, s2}, *dw.full));
      double sign = (f1 && f2) ? -1.0 : 1.0;
      CHECK((lhs - sign * rhs).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("hs_inner: matrix units, metric, graded compatibility") {
  // Bosonic all-positive doubled space first.
  SpacetimeSystem sys;
  sys.add_atom("q");
  SpaceRegistry reg;
  reg.atoms["q"] = KreinSpace::make(2);
  SpaceCache cache(sys, reg);
  Doubled q = Doubled::make(cache, {"q", false});

  cvec e00 = cvec::Zero(q.dim()), e11 = cvec::Zero(q.dim());
  e00(q.pair(0, 0)) = 1;
  e11(q.pair(1, 1)) = 1;
  CHECK(hs_inner(q, e00, e00) == cplx(1, 0));
  CHECK(hs_inner(q, e00, e11) == cplx(0, 0));

  // Graded space: the operator-sum route equals the diagonal metric route,
  // and the real structure is compatible in the f-graded sense.
  Fixture f;
  Doubled d = Doubled::make(*f.cache, {"b", false});
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    cvec s1 = rng.random_vector(d.dim()), s2 = rng.random_vector(d.dim());
    CHECK(std::abs(hs_inner(d, s1, s2) - hs_inner_diag(d, s1, s2)) < 1e-13);
  }
  for (int fd = 0; fd <= 1; ++fd) {
    cvec s1 = cvec::Zero(d.dim()), s2 = cvec::Zero(d.dim());
    for (long p = 0; p < d.dim(); ++p)
      if (d.full->fdeg(p) == fd) {
        s1(p) = rng.cnormal();
        s2(p) = rng.cnormal();
      }
    cplx lhs = hs_inner(d, dagger(d, s1), dagger(d, s2));
    cplx rhs = std::conj(hs_inner(d, s1, s2));
    if (fd) rhs = -rhs;
    CHECK(std::abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("is_positive and the spectral split") {
  Fixture f;
  Doubled d = Doubled::make(*f.cache, {"b", false});
  long n = d.hdim();
  Rng rng(29);

  // Projectors are positive; negated matrix units are not.
  cvec psi = rng.random_unit_vector(static_cast<int>(n));
  cmat proj = psi * psi.adjoint();
  CHECK(is_positive(d, tensor_from_op(d, proj), 1e-12));
  cmat neg = cmat::Zero(n, n);
  neg(0, 0) = -1;
  CHECK_FALSE(is_positive(d, tensor_from_op(d, neg), 1e-12));

  // Rank-one psi psi-dagger elements are positive.
  for (int t = 0; t < 10; ++t) {
    cvec v = rng.random_vector(static_cast<int>(n));
    cmat rank1 = v * v.adjoint();
    CHECK(is_positive(d, tensor_from_op(d, rank1), 1e-12));
  }

  // Dagger-fixed elements split into differences of positive elements, and
  // the cone is proper.
  for (int t = 0; t < 10; ++t) {
    cvec raw = rng.random_vector(d.dim());
    cvec sa = (raw + dagger(d, raw)) / 2.0;
    auto [plus, minus] = spectral_split(d, sa);
    CHECK(is_positive(d, plus, 1e-10));
    CHECK(is_positive(d, minus, 1e-10));
    CHECK((sa - (plus - minus)).cwiseAbs().maxCoeff() < 1e-12);
    if (sa.norm() > 1e-6)
      CHECK_FALSE((is_positive(d, sa, 1e-10) && is_positive(d, cvec(-sa), 1e-10)));
  }
}

TEST_CASE("block_haar respects the grading") {
  Fixture f;
  const ProductSpace& ab = f.space("ab");
  Rng rng(31);
  cmat u = block_haar(ab, rng);
  CHECK((u.adjoint() * u - cmat::Identity(ab.dim, ab.dim)).cwiseAbs().maxCoeff() < 1e-12);
  for (long r = 0; r < ab.dim; ++r)
    for (long c = 0; c < ab.dim; ++c)
      if (ab.fdeg(r) != ab.fdeg(c) || ab.sig(r) != ab.sig(c))
        CHECK(u(r, c) == cplx(0, 0));
}

TEST_CASE("bosonic tau* coincides with operator conjugation") {
  // On purely even spaces the doubled-space reordering of s1 (x) s2 equals
  // tau (s1 (x) s2) tau^{-1} in the operator picture.
  SpacetimeSystem sys;
  sys.add_atom("x");
  sys.add_atom("y");
  sys.add_composite("xy", {{"x", false}, {"y", false}});
  SpaceRegistry reg;
  reg.atoms["x"] = KreinSpace::make(2);
  reg.atoms["y"] = KreinSpace::make(3);
  SpaceCache cache(sys, reg);

  Doubled dx = Doubled::make(cache, {"x", false});
  Doubled dy = Doubled::make(cache, {"y", false});
  Doubled dw = Doubled::make(cache, {"xy", false});
  const ProductSpace& hx = cache.boundary({"x", false});
  const ProductSpace& hy = cache.boundary({"y", false});
  const ProductSpace& hw = cache.boundary({"xy", false});

  Rng rng(43);
  for (int t = 0; t < 10; ++t) {
    cvec s1 = rng.random_vector(dx.dim()), s2 = rng.random_vector(dy.dim());
    cvec image = tau({dx.full, dy.full}, {s1, s2}, *dw.full);
    cmat lhs = op_from_tensor(dw, image);

    // tau as a matrix between H_x (x) H_y and H_xy.
    cmat tmat = cmat::Zero(hw.dim, hx.dim * hy.dim);
    for (long i = 0; i < hx.dim; ++i)
      for (long j = 0; j < hy.dim; ++j) {
        cvec ei = cvec::Zero(hx.dim), ej = cvec::Zero(hy.dim);
        ei(i) = 1;
        ej(j) = 1;
        tmat.col(i * hy.dim + j) = tau({&hx, &hy}, {ei, ej}, hw);
      }
    cmat kron = cmat::Zero(hx.dim * hy.dim, hx.dim * hy.dim);
    cmat o1 = op_from_tensor(dx, s1), o2 = op_from_tensor(dy, s2);
    for (long i = 0; i < hx.dim; ++i)
      for (long j = 0; j < hy.dim; ++j)
        for (long k = 0; k < hx.dim; ++k)
          for (long l = 0; l < hy.dim; ++l)
            kron(i * hy.dim + j, k * hy.dim + l) = o1(i, k) * o2(j, l);
    cmat rhs = tmat * kron * tmat.inverse();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}
