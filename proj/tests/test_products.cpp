/* Circle products: staircase triangulation, projections, fiber cycles,
   prism boundaries, fiber integration, cross products, and the Kuenneth
   numbers of the product fixtures. */

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "gerbecalc/fixtures.hpp"
#include "oracles.hpp"

using namespace gerbecalc;

namespace {

Cochain random_cochain(const ComplexPtr& K, int q, Ring ring,
                       std::mt19937_64& rng) {
  Cochain c = make_cochain(K, q, ring);
  if (q > K->dim() || q < 0) return c;
  std::uniform_int_distribution<int> val(-6, 6), den(1, 4), coin(0, 1);
  for (const auto& s : K->by_dim[q]) {
    if (coin(rng)) continue;
    Rat v = (ring == Ring::Int) ? Rat(val(rng)) : Rat(val(rng), den(rng));
    cochain_set(c, s, v);
  }
  return c;
}

Chain random_chain(const ComplexPtr& K, int q, std::mt19937_64& rng) {
  Chain z = make_chain(K, q);
  std::uniform_int_distribution<int> val(-4, 4), coin(0, 1);
  for (const auto& s : K->by_dim[q])
    if (coin(rng)) chain_accumulate(z, s, Rat(val(rng)));
  return z;
}

GroupPresentation pres(long long f, std::vector<int> tors = {}) {
  GroupPresentation g;
  g.free_rank = f;
  for (int t : tors) g.torsion.push_back(t);
  return g;
}

}  // namespace

TEST_CASE("product with a point recovers the circle") {
  auto pt = build_complex({{7}});
  ProductComplex P = product_with_circle(pt, 3);
  REQUIRE(P.total->count(0) == 3);
  REQUIRE(P.total->count(1) == 3);
  REQUIRE(P.total->dim() == 1);
  REQUIRE(P.total->has({7 * 3 + 0, 7 * 3 + 1}));
  REQUIRE(P.total->has({7 * 3 + 0, 7 * 3 + 2}));
  REQUIRE_THROWS_AS(product_with_circle(pt, 2), ValidationError);
}

TEST_CASE("torus9 has nine vertices and torus cohomology") {
  const ProductComplex& P = fixtures::torus9_product();
  REQUIRE(P.total->count(0) == 9);
  REQUIRE(P.total->count(1) == 27);
  REQUIRE(P.total->count(2) == 18);
  REQUIRE(cohomology(P.total, 0, Ring::Int) == pres(1));
  REQUIRE(cohomology(P.total, 1, Ring::Int) == pres(2));
  REQUIRE(cohomology(P.total, 2, Ring::Int) == pres(1));
}

TEST_CASE("rp2 x circle has the expected cohomology") {
  auto K = fixtures::rp2xs1();
  REQUIRE(K->count(0) == 18);
  REQUIRE(K->dim() == 3);
  REQUIRE(cohomology(K, 0, Ring::Int) == pres(1));
  REQUIRE(cohomology(K, 1, Ring::Int) == pres(1));
  REQUIRE(cohomology(K, 2, Ring::Int) == pres(0, {2}));
  REQUIRE(cohomology(K, 3, Ring::Int) == pres(0, {2}));
  /* Euler characteristic vanishes. */
  int chi = 0;
  for (int q = 0; q <= K->dim(); ++q)
    chi += (q % 2 == 0) ? K->count(q) : -K->count(q);
  REQUIRE(chi == 0);
}

TEST_CASE("projections are simplicial and fiber cycles are genuine cycles") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  /* make_simplicial_map validated the projections at construction; check
     the fiber cycles and their projections. */
  auto zc = circle_fundamental_cycle(P.circle, P.m);
  REQUIRE(chain_boundary(zc).coeffs.empty());
  for (const auto& [x, fib] : P.fiber_cycles) {
    REQUIRE(chain_boundary(fib).coeffs.empty());
    /* The circle projection carries a fiber to the fundamental cycle. */
    Chain img = pushforward(P.proj_circle, fib);
    REQUIRE(img.coeffs == zc.coeffs);
    /* The base projection collapses it. */
    Chain collapsed = pushforward(P.proj_base, fib);
    REQUIRE(collapsed.coeffs.empty());
  }
}

TEST_CASE("pullback is adjoint to pushforward") {
  std::mt19937_64 rng(505);
  const ProductComplex& P = fixtures::torus9_product();
  for (int q = 0; q <= 1; ++q)
    for (int iter = 0; iter < 10; ++iter) {
      Cochain c = random_cochain(P.base, q, Ring::Rat, rng);
      Chain z = random_chain(P.total, q, rng);
      REQUIRE(evaluate(pullback(P.proj_base, c), z) ==
              evaluate(c, pushforward(P.proj_base, z)));
    }
}

TEST_CASE("pullback commutes with the coboundary") {
  std::mt19937_64 rng(606);
  const ProductComplex& P = fixtures::rp2xs1_product();
  for (int q = 0; q <= 1; ++q)
    for (int iter = 0; iter < 6; ++iter) {
      Cochain c = random_cochain(P.base, q, Ring::Rat, rng);
      REQUIRE(cochain_equal(coboundary(pullback(P.proj_base, c)),
                            pullback(P.proj_base, coboundary(c))));
    }
}

TEST_CASE("prism chains satisfy the boundary identity") {
  std::mt19937_64 rng(707);
  const ProductComplex& P = fixtures::rp2xs1_product();
  for (int q = 0; q <= P.base->dim(); ++q)
    for (const auto& sigma : P.base->by_dim[q]) {
      /* d(Pr sigma) = -Pr(d sigma); over a vertex the right side is zero. */
      Chain lhs = chain_boundary(prism_chain(P, sigma));
      if (q == 0) {
        REQUIRE(lhs.coeffs.empty());
        continue;
      }
      Chain rhs = make_chain(P.total, q);
      for (int i = 0; i < (int)sigma.size(); ++i) {
        Chain piece = prism_chain(P, face_of(sigma, i));
        rhs = chain_add(rhs, chain_scale(piece, Rat(i % 2 == 0 ? -1 : 1)));
      }
      REQUIRE(lhs.coeffs == rhs.coeffs);
    }
  REQUIRE_THROWS_AS(prism_chain(P, Simplex{0, 1, 2, 3}), MissingSimplexError);
}

TEST_CASE("fiber integration commutes with the coboundary") {
  std::mt19937_64 rng(808);
  const ProductComplex& P = fixtures::rp2xs1_product();
  for (int q = 1; q <= 2; ++q)
    for (int iter = 0; iter < 8; ++iter) {
      Cochain c = random_cochain(P.total, q, Ring::Rat, rng);
      Cochain lhs = fiber_integrate(P, coboundary(c));
      Cochain rhs = coboundary(fiber_integrate(P, c));
      REQUIRE(cochain_equal(lhs, rhs));
    }
  Cochain c0 = random_cochain(P.total, 0, Ring::Rat, rng);
  REQUIRE_THROWS_AS(fiber_integrate(P, c0), DegreeError);
  Cochain onbase = random_cochain(P.base, 1, Ring::Rat, rng);
  REQUIRE_THROWS_AS(fiber_integrate(P, onbase), ValidationError);
}

TEST_CASE("projection formula: integrating a cross product returns the base factor") {
  std::mt19937_64 rng(909);
  const ProductComplex& P = fixtures::rp2xs1_product();
  /* theta: circle 1-cochain with total value 1 around the circle. */
  Cochain theta = make_cochain(P.circle, 1, Ring::Rat);
  cochain_set(theta, {0, 1}, Rat(1, 3));
  cochain_set(theta, {1, 2}, Rat(1, 3));
  cochain_set(theta, {0, 2}, Rat(-1, 3));
  REQUIRE(evaluate(theta, circle_fundamental_cycle(P.circle, P.m)) == 1);
  for (int q = 0; q <= 2; ++q)
    for (int iter = 0; iter < 6; ++iter) {
      Cochain b = random_cochain(P.base, q, Ring::Rat, rng);
      Cochain integrated = fiber_integrate(P, cross(P, b, theta));
      REQUIRE(cochain_equal(integrated, b));
      /* Pullbacks from the base integrate to zero. */
      if (q >= 1) {
        Cochain pulled = pullback(P.proj_base, b);
        REQUIRE(fiber_integrate(P, pulled).is_zero());
      }
    }
}

TEST_CASE("torus generators pair unimodularly under cup product") {
  auto t9 = fixtures::torus9();
  auto gens = cohomology_generators(t9, 1);
  REQUIRE(gens.size() == 2);
  Chain z = fundamental_surface_cycle(t9);
  auto pair2 = [&](const Cochain& a, const Cochain& b) {
    return evaluate(cup(a, b), z);
  };
  Rat p11 = pair2(gens[0], gens[0]);
  Rat p12 = pair2(gens[0], gens[1]);
  Rat p21 = pair2(gens[1], gens[0]);
  Rat p22 = pair2(gens[1], gens[1]);
  /* Cup squares of integral degree-1 classes on a surface vanish. */
  REQUIRE(p11 == 0);
  REQUIRE(p22 == 0);
  REQUIRE(boost::multiprecision::abs(num(p12)) == 1);
  REQUIRE(boost::multiprecision::abs(num(p21)) == 1);
  REQUIRE(p11 * p22 - p12 * p21 != 0);
}
