#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gerbecalc/reduction.hpp"

using namespace gerbecalc;

namespace {

Cochain to_rat(const Cochain& c) {
  Cochain out = make_cochain(c.K, c.degree, Ring::Rat);
  for (const auto& [s, v] : c.values) cochain_set(out, s, v);
  return out;
}

/* Rank-one morphism I0 -> g with transition phases read off a global
   1-cochain and (optionally) one connection slot restricted from a global
   1-cochain.  Valid whenever the phase cochain is closed and the gerbe's
   transition layer is trivial. */
TwistedBundleMorphism line_section(const GerbeDatum& g, const Cochain& phases,
                                   const Cochain* conn = nullptr) {
  TwistedBundleMorphism s = make_morphism(make_local_datum(g.K, 3), g, 1);
  for (const Simplex& e : g.K->by_dim[1])
    set_transition(s, e, make_monomial({0}, {mod1(phases(e))}));
  if (conn != nullptr)
    for (int v : g.K->vertex_ids) {
      ComplexPtr star = closed_star(g.K, Simplex{v});
      set_connection(s, Simplex{v}, {restrict_to(*conn, star)});
    }
  return s;
}

/* A level-3 datum on the product with prescribed topological part and a
   reproducible random connection layer. */
GerbeDatum random_product_gerbe(const ProductComplex& P, const Cochain& c,
                                std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-3, 3);
  Cochain h = make_cochain(P.total, 2, Ring::Rat);
  for (const Simplex& t : P.total->by_dim[2])
    cochain_set(h, t, Rat(num(rng), 7));
  Cochain w = cochain_add(to_rat(c), coboundary(h));
  DifferentialCocycle x = make_differential_cocycle(P.total, 3, c, h, w);
  REQUIRE(check_cocycle(x).ok);
  return localize(x);
}

}  // namespace

TEST_CASE("circle unit cocycle winds once around the circle") {
  ComplexPtr circle = fixtures::circle(5);
  DifferentialCocycle th = circle_unit_cocycle(circle, 5);
  REQUIRE(check_cocycle(th).ok);
  Chain z = circle_fundamental_cycle(circle, 5);
  REQUIRE(evaluate(th.c, z) == Rat(1));
  REQUIRE(evaluate(th.w, z) == Rat(1));
  REQUIRE(th.h(Simplex{2}) == Rat(2, 5));
  REQUIRE(th.w(Simplex{0, 4}) == Rat(-1, 5));
  REQUIRE(th.w(Simplex{1, 2}) == Rat(1, 5));
}

TEST_CASE("cup-product gerbe of the trivial line datum is trivial") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  LineDatum j = make_local_datum(fixtures::rp2_6(), 2);
  GerbeDatum g = cup_product_gerbe(j, P);
  REQUIRE(g.level == 3);
  REQUIRE(same_complex(g.K, P.total));
  REQUIRE(dd_class(g).coords.is_zero());
  REQUIRE(curvature(g).is_zero());
}

TEST_CASE("cup-product gerbe crosses the curvature with the fiber form") {
  ComplexPtr base = fixtures::rp2_6();
  const ProductComplex& P = fixtures::rp2xs1_product();
  Cochain rho = make_cochain(base, 1, Ring::Rat);
  int i = 1;
  for (const Simplex& e : base->by_dim[1]) cochain_set(rho, e, Rat(i++, 7));
  LineDatum j = trivial_gerbe(base, 2, rho);

  GerbeDatum g = cup_product_gerbe(j, P);
  REQUIRE(dd_class(g).coords.is_zero());
  DifferentialCocycle th = circle_unit_cocycle(P.circle, P.m);
  Cochain expected = cross(P, curvature(j), th.w);
  REQUIRE(cochain_sub(curvature(g), expected).is_zero());
}

TEST_CASE("cup-product gerbe of a torsion datum represents a torsion class") {
  ComplexPtr base = fixtures::rp2_6();
  const ProductComplex& P = fixtures::rp2xs1_product();
  std::vector<Cochain> gens = cohomology_generators(base, 2);
  REQUIRE_FALSE(gens.empty());
  LineDatum j = localize(flat_via_generator(base, 2, gens.front(), 2));
  REQUIRE(dd_class(j).coords.order() == 2);

  GerbeDatum g = cup_product_gerbe(j, P);
  DDClassReport dd = dd_class(g);
  REQUIRE(dd.coords.order() == 2);
  REQUIRE_FALSE(dd.coords.is_zero());
  /* the square of the gerbe is trivial in cohomology */
  REQUIRE(dd_class(datum_add(g, g)).coords.is_zero());
  /* the gerbe is flat: its class is torsion and its curvature vanishes */
  REQUIRE(curvature(g).is_zero());
}

TEST_CASE("cup-product gerbe validates its inputs") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  REQUIRE_THROWS_AS(cup_product_gerbe(make_local_datum(fixtures::rp2_6(), 3), P),
                    ValidationError);
  REQUIRE_THROWS_AS(cup_product_gerbe(make_local_datum(fixtures::sphere2(), 2), P),
                    ValidationError);
}

TEST_CASE("reducing a cup-product gerbe recovers the line datum exactly") {
  ComplexPtr base = fixtures::rp2_6();
  const ProductComplex& P = fixtures::rp2xs1_product();

  std::vector<LineDatum> data;
  data.push_back(make_local_datum(base, 2));
  Cochain rho = make_cochain(base, 1, Ring::Rat);
  int i = 1;
  for (const Simplex& e : base->by_dim[1]) cochain_set(rho, e, Rat(i++, 5));
  data.push_back(trivial_gerbe(base, 2, rho));
  std::vector<Cochain> gens = cohomology_generators(base, 2);
  data.push_back(localize(flat_via_generator(base, 2, gens.front(), 2)));

  for (const LineDatum& j : data) {
    LineDatum line = reduce_gerbe(cup_product_gerbe(j, P), P);
    DifferentialCocycle got = collate(line);
    DifferentialCocycle want = collate(j);
    /* componentwise on the nose, not merely up to coboundary */
    REQUIRE(cochain_sub(got.c, want.c).is_zero());
    REQUIRE(cochain_sub(got.h, want.h).is_zero());
    REQUIRE(cochain_sub(got.w, want.w).is_zero());
    REQUIRE(dd_class(line).coords == dd_class(j).coords);
  }
}

TEST_CASE("reduction commutes with curvature and with tensor products") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  std::mt19937 rng(20260814);
  std::uniform_int_distribution<int> num(-2, 2);

  std::vector<Cochain> gens3 = cohomology_generators(P.total, 3);
  REQUIRE_FALSE(gens3.empty());

  for (int trial = 0; trial < 3; ++trial) {
    Cochain u = make_cochain(P.total, 2, Ring::Int);
    for (const Simplex& t : P.total->by_dim[2]) cochain_set(u, t, Rat(num(rng)));
    Cochain c = coboundary(u);
    if (trial == 1) c = cochain_add(c, gens3.front());
    GerbeDatum g = random_product_gerbe(P, c, rng);

    LineDatum line = reduce_gerbe(g, P);
    REQUIRE(line.level == 2);
    REQUIRE(same_complex(line.K, P.base));
    Cochain want = fiber_integrate(P, curvature(g));
    REQUIRE(cochain_sub(curvature(line), want).is_zero());

    GerbeDatum g2 = random_product_gerbe(P, coboundary(u), rng);
    ClassCoords sum_then_reduce = dd_class(reduce_gerbe(datum_add(g, g2), P)).coords;
    ClassCoords reduce_then_sum =
        dd_class(datum_add(reduce_gerbe(g, P), reduce_gerbe(g2, P))).coords;
    REQUIRE(sum_then_reduce == reduce_then_sum);
  }
}

TEST_CASE("reduce_gerbe validates its inputs") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  REQUIRE_THROWS_AS(reduce_gerbe(make_local_datum(fixtures::rp2_6(), 3), P),
                    ValidationError);
  REQUIRE_THROWS_AS(reduce_gerbe(make_local_datum(P.total, 2), P), ValidationError);
}

TEST_CASE("a flat line section reduces to its fiber holonomy") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  GerbeDatum g0 = make_local_datum(P.total, 3);

  /* transition phases pulled back from the circle: holonomy 1/7 per lap */
  Cochain lam = make_cochain(P.circle, 1, Ring::Rat);
  cochain_set(lam, Simplex{0, P.m - 1}, Rat(-1, 7));
  Cochain phases = pullback_from_circle(P, lam);
  TwistedBundleMorphism s = line_section(g0, phases);
  REQUIRE(check_morphism(s).ok());

  ReducedSection r = reduce_section(s, P);
  REQUIRE(r.winding == 1);
  REQUIRE(r.parallel_expected);
  REQUIRE_FALSE(r.zero_section_warning);
  REQUIRE(r.relations_ok);
  REQUIRE(dd_class(r.line).coords.is_zero());
  for (int x : P.base->vertex_ids)
    REQUIRE(cyc_equal(r.values.at(x), cyc_phase(Rat(1, 7))));

  /* winding multiplies the holonomy */
  ReducedSection r3 = reduce_section(s, P, 3);
  REQUIRE(r3.relations_ok);
  for (int x : P.base->vertex_ids)
    REQUIRE(cyc_equal(r3.values.at(x), cyc_phase(Rat(3, 7))));

  /* the trace is additive over direct sums */
  ReducedSection rsum = reduce_section(direct_sum(s, s).sum, P);
  REQUIRE(rsum.relations_ok);
  for (int x : P.base->vertex_ids)
    REQUIRE(cyc_equal(rsum.values.at(x), cyc_phased(Rat(2), Rat(1, 7))));
}

TEST_CASE("a curving section transports by the reduced holonomy cochain") {
  const ProductComplex& P = fixtures::rp2xs1_product();

  /* curving concentrated over base vertex 0: B = d(lambda) with lambda
     supported on one vertical edge of that fiber */
  Cochain lam = make_cochain(P.total, 1, Ring::Rat);
  cochain_set(lam, Simplex{0, 1}, Rat(1, 5));
  GerbeDatum g = localize(make_differential_cocycle(
      P.total, 3, make_cochain(P.total, 3, Ring::Int), coboundary(lam),
      make_cochain(P.total, 3, Ring::Rat)));

  Cochain no_phases = make_cochain(P.total, 1, Ring::Rat);
  TwistedBundleMorphism s = line_section(g, no_phases, &lam);
  MorphismReport chk = check_morphism(s);
  REQUIRE(chk.ok());
  REQUIRE(chk.fake_curvature);

  ReducedSection r = reduce_section(s, P);
  REQUIRE(r.parallel_expected);
  REQUIRE_FALSE(r.zero_section_warning);
  /* the frame values vary from fiber to fiber, precisely following the
     holonomy 1-cochain of the reduced differential cocycle */
  REQUIRE(r.relations_ok);
  for (int x : P.base->vertex_ids) {
    Cyc want = (x == 0) ? cyc_phase(Rat(1, 5)) : cyc_phase(Rat(0));
    REQUIRE(cyc_equal(r.values.at(x), want));
  }
}

TEST_CASE("a shift-valued section vanishes at winding one and survives at the fiber order") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  GerbeDatum g0 = make_local_datum(P.total, 3);

  /* transitions valued in the order-two shift matrix along the fiber */
  Cochain wrap = make_cochain(P.circle, 1, Ring::Int);
  cochain_set(wrap, Simplex{0, P.m - 1}, Rat(-1));
  Cochain sigma = pullback_from_circle(P, wrap);

  TwistedBundleMorphism s = make_morphism(g0, g0, 2);
  for (const Simplex& e : P.total->by_dim[1]) {
    Int odd = (num(sigma(e)) % 2 + 2) % 2;
    if (odd != 0)
      set_transition(s, e, make_monomial({1, 0}, {Rat(0), Rat(0)}));
  }
  REQUIRE(check_morphism(s).ok());

  ReducedSection r1 = reduce_section(s, P, 1);
  REQUIRE(r1.zero_section_warning);
  REQUIRE(r1.relations_ok); /* vacuously: every trace vanishes */
  REQUIRE(r1.parallel_expected);

  ReducedSection r2 = reduce_section(s, P, 2);
  REQUIRE_FALSE(r2.zero_section_warning);
  REQUIRE(r2.relations_ok);
  for (int x : P.base->vertex_ids)
    REQUIRE(cyc_equal(r2.values.at(x), cyc_phased(Rat(2), Rat(0))));
}

TEST_CASE("reduce_section validates its input") {
  const ProductComplex& P = fixtures::rp2xs1_product();
  GerbeDatum g0 = make_local_datum(P.total, 3);
  Cochain lam = make_cochain(P.circle, 1, Ring::Rat);
  cochain_set(lam, Simplex{0, P.m - 1}, Rat(-1, 7));
  TwistedBundleMorphism s = line_section(g0, pullback_from_circle(P, lam));

  REQUIRE_THROWS_AS(reduce_section(s, P, 0), ValidationError);

  /* not on the product total space */
  GerbeDatum base0 = make_local_datum(fixtures::rp2_6(), 3);
  TwistedBundleMorphism off = make_morphism(base0, base0, 1);
  REQUIRE_THROWS_AS(reduce_section(off, P), ValidationError);

  /* the source must be the zero datum */
  Cochain rho = make_cochain(P.total, 1, Ring::Rat);
  cochain_set(rho, Simplex{0, 1}, Rat(1, 3));
  GerbeDatum gr = trivial_gerbe(P.total, 3, coboundary(rho));
  TwistedBundleMorphism into = line_section(gr, make_cochain(P.total, 1, Ring::Rat),
                                            &rho);
  REQUIRE(check_morphism(into).ok());
  REQUIRE_THROWS_AS(reduce_section(adjoint_morphism(into), P), ValidationError);

  /* a morphism failing the checker is rejected */
  TwistedBundleMorphism bad = line_section(g0, pullback_from_circle(P, lam));
  set_transition(bad, P.total->by_dim[1].front(), make_monomial({0}, {Rat(1, 3)}));
  REQUIRE_FALSE(check_morphism(bad).ok());
  REQUIRE_THROWS_AS(reduce_section(bad, P), ValidationError);
}

TEST_CASE("the decomposable demonstration verifies the torsion example") {
  ReductionReport rep = verify_decomposable_demo(2);
  CAPTURE(rep.stage, rep.notes);
  REQUIRE(rep.ok());
  REQUIRE(rep.stage.empty());
  REQUIRE(rep.class_check);
  REQUIRE(rep.curvature_check);
  REQUIRE(rep.section_reductions.size() == 2);

  const ReducedSection& once = rep.section_reductions[0].second;
  REQUIRE(once.winding == 1);
  REQUIRE(once.zero_section_warning);
  REQUIRE(once.relations_ok);
  bool warned = false;
  for (const std::string& n : rep.notes)
    if (n.find("winding 1") != std::string::npos) warned = true;
  REQUIRE(warned);

  const ReducedSection& wound = rep.section_reductions[1].second;
  REQUIRE(wound.winding == 2);
  REQUIRE_FALSE(wound.zero_section_warning);
  REQUIRE(wound.relations_ok);
  for (const auto& [x, v] : wound.values) REQUIRE_FALSE(cyc_is_zero(v));
}

TEST_CASE("the demonstration handles the trivial order and impossible orders") {
  ReductionReport triv = verify_decomposable_demo(1);
  CAPTURE(triv.stage, triv.notes);
  REQUIRE(triv.ok());
  REQUIRE(triv.section_reductions.size() == 1);
  REQUIRE_FALSE(triv.section_reductions[0].second.zero_section_warning);
  REQUIRE(triv.section_reductions[0].second.relations_ok);

  REQUIRE(triv.error_kind.empty());

  ReductionReport bad = verify_decomposable_demo(5);
  REQUIRE_FALSE(bad.ok());
  REQUIRE_FALSE(bad.stage.empty());
  REQUIRE(bad.error_kind == "obstruction");
  REQUIRE_FALSE(bad.notes.empty());
}

TEST_CASE("the squared cup-product gerbe reduces to the trivial class") {
  ComplexPtr base = fixtures::rp2_6();
  const ProductComplex& P = fixtures::rp2xs1_product();
  std::vector<Cochain> gens = cohomology_generators(base, 2);
  LineDatum j = localize(flat_via_generator(base, 2, gens.front(), 2));
  GerbeDatum g = cup_product_gerbe(j, P);

  GerbeDatum g2 = datum_scale(g, Int(2));
  REQUIRE(dd_class(g2).coords.is_zero());
  LineDatum line2 = reduce_gerbe(g2, P);
  REQUIRE(dd_class(line2).coords.is_zero());

  /* reduction is linear: the reduced square matches the squared datum */
  DifferentialCocycle got = collate(line2);
  DifferentialCocycle want = collate(datum_scale(j, Int(2)));
  REQUIRE(cochain_sub(got.c, want.c).is_zero());
  REQUIRE(cochain_sub(got.h, want.h).is_zero());
  REQUIRE(cochain_sub(got.w, want.w).is_zero());
}
