#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "gerbecalc/fixtures.hpp"
#include "gerbecalc/gerbe.hpp"

using namespace gerbecalc;

namespace {

Rat random_rat(std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-4, 4);
  std::uniform_int_distribution<int> den(1, 4);
  return Rat(num(rng), den(rng));
}

Cochain random_local(const ComplexPtr& star, int deg, std::mt19937& rng,
                     double fill = 0.6) {
  Cochain c = make_cochain(star, deg, Ring::Rat);
  if (deg > star->dim()) return c;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (const auto& s : star->by_dim[deg])
    if (coin(rng) < fill) cochain_set(c, s, random_rat(rng));
  return c;
}

DifferentialCocycle random_coboundary(const ComplexPtr& K, int n,
                                      std::mt19937& rng) {
  std::uniform_int_distribution<int> zval(-2, 2);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Cochain b = make_cochain(K, n - 1, Ring::Int);
  for (const auto& s : K->by_dim[n - 1])
    if (coin(rng) < 0.4) cochain_set(b, s, zval(rng));
  Cochain k = make_cochain(K, std::max(n - 2, 0), Ring::Rat);
  if (n >= 2)
    for (const auto& s : K->by_dim[n - 2])
      if (coin(rng) < 0.4) cochain_set(k, s, random_rat(rng));
  return deligne_coboundary(K, n, b, k);
}

DifferentialCocycle random_cocycle(const ComplexPtr& K, int n,
                                   std::mt19937& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> mult(-2, 2);
  DifferentialCocycle x = random_coboundary(K, n, rng);
  if (n <= K->dim()) {
    auto gens = cohomology_generators(K, n);
    if (!gens.empty() && coin(rng) < 0.7) {
      Cochain g =
          cochain_scale(gens[rng() % gens.size()], Rat(mult(rng)));
      x = differential_add(x, topological_lift(K, n, g));
    }
  }
  Cochain rho = make_cochain(K, n - 1, Ring::Rat);
  for (const auto& s : K->by_dim[n - 1])
    if (coin(rng) < 0.4) cochain_set(rho, s, random_rat(rng));
  return differential_add(x, connection_shift(K, n, rho));
}

/* Gauge data (level - 1, arbitrary entries, no closedness). */
LocalDatum random_gauge(const ComplexPtr& K, int glevel, std::mt19937& rng) {
  LocalDatum y = make_local_datum(K, glevel);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> zval(-2, 2);
  for (int p = 0; p < glevel && p <= K->dim(); ++p)
    for (const auto& s : K->by_dim[p]) {
      if (coin(rng) > 0.7) continue;
      Cochain local = random_local(closed_star(K, s), glevel - 1 - p, rng);
      if (!local.values.empty()) datum_set(y, p, s, local);
    }
  if (glevel <= K->dim())
    for (const auto& s : K->by_dim[glevel])
      if (coin(rng) < 0.5) cochain_set(y.zcol, s, zval(rng));
  return y;
}

LocalDatum random_valid_datum(const ComplexPtr& K, int level,
                              std::mt19937& rng) {
  LocalDatum g = localize(random_cocycle(K, level, rng));
  return gauge_transform(g, random_gauge(K, level - 1, rng));
}

/* Direct layerwise computation of the gauge action:
     layer'_p = layer_p + cech(y_{p-1}) + d(y_p),
   the transition layer additionally picks up the integer constants
   -assembly_sign(n-1) * w (that is +w at level 3, -w at level 2), and
   m' = m + d w.  Written against the published formulas only. */
LocalDatum expected_gauge_result(const LocalDatum& G, const LocalDatum& y) {
  const ComplexPtr& K = G.K;
  const int n = G.level;
  LocalDatum out = make_local_datum(K, n);
  out.zcol = cochain_add(G.zcol, coboundary(y.zcol));
  for (int p = 0; p < n && p <= K->dim(); ++p)
    for (const auto& sigma : K->by_dim[p]) {
      auto star = closed_star(K, sigma);
      Cochain acc = make_cochain(star, n - 1 - p, Ring::Rat);
      if (const Cochain* base = datum_component(G, p, sigma))
        acc = cochain_add(acc, *base);
      if (p <= n - 2) {
        if (const Cochain* yp = datum_component(y, p, sigma))
          acc = cochain_add(acc, coboundary(*yp));
      } else {
        Rat wv = Rat(-assembly_sign(n - 1)) * y.zcol(sigma);
        if (wv != 0)
          for (const auto& v : star->by_dim[0]) cochain_accumulate(acc, v, wv);
      }
      if (p >= 1)
        for (size_t i = 0; i < sigma.size(); ++i) {
          Simplex tau = face_of(sigma, (int)i);
          if (const Cochain* ym = datum_component(y, p - 1, tau)) {
            Cochain r = restrict_to(*ym, star);
            acc = cochain_add(acc, (i % 2) ? cochain_negate(r) : r);
          }
        }
      if (!acc.values.empty()) datum_set(out, p, sigma, std::move(acc));
    }
  return out;
}

SimplicialMap identity_map(const ComplexPtr& K) {
  std::map<int, int> vm;
  for (int v : K->vertex_ids) vm[v] = v;
  return make_simplicial_map(K, K, std::move(vm));
}

Simplex image_set(const SimplicialMap& f, const Simplex& s) {
  Simplex img;
  for (int v : s) img.push_back(f.vertex_map.at(v));
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  return img;
}

std::map<Simplex, int> random_patch(const SimplicialMap& f,
                                    std::mt19937& rng) {
  std::map<Simplex, int> P;
  for (int q = 0; q <= 2; ++q)
    for (const auto& s : f.src->by_dim[q]) {
      Simplex img = image_set(f, s);
      P[s] = img[rng() % img.size()];
    }
  return P;
}

}  // namespace

TEST_CASE("datum entries are validated layer by layer") {
  auto K = fixtures::sphere3();
  GerbeDatum g = make_local_datum(K, 3);
  auto star0 = closed_star(K, {0});

  Cochain curving = make_cochain(star0, 2, Ring::Rat);
  cochain_set(curving, {0, 1, 2}, Rat(2, 5));
  datum_set(g, 0, {0}, curving);
  REQUIRE(datum_component(g, 0, {0}) != nullptr);
  REQUIRE((*datum_component(g, 0, {0}))({0, 1, 2}) == Rat(2, 5));

  /* Wrong degree for the layer. */
  Cochain wrong = make_cochain(star0, 1, Ring::Rat);
  cochain_set(wrong, {0, 1}, Rat(1));
  REQUIRE_THROWS_AS(datum_set(g, 0, {0}, wrong), ValidationError);
  /* Wrong star. */
  auto star1 = closed_star(K, {1});
  Cochain off = make_cochain(star1, 1, Ring::Rat);
  cochain_set(off, {1, 2}, Rat(1));
  REQUIRE_THROWS_AS(datum_set(g, 1, {0, 1}, off), ValidationError);
  /* Layer index range and missing simplices. */
  REQUIRE_THROWS_AS(datum_set(g, 3, {0}, curving), DegreeError);
  Cochain c2 = make_cochain(star0, 2, Ring::Rat);
  cochain_set(c2, {0, 1, 2}, Rat(1));
  REQUIRE_THROWS_AS(datum_set(g, 0, {9}, c2), MissingSimplexError);
  /* Circle-valued entries are rejected; integral class column enforced. */
  Cochain circ = make_cochain(star0, 2, Ring::RatMod1);
  cochain_set(circ, {0, 1, 2}, Rat(1, 3));
  REQUIRE_THROWS_AS(datum_set(g, 0, {0}, circ), ValidationError);
  REQUIRE_THROWS_AS(cochain_set(g.zcol, {0, 1, 2, 4}, Rat(1, 2)),
                    ValidationError);
  /* Setting a zero entry clears the slot. */
  datum_set(g, 0, {0}, make_cochain(star0, 2, Ring::Rat));
  REQUIRE(datum_component(g, 0, {0}) == nullptr);

  REQUIRE(datum_layer_name(3, 0) == "B");
  REQUIRE(datum_layer_name(3, 1) == "A");
  REQUIRE(datum_layer_name(3, 2) == "f");
  REQUIRE(datum_layer_name(2, 0) == "A");
  REQUIRE(datum_layer_name(2, 1) == "f");
}

TEST_CASE("validity check names the failing descent equation") {
  std::mt19937 rng(414);
  auto K = fixtures::sphere3();
  GerbeDatum g = localize(random_cocycle(K, 3, rng));
  REQUIRE(check_datum(g).ok);

  SECTION("perturbing the curving breaks cech B = d A") {
    GerbeDatum bad = g;
    auto star = closed_star(K, {0});
    Cochain pert = make_cochain(star, 2, Ring::Rat);
    cochain_set(pert, star->by_dim[2].front(), Rat(1, 7));
    Cochain cur = bad.comp[0].count(Simplex{0}) ? bad.comp[0][Simplex{0}]
                                                : make_cochain(star, 2,
                                                               Ring::Rat);
    datum_set(bad, 0, {0}, cochain_add(cur, pert));
    DatumCheck chk = check_datum(bad);
    REQUIRE_FALSE(chk.ok);
    for (const auto& [eq, s] : chk.failures) REQUIRE(eq == "cech B = d A");
    REQUIRE_THROWS_AS(require_valid_datum(bad, "test"), ValidationError);
    REQUIRE_THROWS_AS(collate(bad), ValidationError);
  }

  SECTION("an exact connection perturbation breaks only cech A = d f") {
    GerbeDatum bad = g;
    Simplex e = K->by_dim[1].front();
    auto star = closed_star(K, e);
    Cochain bump = make_cochain(star, 0, Ring::Rat);
    cochain_set(bump, star->by_dim[0].front(), Rat(1, 3));
    Cochain pert = coboundary(bump);
    REQUIRE_FALSE(pert.values.empty());
    Cochain cur = bad.comp[1].count(e) ? bad.comp[1][e]
                                       : make_cochain(star, 1, Ring::Rat);
    datum_set(bad, 1, e, cochain_add(cur, pert));
    DatumCheck chk = check_datum(bad);
    REQUIRE_FALSE(chk.ok);
    for (const auto& [eq, s] : chk.failures) REQUIRE(eq == "cech A = d f");
  }

  SECTION("a fractional constant on a transition breaks cech f = m") {
    GerbeDatum bad = g;
    Simplex t = K->by_dim[2].front();
    auto star = closed_star(K, t);
    Cochain pert = make_cochain(star, 0, Ring::Rat);
    for (const auto& v : star->by_dim[0]) cochain_set(pert, v, Rat(1, 2));
    Cochain cur = bad.comp[2].count(t) ? bad.comp[2][t]
                                       : make_cochain(star, 0, Ring::Rat);
    datum_set(bad, 2, t, cochain_add(cur, pert));
    DatumCheck chk = check_datum(bad);
    REQUIRE_FALSE(chk.ok);
    for (const auto& [eq, s] : chk.failures) REQUIRE(eq == "cech f = m");
  }

  SECTION("a non-closed class column breaks d m = 0") {
    /* Needs a complex with room above the class degree: level two on the
       three-dimensional product, where the class column sits on triangles
       and its coboundary lives on tetrahedra. */
    auto P = fixtures::rp2xs1();
    LineDatum lg = trivial_gerbe(P, 2, make_cochain(P, 1, Ring::Rat));
    cochain_accumulate(lg.zcol, P->by_dim[2].front(), Rat(1));
    DatumCheck chk = check_datum(lg);
    REQUIRE_FALSE(chk.ok);
    bool saw_dm = false;
    for (const auto& [eq, s] : chk.failures) saw_dm |= (eq == "d m = 0");
    REQUIRE(saw_dm);
  }
}

TEST_CASE("assembly and disassembly invert each other") {
  std::mt19937 rng(515);
  struct Case {
    ComplexPtr K;
    int level;
  };
  std::vector<Case> cases = {{fixtures::sphere3(), 3},
                             {fixtures::sphere2(), 3},
                             {fixtures::torus9(), 2},
                             {fixtures::circle(5), 2}};
  for (const auto& cs : cases) {
    LocalDatum a = random_valid_datum(cs.K, cs.level, rng);
    LocalDatum b = random_valid_datum(cs.K, cs.level, rng);
    REQUIRE(datum_equal(disassemble(assemble(a)), a));
    REQUIRE(deligne_is_zero(total_differential(assemble(a))));
    REQUIRE(deligne_equal(assemble(datum_add(a, b)),
                          deligne_add(assemble(a), assemble(b))));
    REQUIRE(datum_equal(dual(dual(a)), a));
    REQUIRE(datum_is_zero(datum_sub(a, a)));
    REQUIRE(datum_equal(tensor(a, make_local_datum(cs.K, cs.level)), a));
  }
}

TEST_CASE("gauge transformations follow the layer formulas") {
  std::mt19937 rng(616);
  struct Case {
    ComplexPtr K;
    int level;
  };
  std::vector<Case> cases = {{fixtures::sphere3(), 3},
                             {fixtures::sphere2(), 3},
                             {fixtures::torus9(), 2},
                             {fixtures::circle(5), 2},
                             {fixtures::rp2_6(), 2}};
  for (const auto& cs : cases) {
    for (int rep = 0; rep < 3; ++rep) {
      LocalDatum g = random_valid_datum(cs.K, cs.level, rng);
      LocalDatum y = random_gauge(cs.K, cs.level - 1, rng);
      LocalDatum moved = gauge_transform(g, y);
      INFO("level=" << cs.level << " dim=" << cs.K->dim() << " rep=" << rep);
      REQUIRE(datum_equal(moved, expected_gauge_result(g, y)));
      REQUIRE(check_datum(moved).ok);
      /* Gauging is additive in the gauge. */
      LocalDatum y2 = random_gauge(cs.K, cs.level - 1, rng);
      REQUIRE(datum_equal(gauge_transform(moved, y2),
                          gauge_transform(g, datum_add(y, y2))));
      /* The curvature never moves. */
      REQUIRE(cochain_equal(curvature(moved), curvature(g)));
      /* Neither does the collated class. */
      REQUIRE(class_equal(collate(moved), collate(g)));
    }
  }
}

TEST_CASE("restriction data collate to flat cocycles with the given holonomy") {
  auto K = fixtures::sphere2();
  Cochain gen = cohomology_generators(K, 2)[0];
  Cochain rho = cochain_scale(gen, Rat(1, 4));
  GerbeDatum t = trivial_gerbe(K, 3, rho);
  REQUIRE(check_datum(t).ok);
  REQUIRE(is_combinatorial(t));
  REQUIRE(cochain_equal(curvature(t), make_cochain(K, 3, Ring::Rat)));
  DifferentialCocycle cls = collate(t);
  REQUIRE(cochain_equal(cls.h, rho));
  REQUIRE(cls.c.values.empty());
  REQUIRE(cls.w.values.empty());

  /* A non-closed holonomy datum picks up its own curvature. */
  auto T = fixtures::torus9();
  std::mt19937 rng(717);
  Cochain any = make_cochain(T, 1, Ring::Rat);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (const auto& s : T->by_dim[1])
    if (coin(rng) < 0.5) cochain_set(any, s, random_rat(rng));
  LineDatum l = trivial_gerbe(T, 2, any);
  DifferentialCocycle lc = collate(l);
  REQUIRE(cochain_equal(lc.h, any));
  REQUIRE(cochain_equal(lc.w, coboundary(any)));
  REQUIRE(cochain_equal(curvature(l), coboundary(any)));
  REQUIRE(lc.c.values.empty());

  REQUIRE_THROWS_AS(trivial_gerbe(K, 3, make_cochain(K, 1, Ring::Rat)),
                    ValidationError);
}

TEST_CASE("collate inverts localize exactly") {
  std::mt19937 rng(818);
  struct Case {
    ComplexPtr K;
    int level;
    int reps;
  };
  std::vector<Case> cases = {{fixtures::sphere3(), 3, 12},
                             {fixtures::sphere2(), 3, 8},
                             {fixtures::rp2xs1(), 3, 6},
                             {fixtures::torus9(), 2, 10},
                             {fixtures::rp2_6(), 2, 8},
                             {fixtures::circle(5), 2, 6}};
  int total = 0;
  for (const auto& cs : cases) {
    for (int rep = 0; rep < cs.reps; ++rep, ++total) {
      DifferentialCocycle x = random_cocycle(cs.K, cs.level, rng);
      LocalDatum g = localize(x);
      REQUIRE(check_datum(g).ok);
      DifferentialCocycle back = collate(g);
      INFO("level=" << cs.level << " dim=" << cs.K->dim() << " rep=" << rep);
      REQUIRE(differential_equal(back, x));
    }
  }
  REQUIRE(total == 50);
}

TEST_CASE("localizing the collated class stays gauge equivalent") {
  std::mt19937 rng(919);
  struct Case {
    ComplexPtr K;
    int level;
  };
  std::vector<Case> cases = {{fixtures::sphere3(), 3},
                             {fixtures::torus9(), 2},
                             {fixtures::rp2_6(), 2}};
  for (const auto& cs : cases) {
    LocalDatum g = random_valid_datum(cs.K, cs.level, rng);
    LocalDatum h = localize(collate(g));
    REQUIRE(class_equal(collate(h), collate(g)));
    auto y = connect_gauge(g, h);
    REQUIRE(y.has_value());
    REQUIRE(datum_equal(gauge_transform(g, *y), h));
  }
}

TEST_CASE("class equality decides gauge connectability") {
  std::mt19937 rng(1020);

  SECTION("gauged copies reconnect") {
    struct Case {
      ComplexPtr K;
      int level;
    };
    std::vector<Case> cases = {{fixtures::sphere3(), 3},
                               {fixtures::sphere2(), 3},
                               {fixtures::torus9(), 2},
                               {fixtures::circle(5), 2}};
    for (const auto& cs : cases) {
      LocalDatum g = random_valid_datum(cs.K, cs.level, rng);
      LocalDatum moved = gauge_transform(g, random_gauge(cs.K, cs.level - 1,
                                                         rng));
      auto y = connect_gauge(g, moved);
      REQUIRE(y.has_value());
      REQUIRE(datum_equal(gauge_transform(g, *y), moved));
    }
  }

  SECTION("a topological class difference blocks the gauge") {
    auto K = fixtures::sphere3();
    LocalDatum g = random_valid_datum(K, 3, rng);
    LocalDatum lift = localize(topological_lift(K, 3,
                                                cohomology_generators(K,
                                                                      3)[0]));
    REQUIRE_FALSE(connect_gauge(g, tensor(g, lift)).has_value());
  }

  SECTION("a fractional flat shift blocks the gauge but not the curvature") {
    auto K = fixtures::torus9();
    LocalDatum g = random_valid_datum(K, 2, rng);
    Cochain gen = cohomology_generators(K, 1)[0];
    LocalDatum shifted = tensor(g, trivial_gerbe(K, 2,
                                                 cochain_scale(gen,
                                                               Rat(1, 2))));
    REQUIRE(cochain_equal(curvature(shifted), curvature(g)));
    REQUIRE_FALSE(connect_gauge(g, shifted).has_value());
    /* An integral shift of the same shape reconnects. */
    LocalDatum ok = tensor(g, trivial_gerbe(K, 2, cochain_scale(gen,
                                                                Rat(1))));
    REQUIRE(connect_gauge(g, ok).has_value());
  }

  SECTION("flat torsion blocks the gauge at level three") {
    auto K = fixtures::rp2xs1();
    std::mt19937 rng2(31);
    LocalDatum g = localize(random_coboundary(K, 3, rng2));
    DifferentialCocycle tor =
        flat_via_generator(K, 3, cohomology_generators(K, 3)[0], Int(2));
    LocalDatum shifted = tensor(g, localize(tor));
    REQUIRE(cochain_equal(curvature(shifted), curvature(g)));
    REQUIRE_FALSE(connect_gauge(g, shifted).has_value());
    LocalDatum twice = tensor(shifted, localize(tor));
    auto y = connect_gauge(g, twice);
    REQUIRE(y.has_value());
    REQUIRE(datum_equal(gauge_transform(g, *y), twice));
  }
}

TEST_CASE("class coordinates follow the class column") {
  auto K = fixtures::sphere3();
  for (int k = -2; k <= 2; ++k) {
    Cochain g = cochain_scale(cohomology_generators(K, 3)[0], Rat(k));
    GerbeDatum d = localize(topological_lift(K, 3, g));
    DDClassReport rep = dd_class(d);
    REQUIRE(rep.group.free_rank == 1);
    REQUIRE(rep.group.torsion.empty());
    REQUIRE(rep.coords.free_part.size() == 1);
    REQUIRE(rep.coords.free_part[0] == k);
    REQUIRE(rep.coords.is_zero() == (k == 0));
  }

  /* Tensor adds and dual negates the class. */
  std::mt19937 rng(1121);
  GerbeDatum a =
      localize(topological_lift(K, 3, cohomology_generators(K, 3)[0]));
  GerbeDatum b = random_valid_datum(K, 3, rng);
  IVec expect;
  {
    auto ca = dd_class(a).coords.free_part;
    auto cb = dd_class(b).coords.free_part;
    expect = {ca[0] + cb[0]};
  }
  REQUIRE(dd_class(tensor(a, b)).coords.free_part == expect);
  REQUIRE(dd_class(dual(a)).coords.free_part[0] == -1);

  /* Torsion classes on the product with the projective plane. */
  auto P = fixtures::rp2xs1();
  GerbeDatum t =
      localize(topological_lift(P, 3, cohomology_generators(P, 3)[0]));
  DDClassReport rp = dd_class(t);
  REQUIRE(rp.group.free_rank == 0);
  REQUIRE(rp.group.torsion == std::vector<Int>{Int(2)});
  REQUIRE(rp.coords.torsion.size() == 1);
  REQUIRE(rp.coords.torsion[0].second == 1);
  REQUIRE_FALSE(rp.coords.is_zero());
  REQUIRE(dd_class(tensor(t, t)).coords.is_zero());

  /* On a surface the class group in degree three is trivial. */
  GerbeDatum s = trivial_gerbe(fixtures::sphere2(), 3,
                               make_cochain(fixtures::sphere2(), 2,
                                            Ring::Rat));
  DDClassReport rs = dd_class(s);
  REQUIRE(rs.group.free_rank == 0);
  REQUIRE(rs.group.torsion.empty());
  REQUIRE(rs.coords.is_zero());

  /* deligne_class is the collated cocycle. */
  REQUIRE(differential_equal(deligne_class(a), collate(a)));
}

TEST_CASE("curvature is closed with integral periods") {
  std::mt19937 rng(1222);
  struct Case {
    ComplexPtr K;
    int level;
  };
  std::vector<Case> cases = {{fixtures::sphere3(), 3},
                             {fixtures::rp2xs1(), 3},
                             {fixtures::torus9(), 2},
                             {fixtures::circle(6), 2}};
  for (const auto& cs : cases) {
    LocalDatum g = random_valid_datum(cs.K, cs.level, rng);
    LocalDatum h = random_valid_datum(cs.K, cs.level, rng);
    Cochain w = curvature(g);
    REQUIRE(w.values == collate(g).w.values);
    REQUIRE(coboundary(w).values.empty());
    REQUIRE(integral_periods(w));
    REQUIRE(cochain_equal(curvature(tensor(g, h)),
                          cochain_add(w, curvature(h))));
    REQUIRE(cochain_equal(curvature(dual(g)), cochain_negate(w)));
  }
}

TEST_CASE("surface holonomy evaluates the collated connection") {
  std::mt19937 rng(1323);
  auto S2 = fixtures::sphere2();
  auto T2 = fixtures::torus9();

  SECTION("identity surfaces, random patches, gauge invariance") {
    for (const auto& K : {S2, T2}) {
      SimplicialMap id = identity_map(K);
      for (int rep = 0; rep < 3; ++rep) {
        GerbeDatum g = random_valid_datum(K, 3, rng);
        Rat h = surface_holonomy(g, id);
        REQUIRE(h == surface_holonomy_via_class(g, id));
        for (int t = 0; t < 4; ++t)
          REQUIRE(surface_holonomy(g, id, random_patch(id, rng)) == h);
        GerbeDatum moved = gauge_transform(g, random_gauge(K, 2, rng));
        REQUIRE(surface_holonomy(moved, id) == h);
        GerbeDatum g2 = random_valid_datum(K, 3, rng);
        REQUIRE(surface_holonomy(tensor(g, g2), id) ==
                mod1(h + surface_holonomy(g2, id)));
        REQUIRE(surface_holonomy(dual(g), id) == mod1(-h));
      }
    }
  }

  SECTION("restriction data integrate the holonomy datum") {
    Cochain gen = cohomology_generators(S2, 2)[0];
    Cochain rho = cochain_scale(gen, Rat(1, 4));
    GerbeDatum t = trivial_gerbe(S2, 3, rho);
    SimplicialMap id = identity_map(S2);
    Rat expected = mod1(evaluate(rho, fundamental_surface_cycle(S2)));
    REQUIRE(surface_holonomy(t, id) == expected);
    REQUIRE((expected == Rat(1, 4) || expected == Rat(3, 4)));
  }

  SECTION("a sphere mapped into the three-sphere pairs with the curvature") {
    auto S3 = fixtures::sphere3();
    std::map<int, int> vm;
    for (int v : S2->vertex_ids) vm[v] = v;
    SimplicialMap incl = make_simplicial_map(S2, S3, std::move(vm));
    GerbeDatum g = random_valid_datum(S3, 3, rng);
    Rat h = surface_holonomy(g, incl);
    REQUIRE(h == surface_holonomy_via_class(g, incl));
    /* The image cycle bounds a tetrahedron chain in the three-sphere. */
    Chain img = pushforward(incl, fundamental_surface_cycle(S2));
    Chain tet = make_chain(S3, 3);
    chain_accumulate(tet, {0, 1, 2, 3}, Rat(1));
    Chain bd = chain_boundary(tet);
    Rat sign(0);
    if (bd.coeffs == img.coeffs) sign = Rat(1);
    if (chain_scale(bd, Rat(-1)).coeffs == img.coeffs) sign = Rat(-1);
    REQUIRE(sign != 0);
    REQUIRE(h == mod1(sign * evaluate(curvature(g), tet)));
  }

  SECTION("boundaries pair with the curvature") {
    auto S3 = fixtures::sphere3();
    GerbeDatum g = random_valid_datum(S3, 3, rng);
    DifferentialCocycle cls = collate(g);
    std::uniform_int_distribution<int> cv(-2, 2);
    for (int rep = 0; rep < 5; ++rep) {
      Chain z = make_chain(S3, 3);
      for (const auto& s : S3->by_dim[3]) chain_accumulate(z, s, cv(rng));
      REQUIRE(mod1(evaluate(cls.h, chain_boundary(z))) ==
              mod1(evaluate(cls.w, z)));
    }
  }

  SECTION("patch assignments are validated") {
    SimplicialMap id = identity_map(S2);
    GerbeDatum g = random_valid_datum(S2, 3, rng);
    std::map<Simplex, int> patch = random_patch(id, rng);
    Simplex t0 = S2->by_dim[2].front();
    /* Vertex outside the image's star. */
    std::map<Simplex, int> bad = patch;
    int far = -1;
    for (int v : S2->vertex_ids)
      if (std::find(t0.begin(), t0.end(), v) == t0.end()) far = v;
    REQUIRE(far >= 0);
    bad[t0] = far; /* the opposite vertex: its star misses the triangle */
    REQUIRE_THROWS_AS(surface_holonomy(g, id, bad), ValidationError);
    /* Missing and extraneous assignments. */
    std::map<Simplex, int> missing = patch;
    missing.erase(t0);
    REQUIRE_THROWS_AS(surface_holonomy(g, id, missing), ValidationError);
    std::map<Simplex, int> extra = patch;
    extra[{0, 1, 2, 3}] = 0;
    REQUIRE_THROWS_AS(surface_holonomy(g, id, extra), ValidationError);
    /* Level and source validation. */
    auto C5 = fixtures::circle(5);
    LineDatum l = random_valid_datum(C5, 2, rng);
    REQUIRE_THROWS_AS(surface_holonomy(l, identity_map(C5)), DegreeError);
    GerbeDatum g3 = random_valid_datum(fixtures::sphere3(), 3, rng);
    REQUIRE_THROWS_AS(surface_holonomy(g3, identity_map(fixtures::sphere3())),
                      ValidationError);
  }
}

TEST_CASE("normalize finds a combinatorial gauge exactly for torsion classes") {
  std::mt19937 rng(1424);

  SECTION("trivial and torsion classes admit constant transitions") {
    struct Case {
      ComplexPtr K;
      int level;
      DifferentialCocycle seed;
    };
    auto S2 = fixtures::sphere2();
    auto S3 = fixtures::sphere3();
    auto R2 = fixtures::rp2_6();
    auto P = fixtures::rp2xs1();
    std::vector<Case> cases;
    cases.push_back({S2, 3, random_cocycle(S2, 3, rng)});
    cases.push_back({R2, 2, random_cocycle(R2, 2, rng)}); /* pure torsion */
    cases.push_back({S3, 3, random_coboundary(S3, 3, rng)});
    cases.push_back(
        {P, 3,
         differential_add(
             random_coboundary(P, 3, rng),
             topological_lift(P, 3, cohomology_generators(P, 3)[0]))});
    for (const auto& cs : cases) {
      LocalDatum base = gauge_transform(localize(cs.seed),
                                        random_gauge(cs.K, cs.level - 1, rng));
      NormalizeResult res = normalize(base);
      INFO("level=" << cs.level << " dim=" << cs.K->dim()
                    << " note=" << res.note);
      REQUIRE(res.ok);
      LocalDatum comb = gauge_transform(base, res.gauge);
      REQUIRE(is_combinatorial(comb));
      REQUIRE(class_equal(collate(comb), collate(base)));
      /* The gauge only touches the layer feeding the transitions. */
      REQUIRE(res.gauge.zcol.values.empty());
      if (cs.level == 3) REQUIRE(res.gauge.comp[0].empty());
      /* Normalizing a combinatorial datum keeps it combinatorial. */
      NormalizeResult again = normalize(comb);
      REQUIRE(again.ok);
      REQUIRE(is_combinatorial(gauge_transform(comb, again.gauge)));
    }
  }

  SECTION("a class of infinite order has no combinatorial form") {
    auto T = fixtures::torus9();
    LineDatum lt =
        localize(topological_lift(T, 2, cohomology_generators(T, 2)[0]));
    NormalizeResult res = normalize(lt);
    REQUIRE_FALSE(res.ok);
    REQUIRE(res.note == "no gauge makes the transition layer locally constant");
    auto S3 = fixtures::sphere3();
    GerbeDatum gs =
        localize(topological_lift(S3, 3, cohomology_generators(S3, 3)[0]));
    REQUIRE_FALSE(normalize(gs).ok);
    REQUIRE_THROWS_AS(normalize(make_local_datum(fixtures::circle(4), 1)),
                      DegreeError);
  }

  SECTION("the combinatorial flag reads the transition layer only") {
    auto K = fixtures::torus9();
    Cochain rho = make_cochain(K, 1, Ring::Rat);
    cochain_set(rho, K->by_dim[1].front(), Rat(1, 3));
    LineDatum t = trivial_gerbe(K, 2, rho);
    REQUIRE(is_combinatorial(t)); /* transitions empty */
    std::mt19937 rng2(77);
    LineDatum moved = gauge_transform(t, random_gauge(K, 1, rng2));
    NormalizeResult res = normalize(moved);
    REQUIRE(res.ok);
    REQUIRE(is_combinatorial(gauge_transform(moved, res.gauge)));
  }
}

TEST_CASE("pullback transports local data") {
  std::mt19937 rng(1525);
  auto S2 = fixtures::sphere2();
  auto S3 = fixtures::sphere3();

  SECTION("constant maps pull back to the zero datum") {
    GerbeDatum g = random_valid_datum(S2, 3, rng);
    std::map<int, int> vm;
    for (int v : S2->vertex_ids) vm[v] = 0;
    SimplicialMap cst = make_simplicial_map(S2, S2, std::move(vm));
    GerbeDatum p = pullback_datum(cst, g);
    REQUIRE(datum_is_zero(p));
    REQUIRE(check_datum(p).ok);
  }

  SECTION("inclusions restrict and preserve classes") {
    std::map<int, int> vm;
    for (int v : S2->vertex_ids) vm[v] = v;
    SimplicialMap incl = make_simplicial_map(S2, S3, std::move(vm));
    GerbeDatum g = random_valid_datum(S3, 3, rng);
    GerbeDatum p = pullback_datum(incl, g);
    REQUIRE(check_datum(p).ok);
    REQUIRE(class_equal(collate(p), pullback_cocycle(incl, collate(g))));
    /* Holonomy is natural: pulling back then integrating equals
       integrating the original over the composed surface. */
    SimplicialMap id = identity_map(S2);
    REQUIRE(surface_holonomy(p, id) == surface_holonomy(g, incl));
  }

  SECTION("projections pull torsion data to torsion data") {
    const auto& prod = fixtures::rp2xs1_product();
    auto base = fixtures::rp2_6();
    DifferentialCocycle tor =
        flat_via_generator(base, 2, cohomology_generators(base, 2)[0],
                           Int(2));
    LineDatum l = localize(tor);
    LineDatum pl = pullback_datum(prod.proj_base, l);
    REQUIRE(check_datum(pl).ok);
    REQUIRE(class_equal(collate(pl),
                        pullback_cocycle(prod.proj_base, tor)));
    REQUIRE_FALSE(class_equal(collate(pl), zero_cocycle(prod.total, 2)));
  }
}
