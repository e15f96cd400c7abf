#pragma once
/* Local geometric data over the vertex-star cover.  A datum of level n
   stores, for every p-simplex, a local (n-1-p)-cochain on its closed star,
   together with one global integral n-cochain (the class column).  Level 3
   is gerbe data (curving B, connection A, transitions f, class m); level 2
   is line data (A, f, m).  The operations below validate, combine, gauge,
   collate and evaluate such data; collation and localization translate
   between local data and global differential cocycles without loss. */

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gerbecalc/cochain.hpp"
#include "gerbecalc/cohomology.hpp"
#include "gerbecalc/deligne.hpp"
#include "gerbecalc/errors.hpp"
#include "gerbecalc/simplicial.hpp"
#include "gerbecalc/smith.hpp"

namespace gerbecalc {

struct LocalDatum {
  ComplexPtr K;
  int level = 0;
  /* comp[p]: p-simplex -> (level-1-p)-cochain on its closed star. */
  std::vector<StarCollection> comp;
  /* Integral class column, a global level-cochain. */
  Cochain zcol;
};

using GerbeDatum = LocalDatum;
using LineDatum = LocalDatum;

inline LocalDatum make_local_datum(ComplexPtr K, int level) {
  if (level < 1) throw DegreeError("local data need level >= 1");
  LocalDatum d;
  d.K = std::move(K);
  d.level = level;
  d.comp.resize(level);
  d.zcol = make_cochain(d.K, level, Ring::Int);
  return d;
}

/* Layer names used in diagnostics and serialization. */
inline std::string datum_layer_name(int level, int p) {
  const int from_top = level - 1 - p; /* 0 = transitions */
  switch (from_top) {
    case 0:
      return "f";
    case 1:
      return "A";
    case 2:
      return "B";
    default:
      return "layer" + std::to_string(p);
  }
}

inline void datum_set(LocalDatum& d, int p, const Simplex& sigma,
                      Cochain local) {
  if (p < 0 || p >= d.level) throw DegreeError("datum layer out of range");
  if (p > d.K->dim() || (int)sigma.size() != p + 1 || !d.K->has(sigma))
    throw MissingSimplexError("datum entry at missing simplex", sigma);
  auto star = closed_star(d.K, sigma);
  const int q = d.level - 1 - p;
  if (!same_complex(local.K, star) || local.degree != q)
    throw ValidationError("datum entry must live on the closed star of " +
                          simplex_str(sigma) + " in degree " +
                          std::to_string(q));
  if (local.ring == Ring::RatMod1)
    throw ValidationError("datum entries carry rational values");
  if (local.ring == Ring::Int) local.ring = Ring::Rat;
  if (local.values.empty())
    d.comp[p].erase(sigma);
  else
    d.comp[p][sigma] = std::move(local);
}

inline const Cochain* datum_component(const LocalDatum& d, int p,
                                      const Simplex& sigma) {
  if (p < 0 || p >= d.level) return nullptr;
  auto it = d.comp[p].find(sigma);
  return it == d.comp[p].end() ? nullptr : &it->second;
}

inline void require_same_datum_shape(const LocalDatum& a, const LocalDatum& b,
                                     const char* op) {
  if (!same_complex(a.K, b.K))
    throw ValidationError(std::string(op) + ": data on different complexes");
  if (a.level != b.level)
    throw DegreeError(std::string(op) + ": data of different levels");
}

inline LocalDatum datum_add(const LocalDatum& a, const LocalDatum& b) {
  require_same_datum_shape(a, b, "tensor");
  LocalDatum out = make_local_datum(a.K, a.level);
  out.zcol = cochain_add(a.zcol, b.zcol);
  for (int p = 0; p < a.level; ++p) {
    out.comp[p] = a.comp[p];
    for (const auto& [s, c] : b.comp[p]) {
      auto it = out.comp[p].find(s);
      if (it == out.comp[p].end()) {
        out.comp[p].emplace(s, c);
      } else {
        it->second = cochain_add(it->second, c);
        if (it->second.values.empty()) out.comp[p].erase(it);
      }
    }
  }
  return out;
}

inline LocalDatum datum_negate(const LocalDatum& a) {
  LocalDatum out = make_local_datum(a.K, a.level);
  out.zcol = cochain_negate(a.zcol);
  for (int p = 0; p < a.level; ++p)
    for (const auto& [s, c] : a.comp[p])
      out.comp[p].emplace(s, cochain_negate(c));
  return out;
}

inline LocalDatum datum_sub(const LocalDatum& a, const LocalDatum& b) {
  return datum_add(a, datum_negate(b));
}

/* integer multiple of a local datum (the k-th tensor power) */
inline LocalDatum datum_scale(const LocalDatum& a, const Int& k) {
  LocalDatum out = make_local_datum(a.K, a.level);
  out.zcol = cochain_scale(a.zcol, Rat(k));
  for (int p = 0; p < a.level; ++p)
    for (const auto& [s, c] : a.comp[p])
      out.comp[p].emplace(s, cochain_scale(c, Rat(k)));
  return out;
}

inline bool datum_is_zero(const LocalDatum& d) {
  if (!d.zcol.values.empty()) return false;
  for (const auto& col : d.comp)
    for (const auto& [s, c] : col)
      if (!c.values.empty()) return false;
  return true;
}

inline bool datum_equal(const LocalDatum& a, const LocalDatum& b) {
  return datum_is_zero(datum_sub(a, b));
}

/* Tensor product of local data adds every layer; the dual negates. */
inline LocalDatum tensor(const LocalDatum& a, const LocalDatum& b) {
  return datum_add(a, b);
}

inline LocalDatum dual(const LocalDatum& a) { return datum_negate(a); }

/* --- assembly into the total complex ---------------------------------- */

/* Layer sign (-1)^{p(p+3)/2} placing layer p into the total complex so
   that the descent equations read off the total differential. */
inline int assembly_sign(int p) {
  switch (((p % 4) + 4) % 4) {
    case 0:
    case 1:
      return 1;
    default:
      return -1;
  }
}

/* Sign placing an integral class column of degree n into the total complex.
   It is the inverse of the staircase transgression: with this embedding the
   glued curvature of the integral reference represents +[column], which is
   what makes the holonomy correction an integral solve. */
inline int class_column_sign(int n) { return (n % 2) ? -1 : 1; }

inline DeligneCochain assemble(const LocalDatum& d) {
  DeligneCochain x = make_deligne(d.K, d.level, d.level - 1);
  for (int p = 0; p < d.level; ++p)
    x.cols[d.level - 1 - p] =
        collection_scale(d.comp[p], Rat(assembly_sign(p)));
  x.zcol = cochain_scale(d.zcol, Rat(class_column_sign(d.level)));
  return x;
}

inline LocalDatum disassemble(const DeligneCochain& x) {
  if (x.total != x.n - 1)
    throw DegreeError("only total cochains of degree n-1 are local data");
  LocalDatum d = make_local_datum(x.K, x.n);
  for (int p = 0; p < d.level; ++p)
    d.comp[p] = collection_scale(x.cols[d.level - 1 - p],
                                 Rat(assembly_sign(p)));
  d.zcol = cochain_scale(x.zcol, Rat(class_column_sign(d.level)));
  return d;
}

/* --- validity ---------------------------------------------------------- */

struct DatumCheck {
  bool ok = true;
  std::vector<std::pair<std::string, Simplex>> failures;
};

inline std::string descent_equation_name(int q) {
  switch (q) {
    case 0:
      return "cech f = m";
    case 1:
      return "cech A = d f";
    case 2:
      return "cech B = d A";
    default:
      return "descent at row " + std::to_string(q);
  }
}

inline DatumCheck check_datum(const LocalDatum& d) {
  DatumCheck out;
  DeligneCochain defect = total_differential(assemble(d));
  for (int q = d.level - 1; q >= 0; --q)
    for (const auto& [s, c] : defect.cols[q])
      if (!c.values.empty()) {
        out.ok = false;
        out.failures.push_back({descent_equation_name(q), s});
      }
  for (const auto& [s, v] : defect.zcol.values)
    if (v != 0) {
      out.ok = false;
      out.failures.push_back({"d m = 0", s});
    }
  return out;
}

inline void require_valid_datum(const LocalDatum& d, const char* what) {
  DatumCheck chk = check_datum(d);
  if (!chk.ok)
    throw ValidationError(std::string(what) + ": invalid local datum, " +
                          chk.failures.front().first + " fails at " +
                          simplex_str(chk.failures.front().second));
}

/* --- basic constructions ----------------------------------------------- */

/* Datum whose only content is the restriction of a global (level-1)-form
   to each vertex star; its class column vanishes. */
inline LocalDatum trivial_gerbe(const ComplexPtr& K, int level,
                                const Cochain& rho) {
  if (level < 1) throw DegreeError("local data need level >= 1");
  if (!same_complex(rho.K, K) || rho.degree != level - 1)
    throw ValidationError("holonomy datum must be a (level-1)-cochain");
  if (rho.ring == Ring::RatMod1)
    throw ValidationError("holonomy datum carries rational values");
  LocalDatum d = make_local_datum(K, level);
  for (int v : K->vertex_ids) {
    Cochain r = restrict_to(rho, closed_star(K, Simplex{v}));
    if (r.ring == Ring::Int) r.ring = Ring::Rat;
    if (!r.values.empty()) d.comp[0][Simplex{v}] = std::move(r);
  }
  return d;
}

/* Pullback along a simplicial map: layer entries transport along the
   induced star maps with the orientation sign of the image simplex;
   simplices with degenerate images contribute zero. */
inline LocalDatum pullback_datum(const SimplicialMap& f, const LocalDatum& g) {
  if (!same_complex(g.K, f.dst))
    throw ValidationError("pullback: datum not on the map's target");
  LocalDatum out = make_local_datum(f.src, g.level);
  for (int p = 0; p < g.level && p <= f.src->dim(); ++p) {
    if (g.comp[p].empty()) continue;
    for (const auto& sigma : f.src->by_dim[p]) {
      auto im = map_simplex(f, sigma);
      if (!im) continue;
      auto it = g.comp[p].find(im->first);
      if (it == g.comp[p].end()) continue;
      auto star_src = closed_star(f.src, sigma);
      auto star_dst = closed_star(f.dst, im->first);
      std::map<int, int> vm;
      for (int v : star_src->vertex_ids) vm[v] = f.vertex_map.at(v);
      SimplicialMap star_f =
          make_simplicial_map(star_src, star_dst, std::move(vm));
      Cochain pulled = pullback(star_f, it->second);
      if (im->second < 0) pulled = cochain_negate(pulled);
      if (!pulled.values.empty()) out.comp[p].emplace(sigma, std::move(pulled));
    }
  }
  out.zcol = pullback(f, g.zcol);
  return out;
}

/* --- gauge action ------------------------------------------------------- */

/* A gauge for level-n data is a (possibly non-closed) datum of level n-1.
   Embedding its layer p with the sign of datum layer p+1 and its class
   column like a degree-n class makes the induced action read, at level 3,
     B -> B + d eta,  A -> A + cech eta + d u,  f -> f + cech u + w,
     m -> m + d w,
   and at level 2
     A -> A + d u,  f -> f + cech u - w,  m -> m + d w.
   (Only the handedness of the integer shift of f depends on the level; it
   is invisible mod 1.) */
inline DeligneCochain gauge_hat(const LocalDatum& y, int n) {
  if (y.level != n - 1)
    throw DegreeError("gauge data must have level one below the datum");
  DeligneCochain xh = make_deligne(y.K, n, n - 2);
  for (int p = 0; p < y.level; ++p)
    xh.cols[y.level - 1 - p] =
        collection_scale(y.comp[p], Rat(assembly_sign(p + 1)));
  xh.zcol = cochain_scale(y.zcol, Rat(class_column_sign(n)));
  return xh;
}

inline LocalDatum hat_to_datum(const DeligneCochain& xh) {
  const int level = xh.total + 1;
  if (level < 1) throw DegreeError("gauge data need level >= 1");
  for (int q = level; q < xh.n; ++q)
    if (!xh.cols[q].empty())
      throw DegreeError("total cochain does not embed gauge data");
  LocalDatum y = make_local_datum(xh.K, level);
  for (int p = 0; p < level; ++p)
    y.comp[p] = collection_scale(xh.cols[level - 1 - p],
                                 Rat(assembly_sign(p + 1)));
  y.zcol = cochain_scale(xh.zcol, Rat(class_column_sign(level + 1)));
  return y;
}

inline LocalDatum gauge_transform(const LocalDatum& g, const LocalDatum& y) {
  if (g.level < 2) throw DegreeError("gauge action needs level >= 2");
  if (!same_complex(g.K, y.K))
    throw ValidationError("gauge data on a different complex");
  DeligneCochain moved =
      deligne_add(assemble(g), total_differential(gauge_hat(y, g.level)));
  LocalDatum out = disassemble(moved);
  return out;
}

/* --- the integral reference -------------------------------------------- */

/* The canonical all-integer closed total cochain with a prescribed closed
   integral column: each row is the minimal-vertex contraction of the
   vertical image of the previous one.  Every valid datum differs from its
   reference by a cocycle without class column, which is what collation
   peels off. */
inline DeligneCochain ref_complete(const ComplexPtr& K, int n,
                                   const Cochain& zt) {
  if (!same_complex(zt.K, K) || zt.degree != n || zt.ring != Ring::Int)
    throw Error("internal: reference needs an integral column of degree n");
  if (!coboundary(zt).values.empty())
    throw Error("internal: reference needs a closed column");
  DeligneCochain x = make_deligne(K, n, n - 1);
  x.zcol = zt;
  StarCollection vert = iota_collection(K, zt);
  for (int q = 0; q < n; ++q) {
    const int sign = (n - q) % 2 ? 1 : -1; /* -(-1)^{n-q} */
    x.cols[q] = collection_scale(contract_one(K, vert, n - q, q), Rat(sign));
    if (q + 1 < n) vert = vertical_of(x.cols[q]);
  }
  if (!deligne_is_zero(total_differential(x)))
    throw Error("internal: reference cochain is not closed");
  return x;
}

/* --- curvature, collation, localization -------------------------------- */

/* The unique global level-form restricting to d(curving) on every star. */
inline Cochain curvature(const LocalDatum& g) {
  require_valid_datum(g, "curvature");
  return glue_collection(g.K, vertical_of(g.comp[0]), g.level);
}

namespace detail {

/* Integral correction b with  d b = (reference curvature) - m. */
inline Cochain reference_correction(const ComplexPtr& K, int n,
                                    const StarCollection& ref_top,
                                    const Cochain& m) {
  Cochain wp = glue_collection(K, vertical_of(ref_top), n);
  Cochain rhs = cochain_sub(wp, m);
  auto b = solve_integer(*coboundary_snf(*K, n - 1), cochain_to_ivec(rhs));
  if (!b)
    throw Error("internal: reference curvature misses the class lattice");
  return cochain_from_ivec(K, n - 1, Ring::Int, *b);
}

}  // namespace detail

/* Collate local data into a global differential cocycle (class column,
   holonomy cochain, curvature) representing the same class. */
inline DifferentialCocycle collate(const LocalDatum& g) {
  require_valid_datum(g, "collate");
  const ComplexPtr& K = g.K;
  const int n = g.level;
  require_level(K, n, "collate");
  DeligneCochain x = assemble(g);
  DeligneCochain xp = ref_complete(K, n, x.zcol);
  DeligneCochain xq = deligne_sub(x, xp);
  for (int pass = 1; pass < n; ++pass) {
    DeligneCochain y = kappa_contract(xq);
    xq = deligne_sub(xq, total_differential(y));
  }
  if (!xq.zcol.values.empty())
    throw Error("internal: collation left an integral residue");
  for (int q = 0; q + 1 < n; ++q)
    if (!xq.cols[q].empty())
      throw Error("internal: collation left a lower row");
  Cochain h0 = glue_collection(K, xq.cols[n - 1], n - 1);
  Cochain b = detail::reference_correction(K, n, xp.cols[n - 1], g.zcol);
  Cochain h = cochain_add(h0, b);
  Cochain w = glue_collection(K, vertical_of(g.comp[0]), n);
  DifferentialCocycle out = make_differential_cocycle(K, n, g.zcol, h, w);
  if (!check_cocycle(out).ok)
    throw Error("internal: collation output fails the cocycle equations");
  return out;
}

inline DifferentialCocycle deligne_class(const LocalDatum& g) {
  return collate(g);
}

/* Split a global differential cocycle into local data; collating the
   result returns the input exactly. */
inline LocalDatum localize(const DifferentialCocycle& x) {
  require_cocycle(x, "localize");
  const ComplexPtr& K = x.K;
  const int n = x.n;
  DeligneCochain xp =
      ref_complete(K, n, cochain_scale(x.c, Rat(class_column_sign(n))));
  LocalDatum d = disassemble(xp);
  Cochain b = detail::reference_correction(K, n, d.comp[0], x.c);
  Cochain hb = cochain_sub(x.h, b);
  for (int v : K->vertex_ids) {
    Simplex vs{v};
    Cochain r = restrict_to(hb, closed_star(K, vs));
    detail::collection_accumulate(K, d.comp[0], vs, n - 1, r, Rat(1));
  }
  if (!check_datum(d).ok)
    throw Error("internal: localization produced an invalid datum");
  return d;
}

/* --- the topological class ---------------------------------------------- */

struct DDClassReport {
  GroupPresentation group; /* integral cohomology in the datum's degree */
  ClassCoords coords;      /* coordinates of the class column */
};

inline DDClassReport dd_class(const LocalDatum& g) {
  require_valid_datum(g, "class");
  DDClassReport out;
  out.group = cohomology_any(g.K, g.level, Ring::Int);
  if (g.level <= g.K->dim()) out.coords = class_coords(g.K, g.zcol);
  return out;
}

/* --- combinatorial gauge ------------------------------------------------ */

/* A datum is combinatorial when every transition entry is constant on its
   star; the morphism layer requires this form. */
inline bool is_combinatorial(const LocalDatum& d) {
  const int p = d.level - 1;
  if (p > d.K->dim()) return true;
  for (const auto& [s, c] : d.comp[p]) {
    const auto& verts = c.K->by_dim[0];
    Rat first = c(verts.front());
    for (const auto& v : verts)
      if (c(v) != first) return false;
  }
  return true;
}

struct NormalizeResult {
  bool ok = false;
  LocalDatum gauge; /* apply with gauge_transform when ok */
  std::string note;
};

/* Search for a gauge (transition layer only) making the datum
   combinatorial; reports failure instead of guessing when no exact gauge
   exists. */
inline NormalizeResult normalize(const LocalDatum& g) {
  if (g.level < 2) throw DegreeError("normalize needs level >= 2");
  const ComplexPtr& K = g.K;
  const int n = g.level;
  NormalizeResult out;
  out.gauge = make_local_datum(K, n - 1);
  if (n - 1 > K->dim()) {
    out.ok = true;
    out.note = "no transition simplices; already combinatorial";
    return out;
  }

  /* Unknowns: one value per (tau, vertex of star(tau)) for the gauge layer,
     then one target constant per transition simplex. */
  std::vector<ComplexPtr> stars;
  std::vector<int> offset;
  int nvars = 0;
  const bool have_u = n - 2 <= K->dim();
  const auto& taus = have_u ? K->by_dim[n - 2] : K->by_dim[0];
  if (have_u) {
    stars.reserve(taus.size());
    offset.reserve(taus.size());
    for (const auto& tau : taus) {
      stars.push_back(closed_star(K, tau));
      offset.push_back(nvars);
      nvars += (int)stars.back()->by_dim[0].size();
    }
  }
  const int tbase = nvars;
  nvars += K->count(n - 1);

  SparseSystemQ sys(nvars);
  for (int si = 0; si < K->count(n - 1); ++si) {
    const Simplex& sigma = K->simplex(n - 1, si);
    auto star = closed_star(K, sigma);
    auto fit = g.comp[n - 1].find(sigma);
    for (const auto& v : star->by_dim[0]) {
      std::map<int, Rat> row;
      if (have_u)
        for (int i = 0; i < n; ++i) {
          Simplex tau = face_of(sigma, i);
          const int ti = K->index_of(tau);
          const int vi = stars[ti]->index_of(v);
          Rat& coef = row[offset[ti] + vi];
          coef += (i % 2) ? Rat(-1) : Rat(1);
        }
      row[tbase + si] = Rat(-1);
      Rat rhs = (fit == g.comp[n - 1].end()) ? Rat(0) : -fit->second(v);
      sys.add_row(std::move(row), rhs);
    }
  }
  auto sol = sys.solve();
  if (!sol) {
    out.note = "no gauge makes the transition layer locally constant";
    return out;
  }
  if (have_u)
    for (size_t ti = 0; ti < taus.size(); ++ti) {
      Cochain u = make_cochain(stars[ti], 0, Ring::Rat);
      const auto& verts = stars[ti]->by_dim[0];
      for (int vi = 0; vi < (int)verts.size(); ++vi)
        if ((*sol)[offset[ti] + vi] != 0)
          cochain_set(u, verts[vi], (*sol)[offset[ti] + vi]);
      if (!u.values.empty()) out.gauge.comp[n - 2][taus[ti]] = std::move(u);
    }
  out.ok = true;
  out.note = "gauge computed on the transition layer";
  return out;
}

/* --- connecting gauge between equivalent data --------------------------- */

/* Exhibits a gauge carrying g to gp when their collated classes agree;
   returns nothing when the classes differ.  Together with the invariance
   of the collated class under gauge_transform this makes class equality
   the exact criterion for gauge equivalence. */
inline std::optional<LocalDatum> connect_gauge(const LocalDatum& g,
                                               const LocalDatum& gp) {
  require_same_datum_shape(g, gp, "connect");
  if (g.level < 2) throw DegreeError("gauge action needs level >= 2");
  require_valid_datum(g, "connect");
  require_valid_datum(gp, "connect");
  const ComplexPtr& K = g.K;
  const int n = g.level;
  LocalDatum diff = datum_sub(gp, g);
  DifferentialCocycle coll = collate(diff);
  if (!coll.w.values.empty()) return std::nullopt;
  auto wit = class_difference_witness(coll, zero_cocycle(K, n));
  if (!wit) return std::nullopt;

  DeligneCochain z = assemble(diff);
  DeligneCochain yhat = make_deligne(K, n, n - 2);
  yhat.zcol = cochain_scale(wit->b, Rat(class_column_sign(n)));
  DeligneCochain z1 = deligne_sub(z, total_differential(yhat));
  for (int pass = 1; pass < n; ++pass) {
    DeligneCochain u = kappa_contract(z1);
    yhat = deligne_add(yhat, u);
    z1 = deligne_sub(z1, total_differential(u));
  }
  if (!z1.zcol.values.empty())
    throw Error("internal: connecting gauge left an integral residue");
  for (int q = 0; q + 1 < n; ++q)
    if (!z1.cols[q].empty())
      throw Error("internal: connecting gauge left a lower row");
  Cochain H = glue_collection(K, z1.cols[n - 1], n - 1);
  if (!coboundary(H).values.empty())
    throw Error("internal: residual holonomy cochain is not closed");
  DifferentialCocycle flat = make_differential_cocycle(
      K, n, make_cochain(K, n, Ring::Int), H, make_cochain(K, n, Ring::Rat));
  auto wit2 = class_difference_witness(flat, zero_cocycle(K, n));
  if (!wit2) throw Error("internal: residual flat class fails to vanish");
  DifferentialCocycle yc = make_differential_cocycle(
      K, n - 1, cochain_negate(wit2->b), cochain_negate(wit2->k), H);
  DeligneCochain ya = assemble(localize(yc));
  DeligneCochain yemb = make_deligne(K, n, n - 2);
  for (int q = 0; q + 1 < n; ++q) yemb.cols[q] = ya.cols[q];
  yemb.zcol = ya.zcol;
  yhat = deligne_add(yhat, yemb);
  if (!deligne_equal(total_differential(yhat), z))
    throw Error("internal: connecting gauge does not reproduce the data");
  LocalDatum y = hat_to_datum(yhat);
  if (!datum_equal(gauge_transform(g, y), gp))
    throw Error("internal: connecting gauge verification failed");
  return y;
}

/* --- surface holonomy ---------------------------------------------------- */

namespace detail {

inline Simplex image_vertex_set(const SimplicialMap& f, const Simplex& s) {
  Simplex img;
  img.reserve(s.size());
  for (int v : s) img.push_back(f.vertex_map.at(v));
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  return img;
}

inline Simplex join_sorted(const Simplex& a, const Simplex& b) {
  Simplex out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

/* Signed value of a datum layer at a vertex tuple (patch indices) applied
   to the image of a surface simplex; missing simplices of the nerve mean
   the assignment cannot be evaluated. */
inline Rat patched_value(const LocalDatum& g, const SimplicialMap& phi,
                         Simplex tuple, const Simplex& cell) {
  SortedTuple st = sort_with_sign(std::move(tuple));
  if (!st.ok) return Rat(0);
  auto im = map_simplex(phi, cell);
  if (!im) return Rat(0);
  if (!g.K->has(st.simplex) ||
      !g.K->has(join_sorted(st.simplex, im->first)))
    throw ValidationError(
        "patch assignment cannot be evaluated near " + simplex_str(cell) +
        ": " + simplex_str(st.simplex) + " does not see its image");
  const int p = (int)st.simplex.size() - 1;
  auto it = g.comp[p].find(st.simplex);
  if (it == g.comp[p].end()) return Rat(0);
  Rat v = it->second(im->first);
  return (st.sign * im->second) > 0 ? v : -v;
}

}  // namespace detail

/* Holonomy of level-3 data over a closed oriented triangulated surface
   mapped into the complex.  Each surface simplex is assigned a patch
   vertex whose closed star contains its image (default: the smallest
   image vertex); the result is independent of that choice and of gauge. */
inline Rat surface_holonomy(const LocalDatum& g, const SimplicialMap& phi,
                            const std::map<Simplex, int>& patch = {}) {
  if (g.level != 3) throw DegreeError("surface holonomy needs level 3 data");
  if (!same_complex(phi.dst, g.K))
    throw ValidationError("surface map does not land in the datum's complex");
  require_valid_datum(g, "holonomy");
  const ComplexPtr& S = phi.src;
  Chain fc = fundamental_surface_cycle(S);

  /* Resolve and validate the patch assignment. */
  std::map<Simplex, int> P;
  for (int q = 0; q <= 2; ++q)
    for (const auto& s : S->by_dim[q]) {
      Simplex img = detail::image_vertex_set(phi, s);
      int pv;
      if (patch.empty()) {
        pv = img.front();
      } else {
        auto it = patch.find(s);
        if (it == patch.end())
          throw ValidationError("patch assignment misses " + simplex_str(s));
        pv = it->second;
      }
      if (!g.K->has(Simplex{pv}) ||
          !g.K->has(detail::join_sorted(img, Simplex{pv})))
        throw ValidationError("patch vertex " + std::to_string(pv) +
                              " does not see the image of " + simplex_str(s));
      P[s] = pv;
    }
  if (!patch.empty())
    for (const auto& [s, pv] : patch)
      if (!P.count(s))
        throw ValidationError("patch assignment names a simplex outside "
                              "the surface: " +
                              simplex_str(s));

  Rat total(0);
  for (const auto& t : S->by_dim[2]) {
    Rat et = fc(t);
    if (et == 0) continue;
    total += et * detail::patched_value(g, phi, Simplex{P[t]}, t);
    for (int i = 0; i < 3; ++i) {
      Simplex e = face_of(t, i);
      Rat ce = (i % 2) ? -et : et;
      total += ce * detail::patched_value(g, phi, Simplex{P[t], P[e]}, e);
      for (int j = 0; j < 2; ++j) {
        Simplex v = face_of(e, j);
        Rat dv = (j % 2) ? Rat(-1) : Rat(1);
        total -= ce * dv *
                 detail::patched_value(g, phi, Simplex{P[t], P[e], P[v]}, v);
      }
    }
  }
  return mod1(total);
}

/* The same pairing computed through the collated holonomy cochain. */
inline Rat surface_holonomy_via_class(const LocalDatum& g,
                                      const SimplicialMap& phi) {
  if (g.level != 3) throw DegreeError("surface holonomy needs level 3 data");
  Chain fc = fundamental_surface_cycle(phi.src);
  return mod1(evaluate(collate(g).h, pushforward(phi, fc)));
}

}  // namespace gerbecalc
