#pragma once
/* The truncated double complex behind differential cohomology.

   A total cochain of total degree t on a complex K with n rational columns
   holds, for each vertical degree q in 0..n-1, a collection indexed by the
   (t-q)-simplices sigma of K whose entry is a rational q-cochain on the
   closed star of sigma, together with an integer column: a plain integral
   (t+1)-cochain on K feeding the bottom row through the inclusion of
   constants.  The total differential combines the Cech coboundary across
   collections, the simplicial coboundary inside each star (with the usual
   alternating sign), and that inclusion; the top rational row is truncated,
   so no vertical differential leaves q = n-1.

   Global objects of interest are cocycle triples x = (c, h, w): an integral
   n-cocycle c, a rational (n-1)-cochain h, and the curvature w = c + dh.
   Coboundaries are (db, -b - dk, 0) for integral b and rational k, so two
   triples are identified exactly when their difference is such a
   coboundary; membership is decided exactly by a mixed integer/rational
   lattice solve. */

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gerbecalc/cochain.hpp"
#include "gerbecalc/cohomology.hpp"
#include "gerbecalc/errors.hpp"
#include "gerbecalc/rational.hpp"
#include "gerbecalc/simplicial.hpp"
#include "gerbecalc/smith.hpp"

namespace gerbecalc {

/* One collection: p-simplex -> local q-cochain on its closed star. */
using StarCollection = std::map<Simplex, Cochain>;

struct DeligneCochain {
  ComplexPtr K;
  int n = 0;      /* number of rational rows, vertical degrees 0..n-1 */
  int total = 0;  /* total degree; entries for q sit over (total-q)-simplices */
  std::vector<StarCollection> cols;  /* indexed by vertical degree q */
  Cochain zcol;                      /* integral (total+1)-cochain on K */
};

inline DeligneCochain make_deligne(ComplexPtr K, int n, int total) {
  if (n < 1) throw DegreeError("total cochain needs at least one rational row");
  if (total < -1) throw DegreeError("total degree below -1 is empty");
  DeligneCochain x;
  x.K = std::move(K);
  x.n = n;
  x.total = total;
  x.cols.resize(n);
  x.zcol = make_cochain(x.K, total + 1, Ring::Int);
  return x;
}

/* Cech position of vertical degree q inside a total degree. */
inline int cech_level(const DeligneCochain& x, int q) { return x.total - q; }

inline void deligne_set(DeligneCochain& x, int q, const Simplex& sigma,
                        Cochain local) {
  if (q < 0 || q >= x.n) throw DegreeError("vertical degree out of range");
  const int p = cech_level(x, q);
  if (p < 0 || p > x.K->dim() || (int)sigma.size() != p + 1 ||
      !x.K->has(sigma))
    throw MissingSimplexError("total cochain entry at missing simplex", sigma);
  auto star = closed_star(x.K, sigma);
  if (!same_complex(local.K, star) || local.degree != q)
    throw ValidationError("local cochain must live on the closed star of " +
                          simplex_str(sigma) + " in degree " +
                          std::to_string(q));
  if (local.ring == Ring::RatMod1)
    throw ValidationError("total cochain entries carry rational values");
  if (local.ring == Ring::Int) local.ring = Ring::Rat;
  if (local.values.empty())
    x.cols[q].erase(sigma);
  else
    x.cols[q][sigma] = std::move(local);
}

inline const Cochain* deligne_get(const DeligneCochain& x, int q,
                                  const Simplex& sigma) {
  if (q < 0 || q >= x.n) return nullptr;
  auto it = x.cols[q].find(sigma);
  return it == x.cols[q].end() ? nullptr : &it->second;
}

inline bool deligne_is_zero(const DeligneCochain& x) {
  if (!x.zcol.values.empty()) return false;
  for (const auto& col : x.cols)
    for (const auto& [s, c] : col)
      if (!c.values.empty()) return false;
  return true;
}

inline void require_same_shape(const DeligneCochain& a,
                               const DeligneCochain& b, const char* op) {
  if (!same_complex(a.K, b.K))
    throw ValidationError(std::string(op) +
                          ": total cochains on different complexes");
  if (a.n != b.n || a.total != b.total)
    throw DegreeError(std::string(op) + ": total cochain shapes differ");
}

inline DeligneCochain deligne_add(const DeligneCochain& a,
                                  const DeligneCochain& b) {
  require_same_shape(a, b, "add");
  DeligneCochain out = make_deligne(a.K, a.n, a.total);
  out.zcol = cochain_add(a.zcol, b.zcol);
  for (int q = 0; q < a.n; ++q) {
    out.cols[q] = a.cols[q];
    for (const auto& [s, c] : b.cols[q]) {
      auto it = out.cols[q].find(s);
      if (it == out.cols[q].end()) {
        out.cols[q].emplace(s, c);
      } else {
        it->second = cochain_add(it->second, c);
        if (it->second.values.empty()) out.cols[q].erase(it);
      }
    }
  }
  return out;
}

inline DeligneCochain deligne_scale(const DeligneCochain& a, const Rat& r) {
  DeligneCochain out = make_deligne(a.K, a.n, a.total);
  if (!is_integer(r))
    throw ValidationError("integer column forbids fractional scaling");
  out.zcol = cochain_scale(a.zcol, r);
  if (r == 0) return out;
  for (int q = 0; q < a.n; ++q)
    for (const auto& [s, c] : a.cols[q]) out.cols[q][s] = cochain_scale(c, r);
  return out;
}

inline DeligneCochain deligne_negate(const DeligneCochain& a) {
  return deligne_scale(a, Rat(-1));
}

inline DeligneCochain deligne_sub(const DeligneCochain& a,
                                  const DeligneCochain& b) {
  return deligne_add(a, deligne_negate(b));
}

inline bool deligne_equal(const DeligneCochain& a, const DeligneCochain& b) {
  return deligne_is_zero(deligne_sub(a, b));
}

namespace detail {

/* Accumulate `inc` (a cochain on a star containing `dst`'s star) into a
   collection entry, dropping the entry when it cancels to zero. */
inline void collection_accumulate(const ComplexPtr& K, StarCollection& col,
                                  const Simplex& sigma, int q,
                                  const Cochain& inc, const Rat& scale) {
  if (inc.values.empty() || scale == 0) return;
  auto star = closed_star(K, sigma);
  auto it = col.find(sigma);
  if (it == col.end())
    it = col.emplace(sigma, make_cochain(star, q, Ring::Rat)).first;
  for (const auto& [s, v] : inc.values) {
    if (!star->has(s)) continue;
    cochain_accumulate(it->second, s, v * scale);
  }
  if (it->second.values.empty()) col.erase(it);
}

}  // namespace detail

/* The inclusion of integer constants: each value of z becomes the constant
   function on the vertices of the star of its simplex. */
inline StarCollection iota_collection(const ComplexPtr& K, const Cochain& z) {
  StarCollection out;
  for (const auto& [s, v] : z.values) {
    if (v == 0) continue;
    auto star = closed_star(K, s);
    Cochain one = make_cochain(star, 0, Ring::Rat);
    for (const auto& vert : star->by_dim[0]) cochain_set(one, vert, v);
    out.emplace(s, std::move(one));
  }
  return out;
}

/* Entrywise simplicial coboundary inside each star. */
inline StarCollection vertical_of(const StarCollection& col) {
  StarCollection out;
  for (const auto& [s, c] : col) {
    Cochain dc = coboundary(c);
    if (!dc.values.empty()) out.emplace(s, std::move(dc));
  }
  return out;
}

inline StarCollection collection_scale(const StarCollection& col,
                                       const Rat& r) {
  StarCollection out;
  if (r == 0) return out;
  for (const auto& [s, c] : col) out.emplace(s, cochain_scale(c, r));
  return out;
}

/* One collection's minimal-vertex contraction from Cech level p to p-1;
   entries hold q-cochains.  Legality of every lookup follows from the star
   cover being closed under the needed unions. */
inline StarCollection contract_one(const ComplexPtr& K,
                                   const StarCollection& col, int p, int q) {
  StarCollection out;
  if (p < 1 || p - 1 > K->dim() || col.empty()) return out;
  for (const auto& sig : K->by_dim[p - 1]) {
    auto star = closed_star(K, sig);
    if (q > star->dim()) continue;
    Cochain acc = make_cochain(star, q, Ring::Rat);
    for (const auto& mu : star->by_dim[q]) {
      const int m = mu.front();
      auto pos = std::lower_bound(sig.begin(), sig.end(), m);
      if (pos != sig.end() && *pos == m) continue;
      Simplex rho = sig;
      rho.insert(rho.begin() + (pos - sig.begin()), m);
      auto it = col.find(rho);
      if (it == col.end()) continue;
      Rat v = it->second(mu);
      if (v == 0) continue;
      if ((pos - sig.begin()) % 2) v = -v;
      cochain_accumulate(acc, mu, v);
    }
    if (!acc.values.empty()) out.emplace(sig, std::move(acc));
  }
  return out;
}

/* The total differential.  For q >= 0 at level p:
     (Dx)_{p,q} = cech_delta(x_{p-1,q}) + (-1)^p vertical(x_{p,q-1})
   where the vertical input at q-1 = -1 is the inclusion of the integer
   column as constant functions on stars; the output integer column is the
   simplicial coboundary of the input one.  No vertical differential leaves
   the top row q = n-1. */
inline DeligneCochain total_differential(const DeligneCochain& x) {
  const ComplexPtr& K = x.K;
  DeligneCochain out = make_deligne(K, x.n, x.total + 1);
  out.zcol = coboundary(x.zcol);
  for (int q = 0; q < x.n; ++q) {
    const int p = cech_level(out, q); /* = x.total + 1 - q */
    if (p < 0 || p > K->dim()) continue;
    /* Cech part from the collection one level down. */
    if (p - 1 >= 0 && !x.cols[q].empty()) {
      for (const auto& tau : K->by_dim[p]) {
        for (size_t i = 0; i < tau.size(); ++i) {
          Simplex face = face_of(tau, (int)i);
          auto it = x.cols[q].find(face);
          if (it == x.cols[q].end()) continue;
          detail::collection_accumulate(K, out.cols[q], tau, q, it->second,
                                        (i % 2) ? Rat(-1) : Rat(1));
        }
      }
    }
    /* Vertical part at the same Cech level. */
    const Rat sgn = (p % 2) ? Rat(-1) : Rat(1);
    if (q == 0) {
      for (const auto& [s, v] : x.zcol.values) {
        auto star = closed_star(K, s);
        Cochain one = make_cochain(star, 0, Ring::Rat);
        for (const auto& vert : star->by_dim[0]) cochain_set(one, vert, v);
        detail::collection_accumulate(K, out.cols[0], s, 0, one, sgn);
      }
    } else {
      for (const auto& [s, c] : x.cols[q - 1]) {
        if ((int)s.size() != p + 1) continue; /* shape guard */
        detail::collection_accumulate(K, out.cols[q], s, q, coboundary(c),
                                      sgn);
      }
    }
  }
  return out;
}

/* Contraction along minimal vertices: shifts every collection one Cech level
   down (entries at level 0 and the integer column are dropped).  On a
   collection at level p >= 1,
     (kx)_{sigma}(mu) = sign * x_{sort(sigma + min mu)}(mu),  zero when
   min mu already lies in sigma; the sign places min mu into the sorted
   tuple.  Together with the Cech coboundary this is a homotopy splitting
   the star-indexed rows, which is what makes local data collate. */
inline DeligneCochain kappa_contract(const DeligneCochain& x) {
  DeligneCochain out = make_deligne(x.K, x.n, x.total - 1);
  for (int q = 0; q < x.n; ++q)
    out.cols[q] = contract_one(x.K, x.cols[q], cech_level(x, q), q);
  return out;
}

/* Glue a vertex-indexed collection whose entries agree on overlaps into one
   global cochain; disagreement is reported with the offending simplex. */
inline Cochain glue_collection(const ComplexPtr& K, const StarCollection& col,
                               int q) {
  Cochain out = make_cochain(K, q, Ring::Rat);
  if (q > K->dim()) return out;
  for (const auto& tau : K->by_dim[q]) {
    bool first = true;
    Rat val(0);
    for (int a : tau) {
      auto it = col.find(Simplex{a});
      Rat v = it == col.end() ? Rat(0) : it->second(tau);
      if (first) {
        val = v;
        first = false;
      } else if (v != val) {
        throw ValidationError("local values do not glue at " +
                              simplex_str(tau));
      }
    }
    if (val != 0) cochain_set(out, tau, val);
  }
  return out;
}

/* --- global cocycle triples ------------------------------------------ */

struct DifferentialCocycle {
  ComplexPtr K;
  int n = 0;
  Cochain c; /* integral n-cocycle: the underlying topological datum */
  Cochain h; /* rational (n-1)-cochain: the connection-type datum */
  Cochain w; /* rational n-cochain: the curvature, w = c + dh */
};

struct CocycleCheck {
  bool ok = true;
  std::vector<std::pair<std::string, Simplex>> failures;
};

inline void require_level(const ComplexPtr& K, int n, const char* what) {
  if (n < 1 || n > K->dim() + 1)
    throw DegreeError(std::string(what) + ": level must lie in 1..dim+1");
}

inline DifferentialCocycle make_differential_cocycle(const ComplexPtr& K,
                                                     int n, Cochain c,
                                                     Cochain h, Cochain w) {
  require_level(K, n, "differential cocycle");
  if (!same_complex(c.K, K) || !same_complex(h.K, K) || !same_complex(w.K, K))
    throw ValidationError("cocycle parts live on different complexes");
  if (c.degree != n || h.degree != n - 1 || w.degree != n)
    throw DegreeError("cocycle part degrees must be (n, n-1, n)");
  if (c.ring != Ring::Int)
    throw ValidationError("the topological part must be integral");
  if (h.ring == Ring::RatMod1 || w.ring == Ring::RatMod1)
    throw ValidationError("connection and curvature parts are rational");
  h.ring = Ring::Rat;
  w.ring = Ring::Rat;
  return DifferentialCocycle{K, n, std::move(c), std::move(h), std::move(w)};
}

inline DifferentialCocycle zero_cocycle(const ComplexPtr& K, int n) {
  require_level(K, n, "differential cocycle");
  return DifferentialCocycle{K, n, make_cochain(K, n, Ring::Int),
                             make_cochain(K, n - 1, Ring::Rat),
                             make_cochain(K, n, Ring::Rat)};
}

inline CocycleCheck check_cocycle(const DifferentialCocycle& x) {
  CocycleCheck out;
  auto record = [&out](const char* eq, const Cochain& defect) {
    for (const auto& [s, v] : defect.values)
      if (v != 0) {
        out.ok = false;
        out.failures.push_back({eq, s});
      }
  };
  record("d c = 0", coboundary(x.c));
  Cochain lhs = coboundary(x.h);
  Cochain rhs = cochain_sub(x.w, x.c);
  record("d h = w - c", cochain_sub(lhs, rhs));
  record("d w = 0", coboundary(x.w));
  return out;
}

inline void require_cocycle(const DifferentialCocycle& x, const char* what) {
  CocycleCheck chk = check_cocycle(x);
  if (!chk.ok)
    throw ValidationError(std::string(what) + ": not a cocycle, " +
                          chk.failures.front().first + " fails at " +
                          simplex_str(chk.failures.front().second));
}

inline bool differential_equal(const DifferentialCocycle& x,
                               const DifferentialCocycle& y) {
  return x.n == y.n && same_complex(x.K, y.K) && cochain_equal(x.c, y.c) &&
         cochain_equal(x.h, y.h) && cochain_equal(x.w, y.w);
}

inline DifferentialCocycle differential_add(const DifferentialCocycle& x,
                                            const DifferentialCocycle& y) {
  if (x.n != y.n || !same_complex(x.K, y.K))
    throw ValidationError("sum of cocycles of different shapes");
  return DifferentialCocycle{x.K, x.n, cochain_add(x.c, y.c),
                             cochain_add(x.h, y.h), cochain_add(x.w, y.w)};
}

inline DifferentialCocycle differential_negate(const DifferentialCocycle& x) {
  return DifferentialCocycle{x.K, x.n, cochain_negate(x.c),
                             cochain_negate(x.h), cochain_negate(x.w)};
}

inline DifferentialCocycle differential_sub(const DifferentialCocycle& x,
                                            const DifferentialCocycle& y) {
  return differential_add(x, differential_negate(y));
}

inline DifferentialCocycle pullback_cocycle(const SimplicialMap& f,
                                            const DifferentialCocycle& x) {
  if (!same_complex(x.K, f.dst))
    throw ValidationError("pullback: cocycle not on the map's target");
  require_level(f.src, x.n, "pullback");
  return DifferentialCocycle{f.src, x.n, pullback(f, x.c), pullback(f, x.h),
                             pullback(f, x.w)};
}

/* Coboundary (db, -b - dk, 0) of integral b and rational k. */
inline DifferentialCocycle deligne_coboundary(const ComplexPtr& K, int n,
                                              const Cochain& b,
                                              const Cochain& k) {
  require_level(K, n, "coboundary");
  if (!same_complex(b.K, K) || b.degree != n - 1 || b.ring != Ring::Int)
    throw ValidationError("coboundary needs an integral (n-1)-cochain");
  if (n >= 2) {
    if (!same_complex(k.K, K) || k.degree != n - 2 ||
        k.ring == Ring::RatMod1)
      throw ValidationError("coboundary needs a rational (n-2)-cochain");
  } else if (!k.values.empty()) {
    throw ValidationError("no rational gauge freedom at level 1");
  }
  Cochain c = coboundary(b);
  Cochain h = cochain_negate(b);
  h.ring = Ring::Rat;
  if (n >= 2) h = cochain_sub(h, coboundary(k));
  return make_differential_cocycle(K, n, std::move(c), std::move(h),
                                   make_cochain(K, n, Ring::Rat));
}

inline DifferentialCocycle deligne_coboundary(const ComplexPtr& K, int n,
                                              const Cochain& b) {
  return deligne_coboundary(K, n, b,
                            make_cochain(K, std::max(n - 2, 0), Ring::Rat));
}

/* Flat cocycle (-dh, h, 0); requires dh integral. */
inline DifferentialCocycle flat_cocycle(const ComplexPtr& K, int n,
                                        const Cochain& h) {
  require_level(K, n, "flat cocycle");
  if (!same_complex(h.K, K) || h.degree != n - 1 || h.ring == Ring::RatMod1)
    throw ValidationError("flat cocycle needs a rational (n-1)-cochain");
  Cochain dh = coboundary(h);
  Cochain c = make_cochain(K, n, Ring::Int);
  for (const auto& [s, v] : dh.values) {
    if (!is_integer(v))
      throw ValidationError("flat cocycle needs integral dh, fails at " +
                            simplex_str(s));
    cochain_set(c, s, -v);
  }
  Cochain hh = h;
  hh.ring = Ring::Rat;
  return make_differential_cocycle(K, n, std::move(c), std::move(hh),
                                   make_cochain(K, n, Ring::Rat));
}

/* Lift (c, 0, c) of an integral cocycle: curvature equals the cocycle. */
inline DifferentialCocycle topological_lift(const ComplexPtr& K, int n,
                                            const Cochain& c) {
  require_level(K, n, "topological lift");
  if (!same_complex(c.K, K) || c.degree != n || c.ring != Ring::Int)
    throw ValidationError("topological lift needs an integral n-cochain");
  Cochain dc = coboundary(c);
  if (!dc.values.empty())
    throw NotClosedError("topological lift needs a cocycle",
                         dc.values.begin()->first);
  Cochain w = c;
  w.ring = Ring::Rat;
  return make_differential_cocycle(K, n, c, make_cochain(K, n - 1, Ring::Rat),
                                   std::move(w));
}

/* The shift (0, rho, d rho) by a globally defined rational cochain. */
inline DifferentialCocycle connection_shift(const ComplexPtr& K, int n,
                                            const Cochain& rho) {
  require_level(K, n, "connection shift");
  if (!same_complex(rho.K, K) || rho.degree != n - 1 ||
      rho.ring == Ring::RatMod1)
    throw ValidationError("connection shift needs a rational (n-1)-cochain");
  Cochain r = rho;
  r.ring = Ring::Rat;
  return make_differential_cocycle(K, n, make_cochain(K, n, Ring::Int), r,
                                   coboundary(r));
}

/* Flat cocycle realizing a d-torsion integral class t: solve d w = d * t
   over the integers and take the connection w/d, whose coboundary is t. */
inline DifferentialCocycle flat_via_generator(const ComplexPtr& K, int n,
                                              const Cochain& t, const Int& d) {
  IVec rhs = cochain_to_ivec(t);
  for (auto& v : rhs) v *= d;
  auto pre = solve_integer(*coboundary_snf(*K, n - 1), rhs);
  if (!pre) throw Error("internal: torsion multiple is not integrally exact");
  Cochain h = cochain_scale(cochain_from_ivec(K, n - 1, Ring::Int, *pre),
                            Rat(Int(1), d));
  return flat_cocycle(K, n, h);
}

/* --- exact equality of classes --------------------------------------- */

namespace detail {
inline IMat coboundary_or_zero(const ComplexPtr& K, int q) {
  if (q >= 0 && q < K->dim()) return *coboundary_matrix_ptr(*K, q);
  return IMat(K->count(q + 1), K->count(q));
}
}  // namespace detail

/* Witness machinery for "is (dc, dh) a coboundary": unknowns are an
   integral (n-1)-cochain b and a rational (n-2)-cochain k subject to
     d b = dc   and   b + d k = -dh,
   a mixed lattice membership problem with the integral columns stacked as
   [d; I] and the rational ones as [0; d]. */
struct DeligneSystem {
  int n = 0;
  std::unique_ptr<SumLatticeSolver> solver;
};

inline std::shared_ptr<const DeligneSystem> deligne_system(const ComplexPtr& K,
                                                           int n) {
  {
    std::lock_guard<std::mutex> lock(K->cache.mu);
    auto it = K->cache.delsys.find(n);
    if (it != K->cache.delsys.end()) return it->second;
  }
  const int nn = K->count(n);
  const int ne = K->count(n - 1);
  const int nk = K->count(n - 2);
  IMat dtop = detail::coboundary_or_zero(K, n - 1);
  IMat N(nn + ne, ne);
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < ne; ++j) N.at(i, j) = dtop.at(i, j);
  for (int j = 0; j < ne; ++j) N.at(nn + j, j) = 1;
  QMat D(nn + ne, n >= 2 ? nk : 0);
  if (n >= 2 && nk > 0) {
    IMat dlow = detail::coboundary_or_zero(K, n - 2);
    for (int i = 0; i < ne; ++i)
      for (int j = 0; j < nk; ++j) D.at(nn + i, j) = Rat(dlow.at(i, j));
  }
  auto sys = std::make_shared<DeligneSystem>();
  sys->n = n;
  sys->solver = std::make_unique<SumLatticeSolver>(std::move(N), std::move(D));
  std::lock_guard<std::mutex> lock(K->cache.mu);
  return K->cache.delsys.emplace(n, sys).first->second;
}

struct ClassWitness {
  Cochain b; /* integral (n-1)-cochain */
  Cochain k; /* rational (n-2)-cochain (empty at level 1) */
};

/* If x and y represent the same class, produce (b, k) with
   x - y = (db, -b - dk, 0); curvatures must agree on the nose. */
inline std::optional<ClassWitness> class_difference_witness(
    const DifferentialCocycle& x, const DifferentialCocycle& y) {
  if (x.n != y.n || !same_complex(x.K, y.K))
    throw ValidationError("class comparison of cocycles of different shapes");
  require_cocycle(x, "class comparison");
  require_cocycle(y, "class comparison");
  if (!cochain_equal(x.w, y.w)) return std::nullopt;
  const ComplexPtr& K = x.K;
  const int n = x.n;
  Cochain dc = cochain_sub(x.c, y.c);
  Cochain dh = cochain_sub(x.h, y.h);
  if (dc.values.empty() && dh.values.empty())
    return ClassWitness{make_cochain(K, n - 1, Ring::Int),
                        make_cochain(K, std::max(n - 2, 0), Ring::Rat)};
  auto sys = deligne_system(K, n);
  const int nn = K->count(n);
  const int ne = K->count(n - 1);
  QVec v(nn + ne, Rat(0));
  {
    QVec top = cochain_to_qvec(dc);
    for (int i = 0; i < nn; ++i) v[i] = top[i];
    QVec bot = cochain_to_qvec(dh);
    for (int i = 0; i < ne; ++i) v[nn + i] = -bot[i];
  }
  auto sol = sys->solver->solve(v);
  if (!sol) return std::nullopt;
  ClassWitness wit{cochain_from_ivec(K, n - 1, Ring::Int, sol->first),
                   make_cochain(K, std::max(n - 2, 0), Ring::Rat)};
  if (n >= 2) wit.k = cochain_from_qvec(K, n - 2, Ring::Rat, sol->second);
  /* The witness must reproduce the difference exactly. */
  DifferentialCocycle cb = deligne_coboundary(K, n, wit.b, wit.k);
  if (!cochain_equal(cb.c, dc) || !cochain_equal(cb.h, dh))
    throw Error("internal: class witness failed verification");
  return wit;
}

inline bool class_equal(const DifferentialCocycle& x,
                        const DifferentialCocycle& y) {
  return class_difference_witness(x, y).has_value();
}

/* Coordinates of the underlying topological class. */
inline ClassCoords characteristic_class(const DifferentialCocycle& x) {
  require_cocycle(x, "characteristic class");
  if (x.n > x.K->dim()) return ClassCoords{}; /* H^n vanishes up there */
  return class_coords(x.K, x.c);
}

/* --- trivialization ---------------------------------------------------- */

struct Trivialization {
  Cochain b;   /* integral (n-1)-cochain */
  Cochain k;   /* rational (n-2)-cochain (empty at level 1) */
  Cochain rho; /* rational (n-1)-cochain with x = D(b,k) + (0, rho, d rho) */
};

inline Trivialization solve_trivialization(const DifferentialCocycle& x) {
  require_cocycle(x, "trivialization");
  const ComplexPtr& K = x.K;
  const int n = x.n;
  if (n <= K->dim()) {
    ClassCoords coords = class_coords(K, x.c);
    if (!coords.is_zero())
      throw ObstructionError("characteristic class obstructs trivialization",
                             coords.labelled());
  }
  auto b = solve_integer(*coboundary_snf(*K, n - 1), cochain_to_ivec(x.c));
  if (!b) throw Error("internal: trivial class without integral preimage");
  Trivialization out{cochain_from_ivec(K, n - 1, Ring::Int, *b),
                     make_cochain(K, std::max(n - 2, 0), Ring::Rat),
                     make_cochain(K, n - 1, Ring::Rat)};
  Cochain br = out.b;
  br.ring = Ring::Rat;
  out.rho = cochain_add(x.h, br);
  /* Exactness checks: c = db and w = d rho. */
  if (!cochain_equal(coboundary(out.b), x.c))
    throw Error("internal: trivialization lost the topological part");
  if (!cochain_equal(coboundary(out.rho), x.w))
    throw Error("internal: trivialization curvature mismatch");
  return out;
}

/* --- the group report --------------------------------------------------- */

struct ExactnessWitness {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct HomotopyEntry {
  int k = 0;
  bool is_self = false; /* k = 0: the full group, described by the report */
  GroupPresentation group;
};

struct DiffCohomologyReport {
  int n = 0;
  GroupPresentation char_class_group; /* integral H^n */
  GroupPresentation flat_group;       /* H^{n-1} with circle coefficients */
  int curvature_lattice_rank = 0;     /* rational b_n */
  std::vector<std::string> sequences;
  std::vector<ExactnessWitness> witnesses;
  std::vector<HomotopyEntry> homotopy;
  bool higher_homotopy_vanishes = false;
  std::string higher_homotopy_note;
  bool all_passed() const {
    for (const auto& w : witnesses)
      if (!w.passed) return false;
    return higher_homotopy_vanishes;
  }
};

inline DiffCohomologyReport diff_cohomology(int n, const ComplexPtr& K) {
  require_level(K, n, "group report");
  DiffCohomologyReport rep;
  rep.n = n;
  rep.char_class_group = cohomology_any(K, n, Ring::Int);
  rep.flat_group = cohomology_any(K, n - 1, Ring::RatMod1);
  rep.curvature_lattice_rank = (int)cohomology_any(K, n, Ring::Rat).free_rank;
  rep.sequences.push_back(
      "0 -> H^{n-1}(K; Q/Z) -> G -> (closed n-forms with integral periods) "
      "-> 0");
  rep.sequences.push_back(
      "0 -> C^{n-1}(K; Q) / (integral + exact) -> G -> H^n(K; Z) -> 0");

  const DifferentialCocycle zero = zero_cocycle(K, n);
  auto free_gens_low =
      n - 1 <= K->dim() ? cohomology_generators(K, n - 1) : std::vector<Cochain>{};
  GroupPresentation low = cohomology_any(K, n - 1, Ring::Int);
  const size_t tor_low = low.torsion.size();

  /* Flat classes inject: a fractional multiple of a free integral class is
     a nonzero flat class, while the integral class itself dies. */
  {
    ExactnessWitness w{"flat classes inject", true, ""};
    int checked = 0;
    for (size_t i = tor_low; i < free_gens_low.size() && checked < 2; ++i) {
      Cochain g = free_gens_low[i];
      DifferentialCocycle half = flat_cocycle(K, n, cochain_scale(g, Rat(1, 2)));
      Cochain gr = g;
      gr.ring = Ring::Rat;
      DifferentialCocycle whole = flat_cocycle(K, n, gr);
      if (class_equal(half, zero) || !class_equal(whole, zero)) w.passed = false;
      ++checked;
    }
    w.detail = checked ? std::to_string(checked) + " torus direction(s) checked"
                       : "no torus directions";
    rep.witnesses.push_back(std::move(w));
  }

  /* Torsion of the characteristic-class group is realized by flat cocycles:
     for d-torsion generator t, solve d w = d*t and take h = w/d. */
  {
    ExactnessWitness w{"torsion classes are flat", true, ""};
    int checked = 0;
    if (n <= K->dim()) {
      auto gens = cohomology_generators(K, n);
      auto sysn = cohomology_system(K, n);
      for (size_t i = 0; i < sysn->pres.torsion.size() && checked < 2; ++i) {
        const Int d = sysn->pres.torsion[i];
        DifferentialCocycle x = flat_via_generator(K, n, gens[i], d);
        if (!cochain_equal(x.w, zero.w) ||
            characteristic_class(x).order() != d)
          w.passed = false;
        ++checked;
      }
    }
    w.detail = checked ? std::to_string(checked) + " torsion generator(s) realized"
                       : "no torsion";
    rep.witnesses.push_back(std::move(w));
  }

  /* Curvature surjects onto the integral-period lattice, and shifting by an
     exact form stays inside it. */
  {
    ExactnessWitness w{"curvature hits the period lattice", true, ""};
    int checked = 0;
    if (n <= K->dim()) {
      auto sysn = cohomology_system(K, n);
      auto gens = cohomology_generators(K, n);
      for (size_t i = sysn->pres.torsion.size();
           i < gens.size() && checked < 2; ++i) {
        DifferentialCocycle x = topological_lift(K, n, gens[i]);
        Cochain gr = gens[i];
        gr.ring = Ring::Rat;
        if (!cochain_equal(x.w, gr) || !integral_periods(x.w)) w.passed = false;
        if (K->count(n - 1) > 0) {
          Cochain rho = make_cochain(K, n - 1, Ring::Rat);
          cochain_set(rho, K->simplex(n - 1, 0), Rat(1, 7));
          DifferentialCocycle x2 = differential_add(x, connection_shift(K, n, rho));
          if (!integral_periods(x2.w)) w.passed = false;
        }
        ++checked;
      }
    }
    w.detail = checked ? std::to_string(checked) + " lattice generator(s) realized"
                       : "curvature lattice is zero";
    rep.witnesses.push_back(std::move(w));
  }

  /* Flat means torsion characteristic class, and free characteristic class
     forces curvature. */
  {
    ExactnessWitness w{"flatness matches torsion classes", true, ""};
    int checked = 0;
    if (K->count(n - 1) > 0) {
      /* An integral connection sample: flat with exact, hence finite-order,
         characteristic class. */
      Cochain h = make_cochain(K, n - 1, Ring::Rat);
      cochain_set(h, K->simplex(n - 1, 0), Rat(1));
      DifferentialCocycle x = flat_cocycle(K, n, h);
      if (characteristic_class(x).order() == 0) w.passed = false;
      ++checked;
    }
    if (n <= K->dim()) {
      auto sysn = cohomology_system(K, n);
      auto gens = cohomology_generators(K, n);
      for (size_t i = sysn->pres.torsion.size();
           i < gens.size() && checked < 3; ++i) {
        DifferentialCocycle x = topological_lift(K, n, gens[i]);
        if (characteristic_class(x).order() != 0 || x.w.values.empty())
          w.passed = false;
        ++checked;
      }
    }
    w.detail = std::to_string(checked) + " sample(s) checked";
    rep.witnesses.push_back(std::move(w));
  }

  /* Zero characteristic class is exactly curvature-exactness: shifted
     coboundaries trivialize and reconstruct, generator lifts obstruct. */
  {
    ExactnessWitness w{"kernel of the class map is exact", true, ""};
    int checked = 0;
    if (K->count(n - 1) > 0) {
      Cochain b = make_cochain(K, n - 1, Ring::Int);
      cochain_set(b, K->simplex(n - 1, 0), Rat(1));
      Cochain k = make_cochain(K, std::max(n - 2, 0), Ring::Rat);
      if (n >= 2 && K->count(n - 2) > 0)
        cochain_set(k, K->simplex(n - 2, 0), Rat(1, 5));
      Cochain rho = make_cochain(K, n - 1, Ring::Rat);
      cochain_set(rho, K->simplex(n - 1, 0), Rat(1, 7));
      DifferentialCocycle x = differential_add(
          deligne_coboundary(K, n, b, k), connection_shift(K, n, rho));
      try {
        Trivialization tr = solve_trivialization(x);
        DifferentialCocycle back = differential_add(
            deligne_coboundary(K, n, tr.b, tr.k),
            connection_shift(K, n, tr.rho));
        if (!differential_equal(back, x)) w.passed = false;
      } catch (const ObstructionError&) {
        w.passed = false;
      }
      ++checked;
    }
    if (n <= K->dim()) {
      auto sysn = cohomology_system(K, n);
      auto gens = cohomology_generators(K, n);
      for (size_t i = 0; i < gens.size() && checked < 4; ++i) {
        DifferentialCocycle x =
            i < sysn->pres.torsion.size()
                ? flat_via_generator(K, n, gens[i], sysn->pres.torsion[i])
                : topological_lift(K, n, gens[i]);
        bool obstructed = false;
        try {
          solve_trivialization(x);
        } catch (const ObstructionError&) {
          obstructed = true;
        }
        if (!obstructed) w.passed = false;
        ++checked;
      }
    }
    w.detail = std::to_string(checked) + " sample(s) checked";
    rep.witnesses.push_back(std::move(w));
  }

  rep.homotopy.push_back(HomotopyEntry{0, true, GroupPresentation{}});
  for (int k = 1; k <= n; ++k)
    rep.homotopy.push_back(
        HomotopyEntry{k, false, cohomology_any(K, n - k - 1, Ring::RatMod1)});

  /* Beyond k = n the mapping-space homotopy is computed by total degrees
     below zero.  At total degree -1 the only entries are integer constants
     on vertices; the differential includes them as constant functions on
     the (nonempty) vertex stars, so the kernel is zero; below that there
     are no entries at all. */
  {
    bool inj = true;
    for (const auto& vtx : K->by_dim[0]) {
      DeligneCochain e = make_deligne(K, n, -1);
      cochain_set(e.zcol, vtx, Rat(1));
      DeligneCochain de = total_differential(e);
      if (deligne_is_zero(de)) inj = false;
    }
    rep.higher_homotopy_vanishes = inj;
    rep.higher_homotopy_note =
        inj ? "constants include injectively into stars; nothing exists in "
              "total degree < -1"
            : "inclusion of constants failed injectivity";
  }
  return rep;
}

}  // namespace gerbecalc
