#pragma once
/* Morphisms of gerbe data: twisted vector bundles with monomial-unitary
   transitions and diagonal rational connections, their 2-morphisms
   (intertwiners), and the additive / duality / pairing structure.

   A morphism E : G0 -> G1 between two level-3 local data on the same
   complex consists of
     - a rank n,
     - per vertex a, n diagonal connection 1-cochains A_a[0..n-1] on the
       closed star of a,
     - per edge {a,b} (a < b), a monomial unitary alpha_ab of size n,
       read as an operator from the fibre over a to the fibre over b.
   Missing edge entries mean the identity and missing vertex entries mean
   zero connections, so sparse data stays sparse.

   Validity (checked, never thrown, by check_morphism):
     - twisted cocycle: over each triangle a<b<c,
         alpha_bc . alpha_ab = e((f1 - f0)_abc) . alpha_ac
       as operator composition, where f1, f0 are the locally constant
       transition entries of target and source;
     - parallelness: over each edge, with pi the permutation of alpha_ab,
         A_b[pi(j)] = A_a[j] + (A1_ab - A0_ab)  on the closed star of ab.
   Two curvature conditions are computed as flags, not enforced:
     - trace condition: sum_j d A_a[j] = n (B1_a - B0_a),
     - fake curvature: d A_a[j] = B1_a - B0_a for every slot.

   The layer requires combinatorial gerbe data (locally constant
   transition entries); constructors reject anything else. */

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cohomology.hpp"
#include "gerbe.hpp"
#include "monomial.hpp"

namespace gerbecalc {

/* ------------------------------------------------------------------ */
/* The morphism type                                                   */
/* ------------------------------------------------------------------ */

struct TwistedBundleMorphism {
  GerbeDatum source;
  GerbeDatum target;
  int rank = 0;
  std::map<Simplex, std::vector<Cochain>> conn; /* vertex {a} -> n 1-cochains */
  std::map<Simplex, MonomialMatrix> trans;      /* edge {a,b} -> alpha_ab */
};

namespace detail {

inline void require_morphism_endpoints(const GerbeDatum& src, const GerbeDatum& tgt) {
  if (!same_complex(src.K, tgt.K))
    throw ValidationError("morphism endpoints live on different complexes");
  if (src.level != 3 || tgt.level != 3)
    throw DegreeError("morphisms connect level-3 local data");
  require_valid_datum(src, "morphism source");
  require_valid_datum(tgt, "morphism target");
  if (!is_combinatorial(src) || !is_combinatorial(tgt))
    throw ValidationError(
        "morphisms need locally constant transition entries; apply normalize first");
}

/* the locally constant transition entry of a combinatorial datum */
inline Rat transition_constant(const GerbeDatum& g, const Simplex& tri) {
  const Cochain* c = datum_component(g, g.level - 1, tri);
  if (!c || c->values.empty()) return Rat(0);
  return (*c)(c->K->by_dim[0].front());
}

}  // namespace detail

inline TwistedBundleMorphism make_morphism(GerbeDatum source, GerbeDatum target,
                                           int rank) {
  detail::require_morphism_endpoints(source, target);
  if (rank < 0) throw ValidationError("morphism rank must be nonnegative");
  TwistedBundleMorphism t;
  t.source = std::move(source);
  t.target = std::move(target);
  t.rank = rank;
  return t;
}

/* transition over an edge; identity when unset */
inline MonomialMatrix morphism_transition(const TwistedBundleMorphism& t,
                                          const Simplex& edge) {
  auto it = t.trans.find(edge);
  return it == t.trans.end() ? identity_monomial(t.rank) : it->second;
}

/* connection at a vertex; zero cochains when unset */
inline std::vector<Cochain> morphism_connection(const TwistedBundleMorphism& t,
                                                const Simplex& vertex) {
  auto it = t.conn.find(vertex);
  if (it != t.conn.end()) return it->second;
  ComplexPtr star = closed_star(t.source.K, vertex);
  return std::vector<Cochain>(static_cast<size_t>(t.rank),
                              make_cochain(star, 1, Ring::Rat));
}

inline void set_transition(TwistedBundleMorphism& t, const Simplex& edge,
                           const MonomialMatrix& m) {
  if (edge.size() != 2 || !t.source.K->has(edge))
    throw MissingSimplexError("transition key is not an edge of the complex", edge);
  if (m.size != t.rank)
    throw ValidationError("transition size must equal the morphism rank");
  if (monomial_is_identity(m)) t.trans.erase(edge);
  else t.trans[edge] = m;
}

inline void set_connection(TwistedBundleMorphism& t, const Simplex& vertex,
                           std::vector<Cochain> entries) {
  if (vertex.size() != 1 || !t.source.K->has(vertex))
    throw MissingSimplexError("connection key is not a vertex of the complex", vertex);
  if (static_cast<int>(entries.size()) != t.rank)
    throw ValidationError("connection needs one 1-cochain per rank slot");
  ComplexPtr star = closed_star(t.source.K, vertex);
  bool all_zero = true;
  for (Cochain& c : entries) {
    if (!same_complex(c.K, star))
      throw ValidationError("connection entry must live on the closed vertex star");
    if (c.degree != 1) throw DegreeError("connection entries are 1-cochains");
    if (c.ring == Ring::RatMod1)
      throw ValidationError("connection entries must be rational, not circle-valued");
    if (c.ring == Ring::Int) {
      Cochain q = make_cochain(star, 1, Ring::Rat);
      for (const auto& [s, v] : c.values) cochain_set(q, s, v);
      c = q;
    }
    if (!c.values.empty()) all_zero = false;
  }
  if (all_zero) t.conn.erase(vertex);
  else t.conn[vertex] = std::move(entries);
}

inline bool morphism_equal(const TwistedBundleMorphism& a,
                           const TwistedBundleMorphism& b) {
  if (!same_complex(a.source.K, b.source.K) || a.rank != b.rank) return false;
  if (!datum_equal(a.source, b.source) || !datum_equal(a.target, b.target))
    return false;
  for (const Simplex& e : a.source.K->by_dim.size() > 1
                              ? a.source.K->by_dim[1]
                              : std::vector<Simplex>{})
    if (!monomial_equal(morphism_transition(a, e), morphism_transition(b, e)))
      return false;
  for (const Simplex& v : a.source.K->by_dim[0]) {
    auto ca = morphism_connection(a, v), cb = morphism_connection(b, v);
    for (int j = 0; j < a.rank; ++j)
      if (!cochain_equal(ca[static_cast<size_t>(j)], cb[static_cast<size_t>(j)]))
        return false;
  }
  return true;
}

/* ------------------------------------------------------------------ */
/* Validity report                                                     */
/* ------------------------------------------------------------------ */

struct MorphismReport {
  std::vector<std::string> violations;
  bool trace_condition = true; /* sum_j dA_a[j] = n (B1 - B0)_a everywhere */
  bool fake_curvature = true;  /* dA_a[j] = (B1 - B0)_a for every slot */
  bool ok() const { return violations.empty(); }
};

inline MorphismReport check_morphism(const TwistedBundleMorphism& t) {
  MorphismReport rep;
  const ComplexPtr& K = t.source.K;

  for (const auto& [v, entries] : t.conn) {
    if (v.size() != 1 || !K->has(v))
      rep.violations.push_back("connection stored at a non-vertex " + simplex_str(v));
    if (static_cast<int>(entries.size()) != t.rank)
      rep.violations.push_back("connection at " + simplex_str(v) +
                               " does not have one entry per rank slot");
  }
  for (const auto& [e, m] : t.trans) {
    if (e.size() != 2 || !K->has(e))
      rep.violations.push_back("transition stored at a non-edge " + simplex_str(e));
    if (m.size != t.rank)
      rep.violations.push_back("transition at " + simplex_str(e) +
                               " has the wrong size");
  }
  if (!rep.violations.empty()) return rep;

  /* twisted cocycle over each triangle a<b<c */
  if (K->dim() >= 2) {
    for (const Simplex& tri : K->by_dim[2]) {
      Simplex ab{tri[0], tri[1]}, bc{tri[1], tri[2]}, ac{tri[0], tri[2]};
      MonomialMatrix lhs =
          monomial_mul(morphism_transition(t, bc), morphism_transition(t, ab));
      Rat df = detail::transition_constant(t.target, tri) -
               detail::transition_constant(t.source, tri);
      MonomialMatrix rhs = monomial_scale(morphism_transition(t, ac), df);
      if (!monomial_equal(lhs, rhs))
        rep.violations.push_back("twisted cocycle fails over " + simplex_str(tri));
    }
  }

  /* parallelness over each edge */
  if (K->dim() >= 1) {
    for (const Simplex& e : K->by_dim[1]) {
      Simplex va{e[0]}, vb{e[1]};
      auto Aa = morphism_connection(t, va);
      auto Ab = morphism_connection(t, vb);
      MonomialMatrix al = morphism_transition(t, e);
      const Cochain* a1 = datum_component(t.target, 1, e);
      const Cochain* a0 = datum_component(t.source, 1, e);
      ComplexPtr star_e = closed_star(K, e);
      bool bad = false;
      if (star_e->dim() >= 1) {
        for (const Simplex& s : star_e->by_dim[1]) {
          Rat rhs = (a1 ? (*a1)(s) : Rat(0)) - (a0 ? (*a0)(s) : Rat(0));
          for (int j = 0; j < t.rank && !bad; ++j) {
            Rat lhs = Ab[static_cast<size_t>(al.perm[static_cast<size_t>(j)])](s) -
                      Aa[static_cast<size_t>(j)](s);
            if (lhs != rhs) bad = true;
          }
          if (bad) break;
        }
      }
      if (bad)
        rep.violations.push_back("parallel transport fails over " + simplex_str(e));
    }
  }

  /* curvature flags */
  for (const Simplex& v : K->by_dim[0]) {
    auto Aa = morphism_connection(t, v);
    ComplexPtr star = closed_star(K, v);
    Cochain diff = make_cochain(star, 2, Ring::Rat);
    const Cochain* b1 = datum_component(t.target, 0, v);
    const Cochain* b0 = datum_component(t.source, 0, v);
    if (b1) diff = cochain_add(diff, *b1);
    if (b0) diff = cochain_sub(diff, *b0);
    Cochain total = make_cochain(star, 2, Ring::Rat);
    for (int j = 0; j < t.rank; ++j) {
      Cochain w = coboundary(Aa[static_cast<size_t>(j)]);
      if (!cochain_equal(w, diff)) rep.fake_curvature = false;
      total = cochain_add(total, w);
    }
    if (!cochain_equal(total, cochain_scale(diff, Rat(t.rank))))
      rep.trace_condition = false;
  }
  return rep;
}

inline void require_valid_morphism(const TwistedBundleMorphism& t, const char* what) {
  MorphismReport rep = check_morphism(t);
  if (!rep.ok())
    throw ValidationError(std::string(what) + ": " + rep.violations.front());
}

/* ------------------------------------------------------------------ */
/* Basic constructions                                                 */
/* ------------------------------------------------------------------ */

inline TwistedBundleMorphism identity_morphism(const GerbeDatum& g) {
  return make_morphism(g, g, 1);
}

inline TwistedBundleMorphism zero_morphism(const GerbeDatum& src,
                                           const GerbeDatum& tgt) {
  return make_morphism(src, tgt, 0);
}

/* adjoint bundle: reverses source and target, conjugates transitions,
   negates connections */
inline TwistedBundleMorphism adjoint_morphism(const TwistedBundleMorphism& t) {
  TwistedBundleMorphism out = make_morphism(t.target, t.source, t.rank);
  for (const auto& [e, m] : t.trans) out.trans.emplace(e, monomial_conj(m));
  for (const auto& [v, entries] : t.conn) {
    std::vector<Cochain> neg;
    neg.reserve(entries.size());
    for (const Cochain& c : entries) neg.push_back(cochain_negate(c));
    out.conn.emplace(v, std::move(neg));
  }
  return out;
}

/* composite G0 -> G1 -> G2; Kronecker transitions, Kronecker-sum connections */
inline TwistedBundleMorphism compose(const TwistedBundleMorphism& f,
                                     const TwistedBundleMorphism& e) {
  if (!same_complex(f.source.K, e.source.K))
    throw ValidationError("compose: morphisms live on different complexes");
  if (!datum_equal(f.source, e.target))
    throw ValidationError("compose: middle gerbe data disagree");
  TwistedBundleMorphism out = make_morphism(e.source, f.target, f.rank * e.rank);
  const ComplexPtr& K = out.source.K;
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      MonomialMatrix m =
          monomial_kron(morphism_transition(f, ed), morphism_transition(e, ed));
      if (!monomial_is_identity(m)) out.trans.emplace(ed, m);
    }
  for (const Simplex& v : K->by_dim[0]) {
    auto cf = morphism_connection(f, v);
    auto ce = morphism_connection(e, v);
    std::vector<Cochain> cc;
    cc.reserve(static_cast<size_t>(out.rank));
    bool all_zero = true;
    for (int i = 0; i < f.rank; ++i)
      for (int j = 0; j < e.rank; ++j) {
        Cochain s = cochain_add(cf[static_cast<size_t>(i)], ce[static_cast<size_t>(j)]);
        if (!s.values.empty()) all_zero = false;
        cc.push_back(std::move(s));
      }
    if (!all_zero) out.conn.emplace(v, std::move(cc));
  }
  return out;
}

/* external tensor product of morphisms (monoidal structure) */
inline TwistedBundleMorphism tensor_morphisms(const TwistedBundleMorphism& a,
                                              const TwistedBundleMorphism& b) {
  if (!same_complex(a.source.K, b.source.K))
    throw ValidationError("tensor: morphisms live on different complexes");
  TwistedBundleMorphism out = make_morphism(
      datum_add(a.source, b.source), datum_add(a.target, b.target), a.rank * b.rank);
  const ComplexPtr& K = out.source.K;
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      MonomialMatrix m =
          monomial_kron(morphism_transition(a, ed), morphism_transition(b, ed));
      if (!monomial_is_identity(m)) out.trans.emplace(ed, m);
    }
  for (const Simplex& v : K->by_dim[0]) {
    auto ca = morphism_connection(a, v);
    auto cb = morphism_connection(b, v);
    std::vector<Cochain> cc;
    bool all_zero = true;
    for (int i = 0; i < a.rank; ++i)
      for (int j = 0; j < b.rank; ++j) {
        Cochain s = cochain_add(ca[static_cast<size_t>(i)], cb[static_cast<size_t>(j)]);
        if (!s.values.empty()) all_zero = false;
        cc.push_back(std::move(s));
      }
    if (!all_zero) out.conn.emplace(v, std::move(cc));
  }
  return out;
}

/* tensor with a twist-free bundle over the zero datum */
inline TwistedBundleMorphism tensor_by_function(const TwistedBundleMorphism& e,
                                                const TwistedBundleMorphism& h) {
  if (!same_complex(e.source.K, h.source.K))
    throw ValidationError("tensor: morphisms live on different complexes");
  if (!datum_is_zero(h.source) || !datum_is_zero(h.target))
    throw ValidationError("tensor_by_function needs a factor over the zero datum");
  TwistedBundleMorphism out = make_morphism(e.source, e.target, e.rank * h.rank);
  const ComplexPtr& K = out.source.K;
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      MonomialMatrix m =
          monomial_kron(morphism_transition(e, ed), morphism_transition(h, ed));
      if (!monomial_is_identity(m)) out.trans.emplace(ed, m);
    }
  for (const Simplex& v : K->by_dim[0]) {
    auto ce = morphism_connection(e, v);
    auto ch = morphism_connection(h, v);
    std::vector<Cochain> cc;
    bool all_zero = true;
    for (int i = 0; i < e.rank; ++i)
      for (int j = 0; j < h.rank; ++j) {
        Cochain s = cochain_add(ce[static_cast<size_t>(i)], ch[static_cast<size_t>(j)]);
        if (!s.values.empty()) all_zero = false;
        cc.push_back(std::move(s));
      }
    if (!all_zero) out.conn.emplace(v, std::move(cc));
  }
  return out;
}

/* dual morphism between the dual data: inverse-transpose transitions
   (same permutation, negated phases), negated connections */
inline TwistedBundleMorphism riesz_dual(const TwistedBundleMorphism& t) {
  TwistedBundleMorphism out = make_morphism(dual(t.source), dual(t.target), t.rank);
  for (const auto& [e, m] : t.trans) out.trans.emplace(e, monomial_conj(m));
  for (const auto& [v, entries] : t.conn) {
    std::vector<Cochain> neg;
    for (const Cochain& c : entries) neg.push_back(cochain_negate(c));
    out.conn.emplace(v, std::move(neg));
  }
  return out;
}

/* Hom bundle of two morphisms over the same gerbe pair: the twists cancel
   and the result lives over the zero datum on both sides */
inline TwistedBundleMorphism pairing(const TwistedBundleMorphism& e,
                                     const TwistedBundleMorphism& f) {
  if (!same_complex(e.source.K, f.source.K))
    throw ValidationError("pairing: morphisms live on different complexes");
  if (!datum_equal(e.source, f.source) || !datum_equal(e.target, f.target))
    throw ValidationError("pairing needs morphisms over the same gerbe pair");
  const ComplexPtr& K = e.source.K;
  GerbeDatum triv = make_local_datum(K, 3);
  TwistedBundleMorphism out = make_morphism(triv, triv, f.rank * e.rank);
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      MonomialMatrix m = monomial_kron(morphism_transition(f, ed),
                                       monomial_conj(morphism_transition(e, ed)));
      if (!monomial_is_identity(m)) out.trans.emplace(ed, m);
    }
  for (const Simplex& v : K->by_dim[0]) {
    auto cf = morphism_connection(f, v);
    auto ce = morphism_connection(e, v);
    std::vector<Cochain> cc;
    bool all_zero = true;
    for (int i = 0; i < f.rank; ++i)
      for (int j = 0; j < e.rank; ++j) {
        Cochain s = cochain_sub(cf[static_cast<size_t>(i)], ce[static_cast<size_t>(j)]);
        if (!s.values.empty()) all_zero = false;
        cc.push_back(std::move(s));
      }
    if (!all_zero) out.conn.emplace(v, std::move(cc));
  }
  return out;
}

/* determinant line: a rank-1 morphism between the n-th powers of the data */
inline TwistedBundleMorphism determinant(const TwistedBundleMorphism& t) {
  TwistedBundleMorphism out = make_morphism(datum_scale(t.source, t.rank),
                                            datum_scale(t.target, t.rank), 1);
  const ComplexPtr& K = out.source.K;
  if (K->dim() >= 1)
    for (const Simplex& e : K->by_dim[1]) {
      Rat ph = monomial_det_phase(morphism_transition(t, e));
      if (ph != 0) out.trans.emplace(e, make_monomial({0}, {ph}));
    }
  for (const Simplex& v : K->by_dim[0]) {
    auto ca = morphism_connection(t, v);
    Cochain sum = make_cochain(closed_star(K, v), 1, Ring::Rat);
    for (const Cochain& c : ca) sum = cochain_add(sum, c);
    if (!sum.values.empty()) out.conn.emplace(v, std::vector<Cochain>{sum});
  }
  return out;
}

inline bool is_invertible(const TwistedBundleMorphism& t) { return t.rank == 1; }

/* ------------------------------------------------------------------ */
/* Intertwiners (2-morphisms)                                          */
/* ------------------------------------------------------------------ */

struct Intertwiner {
  TwistedBundleMorphism source; /* E */
  TwistedBundleMorphism target; /* F */
  std::map<Simplex, CycMat> psi; /* vertex {a} -> (F.rank x E.rank) matrix */
  bool parallel = false;
};

inline Intertwiner make_intertwiner(TwistedBundleMorphism e, TwistedBundleMorphism f,
                                    bool parallel = false) {
  if (!same_complex(e.source.K, f.source.K))
    throw ValidationError("intertwiner endpoints live on different complexes");
  if (!datum_equal(e.source, f.source) || !datum_equal(e.target, f.target))
    throw ValidationError("intertwiner endpoints need the same gerbe pair");
  Intertwiner out;
  out.source = std::move(e);
  out.target = std::move(f);
  out.parallel = parallel;
  return out;
}

inline CycMat intertwiner_matrix(const Intertwiner& i, const Simplex& vertex) {
  auto it = i.psi.find(vertex);
  if (it != i.psi.end()) return it->second;
  return cyc_mat_zero(i.target.rank, i.source.rank);
}

inline void set_intertwiner_matrix(Intertwiner& i, const Simplex& vertex, CycMat m) {
  if (vertex.size() != 1 || !i.source.source.K->has(vertex))
    throw MissingSimplexError("intertwiner key is not a vertex", vertex);
  if (static_cast<int>(m.size()) != i.target.rank)
    throw ValidationError("intertwiner matrix has the wrong number of rows");
  for (const auto& row : m)
    if (static_cast<int>(row.size()) != i.source.rank)
      throw ValidationError("intertwiner matrix has the wrong number of columns");
  if (cyc_mat_is_zero(m)) i.psi.erase(vertex);
  else i.psi[vertex] = std::move(m);
}

inline std::vector<std::string> check_intertwiner(const Intertwiner& in) {
  std::vector<std::string> bad;
  const ComplexPtr& K = in.source.source.K;
  if (K->dim() >= 1)
    for (const Simplex& e : K->by_dim[1]) {
      CycMat lhs = mat_times_monomial(intertwiner_matrix(in, Simplex{e[1]}),
                                      morphism_transition(in.source, e));
      CycMat rhs = monomial_times_mat(morphism_transition(in.target, e),
                                      intertwiner_matrix(in, Simplex{e[0]}));
      if (!cyc_mat_equal(lhs, rhs))
        bad.push_back("intertwiner transport fails over " + simplex_str(e));
    }
  if (in.parallel)
    for (const Simplex& v : K->by_dim[0]) {
      CycMat m = intertwiner_matrix(in, v);
      auto cf = morphism_connection(in.target, v);
      auto ce = morphism_connection(in.source, v);
      for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m[i].size(); ++j)
          if (!cyc_is_zero(m[i][j]) && !cochain_equal(cf[i], ce[j])) {
            std::ostringstream os;
            os << "parallel intertwiner has mismatched connections at "
               << simplex_str(v) << " in entry (" << i << "," << j << ")";
            bad.push_back(os.str());
          }
    }
  return bad;
}

inline Intertwiner identity_intertwiner(const TwistedBundleMorphism& e) {
  Intertwiner out = make_intertwiner(e, e, true);
  for (const Simplex& v : e.source.K->by_dim[0])
    out.psi.emplace(v, cyc_mat_identity(e.rank));
  return out;
}

inline Intertwiner compose_intertwiners(const Intertwiner& b, const Intertwiner& a) {
  if (!morphism_equal(b.source, a.target))
    throw ValidationError("intertwiner composition: middle morphisms disagree");
  Intertwiner out = make_intertwiner(a.source, b.target, a.parallel && b.parallel);
  for (const Simplex& v : a.source.source.K->by_dim[0]) {
    CycMat m = cyc_mat_mul(intertwiner_matrix(b, v), intertwiner_matrix(a, v));
    if (!cyc_mat_is_zero(m)) out.psi.emplace(v, std::move(m));
  }
  return out;
}

inline Intertwiner adjoint_intertwiner(const Intertwiner& i) {
  Intertwiner out = make_intertwiner(i.target, i.source, i.parallel);
  for (const auto& [v, m] : i.psi) out.psi.emplace(v, cyc_mat_conj_transpose(m));
  return out;
}

inline bool intertwiner_equal(const Intertwiner& a, const Intertwiner& b) {
  if (!morphism_equal(a.source, b.source) || !morphism_equal(a.target, b.target))
    return false;
  for (const Simplex& v : a.source.source.K->by_dim[0])
    if (!cyc_mat_equal(intertwiner_matrix(a, v), intertwiner_matrix(b, v)))
      return false;
  return true;
}

inline bool intertwiner_is_zero(const Intertwiner& a) {
  for (const auto& [v, m] : a.psi)
    if (!cyc_mat_is_zero(m)) return false;
  return true;
}

/* constant permutation intertwiner: entry (slot_map[j], j) = 1 at every
   vertex; the parallel flag records whether connections match slotwise */
inline Intertwiner permutation_intertwiner(const TwistedBundleMorphism& src,
                                           const TwistedBundleMorphism& dst,
                                           const std::vector<int>& slot_map) {
  if (static_cast<int>(slot_map.size()) != src.rank)
    throw ValidationError("slot map must assign every source slot");
  Intertwiner out = make_intertwiner(src, dst, false);
  bool par = true;
  for (const Simplex& v : src.source.K->by_dim[0]) {
    CycMat m = cyc_mat_zero(dst.rank, src.rank);
    auto cd = morphism_connection(dst, v);
    auto cs = morphism_connection(src, v);
    for (int j = 0; j < src.rank; ++j) {
      int i = slot_map[static_cast<size_t>(j)];
      if (i < 0 || i >= dst.rank)
        throw ValidationError("slot map leaves the target rank range");
      m[static_cast<size_t>(i)][static_cast<size_t>(j)] = cyc_rat(Rat(1));
      if (!cochain_equal(cd[static_cast<size_t>(i)], cs[static_cast<size_t>(j)]))
        par = false;
    }
    out.psi.emplace(v, std::move(m));
  }
  out.parallel = par;
  return out;
}

/* ------------------------------------------------------------------ */
/* Direct sums                                                         */
/* ------------------------------------------------------------------ */

struct MorphismSum {
  TwistedBundleMorphism sum;
  Intertwiner inject_left, inject_right;   /* E -> E(+)E', E' -> E(+)E' */
  Intertwiner project_left, project_right; /* E(+)E' -> E, E(+)E' -> E' */
};

inline MorphismSum direct_sum(const TwistedBundleMorphism& e,
                              const TwistedBundleMorphism& ep) {
  if (!same_complex(e.source.K, ep.source.K))
    throw ValidationError("direct sum: morphisms live on different complexes");
  if (!datum_equal(e.source, ep.source) || !datum_equal(e.target, ep.target))
    throw ValidationError("direct sum needs morphisms over the same gerbe pair");
  const ComplexPtr& K = e.source.K;
  MorphismSum out{make_morphism(e.source, e.target, e.rank + ep.rank),
                  Intertwiner{}, Intertwiner{}, Intertwiner{}, Intertwiner{}};
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      MonomialMatrix m = monomial_direct_sum(morphism_transition(e, ed),
                                             morphism_transition(ep, ed));
      if (!monomial_is_identity(m)) out.sum.trans.emplace(ed, m);
    }
  for (const Simplex& v : K->by_dim[0]) {
    auto ca = morphism_connection(e, v);
    auto cb = morphism_connection(ep, v);
    bool all_zero = true;
    for (const Cochain& c : ca)
      if (!c.values.empty()) all_zero = false;
    for (const Cochain& c : cb)
      if (!c.values.empty()) all_zero = false;
    if (all_zero) continue;
    std::vector<Cochain> cc = ca;
    cc.insert(cc.end(), cb.begin(), cb.end());
    out.sum.conn.emplace(v, std::move(cc));
  }
  std::vector<int> left(static_cast<size_t>(e.rank)), right(static_cast<size_t>(ep.rank));
  for (int j = 0; j < e.rank; ++j) left[static_cast<size_t>(j)] = j;
  for (int j = 0; j < ep.rank; ++j) right[static_cast<size_t>(j)] = e.rank + j;
  out.inject_left = permutation_intertwiner(e, out.sum, left);
  out.inject_right = permutation_intertwiner(ep, out.sum, right);
  out.project_left = adjoint_intertwiner(out.inject_left);
  out.project_right = adjoint_intertwiner(out.inject_right);
  return out;
}

/* ------------------------------------------------------------------ */
/* Intertwiner spaces                                                  */
/* ------------------------------------------------------------------ */

struct IntertwinerSpace {
  long long dimension = 0;
  std::vector<Intertwiner> basis;
};

/* Exact dimension and basis of the space of intertwiners E -> F, i.e. of
   families psi_a with psi_b alpha^E_ab = alpha^F_ab psi_a.  Entries are
   transported along edges with pure phases, so the solution space splits
   into entry orbits; an orbit survives iff every closed loop in it carries
   total phase zero.  With parallel_only, each orbit entry must also match
   connections slotwise. */
inline IntertwinerSpace intertwiner_space(const TwistedBundleMorphism& e,
                                          const TwistedBundleMorphism& f,
                                          bool parallel_only) {
  if (!same_complex(e.source.K, f.source.K))
    throw ValidationError("intertwiner space: morphisms live on different complexes");
  if (!datum_equal(e.source, f.source) || !datum_equal(e.target, f.target))
    throw ValidationError("intertwiner space needs morphisms over the same gerbe pair");
  const ComplexPtr& K = e.source.K;
  const int nE = e.rank, nF = f.rank;
  const int nv = K->count(0);
  const long long cell = static_cast<long long>(nE) * nF;
  const long long total = cell * nv;
  IntertwinerSpace out;
  if (total == 0) return out;

  /* per-vertex connections, cached */
  std::vector<std::vector<Cochain>> connE(static_cast<size_t>(nv)),
      connF(static_cast<size_t>(nv));
  for (int a = 0; a < nv; ++a) {
    connE[static_cast<size_t>(a)] = morphism_connection(e, K->by_dim[0][static_cast<size_t>(a)]);
    connF[static_cast<size_t>(a)] = morphism_connection(f, K->by_dim[0][static_cast<size_t>(a)]);
  }

  /* adjacency by vertex, with transitions */
  struct Hop {
    int to;
    MonomialMatrix aE, aF; /* operator fibre(from) -> fibre(to) */
  };
  std::vector<std::vector<Hop>> hops(static_cast<size_t>(nv));
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      int a = K->index_of(Simplex{ed[0]});
      int b = K->index_of(Simplex{ed[1]});
      MonomialMatrix aE = morphism_transition(e, ed);
      MonomialMatrix aF = morphism_transition(f, ed);
      hops[static_cast<size_t>(a)].push_back(Hop{b, aE, aF});
      hops[static_cast<size_t>(b)].push_back(
          Hop{a, monomial_inverse(aE), monomial_inverse(aF)});
    }

  auto node_id = [&](int a, int i, int j) {
    return (static_cast<long long>(a) * nF + i) * nE + j;
  };
  std::vector<char> state(static_cast<size_t>(total), 0); /* 0 new, 1 visited */
  std::vector<Rat> pot(static_cast<size_t>(total), Rat(0));

  for (long long root = 0; root < total; ++root) {
    if (state[static_cast<size_t>(root)]) continue;
    std::vector<long long> members;
    bool alive = true;
    std::deque<long long> queue{root};
    state[static_cast<size_t>(root)] = 1;
    pot[static_cast<size_t>(root)] = Rat(0);
    while (!queue.empty()) {
      long long cur = queue.front();
      queue.pop_front();
      members.push_back(cur);
      int a = static_cast<int>(cur / cell);
      int i = static_cast<int>((cur % cell) / nE);
      int j = static_cast<int>(cur % nE);
      for (const Hop& h : hops[static_cast<size_t>(a)]) {
        int i2 = h.aF.perm[static_cast<size_t>(i)];
        int j2 = h.aE.perm[static_cast<size_t>(j)];
        Rat delta = mod1(h.aF.phase[static_cast<size_t>(i)] -
                         h.aE.phase[static_cast<size_t>(j)]);
        long long nxt = node_id(h.to, i2, j2);
        Rat want = mod1(pot[static_cast<size_t>(cur)] + delta);
        if (!state[static_cast<size_t>(nxt)]) {
          state[static_cast<size_t>(nxt)] = 1;
          pot[static_cast<size_t>(nxt)] = want;
          queue.push_back(nxt);
        } else if (pot[static_cast<size_t>(nxt)] != want) {
          alive = false;
        }
      }
    }
    if (!alive) continue;
    bool par_ok = true;
    for (long long n : members) {
      int a = static_cast<int>(n / cell);
      int i = static_cast<int>((n % cell) / nE);
      int j = static_cast<int>(n % nE);
      if (!cochain_equal(connF[static_cast<size_t>(a)][static_cast<size_t>(i)],
                         connE[static_cast<size_t>(a)][static_cast<size_t>(j)])) {
        par_ok = false;
        break;
      }
    }
    if (parallel_only && !par_ok) continue;
    Intertwiner basis_elem = make_intertwiner(e, f, par_ok);
    std::map<Simplex, CycMat> mats;
    for (long long n : members) {
      int a = static_cast<int>(n / cell);
      int i = static_cast<int>((n % cell) / nE);
      int j = static_cast<int>(n % nE);
      const Simplex& v = K->by_dim[0][static_cast<size_t>(a)];
      auto it = mats.find(v);
      if (it == mats.end()) it = mats.emplace(v, cyc_mat_zero(nF, nE)).first;
      it->second[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          cyc_phase(pot[static_cast<size_t>(n)]);
    }
    basis_elem.psi = std::move(mats);
    out.basis.push_back(std::move(basis_elem));
  }
  out.dimension = static_cast<long long>(out.basis.size());
  return out;
}

/* ------------------------------------------------------------------ */
/* Kernels of parallel monomial-supported intertwiners                 */
/* ------------------------------------------------------------------ */

struct KernelResult {
  TwistedBundleMorphism sub;           /* the kernel sub-bundle of E */
  Intertwiner inclusion;               /* kernel -> E */
  Intertwiner psi;                     /* the intertwiner the kernel belongs to */
  std::map<Simplex, std::vector<int>> coords; /* vertex -> kept slots of E */
};

inline KernelResult kernel_of_intertwiner(const Intertwiner& in) {
  if (!in.parallel)
    throw ValidationError("kernel is defined for parallel intertwiners");
  {
    std::vector<std::string> bad = check_intertwiner(in);
    if (!bad.empty())
      throw ValidationError("kernel needs a valid intertwiner: " + bad.front());
  }
  const TwistedBundleMorphism& e = in.source;
  const ComplexPtr& K = e.source.K;

  KernelResult out;
  out.psi = in;
  std::optional<size_t> kernel_rank;
  for (const Simplex& v : K->by_dim[0]) {
    CycMat m = intertwiner_matrix(in, v);
    /* monomial support: at most one nonzero entry per row and per column */
    std::vector<int> row_used(static_cast<size_t>(in.target.rank), 0);
    std::vector<int> col_used(static_cast<size_t>(e.rank), 0);
    for (size_t i = 0; i < m.size(); ++i)
      for (size_t j = 0; j < m[i].size(); ++j)
        if (!cyc_is_zero(m[i][j])) {
          if (++row_used[i] > 1 || ++col_used[j] > 1)
            throw UnsupportedError(
                "kernel supported only for monomial-shaped intertwiners");
        }
    std::vector<int> kept;
    for (int j = 0; j < e.rank; ++j)
      if (!col_used[static_cast<size_t>(j)]) kept.push_back(j);
    if (kernel_rank && *kernel_rank != kept.size())
      throw UnsupportedError("kernel rank varies across vertices");
    kernel_rank = kept.size();
    out.coords.emplace(v, std::move(kept));
  }
  int k = static_cast<int>(kernel_rank.value_or(0));

  out.sub = make_morphism(e.source, e.target, k);
  for (const Simplex& v : K->by_dim[0]) {
    const std::vector<int>& kept = out.coords.at(v);
    auto ce = morphism_connection(e, v);
    std::vector<Cochain> cc;
    bool all_zero = true;
    for (int j : kept) {
      if (!ce[static_cast<size_t>(j)].values.empty()) all_zero = false;
      cc.push_back(ce[static_cast<size_t>(j)]);
    }
    if (!all_zero) out.sub.conn.emplace(v, std::move(cc));
  }
  if (K->dim() >= 1)
    for (const Simplex& ed : K->by_dim[1]) {
      const std::vector<int>& ka = out.coords.at(Simplex{ed[0]});
      const std::vector<int>& kb = out.coords.at(Simplex{ed[1]});
      MonomialMatrix al = morphism_transition(e, ed);
      std::vector<int> perm(static_cast<size_t>(k));
      std::vector<Rat> phase(static_cast<size_t>(k));
      for (int t = 0; t < k; ++t) {
        int j = ka[static_cast<size_t>(t)];
        int img = al.perm[static_cast<size_t>(j)];
        auto pos = std::lower_bound(kb.begin(), kb.end(), img);
        if (pos == kb.end() || *pos != img)
          throw Error("internal: kernel coordinates do not propagate along " +
                      simplex_str(ed));
        perm[static_cast<size_t>(t)] = static_cast<int>(pos - kb.begin());
        phase[static_cast<size_t>(t)] = al.phase[static_cast<size_t>(j)];
      }
      MonomialMatrix sm = make_monomial(perm, phase);
      if (!monomial_is_identity(sm)) out.sub.trans.emplace(ed, sm);
    }

  out.inclusion = make_intertwiner(out.sub, e, true);
  for (const Simplex& v : K->by_dim[0]) {
    const std::vector<int>& kept = out.coords.at(v);
    if (kept.empty()) continue;
    CycMat m = cyc_mat_zero(e.rank, k);
    for (int t = 0; t < k; ++t)
      m[static_cast<size_t>(kept[static_cast<size_t>(t)])][static_cast<size_t>(t)] =
          cyc_rat(Rat(1));
    out.inclusion.psi.emplace(v, std::move(m));
  }
  return out;
}

/* universal property: a map phi : X -> E with psi.phi = 0 factors through
   the kernel inclusion */
inline Intertwiner factor_through_kernel(const KernelResult& ker,
                                         const Intertwiner& phi) {
  if (!morphism_equal(phi.target, ker.psi.source))
    throw ValidationError("factor_through_kernel: map does not land in the bundle");
  if (!intertwiner_is_zero(compose_intertwiners(ker.psi, phi)))
    throw ValidationError("factor_through_kernel: psi . phi is not zero");
  Intertwiner out = make_intertwiner(phi.source, ker.sub, phi.parallel);
  const ComplexPtr& K = phi.source.source.K;
  for (const Simplex& v : K->by_dim[0]) {
    const std::vector<int>& kept = ker.coords.at(v);
    CycMat m = intertwiner_matrix(phi, v);
    CycMat r = cyc_mat_zero(ker.sub.rank, phi.source.rank);
    for (size_t t = 0; t < kept.size(); ++t)
      r[t] = m[static_cast<size_t>(kept[t])];
    if (!cyc_mat_is_zero(r)) out.psi.emplace(v, std::move(r));
  }
  return out;
}

/* ------------------------------------------------------------------ */
/* Clock-shift sections                                                */
/* ------------------------------------------------------------------ */

/* Rank-p section of a gerbe whose class has order dividing p, built from
   the Heisenberg pair: transitions e(x_ab) C^{c_ab} S^{s_ab} with C the
   clock and S the shift matrix of size p.  Writing the twisted cocycle
   out, (c, s) must be mod-p cocycles and x must solve
       (delta x)_abc  =  f_abc + c_ab s_bc / p   (mod 1)
   over the triangles, with f the target's transition constants.  The
   solvability of x depends only on the mod-p classes of (c, s), so it is
   enough to scan class representatives; `variant` selects among the
   feasible pairs in enumeration order. */
inline TwistedBundleMorphism clock_shift_section(const GerbeDatum& g, int p,
                                                 int variant = 0) {
  if (p < 1) throw ValidationError("clock_shift_section needs a positive rank");
  require_valid_datum(g, "clock_shift_section");
  if (g.level != 3) throw DegreeError("clock_shift_section expects level-3 data");
  const ComplexPtr& K = g.K;

  /* class obstruction first: the order must be finite and divide p */
  DDClassReport dd = dd_class(g);
  Int order = dd.coords.order();
  if (order == 0 || Int(p) % order != 0)
    throw ObstructionError("no rank-" + std::to_string(p) +
                               " section: the class has order " +
                               (order == 0 ? std::string("infinity")
                                           : order.str()),
                           dd.coords.labelled());
  if (!is_combinatorial(g))
    throw ValidationError(
        "clock_shift_section needs locally constant transitions; apply normalize first");

  const int nIne = K->dim() >= 1 ? K->count(1) : 0;
  const int nTri = K->dim() >= 2 ? K->count(2) : 0;

  /* mod-p 1-cocycle class representatives */
  std::vector<IVec> reps;
  {
    std::vector<IVec> basis;
    if (nTri == 0) {
      for (int i = 0; i < nIne; ++i) {
        IVec e(static_cast<size_t>(nIne), Int(0));
        e[static_cast<size_t>(i)] = 1;
        basis.push_back(std::move(e));
      }
    } else {
      IMat m(nTri, nIne + nTri);
      IMat d1 = coboundary_matrix(*K, 1);
      for (int r = 0; r < nTri; ++r) {
        for (int c = 0; c < nIne; ++c) m.at(r, c) = d1.at(r, c);
        m.at(r, nIne + r) = Int(p);
      }
      for (const IVec& kv : kernel_basis(smith_normal_form(m)))
        basis.push_back(IVec(kv.begin(), kv.begin() + nIne));
    }
    std::vector<IVec> relations;
    if (nIne > 0) {
      IMat d0 = coboundary_matrix(*K, 0);
      for (int c = 0; c < d0.cols; ++c) {
        IVec col(static_cast<size_t>(nIne));
        for (int r = 0; r < nIne; ++r) col[static_cast<size_t>(r)] = d0.at(r, c);
        relations.push_back(std::move(col));
      }
      for (int i = 0; i < nIne; ++i) {
        IVec e(static_cast<size_t>(nIne), Int(0));
        e[static_cast<size_t>(i)] = Int(p);
        relations.push_back(std::move(e));
      }
    }
    reps = enumerate_quotient(basis, relations, 4096);
  }
  auto rep_cochain = [&](const IVec& r) {
    Cochain c = make_cochain(K, 1, Ring::Int);
    for (int i = 0; i < static_cast<int>(r.size()) && i < nIne; ++i)
      if (r[static_cast<size_t>(i)] != 0)
        cochain_set(c, K->by_dim[1][static_cast<size_t>(i)], Rat(r[static_cast<size_t>(i)]));
    return c;
  };

  /* transition constants of the target */
  QVec fvec(static_cast<size_t>(nTri), Rat(0));
  for (int tix = 0; tix < nTri; ++tix)
    fvec[static_cast<size_t>(tix)] =
        detail::transition_constant(g, K->by_dim[2][static_cast<size_t>(tix)]);

  /* solver for delta x + z = rhs with x rational on edges, z integral */
  std::optional<SumLatticeSolver> scalar_solver;
  if (nTri > 0) {
    IMat n(nTri, nTri);
    for (int i = 0; i < nTri; ++i) n.at(i, i) = 1;
    QMat d(nTri, nIne);
    IMat d1 = coboundary_matrix(*K, 1);
    for (int r = 0; r < nTri; ++r)
      for (int c = 0; c < nIne; ++c) d.at(r, c) = Rat(d1.at(r, c));
    scalar_solver.emplace(std::move(n), std::move(d));
  }

  int feasible = 0;
  std::optional<IVec> pick_c, pick_s;
  std::optional<QVec> pick_x;
  for (const IVec& rc : reps) {
    for (const IVec& rs : reps) {
      QVec x(static_cast<size_t>(nIne), Rat(0));
      if (nTri > 0) {
        Cochain cupterm = cup(rep_cochain(rc), rep_cochain(rs));
        QVec rhs = fvec;
        for (int tix = 0; tix < nTri; ++tix)
          rhs[static_cast<size_t>(tix)] +=
              cupterm(K->by_dim[2][static_cast<size_t>(tix)]) / Rat(p);
        auto sol = scalar_solver->solve(rhs);
        if (!sol) continue;
        x = sol->second;
      }
      if (feasible++ == variant) {
        pick_c = rc;
        pick_s = rs;
        pick_x = x;
      }
      if (pick_x) break;
    }
    if (pick_x) break;
  }
  if (!pick_x) {
    if (feasible == 0)
      throw ObstructionError(
          "no clock-shift reduction found for rank " + std::to_string(p),
          dd.coords.labelled());
    throw ValidationError("clock-shift variant out of range: only " +
                          std::to_string(feasible) + " reductions available");
  }

  TwistedBundleMorphism out = make_morphism(make_local_datum(K, 3), g, p);
  auto exp_at = [&](const std::optional<IVec>& v, int i) {
    if (!v || i >= static_cast<int>(v->size())) return 0;
    Int m = (*v)[static_cast<size_t>(i)] % p;
    if (m < 0) m += p;
    return static_cast<int>(m.convert_to<long long>());
  };
  for (int eix = 0; eix < nIne; ++eix) {
    int cexp = exp_at(pick_c, eix);
    int sexp = exp_at(pick_s, eix);
    Rat x = (*pick_x)[static_cast<size_t>(eix)];
    std::vector<int> perm(static_cast<size_t>(p));
    std::vector<Rat> phase(static_cast<size_t>(p));
    for (int j = 0; j < p; ++j) {
      int img = (j + sexp) % p;
      perm[static_cast<size_t>(j)] = img;
      phase[static_cast<size_t>(j)] = mod1(x + Rat(Int(cexp) * img, Int(p)));
    }
    MonomialMatrix m = make_monomial(std::move(perm), std::move(phase));
    if (!monomial_is_identity(m))
      out.trans.emplace(K->by_dim[1][static_cast<size_t>(eix)], m);
  }

  /* solve the parallelness equations for the diagonal connections */
  {
    std::vector<int> offset(K->by_dim[0].size() + 1, 0);
    std::vector<ComplexPtr> stars(K->by_dim[0].size());
    for (size_t a = 0; a < K->by_dim[0].size(); ++a) {
      stars[a] = closed_star(K, K->by_dim[0][a]);
      int ec = stars[a]->dim() >= 1 ? stars[a]->count(1) : 0;
      offset[a + 1] = offset[a] + p * ec;
    }
    SparseSystemQ sys(offset.back());
    if (K->dim() >= 1)
      for (const Simplex& ed : K->by_dim[1]) {
        int a = K->index_of(Simplex{ed[0]});
        int b = K->index_of(Simplex{ed[1]});
        MonomialMatrix al = morphism_transition(out, ed);
        const Cochain* ag = datum_component(g, 1, ed);
        ComplexPtr star_e = closed_star(K, ed);
        if (star_e->dim() < 1) continue;
        for (const Simplex& s : star_e->by_dim[1]) {
          int ia = stars[static_cast<size_t>(a)]->index_of(s);
          int ib = stars[static_cast<size_t>(b)]->index_of(s);
          Rat rhs = ag ? (*ag)(s) : Rat(0);
          for (int j = 0; j < p; ++j) {
            int jb = al.perm[static_cast<size_t>(j)];
            std::map<int, Rat> row;
            row[offset[static_cast<size_t>(b)] +
                jb * stars[static_cast<size_t>(b)]->count(1) + ib] += Rat(1);
            row[offset[static_cast<size_t>(a)] +
                j * stars[static_cast<size_t>(a)]->count(1) + ia] += Rat(-1);
            sys.add_row(row, rhs);
          }
        }
      }
    auto sol = sys.solve();
    if (!sol)
      throw Error("internal: clock-shift connection system is inconsistent");
    for (size_t a = 0; a < K->by_dim[0].size(); ++a) {
      int ec = stars[a]->dim() >= 1 ? stars[a]->count(1) : 0;
      std::vector<Cochain> cc;
      bool all_zero = true;
      for (int j = 0; j < p; ++j) {
        Cochain c = make_cochain(stars[a], 1, Ring::Rat);
        for (int k = 0; k < ec; ++k) {
          Rat v = (*sol)[static_cast<size_t>(offset[a] + j * ec + k)];
          if (v != 0) cochain_set(c, stars[a]->by_dim[1][static_cast<size_t>(k)], v);
        }
        if (!c.values.empty()) all_zero = false;
        cc.push_back(std::move(c));
      }
      if (!all_zero) out.conn.emplace(K->by_dim[0][a], std::move(cc));
    }
  }
  return out;
}

}  // namespace gerbecalc
