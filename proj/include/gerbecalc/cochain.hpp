#pragma once
/* Cochains and chains with exact coefficients.  A cochain is tagged with
   its coefficient ring: Int (integers), Rat (rationals), or RatMod1
   (rationals mod 1, the circle group, canonical representative in [0,1)).
   Values are sparse; absent simplices carry zero and stored zeros are
   dropped, so equality of the value maps is equality of cochains. */

#include <map>
#include <string>
#include <vector>

#include "simplicial.hpp"

namespace gerbecalc {

enum class Ring { Int, Rat, RatMod1 };

inline std::string ring_name(Ring r) {
  switch (r) {
    case Ring::Int: return "Z";
    case Ring::Rat: return "Q";
    default: return "QmodZ";
  }
}

struct Cochain {
  ComplexPtr K;
  int degree = 0;
  Ring ring = Ring::Rat;
  std::map<Simplex, Rat> values;

  bool is_zero() const { return values.empty(); }
  Rat operator()(const Simplex& s) const {
    auto it = values.find(s);
    return it == values.end() ? Rat(0) : it->second;
  }
};

struct Chain {
  ComplexPtr K;
  int degree = 0;
  std::map<Simplex, Rat> coeffs;

  Rat operator()(const Simplex& s) const {
    auto it = coeffs.find(s);
    return it == coeffs.end() ? Rat(0) : it->second;
  }
};

inline Rat canonical_value(Ring ring, const Rat& v, const char* what) {
  switch (ring) {
    case Ring::Int:
      if (!is_integer(v))
        throw ValidationError(std::string(what) +
                              ": non-integer value in an integer cochain");
      return v;
    case Ring::Rat:
      return v;
    default:
      return mod1(v);
  }
}

inline Cochain make_cochain(ComplexPtr K, int degree, Ring ring) {
  if (degree < 0) throw DegreeError("cochain degree must be >= 0");
  Cochain c;
  c.K = std::move(K);
  c.degree = degree;
  c.ring = ring;
  return c;
}

inline void cochain_set(Cochain& c, const Simplex& s, const Rat& v) {
  if ((int)s.size() - 1 != c.degree)
    throw DegreeError("value assigned to simplex of wrong dimension " +
                      simplex_str(s));
  if (!c.K->has(s))
    throw MissingSimplexError("cochain value on missing simplex", s);
  Rat cv = canonical_value(c.ring, v, "cochain_set");
  if (cv == 0)
    c.values.erase(s);
  else
    c.values[s] = cv;
}

inline void cochain_accumulate(Cochain& c, const Simplex& s, const Rat& v) {
  auto it = c.values.find(s);
  Rat nv = canonical_value(c.ring, (it == c.values.end() ? v : it->second + v),
                           "cochain_accumulate");
  if (nv == 0) {
    if (it != c.values.end()) c.values.erase(it);
  } else {
    c.values[s] = nv;
  }
}

inline Ring combined_ring(Ring a, Ring b) {
  if (a == Ring::RatMod1 || b == Ring::RatMod1) return Ring::RatMod1;
  if (a == Ring::Rat || b == Ring::Rat) return Ring::Rat;
  return Ring::Int;
}

inline void require_compatible(const Cochain& a, const Cochain& b,
                               const char* op) {
  if (!same_complex(a.K, b.K))
    throw ValidationError(std::string(op) + ": cochains on different complexes");
  if (a.degree != b.degree)
    throw DegreeError(std::string(op) + ": cochain degrees differ");
}

inline Cochain cochain_add(const Cochain& a, const Cochain& b) {
  require_compatible(a, b, "add");
  Cochain out = make_cochain(a.K, a.degree, combined_ring(a.ring, b.ring));
  for (const auto& [s, v] : a.values) cochain_accumulate(out, s, v);
  for (const auto& [s, v] : b.values) cochain_accumulate(out, s, v);
  return out;
}

inline Cochain cochain_negate(const Cochain& a) {
  Cochain out = make_cochain(a.K, a.degree, a.ring);
  for (const auto& [s, v] : a.values) cochain_accumulate(out, s, -v);
  return out;
}

inline Cochain cochain_sub(const Cochain& a, const Cochain& b) {
  return cochain_add(a, cochain_negate(b));
}

/* Scaling: integers act on every ring; a fractional scalar is rejected on
   circle-valued cochains, where it is not well defined. */
inline Cochain cochain_scale(const Cochain& a, const Rat& r) {
  Ring ring = a.ring;
  if (!is_integer(r)) {
    if (ring == Ring::RatMod1)
      throw ValidationError("non-integer scaling of a circle-valued cochain");
    ring = Ring::Rat;
  }
  Cochain out = make_cochain(a.K, a.degree, ring);
  for (const auto& [s, v] : a.values) cochain_accumulate(out, s, v * r);
  return out;
}

inline bool cochain_equal(const Cochain& a, const Cochain& b) {
  return same_complex(a.K, b.K) && a.degree == b.degree &&
         a.ring == b.ring && a.values == b.values;
}

/* Simplicial coboundary; the coefficient ring is preserved. */
inline Cochain coboundary(const Cochain& c) {
  Cochain out = make_cochain(c.K, c.degree + 1, c.ring);
  if (c.values.empty()) return out;
  auto tab = coface_table(*c.K, c.degree);
  for (const auto& [s, v] : c.values) {
    int idx = c.K->index_of(s);
    for (const auto& [coface, sign] : (*tab)[idx])
      cochain_accumulate(out, c.K->simplex(c.degree + 1, coface),
                         sign > 0 ? v : -v);
  }
  return out;
}

inline Chain make_chain(ComplexPtr K, int degree) {
  if (degree < 0) throw DegreeError("chain degree must be >= 0");
  Chain z;
  z.K = std::move(K);
  z.degree = degree;
  return z;
}

inline void chain_accumulate(Chain& z, const Simplex& s, const Rat& v) {
  if ((int)s.size() - 1 != z.degree)
    throw DegreeError("chain coefficient on simplex of wrong dimension " +
                      simplex_str(s));
  if (!z.K->has(s))
    throw MissingSimplexError("chain coefficient on missing simplex", s);
  Rat nv = z(s) + v;
  if (nv == 0)
    z.coeffs.erase(s);
  else
    z.coeffs[s] = nv;
}

inline Chain chain_boundary(const Chain& z) {
  Chain out = make_chain(z.K, z.degree > 0 ? z.degree - 1 : 0);
  if (z.degree == 0) return out;  // boundary of 0-chains is zero
  for (const auto& [s, v] : z.coeffs)
    for (int i = 0; i < (int)s.size(); ++i)
      chain_accumulate(out, face_of(s, i), (i % 2 == 0) ? v : -v);
  return out;
}

inline Chain chain_scale(const Chain& z, const Rat& r) {
  Chain out = make_chain(z.K, z.degree);
  for (const auto& [s, v] : z.coeffs) chain_accumulate(out, s, v * r);
  return out;
}

inline Chain chain_add(const Chain& a, const Chain& b) {
  if (!same_complex(a.K, b.K) || a.degree != b.degree)
    throw ValidationError("chain addition mismatch");
  Chain out = a;
  for (const auto& [s, v] : b.coeffs) chain_accumulate(out, s, v);
  return out;
}

/* Kronecker pairing <c, z>; circle-valued cochains pair into [0,1). */
inline Rat evaluate(const Cochain& c, const Chain& z) {
  if (!same_complex(c.K, z.K))
    throw ValidationError("evaluate: cochain and chain on different complexes");
  if (c.degree != z.degree)
    throw DegreeError("evaluate: degree mismatch");
  Rat acc(0);
  for (const auto& [s, v] : z.coeffs) acc += c(s) * v;
  return c.ring == Ring::RatMod1 ? mod1(acc) : acc;
}

/* Alexander–Whitney cup product on the vertex-ordered complex:
   (a ⌣ b)(v_0..v_{p+q}) = a(v_0..v_p) * b(v_p..v_{p+q}).
   Circle-valued factors are rejected (no ring multiplication on Q/Z). */
inline Cochain cup(const Cochain& a, const Cochain& b) {
  if (!same_complex(a.K, b.K))
    throw ValidationError("cup: cochains on different complexes");
  if (a.ring == Ring::RatMod1 || b.ring == Ring::RatMod1)
    throw ValidationError("cup: circle-valued cochains cannot be multiplied");
  const int p = a.degree, q = b.degree;
  Cochain out = make_cochain(a.K, p + q, combined_ring(a.ring, b.ring));
  if (p + q > a.K->dim() || a.values.empty() || b.values.empty()) return out;
  for (const auto& sigma : a.K->by_dim[p + q]) {
    Simplex front(sigma.begin(), sigma.begin() + p + 1);
    Rat va = a(front);
    if (va == 0) continue;
    Simplex back(sigma.begin() + p, sigma.end());
    Rat vb = b(back);
    if (vb == 0) continue;
    cochain_accumulate(out, sigma, va * vb);
  }
  return out;
}

/* --- simplicial maps ----------------------------------------------- */

struct SimplicialMap {
  ComplexPtr src, dst;
  std::map<int, int> vertex_map;
};

inline SimplicialMap make_simplicial_map(ComplexPtr src, ComplexPtr dst,
                                         std::map<int, int> vm) {
  SimplicialMap f{std::move(src), std::move(dst), std::move(vm)};
  for (int v : f.src->vertex_ids)
    if (!f.vertex_map.count(v))
      throw ValidationError("simplicial map misses vertex " +
                            std::to_string(v));
  for (int q = 0; q <= f.src->dim(); ++q)
    for (const auto& s : f.src->by_dim[q]) {
      Simplex img;
      for (int v : s) img.push_back(f.vertex_map.at(v));
      std::sort(img.begin(), img.end());
      img.erase(std::unique(img.begin(), img.end()), img.end());
      if (!f.dst->has(img))
        throw ValidationError("image of " + simplex_str(s) +
                              " is not a simplex of the target");
    }
  return f;
}

/* Signed image of an ordered simplex: zero (nullopt) if vertices collide. */
inline std::optional<std::pair<Simplex, int>> map_simplex(
    const SimplicialMap& f, const Simplex& s) {
  Simplex img;
  for (int v : s) img.push_back(f.vertex_map.at(v));
  SortedTuple st = sort_with_sign(std::move(img));
  if (!st.ok) return std::nullopt;
  return std::make_pair(st.simplex, st.sign);
}

inline Chain pushforward(const SimplicialMap& f, const Chain& z) {
  if (!same_complex(z.K, f.src))
    throw ValidationError("pushforward: chain not on the map's source");
  Chain out = make_chain(f.dst, z.degree);
  for (const auto& [s, v] : z.coeffs)
    if (auto im = map_simplex(f, s))
      chain_accumulate(out, im->first, im->second > 0 ? v : -v);
  return out;
}

inline Cochain pullback(const SimplicialMap& f, const Cochain& c) {
  if (!same_complex(c.K, f.dst))
    throw ValidationError("pullback: cochain not on the map's target");
  Cochain out = make_cochain(f.src, c.degree, c.ring);
  if (c.degree > f.src->dim()) return out;
  for (const auto& s : f.src->by_dim[c.degree])
    if (auto im = map_simplex(f, s)) {
      Rat v = c(im->first);
      if (v != 0) cochain_accumulate(out, s, im->second > 0 ? v : -v);
    }
  return out;
}

/* Antisymmetrized evaluation at an arbitrary vertex tuple: zero on repeated
   vertices, otherwise the signed value on the sorted tuple. */
inline Rat eval_ordered(const Cochain& c, Simplex tuple) {
  SortedTuple st = sort_with_sign(std::move(tuple));
  if (!st.ok) return Rat(0);
  Rat v = c(st.simplex);
  return st.sign > 0 ? v : -v;
}

/* Restriction of a cochain to a subcomplex (values outside are dropped). */
inline Cochain restrict_to(const Cochain& c, const ComplexPtr& sub) {
  Cochain out = make_cochain(sub, c.degree, c.ring);
  for (const auto& [s, v] : c.values)
    if (sub->has(s)) out.values.emplace(s, v);
  return out;
}

/* View a star cochain as a cochain on the ambient complex. */
inline Cochain promote_to(const Cochain& c, const ComplexPtr& ambient) {
  Cochain out = make_cochain(ambient, c.degree, c.ring);
  for (const auto& [s, v] : c.values) {
    if (!ambient->has(s))
      throw MissingSimplexError("promote_to: simplex missing in ambient", s);
    out.values.emplace(s, v);
  }
  return out;
}

/* --- cone contraction ------------------------------------------------ */

inline void require_cone(const SimplicialComplex& K, int apex) {
  if (K.index_of(Simplex{apex}) < 0)
    throw ValidationError("cone apex is not a vertex of the complex");
  for (int q = 0; q <= K.dim(); ++q)
    for (const auto& s : K.by_dim[q])
      if (!K.has(sorted_union(s, Simplex{apex})))
        throw ValidationError("complex is not a cone over vertex " +
                              std::to_string(apex) + ": " + simplex_str(s));
}

/* Contraction of a closed q-cochain (q >= 1) on a cone to a primitive of
   degree q-1:  coboundary(cone_contract(z)) == z. */
inline Cochain cone_contract(const Cochain& z, int apex) {
  if (z.degree < 1)
    throw DegreeError("cone_contract needs a cochain of degree >= 1");
  require_cone(*z.K, apex);
  Cochain dz = coboundary(z);
  if (!dz.values.empty())
    throw NotClosedError("cone_contract: cochain is not closed",
                         dz.values.begin()->first);
  Cochain out = make_cochain(z.K, z.degree - 1, z.ring);
  for (const auto& sigma : z.K->by_dim[z.degree - 1]) {
    if (std::binary_search(sigma.begin(), sigma.end(), apex)) continue;
    Simplex up = sorted_union(sigma, Simplex{apex});
    Rat v = z(up);
    if (v == 0) continue;
    int pos = (int)(std::lower_bound(up.begin(), up.end(), apex) - up.begin());
    cochain_accumulate(out, sigma, (pos % 2 == 0) ? v : -v);
  }
  return out;
}

inline Cochain cone_contract(const Cochain& z) {
  if (!z.K->apex)
    throw ValidationError(
        "cone_contract: complex carries no distinguished cone point");
  return cone_contract(z, *z.K->apex);
}

}  // namespace gerbecalc
