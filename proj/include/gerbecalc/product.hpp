#pragma once
/* Product of a complex with a triangulated circle.

   The circle on m >= 3 vertices has edges {j, j+1} and the wrap edge
   {0, m-1}.  The product total complex is the staircase triangulation:
   vertex (x, j) gets id x*m + j, and for every maximal base simplex
   (x_0 < ... < x_q) and circle edge {u < v} the maximal simplices are

     T_k = [(x_0,u) .. (x_k,u), (x_k,v) .. (x_q,v)],   k = 0..q.

   Fiber integration pairs a total cochain against the prism chain

     Pr(sigma) = sum_{j<m-1} P_{j,j+1}(sigma)  -  P_{0,m-1}(sigma),

   where P_{u,v}(sigma) = sum_k (-1)^k T_k(sigma); the wrap edge enters
   with the minus sign because its id order opposes the traversal around
   the circle.  With out(sigma) = (-1)^{deg sigma} <c, Pr(sigma)> the
   operation commutes with the coboundary on the nose, and pairing a cross
   product b x theta against the prisms returns b scaled by the total
   circle value of theta. */

#include <map>

#include "cohomology.hpp"

namespace gerbecalc {

inline ComplexPtr circle_complex(int m) {
  if (m < 3) throw ValidationError("circle needs at least 3 vertices");
  std::vector<Simplex> maximal;
  for (int j = 0; j + 1 < m; ++j) maximal.push_back({j, j + 1});
  maximal.push_back({0, m - 1});
  return build_complex(maximal);
}

/* The positively oriented fundamental 1-cycle of circle_complex(m). */
inline Chain circle_fundamental_cycle(const ComplexPtr& circle, int m) {
  Chain z = make_chain(circle, 1);
  for (int j = 0; j + 1 < m; ++j) chain_accumulate(z, {j, j + 1}, Rat(1));
  chain_accumulate(z, {0, m - 1}, Rat(-1));
  return z;
}

struct ProductComplex {
  ComplexPtr base, circle, total;
  int m = 0;
  SimplicialMap proj_base, proj_circle;
  std::map<int, Chain> fiber_cycles;  // base vertex id -> 1-cycle in total
};

inline ProductComplex product_with_circle(const ComplexPtr& base, int m) {
  if (m < 3) throw ValidationError("circle needs at least 3 vertices");
  ProductComplex P;
  P.base = base;
  P.m = m;
  P.circle = circle_complex(m);

  std::vector<std::pair<int, int>> circle_edges;
  for (int j = 0; j + 1 < m; ++j) circle_edges.push_back({j, j + 1});
  circle_edges.push_back({0, m - 1});

  /* Maximal base simplices: those with no proper coface. */
  std::vector<Simplex> maximal;
  for (int q = 0; q <= base->dim(); ++q)
    for (const auto& s : base->by_dim[q])
      if ((*coface_table(*base, q))[base->index_of(s)].empty())
        maximal.push_back(s);

  std::vector<Simplex> top;
  for (const auto& s : maximal) {
    const int q = (int)s.size() - 1;
    for (auto [u, v] : circle_edges)
      for (int k = 0; k <= q; ++k) {
        Simplex t;
        for (int i = 0; i <= k; ++i) t.push_back(s[i] * m + u);
        for (int i = k; i <= q; ++i) t.push_back(s[i] * m + v);
        top.push_back(std::move(t));
      }
  }
  P.total = build_complex(top);

  std::map<int, int> to_base, to_circle;
  for (int id : P.total->vertex_ids) {
    to_base[id] = id / m;
    to_circle[id] = id % m;
  }
  P.proj_base = make_simplicial_map(P.total, base, to_base);
  P.proj_circle = make_simplicial_map(P.total, P.circle, to_circle);

  for (int x : base->vertex_ids) {
    Chain z = make_chain(P.total, 1);
    for (int j = 0; j + 1 < m; ++j)
      chain_accumulate(z, {x * m + j, x * m + j + 1}, Rat(1));
    chain_accumulate(z, {x * m, x * m + m - 1}, Rat(-1));
    P.fiber_cycles.emplace(x, std::move(z));
  }
  return P;
}

/* Prism chain over a base simplex (any dimension present in the base). */
inline Chain prism_chain(const ProductComplex& P, const Simplex& sigma) {
  if (!P.base->has(sigma))
    throw MissingSimplexError("prism over simplex missing from base", sigma);
  const int q = (int)sigma.size() - 1;
  Chain out = make_chain(P.total, q + 1);
  auto add_prism = [&](int u, int v, const Rat& outer) {
    for (int k = 0; k <= q; ++k) {
      Simplex t;
      for (int i = 0; i <= k; ++i) t.push_back(sigma[i] * P.m + u);
      for (int i = k; i <= q; ++i) t.push_back(sigma[i] * P.m + v);
      chain_accumulate(out, t, (k % 2 == 0) ? outer : -outer);
    }
  };
  for (int j = 0; j + 1 < P.m; ++j) add_prism(j, j + 1, Rat(1));
  add_prism(0, P.m - 1, Rat(-1));
  return out;
}

/* Integration over the circle fiber: degree drops by one; commutes with
   the coboundary exactly. */
inline Cochain fiber_integrate(const ProductComplex& P, const Cochain& c) {
  if (!same_complex(c.K, P.total))
    throw ValidationError("fiber_integrate: cochain is not on the total space");
  if (c.degree < 1)
    throw DegreeError("fiber_integrate needs degree >= 1");
  const int p = c.degree - 1;
  Cochain out = make_cochain(P.base, p, c.ring);
  if (p > P.base->dim()) return out;
  for (const auto& sigma : P.base->by_dim[p]) {
    Rat v = evaluate(c, prism_chain(P, sigma));
    if (p % 2 != 0) v = -v;
    if (v != 0) cochain_accumulate(out, sigma, v);
  }
  return out;
}

inline Cochain pullback_from_base(const ProductComplex& P, const Cochain& c) {
  return pullback(P.proj_base, c);
}

inline Cochain pullback_from_circle(const ProductComplex& P, const Cochain& c) {
  return pullback(P.proj_circle, c);
}

/* Cross product: pullback both factors and cup them on the total space. */
inline Cochain cross(const ProductComplex& P, const Cochain& on_base,
                     const Cochain& on_circle) {
  return cup(pullback(P.proj_base, on_base),
             pullback(P.proj_circle, on_circle));
}

}  // namespace gerbecalc
