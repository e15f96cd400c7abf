#pragma once
/* Simplicial cohomology with Z, Q and Q/Z coefficients, presented through
   Smith normal forms of the coboundary matrices, plus a coordinate system
   on integer cohomology classes:

   With U d_{q-1} V = S (invariants d_i, rank r) and y = U z for a cocycle z,
     - torsion coordinates: y_i mod d_i for each d_i > 1,
     - free coordinates: the expansion of (y_r, ..., y_{n_q-1}) in a fixed
       lattice basis of the projection of the cocycle lattice.
   A cocycle is a coboundary iff all coordinates vanish, and two cocycles
   are cohomologous iff their coordinates agree, so the coordinates decide
   class equality, class order and class membership exactly. */

#include <memory>
#include <string>
#include <vector>

#include "cochain.hpp"

namespace gerbecalc {

struct GroupPresentation {
  long long free_rank = 0;
  std::vector<Int> torsion;  // invariant factors > 1, each dividing the next
  bool operator==(const GroupPresentation& o) const {
    return free_rank == o.free_rank && torsion == o.torsion;
  }
  std::string str() const {
    std::string s = "free_rank=" + std::to_string(free_rank) + " torsion=[";
    for (size_t i = 0; i < torsion.size(); ++i) {
      if (i) s += ",";
      s += torsion[i].str();
    }
    return s + "]";
  }
};

/* --- vector views of (co)chains ------------------------------------- */

inline QVec cochain_to_qvec(const Cochain& c) {
  QVec v(c.K->count(c.degree), Rat(0));
  for (const auto& [s, val] : c.values) v[c.K->index_of(s)] = val;
  return v;
}

inline IVec cochain_to_ivec(const Cochain& c) {
  IVec v(c.K->count(c.degree), Int(0));
  for (const auto& [s, val] : c.values) {
    if (!is_integer(val))
      throw ValidationError("integer vector view of a fractional cochain");
    v[c.K->index_of(s)] = num(val);
  }
  return v;
}

inline Cochain cochain_from_qvec(const ComplexPtr& K, int q, Ring ring,
                                 const QVec& v) {
  Cochain c = make_cochain(K, q, ring);
  for (int i = 0; i < (int)v.size(); ++i)
    if (v[i] != 0) cochain_set(c, K->simplex(q, i), v[i]);
  return c;
}

inline Cochain cochain_from_ivec(const ComplexPtr& K, int q, Ring ring,
                                 const IVec& v) {
  Cochain c = make_cochain(K, q, ring);
  for (int i = 0; i < (int)v.size(); ++i)
    if (v[i] != 0) cochain_set(c, K->simplex(q, i), Rat(v[i]));
  return c;
}

inline Chain chain_from_qvec(const ComplexPtr& K, int q, const QVec& v) {
  Chain z = make_chain(K, q);
  for (int i = 0; i < (int)v.size(); ++i)
    if (v[i] != 0) chain_accumulate(z, K->simplex(q, i), v[i]);
  return z;
}

inline Chain chain_from_ivec(const ComplexPtr& K, int q, const IVec& v) {
  Chain z = make_chain(K, q);
  for (int i = 0; i < (int)v.size(); ++i)
    if (v[i] != 0) chain_accumulate(z, K->simplex(q, i), Rat(v[i]));
  return z;
}

/* --- integer class coordinates --------------------------------------- */

struct ClassCoords {
  std::vector<std::pair<Int, Int>> torsion;  // (modulus d_i, residue)
  std::vector<Int> free_part;
  bool is_zero() const {
    for (const auto& [d, r] : torsion)
      if (r != 0) return false;
    for (const auto& v : free_part)
      if (v != 0) return false;
    return true;
  }
  bool operator==(const ClassCoords& o) const {
    return torsion == o.torsion && free_part == o.free_part;
  }
  /* Order of the class: 0 means infinite. */
  Int order() const {
    for (const auto& v : free_part)
      if (v != 0) return 0;
    Int k = 1;
    for (const auto& [d, r] : torsion)
      k = lcm_int(k, d / boost::multiprecision::gcd(d, r));
    return k;
  }
  std::vector<std::pair<std::string, std::string>> labelled() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (size_t i = 0; i < torsion.size(); ++i)
      out.push_back({"Z_" + torsion[i].first.str() + "[" + std::to_string(i) + "]",
                     torsion[i].second.str()});
    for (size_t i = 0; i < free_part.size(); ++i)
      out.push_back({"Z[" + std::to_string(i) + "]", free_part[i].str()});
    return out;
  }
};

struct CohomologySystem {
  int q = 0;
  std::shared_ptr<const SmithForm> dlow;   // SNF of delta_{q-1}
  std::shared_ptr<const SmithForm> dhigh;  // SNF of delta_q
  std::vector<int> torsion_rows;           // i < rank(dlow) with d_i > 1
  std::vector<IVec> cocycle_kernel;        // basis of ker(delta_q), saturated
  IMat BL;                                 // free-part lattice basis columns
  SmithForm BL_snf;
  GroupPresentation pres;
  std::vector<Cochain> generators;  // torsion generators then free generators
};

inline std::shared_ptr<const CohomologySystem> cohomology_system(
    const ComplexPtr& K, int q) {
  {
    std::lock_guard<std::mutex> lock(K->cache.mu);
    auto it = K->cache.cohsys.find(q);
    if (it != K->cache.cohsys.end()) return it->second;
  }
  auto sys = std::make_shared<CohomologySystem>();
  sys->q = q;
  sys->dlow = coboundary_snf(*K, q - 1);
  sys->dhigh = coboundary_snf(*K, q);
  const int nq = K->count(q);
  const int r = sys->dlow->rank;
  for (int i = 0; i < r; ++i)
    if (sys->dlow->invariants[i] > 1) sys->torsion_rows.push_back(i);
  sys->cocycle_kernel = kernel_basis(*sys->dhigh);

  /* Free-part lattice: project U * (cocycle lattice) to rows >= r. */
  const int m = nq - r;
  IMat M(m, (int)sys->cocycle_kernel.size());
  for (int j = 0; j < (int)sys->cocycle_kernel.size(); ++j) {
    IVec y = imat_vec(sys->dlow->U, sys->cocycle_kernel[j]);
    for (int i = 0; i < m; ++i) M.at(i, j) = y[r + i];
  }
  SmithForm mf = smith_normal_form(M);
  sys->BL = IMat(m, mf.rank);
  for (int i = 0; i < mf.rank; ++i)
    for (int rr = 0; rr < m; ++rr)
      sys->BL.at(rr, i) = mf.invariants[i] * mf.Uinv.at(rr, i);
  sys->BL_snf = smith_normal_form(sys->BL);

  sys->pres.free_rank = mf.rank;
  for (int i : sys->torsion_rows)
    sys->pres.torsion.push_back(sys->dlow->invariants[i]);

  /* Generators: torsion classes from columns of Uinv of dlow, free classes
     from kernel combinations hitting each free lattice basis vector. */
  for (int i : sys->torsion_rows) {
    IVec g(nq);
    for (int rr = 0; rr < nq; ++rr) g[rr] = sys->dlow->Uinv.at(rr, i);
    sys->generators.push_back(cochain_from_ivec(K, q, Ring::Int, g));
  }
  for (int i = 0; i < mf.rank; ++i) {
    IVec g(nq, Int(0));
    for (int j = 0; j < (int)sys->cocycle_kernel.size(); ++j) {
      const Int& coef = mf.V.at(j, i);
      if (coef == 0) continue;
      for (int rr = 0; rr < nq; ++rr)
        g[rr] += coef * sys->cocycle_kernel[j][rr];
    }
    sys->generators.push_back(cochain_from_ivec(K, q, Ring::Int, g));
  }

  std::lock_guard<std::mutex> lock(K->cache.mu);
  return K->cache.cohsys.emplace(q, sys).first->second;
}

/* Coordinates of an integer cocycle's class; the input must be closed. */
inline ClassCoords class_coords(const CohomologySystem& sys, const IVec& z) {
  ClassCoords out;
  IVec y = imat_vec(sys.dlow->U, z);
  for (int i : sys.torsion_rows) {
    const Int& d = sys.dlow->invariants[i];
    Int res = y[i] % d;
    if (res < 0) res += d;
    out.torsion.push_back({d, res});
  }
  const int r = sys.dlow->rank;
  IVec proj(y.begin() + r, y.end());
  /* Invariants equal to 1 contribute no torsion but must still divide. */
  auto x = solve_integer(sys.BL_snf, proj);
  if (!x) {
    /* z was not a cocycle (or not integral): the projection must lie in
       the free lattice for genuine cocycles. */
    throw ValidationError("class_coords: vector is not a cocycle");
  }
  out.free_part = *x;
  return out;
}

inline ClassCoords class_coords(const ComplexPtr& K, const Cochain& z) {
  if (z.ring != Ring::Int)
    throw ValidationError("class coordinates need an integer cochain");
  Cochain dz = coboundary(z);
  if (!dz.values.empty())
    throw NotClosedError("class_coords: cochain is not closed",
                         dz.values.begin()->first);
  auto sys = cohomology_system(K, z.degree);
  return class_coords(*sys, cochain_to_ivec(z));
}

/* --- the public cohomology call -------------------------------------- */

inline GroupPresentation cohomology_any(const ComplexPtr& K, int q, Ring ring) {
  GroupPresentation out;
  if (q < 0 || q > K->dim()) return out;
  switch (ring) {
    case Ring::Int: {
      auto sys = cohomology_system(K, q);
      return sys->pres;
    }
    case Ring::Rat: {
      int rhigh = coboundary_snf(*K, q)->rank;
      int rlow = coboundary_snf(*K, q - 1)->rank;
      out.free_rank = K->count(q) - rhigh - rlow;
      return out;
    }
    default: {
      /* H^q(K; Q/Z) = (Q/Z)^{b_q} + torsion of integral H_q, the latter
         computed from the boundary operator one degree up. */
      int rhigh = coboundary_snf(*K, q)->rank;
      int rlow = coboundary_snf(*K, q - 1)->rank;
      out.free_rank = K->count(q) - rhigh - rlow;
      for (const auto& d : boundary_snf(*K, q + 1)->invariants)
        if (d > 1) out.torsion.push_back(d);
      return out;
    }
  }
}

inline GroupPresentation cohomology(const ComplexPtr& K, int q, Ring ring) {
  if (q < 0 || q > K->dim())
    throw DegreeError("cohomology degree out of range 0..dim");
  return cohomology_any(K, q, ring);
}

/* Generator cocycles (torsion generators first, then free generators, in
   the order matching GroupPresentation). */
inline std::vector<Cochain> cohomology_generators(const ComplexPtr& K, int q) {
  if (q < 0 || q > K->dim())
    throw DegreeError("cohomology degree out of range 0..dim");
  return cohomology_system(K, q)->generators;
}

/* --- cycles ----------------------------------------------------------- */

inline std::vector<Chain> cycle_basis_chains(const ComplexPtr& K, int q) {
  std::vector<Chain> out;
  for (const auto& v : *cycle_basis(*K, q)) out.push_back(chain_from_ivec(K, q, v));
  return out;
}

/* Fundamental cycle of a connected closed oriented triangulated surface:
   the unique (up to sign) 2-cycle with every triangle appearing once with
   coefficient +-1; normalized so the lexicographically first triangle has
   coefficient +1. */
inline Chain fundamental_surface_cycle(const ComplexPtr& K) {
  if (K->dim() != 2)
    throw ValidationError("fundamental cycle needs a 2-dimensional complex");
  auto basis = cycle_basis(*K, 2);
  if (basis->size() != 1)
    throw ValidationError(
        "complex is not a connected closed orientable surface");
  IVec v = (*basis)[0];
  for (const auto& x : v)
    if (x != 1 && x != -1)
      throw ValidationError(
          "complex is not a closed orientable surface (bad cycle)");
  if (v[0] < 0)
    for (auto& x : v) x = -x;
  return chain_from_ivec(K, 2, v);
}

/* All pairings of a cochain against a cycle basis are integers. */
inline bool integral_periods(const Cochain& w) {
  auto cycles = cycle_basis(*w.K, w.degree);
  QVec v = cochain_to_qvec(w);
  for (const auto& z : *cycles) {
    Rat acc(0);
    for (int i = 0; i < (int)z.size(); ++i)
      if (z[i] != 0 && v[i] != 0) acc += v[i] * Rat(z[i]);
    if (!is_integer(acc)) return false;
  }
  return true;
}

}  // namespace gerbecalc
