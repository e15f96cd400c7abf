#pragma once
/* Finite abstract simplicial complexes on integer vertex ids.  A complex
   stores every simplex (not just the maximal ones), sorted lexicographically
   within each dimension; that ordering fixes the rows and columns of all
   incidence matrices.  Complexes are immutable and shared via shared_ptr;
   expensive derived data (incidence structure, normal forms, closed stars)
   is memoized inside a per-complex cache. */

#include <algorithm>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "errors.hpp"
#include "smith.hpp"

namespace gerbecalc {

class SimplicialComplex;
using ComplexPtr = std::shared_ptr<const SimplicialComplex>;

struct CohomologySystem;  // defined with the cohomology routines
struct DeligneSystem;     // defined with the differential-cohomology routines

/* Memoized derived data; filled lazily under the mutex. */
struct ComplexCache {
  mutable std::mutex mu;
  /* degree q -> coboundary matrix C^q -> C^{q+1} */
  std::map<int, std::shared_ptr<const IMat>> cob;
  std::map<int, std::shared_ptr<const SmithForm>> cob_snf;
  /* SNF of the transposed coboundary (the boundary operator on chains) */
  std::map<int, std::shared_ptr<const SmithForm>> bnd_snf;
  /* q -> for each q-simplex, its cofaces as (index of (q+1)-simplex, sign) */
  std::map<int, std::shared_ptr<const std::vector<std::vector<std::pair<int, int>>>>>
      cofaces;
  std::map<Simplex, ComplexPtr> stars;
  std::map<int, std::shared_ptr<const std::vector<IVec>>> cycle_basis;
  std::map<int, std::shared_ptr<const CohomologySystem>> cohsys;
  std::map<int, std::shared_ptr<const DeligneSystem>> delsys;
};

class SimplicialComplex {
 public:
  std::vector<int> vertex_ids;                 // sorted
  std::vector<std::vector<Simplex>> by_dim;    // by_dim[q], lex sorted
  std::vector<std::map<Simplex, int>> index_by_dim;
  std::optional<int> apex;  // cone point, set on closed stars

  mutable ComplexCache cache;

  int dim() const { return (int)by_dim.size() - 1; }
  int count(int q) const {
    return (q < 0 || q > dim()) ? 0 : (int)by_dim[q].size();
  }
  const Simplex& simplex(int q, int i) const { return by_dim[q][i]; }

  int index_of(const Simplex& s) const {
    int q = (int)s.size() - 1;
    if (q < 0 || q > dim()) return -1;
    auto it = index_by_dim[q].find(s);
    return it == index_by_dim[q].end() ? -1 : it->second;
  }
  bool has(const Simplex& s) const { return index_of(s) >= 0; }
};

inline bool same_complex(const SimplicialComplex& a,
                         const SimplicialComplex& b) {
  return &a == &b || a.by_dim == b.by_dim;
}
inline bool same_complex(const ComplexPtr& a, const ComplexPtr& b) {
  return same_complex(*a, *b);
}

/* Sort a vertex tuple, tracking the permutation sign; ok=false on repeats. */
struct SortedTuple {
  Simplex simplex;
  int sign = 1;
  bool ok = true;
};

inline SortedTuple sort_with_sign(Simplex tuple) {
  SortedTuple out;
  int sign = 1;
  for (size_t i = 1; i < tuple.size(); ++i)
    for (size_t j = i; j > 0 && tuple[j - 1] >= tuple[j]; --j) {
      if (tuple[j - 1] == tuple[j]) return {Simplex{}, 1, false};
      std::swap(tuple[j - 1], tuple[j]);
      sign = -sign;
    }
  out.simplex = std::move(tuple);
  out.sign = sign;
  return out;
}

inline Simplex sorted_union(const Simplex& a, const Simplex& b) {
  Simplex out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

inline bool is_strictly_increasing(const Simplex& s) {
  for (size_t i = 1; i < s.size(); ++i)
    if (s[i - 1] >= s[i]) return false;
  return true;
}

/* The i-th face (drop vertex i); boundary sign is (-1)^i. */
inline Simplex face_of(const Simplex& s, int i) {
  Simplex f;
  f.reserve(s.size() - 1);
  for (int j = 0; j < (int)s.size(); ++j)
    if (j != i) f.push_back(s[j]);
  return f;
}

inline ComplexPtr build_complex(const std::vector<Simplex>& maximal) {
  if (maximal.empty()) throw ValidationError("complex has no simplices");
  std::set<Simplex> all;
  for (const auto& s : maximal) {
    if (s.empty()) throw ValidationError("empty simplex in input");
    if (!is_strictly_increasing(s))
      throw ValidationError("simplex vertices must be strictly increasing: " +
                            simplex_str(s));
    if (s.front() < 0)
      throw ValidationError("vertex ids must be non-negative: " +
                            simplex_str(s));
    /* Insert every nonempty subset (faces close the complex). */
    const int k = (int)s.size();
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
      Simplex f;
      for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) f.push_back(s[i]);
      all.insert(std::move(f));
    }
  }
  auto K = std::make_shared<SimplicialComplex>();
  int d = 0;
  for (const auto& s : all) d = std::max(d, (int)s.size() - 1);
  K->by_dim.resize(d + 1);
  K->index_by_dim.resize(d + 1);
  for (const auto& s : all) K->by_dim[s.size() - 1].push_back(s);
  for (int q = 0; q <= d; ++q) {
    /* std::set iteration is lex within fixed length only after grouping;
       re-sort per dimension to pin the ordering. */
    std::sort(K->by_dim[q].begin(), K->by_dim[q].end());
    for (int i = 0; i < (int)K->by_dim[q].size(); ++i)
      K->index_by_dim[q][K->by_dim[q][i]] = i;
  }
  for (const auto& v : K->by_dim[0]) K->vertex_ids.push_back(v[0]);
  return K;
}

/* Closed star of sigma: all tau with tau ∪ sigma in K.  The returned
   complex carries apex = min vertex of sigma, over which it is a cone. */
inline ComplexPtr closed_star(const ComplexPtr& K, const Simplex& sigma) {
  if (!K->has(sigma))
    throw MissingSimplexError("closed_star of simplex not in complex", sigma);
  {
    std::lock_guard<std::mutex> lock(K->cache.mu);
    auto it = K->cache.stars.find(sigma);
    if (it != K->cache.stars.end()) return it->second;
  }
  std::set<Simplex> members;
  for (int q = 0; q <= K->dim(); ++q)
    for (const auto& tau : K->by_dim[q])
      if (K->has(sorted_union(tau, sigma))) members.insert(tau);
  auto S = std::make_shared<SimplicialComplex>();
  int d = 0;
  for (const auto& s : members) d = std::max(d, (int)s.size() - 1);
  S->by_dim.resize(d + 1);
  S->index_by_dim.resize(d + 1);
  for (const auto& s : members) S->by_dim[s.size() - 1].push_back(s);
  for (int q = 0; q <= d; ++q) {
    std::sort(S->by_dim[q].begin(), S->by_dim[q].end());
    for (int i = 0; i < (int)S->by_dim[q].size(); ++i)
      S->index_by_dim[q][S->by_dim[q][i]] = i;
  }
  for (const auto& v : S->by_dim[0]) S->vertex_ids.push_back(v[0]);
  S->apex = sigma.front();
  ComplexPtr out = S;
  {
    std::lock_guard<std::mutex> lock(K->cache.mu);
    K->cache.stars.emplace(sigma, out);
  }
  return out;
}

/* Coboundary matrix of degree q: rows are (q+1)-simplices, columns are
   q-simplices, entry (-1)^i for the i-th face relation. */
inline std::shared_ptr<const IMat> coboundary_matrix_ptr(
    const SimplicialComplex& K, int q) {
  if (q < 0 || q >= K.dim())
    throw DegreeError("coboundary matrix needs 0 <= q < dim");
  {
    std::lock_guard<std::mutex> lock(K.cache.mu);
    auto it = K.cache.cob.find(q);
    if (it != K.cache.cob.end()) return it->second;
  }
  auto M = std::make_shared<IMat>(K.count(q + 1), K.count(q));
  for (int r = 0; r < K.count(q + 1); ++r) {
    const Simplex& tau = K.simplex(q + 1, r);
    for (int i = 0; i <= q + 1; ++i) {
      int c = K.index_of(face_of(tau, i));
      M->at(r, c) += (i % 2 == 0) ? 1 : -1;
    }
  }
  std::lock_guard<std::mutex> lock(K.cache.mu);
  return K.cache.cob.emplace(q, M).first->second;
}

inline IMat coboundary_matrix(const SimplicialComplex& K, int q) {
  return *coboundary_matrix_ptr(K, q);
}

/* SNF of the coboundary in degree q (zero matrix treated as rank 0 when q
   is out of range). */
inline std::shared_ptr<const SmithForm> coboundary_snf(
    const SimplicialComplex& K, int q) {
  {
    std::lock_guard<std::mutex> lock(K.cache.mu);
    auto it = K.cache.cob_snf.find(q);
    if (it != K.cache.cob_snf.end()) return it->second;
  }
  IMat M = (q < 0 || q >= K.dim()) ? IMat(std::max(K.count(q + 1), 0),
                                          std::max(K.count(q), 0))
                                   : *coboundary_matrix_ptr(K, q);
  auto f = std::make_shared<SmithForm>(smith_normal_form(M));
  std::lock_guard<std::mutex> lock(K.cache.mu);
  return K.cache.cob_snf.emplace(q, f).first->second;
}

/* SNF of the boundary operator on q-chains (transpose of coboundary q-1). */
inline std::shared_ptr<const SmithForm> boundary_snf(const SimplicialComplex& K,
                                                     int q) {
  {
    std::lock_guard<std::mutex> lock(K.cache.mu);
    auto it = K.cache.bnd_snf.find(q);
    if (it != K.cache.bnd_snf.end()) return it->second;
  }
  IMat M = (q < 1 || q > K.dim())
               ? IMat(std::max(K.count(q - 1), 0), std::max(K.count(q), 0))
               : imat_transpose(*coboundary_matrix_ptr(K, q - 1));
  auto f = std::make_shared<SmithForm>(smith_normal_form(M));
  std::lock_guard<std::mutex> lock(K.cache.mu);
  return K.cache.bnd_snf.emplace(q, f).first->second;
}

/* For each q-simplex, its cofaces with boundary signs. */
inline std::shared_ptr<const std::vector<std::vector<std::pair<int, int>>>>
coface_table(const SimplicialComplex& K, int q) {
  {
    std::lock_guard<std::mutex> lock(K.cache.mu);
    auto it = K.cache.cofaces.find(q);
    if (it != K.cache.cofaces.end()) return it->second;
  }
  auto tab = std::make_shared<std::vector<std::vector<std::pair<int, int>>>>(
      K.count(q));
  if (q >= 0 && q < K.dim())
    for (int r = 0; r < K.count(q + 1); ++r) {
      const Simplex& tau = K.simplex(q + 1, r);
      for (int i = 0; i <= q + 1; ++i)
        (*tab)[K.index_of(face_of(tau, i))].push_back(
            {r, (i % 2 == 0) ? 1 : -1});
    }
  std::lock_guard<std::mutex> lock(K.cache.mu);
  return K.cache.cofaces.emplace(q, tab).first->second;
}

/* Basis of integer q-cycles (kernel of the boundary operator). */
inline std::shared_ptr<const std::vector<IVec>> cycle_basis(
    const SimplicialComplex& K, int q) {
  {
    std::lock_guard<std::mutex> lock(K.cache.mu);
    auto it = K.cache.cycle_basis.find(q);
    if (it != K.cache.cycle_basis.end()) return it->second;
  }
  auto f = boundary_snf(K, q);
  auto basis = std::make_shared<std::vector<IVec>>(kernel_basis(*f));
  std::lock_guard<std::mutex> lock(K.cache.mu);
  return K.cache.cycle_basis.emplace(q, basis).first->second;
}

}  // namespace gerbecalc
