#pragma once
/* Exact arithmetic for unitary phases and monomial matrices.

   Scalars: Cyc is the group algebra Q[Q/Z], a finite formal sum
   sum_i q_i * e(theta_i) with q_i rational and theta_i in [0,1), where
   e(t) stands for exp(2*pi*i*t).  Addition and multiplication are formal;
   zero testing (hence equality) is exact: collect the phases over a common
   denominator N, view the sum as a polynomial in a primitive N-th root of
   unity, and reduce modulo the N-th cyclotomic polynomial.  The element is
   zero iff the reduced polynomial is zero, because the cyclotomic
   polynomial is the minimal polynomial of the root.

   Matrices: a MonomialMatrix is an n x n unitary with exactly one nonzero
   entry per row and column, each a root of unity.  Column j carries the
   entry e(phase[j]) in row perm[j].  Products, inverses, conjugates,
   Kronecker products, direct sums and determinants stay in this class and
   are computed exactly.  Dense matrices over Cyc support the general
   products needed for intertwiner algebra. */

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace gerbecalc {

/* ------------------------------------------------------------------ */
/* Cyclotomic scalars                                                  */
/* ------------------------------------------------------------------ */

struct Cyc {
  /* phase in [0,1) -> rational coefficient; zero coefficients dropped */
  std::map<Rat, Rat> terms;
};

inline Cyc cyc_zero() { return Cyc{}; }

inline Cyc cyc_phased(const Rat& coeff, const Rat& theta) {
  Cyc c;
  if (coeff != 0) c.terms[mod1(theta)] = coeff;
  return c;
}

inline Cyc cyc_rat(const Rat& q) { return cyc_phased(q, Rat(0)); }

inline Cyc cyc_phase(const Rat& theta) { return cyc_phased(Rat(1), theta); }

inline Cyc cyc_add(const Cyc& a, const Cyc& b) {
  Cyc out = a;
  for (const auto& [theta, q] : b.terms) {
    Rat s = out.terms.count(theta) ? out.terms.at(theta) + q : q;
    if (s == 0) out.terms.erase(theta);
    else out.terms[theta] = s;
  }
  return out;
}

inline Cyc cyc_neg(const Cyc& a) {
  Cyc out = a;
  for (auto& [theta, q] : out.terms) q = -q;
  return out;
}

inline Cyc cyc_sub(const Cyc& a, const Cyc& b) { return cyc_add(a, cyc_neg(b)); }

inline Cyc cyc_scale(const Cyc& a, const Rat& q) {
  Cyc out;
  if (q == 0) return out;
  for (const auto& [theta, c] : a.terms) out.terms[theta] = c * q;
  return out;
}

inline Cyc cyc_mul(const Cyc& a, const Cyc& b) {
  Cyc out;
  for (const auto& [ta, qa] : a.terms)
    for (const auto& [tb, qb] : b.terms) {
      Rat theta = mod1(ta + tb);
      Rat s = (out.terms.count(theta) ? out.terms.at(theta) : Rat(0)) + qa * qb;
      if (s == 0) out.terms.erase(theta);
      else out.terms[theta] = s;
    }
  return out;
}

/* complex conjugate: e(t) -> e(-t) */
inline Cyc cyc_conj(const Cyc& a) {
  Cyc out;
  for (const auto& [theta, q] : a.terms) out.terms[mod1(-theta)] = q;
  return out;
}

/* Coefficients of the N-th cyclotomic polynomial (index = power, monic),
   computed by exact division of x^N - 1 by the proper-divisor cyclotomic
   polynomials.  Cached across calls. */
inline const std::vector<Int>& cyclotomic_poly(long long N) {
  static std::map<long long, std::vector<Int>> cache;
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  if (N > 1000000)
    throw UnsupportedError("cyclotomic reduction order too large: " + std::to_string(N));
  /* numerator x^N - 1 */
  std::vector<Int> num(static_cast<size_t>(N) + 1, Int(0));
  num[0] = Int(-1);
  num[static_cast<size_t>(N)] = Int(1);
  for (long long d = 1; d < N; ++d) {
    if (N % d != 0) continue;
    const std::vector<Int>& phi = cyclotomic_poly(d);
    /* exact polynomial division num /= phi (phi monic) */
    size_t dn = num.size() - 1, dp = phi.size() - 1;
    std::vector<Int> quot(dn - dp + 1, Int(0));
    for (size_t k = dn + 1; k-- > dp;) {
      Int lead = num[k];
      if (lead == 0) continue;
      quot[k - dp] = lead;
      for (size_t i = 0; i <= dp; ++i) num[k - dp + i] -= lead * phi[i];
    }
    num = quot;
  }
  return cache.emplace(N, std::move(num)).first->second;
}

inline bool cyc_is_zero(const Cyc& a) {
  if (a.terms.empty()) return true;
  /* common denominator of the phases */
  Int N(1);
  for (const auto& [theta, q] : a.terms) N = lcm_int(N, den(theta));
  long long n = N.convert_to<long long>();
  std::vector<Rat> poly(static_cast<size_t>(n), Rat(0));
  for (const auto& [theta, q] : a.terms) {
    Int k = num(theta) * (N / den(theta));
    poly[static_cast<size_t>(k.convert_to<long long>() % n)] += q;
  }
  const std::vector<Int>& phi = cyclotomic_poly(n);
  size_t D = phi.size() - 1; /* degree of the minimal polynomial */
  for (size_t k = poly.size(); k-- > D;) {
    Rat lead = poly[k];
    if (lead == 0) continue;
    poly[k] = 0;
    for (size_t i = 0; i < D; ++i) poly[k - D + i] -= lead * Rat(phi[i]);
  }
  for (const Rat& c : poly)
    if (c != 0) return false;
  return true;
}

inline bool cyc_equal(const Cyc& a, const Cyc& b) { return cyc_is_zero(cyc_sub(a, b)); }

inline std::string cyc_to_string(const Cyc& a) {
  if (a.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [theta, q] : a.terms) {
    if (!first) os << " + ";
    first = false;
    if (theta == 0) os << rat_to_string(q);
    else if (q == 1) os << "e(" << rat_to_string(theta) << ")";
    else os << rat_to_string(q) << "*e(" << rat_to_string(theta) << ")";
  }
  return os.str();
}

/* ------------------------------------------------------------------ */
/* Monomial matrices                                                   */
/* ------------------------------------------------------------------ */

struct MonomialMatrix {
  int size = 0;
  std::vector<int> perm;  /* column j -> row perm[j] of its nonzero entry */
  std::vector<Rat> phase; /* entry (perm[j], j) = e(phase[j]), phase in [0,1) */
};

inline MonomialMatrix make_monomial(std::vector<int> perm, std::vector<Rat> phase) {
  if (perm.size() != phase.size())
    throw ValidationError("monomial matrix needs one phase per column");
  int n = static_cast<int>(perm.size());
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (int r : perm) {
    if (r < 0 || r >= n || seen[static_cast<size_t>(r)])
      throw ValidationError("monomial matrix rows must form a permutation");
    seen[static_cast<size_t>(r)] = 1;
  }
  for (Rat& t : phase) t = mod1(t);
  return MonomialMatrix{n, std::move(perm), std::move(phase)};
}

inline MonomialMatrix identity_monomial(int n) {
  MonomialMatrix m;
  m.size = n;
  m.perm.resize(static_cast<size_t>(n));
  std::iota(m.perm.begin(), m.perm.end(), 0);
  m.phase.assign(static_cast<size_t>(n), Rat(0));
  return m;
}

inline bool monomial_is_identity(const MonomialMatrix& m) {
  for (int j = 0; j < m.size; ++j)
    if (m.perm[static_cast<size_t>(j)] != j || m.phase[static_cast<size_t>(j)] != 0)
      return false;
  return true;
}

inline bool monomial_equal(const MonomialMatrix& a, const MonomialMatrix& b) {
  return a.size == b.size && a.perm == b.perm && a.phase == b.phase;
}

/* matrix product a*b (b applied first) */
inline MonomialMatrix monomial_mul(const MonomialMatrix& a, const MonomialMatrix& b) {
  if (a.size != b.size) throw ValidationError("monomial product needs equal sizes");
  MonomialMatrix out;
  out.size = a.size;
  out.perm.resize(static_cast<size_t>(a.size));
  out.phase.resize(static_cast<size_t>(a.size));
  for (int j = 0; j < a.size; ++j) {
    int mid = b.perm[static_cast<size_t>(j)];
    out.perm[static_cast<size_t>(j)] = a.perm[static_cast<size_t>(mid)];
    out.phase[static_cast<size_t>(j)] =
        mod1(b.phase[static_cast<size_t>(j)] + a.phase[static_cast<size_t>(mid)]);
  }
  return out;
}

inline MonomialMatrix monomial_inverse(const MonomialMatrix& m) {
  MonomialMatrix out;
  out.size = m.size;
  out.perm.resize(static_cast<size_t>(m.size));
  out.phase.resize(static_cast<size_t>(m.size));
  for (int j = 0; j < m.size; ++j) {
    int r = m.perm[static_cast<size_t>(j)];
    out.perm[static_cast<size_t>(r)] = j;
    out.phase[static_cast<size_t>(r)] = mod1(-m.phase[static_cast<size_t>(j)]);
  }
  return out;
}

/* entrywise complex conjugate; for a unitary monomial this equals the
   inverse transpose, so the permutation is unchanged and phases negate */
inline MonomialMatrix monomial_conj(const MonomialMatrix& m) {
  MonomialMatrix out = m;
  for (Rat& t : out.phase) t = mod1(-t);
  return out;
}

/* scalar multiple e(theta) * m */
inline MonomialMatrix monomial_scale(const MonomialMatrix& m, const Rat& theta) {
  MonomialMatrix out = m;
  for (Rat& t : out.phase) t = mod1(t + theta);
  return out;
}

/* Kronecker product; block index (i,j) -> i*b.size + j, so a acts on the
   coarse index and b on the fine one */
inline MonomialMatrix monomial_kron(const MonomialMatrix& a, const MonomialMatrix& b) {
  MonomialMatrix out;
  out.size = a.size * b.size;
  out.perm.resize(static_cast<size_t>(out.size));
  out.phase.resize(static_cast<size_t>(out.size));
  for (int i = 0; i < a.size; ++i)
    for (int j = 0; j < b.size; ++j) {
      size_t col = static_cast<size_t>(i * b.size + j);
      out.perm[col] = a.perm[static_cast<size_t>(i)] * b.size + b.perm[static_cast<size_t>(j)];
      out.phase[col] =
          mod1(a.phase[static_cast<size_t>(i)] + b.phase[static_cast<size_t>(j)]);
    }
  return out;
}

inline MonomialMatrix monomial_direct_sum(const MonomialMatrix& a, const MonomialMatrix& b) {
  MonomialMatrix out;
  out.size = a.size + b.size;
  out.perm.reserve(static_cast<size_t>(out.size));
  out.phase.reserve(static_cast<size_t>(out.size));
  for (int j = 0; j < a.size; ++j) {
    out.perm.push_back(a.perm[static_cast<size_t>(j)]);
    out.phase.push_back(a.phase[static_cast<size_t>(j)]);
  }
  for (int j = 0; j < b.size; ++j) {
    out.perm.push_back(a.size + b.perm[static_cast<size_t>(j)]);
    out.phase.push_back(b.phase[static_cast<size_t>(j)]);
  }
  return out;
}

inline int permutation_parity(const std::vector<int>& perm) {
  std::vector<char> seen(perm.size(), 0);
  int transpositions = 0;
  for (size_t j = 0; j < perm.size(); ++j) {
    if (seen[j]) continue;
    int len = 0;
    for (size_t k = j; !seen[k]; k = static_cast<size_t>(perm[k])) {
      seen[k] = 1;
      ++len;
    }
    transpositions += len - 1;
  }
  return transpositions & 1;
}

/* determinant of a monomial unitary: sign(perm) * e(sum of phases),
   stored as the sign parity plus the phase sum in [0,1) */
struct MonomialDet {
  int parity = 0; /* 1 when sign(perm) = -1 */
  Rat phase_sum;  /* in [0,1) */
};

inline MonomialDet monomial_det(const MonomialMatrix& m) {
  MonomialDet d;
  d.parity = permutation_parity(m.perm);
  Rat s(0);
  for (const Rat& t : m.phase) s += t;
  d.phase_sum = mod1(s);
  return d;
}

/* determinant as a single phase: sign(perm) = e(parity/2) */
inline Rat monomial_det_phase(const MonomialMatrix& m) {
  MonomialDet d = monomial_det(m);
  return mod1(d.phase_sum + Rat(d.parity, 2));
}

inline Cyc monomial_trace(const MonomialMatrix& m) {
  Cyc t;
  for (int j = 0; j < m.size; ++j)
    if (m.perm[static_cast<size_t>(j)] == j)
      t = cyc_add(t, cyc_phase(m.phase[static_cast<size_t>(j)]));
  return t;
}

inline Cyc monomial_entry(const MonomialMatrix& m, int row, int col) {
  if (m.perm[static_cast<size_t>(col)] != row) return Cyc{};
  return cyc_phase(m.phase[static_cast<size_t>(col)]);
}

/* diagonal clock matrix diag(e(c*j/p)) and cyclic shift e_j -> e_{j+s} */
inline MonomialMatrix clock_monomial(int p, const Int& c) {
  MonomialMatrix m = identity_monomial(p);
  for (int j = 0; j < p; ++j) m.phase[static_cast<size_t>(j)] = mod1(Rat(c * j, p));
  return m;
}

inline MonomialMatrix shift_monomial(int p, int s) {
  MonomialMatrix m = identity_monomial(p);
  s = ((s % p) + p) % p;
  for (int j = 0; j < p; ++j) m.perm[static_cast<size_t>(j)] = (j + s) % p;
  return m;
}

/* ------------------------------------------------------------------ */
/* Dense matrices over Cyc                                             */
/* ------------------------------------------------------------------ */

using CycMat = std::vector<std::vector<Cyc>>;

inline CycMat cyc_mat_zero(int rows, int cols) {
  return CycMat(static_cast<size_t>(rows), std::vector<Cyc>(static_cast<size_t>(cols)));
}

inline CycMat cyc_mat_identity(int n) {
  CycMat m = cyc_mat_zero(n, n);
  for (int i = 0; i < n; ++i) m[static_cast<size_t>(i)][static_cast<size_t>(i)] = cyc_rat(Rat(1));
  return m;
}

inline CycMat cyc_mat_mul(const CycMat& a, const CycMat& b) {
  size_t rows = a.size(), inner = b.size(), cols = inner ? b[0].size() : 0;
  CycMat out(rows, std::vector<Cyc>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (a[i].size() != inner) throw ValidationError("matrix product shape mismatch");
    for (size_t k = 0; k < inner; ++k) {
      if (a[i][k].terms.empty()) continue;
      for (size_t j = 0; j < cols; ++j) {
        if (b[k][j].terms.empty()) continue;
        out[i][j] = cyc_add(out[i][j], cyc_mul(a[i][k], b[k][j]));
      }
    }
  }
  return out;
}

/* monomial * dense: row perm[r] of the result is e(phase[r]) times row r */
inline CycMat monomial_times_mat(const MonomialMatrix& m, const CycMat& a) {
  if (static_cast<size_t>(m.size) != a.size())
    throw ValidationError("matrix product shape mismatch");
  CycMat out(a.size());
  for (int r = 0; r < m.size; ++r) {
    std::vector<Cyc> row = a[static_cast<size_t>(r)];
    Cyc ph = cyc_phase(m.phase[static_cast<size_t>(r)]);
    for (Cyc& e : row) e = cyc_mul(ph, e);
    out[static_cast<size_t>(m.perm[static_cast<size_t>(r)])] = std::move(row);
  }
  return out;
}

/* dense * monomial: column j of the result is e(phase[j]) times column perm[j] */
inline CycMat mat_times_monomial(const CycMat& a, const MonomialMatrix& m) {
  CycMat out(a.size(), std::vector<Cyc>(static_cast<size_t>(m.size)));
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != static_cast<size_t>(m.size))
      throw ValidationError("matrix product shape mismatch");
    for (int j = 0; j < m.size; ++j)
      out[i][static_cast<size_t>(j)] =
          cyc_mul(a[i][static_cast<size_t>(m.perm[static_cast<size_t>(j)])],
                  cyc_phase(m.phase[static_cast<size_t>(j)]));
  }
  return out;
}

inline bool cyc_mat_is_zero(const CycMat& a) {
  for (const auto& row : a)
    for (const Cyc& e : row)
      if (!cyc_is_zero(e)) return false;
  return true;
}

inline bool cyc_mat_equal(const CycMat& a, const CycMat& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    for (size_t j = 0; j < a[i].size(); ++j)
      if (!cyc_equal(a[i][j], b[i][j])) return false;
  }
  return true;
}

inline CycMat cyc_mat_conj_transpose(const CycMat& a) {
  size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  CycMat out(cols, std::vector<Cyc>(rows));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) out[j][i] = cyc_conj(a[i][j]);
  return out;
}

inline CycMat monomial_to_mat(const MonomialMatrix& m) {
  CycMat out = cyc_mat_zero(m.size, m.size);
  for (int j = 0; j < m.size; ++j)
    out[static_cast<size_t>(m.perm[static_cast<size_t>(j)])][static_cast<size_t>(j)] =
        cyc_phase(m.phase[static_cast<size_t>(j)]);
  return out;
}

}  // namespace gerbecalc
