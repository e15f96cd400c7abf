#pragma once
/* Exact linear algebra over Z and Q:
   - dense integer matrices with Smith normal form (unimodular transforms
     maintained on both sides, plus the inverse of the row transform),
   - integer and rational linear solves derived from it,
   - a deterministic dense rational row reduction whose solve is a fixed
     linear map of the right-hand side,
   - a sparse rational eliminator for large local systems,
   - a mixed solver for membership in (integer span) + (rational span),
   - enumeration of finite lattice quotients.

   Pivot rule for Smith reduction, pinned for reproducibility: choose the
   nonzero entry of smallest absolute value; break ties by lexicographic
   (row, column) position. */

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace gerbecalc {

using IVec = std::vector<Int>;
using QVec = std::vector<Rat>;

struct IMat {
  int rows = 0, cols = 0;
  std::vector<Int> a;
  IMat() = default;
  IMat(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c), Int(0)) {}
  Int& at(int r, int c) { return a[size_t(r) * cols + c]; }
  const Int& at(int r, int c) const { return a[size_t(r) * cols + c]; }
  static IMat identity(int n) {
    IMat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }
  bool operator==(const IMat& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

struct QMat {
  int rows = 0, cols = 0;
  std::vector<Rat> a;
  QMat() = default;
  QMat(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c), Rat(0)) {}
  Rat& at(int r, int c) { return a[size_t(r) * cols + c]; }
  const Rat& at(int r, int c) const { return a[size_t(r) * cols + c]; }
};

inline IMat imat_mul(const IMat& A, const IMat& B) {
  IMat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const Int& v = A.at(i, k);
      if (v == 0) continue;
      for (int j = 0; j < B.cols; ++j)
        if (B.at(k, j) != 0) C.at(i, j) += v * B.at(k, j);
    }
  return C;
}

inline IVec imat_vec(const IMat& A, const IVec& x) {
  IVec y(A.rows, Int(0));
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      if (A.at(i, j) != 0 && x[j] != 0) y[i] += A.at(i, j) * x[j];
  return y;
}

inline QVec imat_vec_q(const IMat& A, const QVec& x) {
  QVec y(A.rows, Rat(0));
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      if (A.at(i, j) != 0 && x[j] != 0) y[i] += Rat(A.at(i, j)) * x[j];
  return y;
}

inline QVec qmat_vec(const QMat& A, const QVec& x) {
  QVec y(A.rows, Rat(0));
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      if (A.at(i, j) != 0 && x[j] != 0) y[i] += A.at(i, j) * x[j];
  return y;
}

inline IMat imat_transpose(const IMat& A) {
  IMat T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
  return T;
}

/* U * A * V = S diagonal with invariants d_0 | d_1 | ... | d_{rank-1} > 0.
   Uinv is maintained so that lattice bases in the ambient row space can be
   read off without a second inversion. */
struct SmithForm {
  IMat U, Uinv, V, S;
  int rank = 0;
  std::vector<Int> invariants;  // the d_i, all positive
};

namespace detail {

inline void row_swap(IMat& S, IMat& U, IMat& Uinv, int r1, int r2) {
  if (r1 == r2) return;
  for (int j = 0; j < S.cols; ++j) std::swap(S.at(r1, j), S.at(r2, j));
  for (int j = 0; j < U.cols; ++j) std::swap(U.at(r1, j), U.at(r2, j));
  for (int i = 0; i < Uinv.rows; ++i) std::swap(Uinv.at(i, r1), Uinv.at(i, r2));
}

inline void col_swap(IMat& S, IMat& V, int c1, int c2) {
  if (c1 == c2) return;
  for (int i = 0; i < S.rows; ++i) std::swap(S.at(i, c1), S.at(i, c2));
  for (int i = 0; i < V.rows; ++i) std::swap(V.at(i, c1), V.at(i, c2));
}

/* row r2 += q * row r1 on S and U; Uinv gets the inverse column op. */
inline void row_add(IMat& S, IMat& U, IMat& Uinv, int r2, int r1,
                    const Int& q) {
  if (q == 0) return;
  for (int j = 0; j < S.cols; ++j)
    if (S.at(r1, j) != 0) S.at(r2, j) += q * S.at(r1, j);
  for (int j = 0; j < U.cols; ++j)
    if (U.at(r1, j) != 0) U.at(r2, j) += q * U.at(r1, j);
  for (int i = 0; i < Uinv.rows; ++i)
    if (Uinv.at(i, r2) != 0) Uinv.at(i, r1) -= q * Uinv.at(i, r2);
}

inline void col_add(IMat& S, IMat& V, int c2, int c1, const Int& q) {
  if (q == 0) return;
  for (int i = 0; i < S.rows; ++i)
    if (S.at(i, c1) != 0) S.at(i, c2) += q * S.at(i, c1);
  for (int i = 0; i < V.rows; ++i)
    if (V.at(i, c1) != 0) V.at(i, c2) += q * V.at(i, c1);
}

inline void row_negate(IMat& S, IMat& U, IMat& Uinv, int r) {
  for (int j = 0; j < S.cols; ++j) S.at(r, j) = -S.at(r, j);
  for (int j = 0; j < U.cols; ++j) U.at(r, j) = -U.at(r, j);
  for (int i = 0; i < Uinv.rows; ++i) Uinv.at(i, r) = -Uinv.at(i, r);
}

}  // namespace detail

inline SmithForm smith_normal_form(const IMat& A) {
  SmithForm f;
  f.S = A;
  f.U = IMat::identity(A.rows);
  f.Uinv = IMat::identity(A.rows);
  f.V = IMat::identity(A.cols);
  IMat& S = f.S;
  int t = 0;
  const int tmax = std::min(A.rows, A.cols);
  while (t < tmax) {
    /* Pinned pivot rule: smallest |value|, ties by (row, col). */
    int pr = -1, pc = -1;
    Int best = 0;
    for (int i = t; i < S.rows; ++i)
      for (int j = t; j < S.cols; ++j) {
        const Int& v = S.at(i, j);
        if (v == 0) continue;
        Int av = boost::multiprecision::abs(v);
        if (pr < 0 || av < best) {
          best = av;
          pr = i;
          pc = j;
        }
      }
    if (pr < 0) break;  // remaining block is zero
    detail::row_swap(S, f.U, f.Uinv, t, pr);
    detail::col_swap(S, f.V, t, pc);
    for (;;) {
      bool dirty = false;
      /* Reduce the pivot column. */
      for (int i = t + 1; i < S.rows; ++i) {
        if (S.at(i, t) == 0) continue;
        Int q = S.at(i, t) / S.at(t, t);  // truncated: |remainder| < |pivot|
        detail::row_add(S, f.U, f.Uinv, i, t, -q);
        if (S.at(i, t) != 0) {
          detail::row_swap(S, f.U, f.Uinv, t, i);  // strictly smaller pivot
          dirty = true;
        }
      }
      if (dirty) continue;
      /* Reduce the pivot row. */
      for (int j = t + 1; j < S.cols; ++j) {
        if (S.at(t, j) == 0) continue;
        Int q = S.at(t, j) / S.at(t, t);
        detail::col_add(S, f.V, j, t, -q);
        if (S.at(t, j) != 0) {
          detail::col_swap(S, f.V, t, j);
          dirty = true;
        }
      }
      if (dirty) continue;
      /* Enforce that the pivot divides the remaining block, which yields
         the divisibility chain of the invariants. */
      bool fixed = false;
      for (int i = t + 1; i < S.rows && !fixed; ++i)
        for (int j = t + 1; j < S.cols && !fixed; ++j)
          if (S.at(i, j) % S.at(t, t) != 0) {
            detail::row_add(S, f.U, f.Uinv, t, i, Int(1));
            fixed = true;
          }
      if (!fixed) break;
    }
    if (S.at(t, t) < 0) detail::row_negate(S, f.U, f.Uinv, t);
    ++t;
  }
  f.rank = t;
  for (int i = 0; i < t; ++i) f.invariants.push_back(S.at(i, i));
  return f;
}

/* Integer solution of A x = b, if one exists. */
inline std::optional<IVec> solve_integer(const SmithForm& f, const IVec& b) {
  IVec y = imat_vec(f.U, b);
  IVec xv(f.V.cols, Int(0));
  for (int i = 0; i < f.rank; ++i) {
    if (y[i] % f.invariants[i] != 0) return std::nullopt;
    xv[i] = y[i] / f.invariants[i];
  }
  for (int i = f.rank; i < (int)y.size(); ++i)
    if (y[i] != 0) return std::nullopt;
  return imat_vec(f.V, xv);
}

/* Rational solution of A x = b, if one exists. */
inline std::optional<QVec> solve_rational_snf(const SmithForm& f,
                                              const QVec& b) {
  QVec y(f.U.rows, Rat(0));
  for (int i = 0; i < f.U.rows; ++i)
    for (int j = 0; j < f.U.cols; ++j)
      if (f.U.at(i, j) != 0 && b[j] != 0) y[i] += Rat(f.U.at(i, j)) * b[j];
  QVec xv(f.V.cols, Rat(0));
  for (int i = 0; i < f.rank; ++i) xv[i] = y[i] / Rat(f.invariants[i]);
  for (int i = f.rank; i < (int)y.size(); ++i)
    if (y[i] != 0) return std::nullopt;
  QVec x(f.V.rows, Rat(0));
  for (int i = 0; i < f.V.rows; ++i)
    for (int j = 0; j < f.V.cols; ++j)
      if (f.V.at(i, j) != 0 && xv[j] != 0) x[i] += Rat(f.V.at(i, j)) * xv[j];
  return x;
}

/* Basis of the full integer kernel lattice of A (saturated): the trailing
   columns of V. */
inline std::vector<IVec> kernel_basis(const SmithForm& f) {
  std::vector<IVec> out;
  for (int j = f.rank; j < f.V.cols; ++j) {
    IVec v(f.V.rows);
    for (int i = 0; i < f.V.rows; ++i) v[i] = f.V.at(i, j);
    out.push_back(std::move(v));
  }
  return out;
}

/* Basis of the lattice spanned by the columns of M inside Z^rows:
   d_i * (column i of Uinv) for i < rank. */
inline std::vector<IVec> lattice_column_basis(const IMat& M) {
  SmithForm f = smith_normal_form(M);
  std::vector<IVec> out;
  for (int i = 0; i < f.rank; ++i) {
    IVec v(M.rows);
    for (int r = 0; r < M.rows; ++r) v[r] = f.invariants[i] * f.Uinv.at(r, i);
    out.push_back(std::move(v));
  }
  return out;
}

/* Deterministic dense row reduction over Q with recorded transform:
   T * A = R in reduced row echelon form.  The pivot sequence depends only
   on A, so solve() is a linear map of the right-hand side. */
struct QReduction {
  QMat T, R;
  std::vector<int> pivot_col;  // one per pivot row, increasing
  int rank = 0;

  std::optional<QVec> solve(const QVec& b) const {
    QVec y = qmat_vec(T, b);
    for (int i = rank; i < (int)y.size(); ++i)
      if (y[i] != 0) return std::nullopt;
    QVec x(R.cols, Rat(0));
    for (int i = 0; i < rank; ++i) x[pivot_col[i]] = y[i];
    return x;
  }

  /* Rows of T beyond the rank: a basis of { y : y^T A = 0 }. */
  std::vector<QVec> left_kernel() const {
    std::vector<QVec> out;
    for (int i = rank; i < T.rows; ++i) {
      QVec v(T.cols);
      for (int j = 0; j < T.cols; ++j) v[j] = T.at(i, j);
      out.push_back(std::move(v));
    }
    return out;
  }
};

inline QReduction qreduce(const QMat& A) {
  QReduction f;
  f.R = A;
  f.T = QMat(A.rows, A.rows);
  for (int i = 0; i < A.rows; ++i) f.T.at(i, i) = 1;
  QMat& R = f.R;
  QMat& T = f.T;
  int row = 0;
  for (int col = 0; col < A.cols && row < A.rows; ++col) {
    int pr = -1;
    for (int i = row; i < A.rows; ++i)
      if (R.at(i, col) != 0) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    if (pr != row) {
      for (int j = 0; j < R.cols; ++j) std::swap(R.at(pr, j), R.at(row, j));
      for (int j = 0; j < T.cols; ++j) std::swap(T.at(pr, j), T.at(row, j));
    }
    Rat inv = Rat(1) / R.at(row, col);
    if (inv != 1) {
      for (int j = 0; j < R.cols; ++j)
        if (R.at(row, j) != 0) R.at(row, j) *= inv;
      for (int j = 0; j < T.cols; ++j)
        if (T.at(row, j) != 0) T.at(row, j) *= inv;
    }
    for (int i = 0; i < A.rows; ++i) {
      if (i == row || R.at(i, col) == 0) continue;
      Rat c = R.at(i, col);
      for (int j = 0; j < R.cols; ++j)
        if (R.at(row, j) != 0) R.at(i, j) -= c * R.at(row, j);
      for (int j = 0; j < T.cols; ++j)
        if (T.at(row, j) != 0) T.at(i, j) -= c * T.at(row, j);
    }
    f.pivot_col.push_back(col);
    ++row;
  }
  f.rank = row;
  return f;
}

/* Sparse exact Gaussian elimination for large local systems.  Rows are
   sparse maps column -> value with an attached right-hand side.  Pivoting:
   fewest surviving entries first, ties by original row order, pivot column
   the smallest in the chosen row.  Free variables are set to zero. */
class SparseSystemQ {
 public:
  explicit SparseSystemQ(int ncols) : ncols_(ncols) {}

  void add_row(std::map<int, Rat> lhs, Rat rhs) {
    for (auto it = lhs.begin(); it != lhs.end();)
      it = (it->second == 0) ? lhs.erase(it) : std::next(it);
    rows_.push_back({std::move(lhs), std::move(rhs)});
  }

  /* Returns the solution vector (free variables zero) or nullopt. */
  std::optional<QVec> solve() {
    struct Row {
      std::map<int, Rat> lhs;
      Rat rhs;
      bool done = false;
    };
    std::vector<Row> work;
    work.reserve(rows_.size());
    for (auto& r : rows_) work.push_back({r.first, r.second, false});
    std::vector<std::pair<int, int>> pivots;  // (row index, pivot col)
    for (;;) {
      int best = -1;
      for (int i = 0; i < (int)work.size(); ++i) {
        if (work[i].done || work[i].lhs.empty()) continue;
        if (best < 0 || work[i].lhs.size() < work[best].lhs.size()) best = i;
      }
      if (best < 0) break;
      Row& p = work[best];
      int pc = p.lhs.begin()->first;
      Rat pv = p.lhs.begin()->second;
      if (pv != 1) {
        for (auto& kv : p.lhs) kv.second /= pv;
        p.rhs /= pv;
      }
      for (int i = 0; i < (int)work.size(); ++i) {
        if (i == best || work[i].done) continue;
        auto it = work[i].lhs.find(pc);
        if (it == work[i].lhs.end()) continue;
        Rat c = it->second;
        work[i].lhs.erase(it);
        for (auto& kv : p.lhs) {
          if (kv.first == pc) continue;
          Rat& dst = work[i].lhs[kv.first];
          dst -= c * kv.second;
          if (dst == 0) work[i].lhs.erase(kv.first);
        }
        work[i].rhs -= c * p.rhs;
      }
      p.done = true;
      pivots.push_back({best, pc});
    }
    for (auto& r : work)
      if (!r.done && r.lhs.empty() && r.rhs != 0) return std::nullopt;
    /* A pivot row can still reference later pivot columns, so substitute
       in reverse pivot order. */
    QVec x(ncols_, Rat(0));
    for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
      auto [ri, pc] = *it;
      Rat v = work[ri].rhs;
      for (auto& kv : work[ri].lhs)
        if (kv.first != pc && x[kv.first] != 0) v -= kv.second * x[kv.first];
      x[pc] = v;
    }
    return x;
  }

 private:
  int ncols_;
  std::vector<std::pair<std::map<int, Rat>, Rat>> rows_;
};

/* Membership of v in  N * Z^r  +  D * Q^s  with witnesses: find integer t
   and rational k with N t + D k = v.  The construction precomputes the
   functionals killing the rational span of D, the projected integer system
   and its Smith form, so repeated right-hand sides solve cheaply.

   The scaling trick: the rational condition is v - N t in span_Q(D), i.e.
   L(v - N t) = 0 for a left-kernel basis L of D; the resulting integer
   system in t is solved exactly, then the residual is solved over Q. */
class SumLatticeSolver {
 public:
  SumLatticeSolver(IMat N, QMat D) : N_(std::move(N)), D_(std::move(D)) {
    std::vector<QVec> L;
    if (D_.cols == 0) {
      for (int i = 0; i < N_.rows; ++i) {
        QVec e(N_.rows, Rat(0));
        e[i] = 1;
        L.push_back(std::move(e));
      }
    } else {
      Dred_ = qreduce(D_);
      L = Dred_.left_kernel();
    }
    C_ = IMat((int)L.size(), N_.cols);
    Lscaled_.assign(L.size(), QVec());
    for (int i = 0; i < (int)L.size(); ++i) {
      QVec row(N_.cols, Rat(0));
      for (int j = 0; j < N_.cols; ++j)
        for (int r = 0; r < N_.rows; ++r)
          if (N_.at(r, j) != 0 && L[i][r] != 0)
            row[j] += L[i][r] * Rat(N_.at(r, j));
      Int scale(1);
      for (const auto& x : row) scale = lcm_int(scale, den(x));
      for (const auto& x : L[i]) scale = lcm_int(scale, den(x));
      for (int j = 0; j < N_.cols; ++j) C_.at(i, j) = num(row[j] * Rat(scale));
      QVec lrow(L[i]);
      for (auto& x : lrow) x *= Rat(scale);
      Lscaled_[i] = std::move(lrow);
    }
    C_snf_ = smith_normal_form(C_);
  }

  std::optional<std::pair<IVec, QVec>> solve(const QVec& v) const {
    /* Each projected equation reads C_i . t = Lscaled_i . v with integer
       C_i, so for integer t the left side is an integer: a fractional
       right-hand side certifies infeasibility outright. */
    const int q = C_.rows;
    IVec w(q);
    for (int i = 0; i < q; ++i) {
      Rat rh(0);
      for (int r = 0; r < N_.rows; ++r)
        if (Lscaled_[i][r] != 0 && v[r] != 0) rh += Lscaled_[i][r] * v[r];
      if (!is_integer(rh)) return std::nullopt;
      w[i] = num(rh);
    }
    auto t = solve_integer(C_snf_, w);
    if (!t) return std::nullopt;
    QVec resid = v;
    for (int r = 0; r < N_.rows; ++r)
      for (int j = 0; j < N_.cols; ++j)
        if (N_.at(r, j) != 0 && (*t)[j] != 0)
          resid[r] -= Rat(N_.at(r, j) * (*t)[j]);
    if (D_.cols == 0) {
      for (auto& x : resid)
        if (x != 0) return std::nullopt;
      return std::make_pair(*t, QVec{});
    }
    auto k = Dred_.solve(resid);
    if (!k) return std::nullopt;  // unreachable: L spans the co-kernel
    return std::make_pair(*t, *k);
  }

  const IMat& N() const { return N_; }
  const QMat& D() const { return D_; }

 private:
  IMat N_;
  QMat D_;
  QReduction Dred_;
  std::vector<QVec> Lscaled_;
  IMat C_;
  SmithForm C_snf_;
};

inline std::optional<std::pair<IVec, QVec>> solve_in_sum_lattice(
    const IMat& N, const QMat& D, const QVec& v) {
  return SumLatticeSolver(N, D).solve(v);
}

/* All coset representatives of span_Z(basis) / span_Z(relations), where the
   relations lie inside the span and the quotient is finite.  Representatives
   are returned as ambient integer vectors; throws if the quotient is
   infinite or exceeds the cap. */
inline std::vector<IVec> enumerate_quotient(const std::vector<IVec>& basis,
                                            const std::vector<IVec>& relations,
                                            size_t cap) {
  if (basis.empty()) return {IVec{}};
  const int n = (int)basis[0].size();
  const int k = (int)basis.size();
  IMat B(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) B.at(i, j) = basis[j][i];
  SmithForm fb = smith_normal_form(B);
  IMat X(k, (int)relations.size());
  for (int j = 0; j < (int)relations.size(); ++j) {
    auto c = solve_integer(fb, relations[j]);
    if (!c) throw UnsupportedError("relation outside lattice span");
    for (int i = 0; i < k; ++i) X.at(i, j) = (*c)[i];
  }
  SmithForm fx = smith_normal_form(X);
  if (fx.rank < k) throw UnsupportedError("lattice quotient is infinite");
  size_t total = 1;
  for (auto& d : fx.invariants) {
    total *= size_t(d.convert_to<std::uint64_t>());
    if (total > cap) throw UnsupportedError("lattice quotient too large");
  }
  /* Generator i of the quotient is B * (column i of Uinv of X), of order
     d_i; enumerate all residue tuples. */
  std::vector<IVec> gens;
  for (int i = 0; i < k; ++i) {
    IVec coeff(k);
    for (int r = 0; r < k; ++r) coeff[r] = fx.Uinv.at(r, i);
    gens.push_back(imat_vec(B, coeff));
  }
  std::vector<IVec> out;
  IVec counter(k, Int(0));
  for (;;) {
    IVec x(n, Int(0));
    for (int i = 0; i < k; ++i)
      if (counter[i] != 0)
        for (int r = 0; r < n; ++r) x[r] += counter[i] * gens[i][r];
    out.push_back(std::move(x));
    int pos = k - 1;
    while (pos >= 0) {
      counter[pos] += 1;
      if (counter[pos] < fx.invariants[pos]) break;
      counter[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace gerbecalc
