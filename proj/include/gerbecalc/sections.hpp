#pragma once

/* Sections of a gerbe and their 2-Hilbert-space structure.
 *
 * A section of a gerbe G is a twisted bundle morphism from the trivial
 * datum I0 into G.  Three layers live here:
 *
 *  - the integral obstruction: the class of G has to be torsion for any
 *    section to exist, and its order divides the rank of every section
 *    (the determinant of a rank-p section trivializes the p-th power);
 *  - the inner product <E,F>: the parallel sections of the descended Hom
 *    bundle, an exact integer dimension together with a basis of
 *    intertwiners whose entries are roots of unity;
 *  - the axioms that make sections a 2-Hilbert space: the inner product
 *    agrees with the morphism spaces, is symmetric under adjoints,
 *    non-degenerate, and additive over direct sums.
 *
 * The inner product requires a flat Hom connection.  Pairs whose Hom
 * connection has curvature are reported as dimension 0 with a diagnostic
 * rather than searching for non-parallel sections.
 */

#include "gerbecalc/morphism.hpp"

namespace gerbecalc {

/* ------------------------------------------------------------------ */
/* obstruction report                                                   */
/* ------------------------------------------------------------------ */

struct SectionSpaceReport {
  GerbeDatum gerbe;
  std::vector<Rat> rational_image; /* class image in degree-3 rational cohomology */
  Int torsion_order = 0;           /* order of the integral class; 0 = infinite */
  bool certified_empty = false;    /* nonzero rational image: no sections at all */
  Int candidate_rank_multiple = 0; /* ranks of sections are multiples of this */
  std::vector<TwistedBundleMorphism> known_sections;
};

inline SectionSpaceReport sections_obstruction(const GerbeDatum& g) {
  SectionSpaceReport out;
  out.gerbe = g;
  DDClassReport dd = dd_class(g);
  for (const Int& v : dd.coords.free_part) out.rational_image.push_back(Rat(v));
  out.torsion_order = dd.coords.order();
  out.certified_empty = out.torsion_order == 0;
  out.candidate_rank_multiple = out.torsion_order;
  if (!out.certified_empty) {
    try {
      out.known_sections.push_back(
          clock_shift_section(g, static_cast<int>(out.torsion_order)));
    } catch (const Error&) {
      /* the class allows sections but the search did not produce one
         (for example the transitions are not locally constant yet) */
    }
  }
  return out;
}

/* ------------------------------------------------------------------ */
/* inner product of sections                                            */
/* ------------------------------------------------------------------ */

struct InnerProductValue {
  long long dimension = 0;
  std::vector<Intertwiner> basis;  /* parallel intertwiners E -> F */
  bool conjugate_link = false;     /* adjoints of the basis land in <F,E> */
  std::string diagnostic;          /* nonempty: Hom connection not flat */
};

namespace detail {

/* first triangle (if any) over which the Hom connection (i,j) has
   curvature, i.e. d(conn_F[i] - conn_E[j]) != 0 on some closed star */
inline std::string hom_curvature_diagnostic(const TwistedBundleMorphism& e,
                                            const TwistedBundleMorphism& f) {
  const ComplexPtr& K = e.source.K;
  for (const Simplex& v : K->by_dim[0]) {
    std::vector<Cochain> ce = morphism_connection(e, v);
    std::vector<Cochain> cf = morphism_connection(f, v);
    std::vector<Cochain> de, df;
    for (const Cochain& c : ce) de.push_back(coboundary(c));
    for (const Cochain& c : cf) df.push_back(coboundary(c));
    for (size_t i = 0; i < df.size(); ++i)
      for (size_t j = 0; j < de.size(); ++j) {
        Cochain diff = df[i];
        for (const auto& [s, val] : de[j].values) cochain_accumulate(diff, s, -val);
        if (!diff.is_zero())
          return "Hom connection has curvature over the star of " + simplex_str(v) +
                 " in slot (" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
  }
  return "";
}

}  // namespace detail

inline InnerProductValue inner_product(const TwistedBundleMorphism& e,
                                       const TwistedBundleMorphism& f) {
  if (!same_complex(e.source.K, f.source.K))
    throw ValidationError("inner product needs sections over the same complex");
  if (!datum_equal(e.source, f.source) || !datum_equal(e.target, f.target))
    throw ValidationError("inner product needs sections of the same gerbe");
  InnerProductValue out;
  out.diagnostic = detail::hom_curvature_diagnostic(e, f);
  if (!out.diagnostic.empty()) {
    out.conjugate_link = true; /* vacuously: there is no basis to link */
    return out;
  }
  IntertwinerSpace space = intertwiner_space(e, f, /*parallel_only=*/true);
  out.dimension = space.dimension;
  out.basis = std::move(space.basis);
  out.conjugate_link = true;
  for (const Intertwiner& b : out.basis)
    if (!check_intertwiner(adjoint_intertwiner(b)).empty()) {
      out.conjugate_link = false;
      break;
    }
  return out;
}

/* exact inner product of two 2-morphisms: the trace of psi^* compose phi,
   summed over the vertices, as a rational combination of roots of unity */
inline Cyc two_morphism_inner(const Intertwiner& x, const Intertwiner& y) {
  if (!morphism_equal(x.source, y.source) || !morphism_equal(x.target, y.target))
    throw ValidationError("2-morphism inner product needs matching endpoints");
  Cyc total;
  for (const Simplex& v : x.source.source.K->by_dim[0]) {
    CycMat a = intertwiner_matrix(x, v);
    CycMat b = intertwiner_matrix(y, v);
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = 0; j < (a.empty() ? 0 : a[0].size()); ++j)
        total = cyc_add(total, cyc_mul(cyc_conj(a[i][j]), b[i][j]));
  }
  return total;
}

/* ------------------------------------------------------------------ */
/* scalar action of finite-dimensional coefficient spaces               */
/* ------------------------------------------------------------------ */

/* tensor a section with the trivial flat bundle of rank d */
inline TwistedBundleMorphism hilbert_action(const TwistedBundleMorphism& s, int d) {
  if (d < 0) throw ValidationError("hilbert_action needs a non-negative rank");
  const ComplexPtr& K = s.source.K;
  GerbeDatum triv = make_local_datum(K, 3);
  return tensor_by_function(s, make_morphism(triv, triv, d));
}

/* ------------------------------------------------------------------ */
/* 2-Hilbert axioms                                                     */
/* ------------------------------------------------------------------ */

struct Hilbert2Report {
  bool hom_bijection = true;  /* <E,F> matches the morphism space */
  bool symmetry = true;       /* dim<E,F> = dim<F,E>, basis linked by adjoint */
  bool nondegeneracy = true;  /* <E,-> = 0 across the samples only for rank 0 */
  bool additivity = true;     /* dimensions add over direct sums */
  std::vector<std::string> notes;
  bool ok() const {
    return hom_bijection && symmetry && nondegeneracy && additivity;
  }
};

inline Hilbert2Report check_2hilbert_axioms(
    const GerbeDatum& g, const std::vector<TwistedBundleMorphism>& samples) {
  require_valid_datum(g, "2-Hilbert axioms");
  Hilbert2Report rep;

  std::vector<const TwistedBundleMorphism*> secs;
  for (size_t k = 0; k < samples.size(); ++k) {
    const TwistedBundleMorphism& s = samples[k];
    if (!same_complex(s.source.K, g.K) || !datum_is_zero(s.source) ||
        !datum_equal(s.target, g))
      rep.notes.push_back("sample " + std::to_string(k) +
                          " is not a section of the gerbe; skipped");
    else
      secs.push_back(&s);
  }

  const size_t n = secs.size();
  std::vector<std::vector<long long>> dim(n, std::vector<long long>(n, 0));
  std::vector<std::vector<bool>> flat(n, std::vector<bool>(n, true));
  std::vector<std::vector<InnerProductValue>> ip(n);
  for (size_t a = 0; a < n; ++a) {
    ip[a].resize(n);
    for (size_t b = 0; b < n; ++b) {
      ip[a][b] = inner_product(*secs[a], *secs[b]);
      dim[a][b] = ip[a][b].dimension;
      if (!ip[a][b].diagnostic.empty()) {
        flat[a][b] = false;
        rep.notes.push_back("pair (" + std::to_string(a) + "," +
                            std::to_string(b) + "): " + ip[a][b].diagnostic);
      }
    }
  }

  /* (i) the inner product realizes the morphism space: sections of the
     descended Hom bundle match parallel intertwiners */
  GerbeDatum triv = make_local_datum(g.K, 3);
  TwistedBundleMorphism unit = make_morphism(triv, triv, 1);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      if (!flat[a][b]) continue;
      long long hom_dim =
          intertwiner_space(unit, pairing(*secs[a], *secs[b]), true).dimension;
      if (hom_dim != dim[a][b]) {
        rep.hom_bijection = false;
        rep.notes.push_back("pair (" + std::to_string(a) + "," +
                            std::to_string(b) +
                            "): descended Hom sections disagree with the "
                            "morphism space");
      }
    }

  /* (ii) hermitean symmetry via the adjoint */
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      if (!flat[a][b] || !flat[b][a]) continue;
      if (dim[a][b] != dim[b][a] || !ip[a][b].conjugate_link) {
        rep.symmetry = false;
        rep.notes.push_back("pair (" + std::to_string(a) + "," +
                            std::to_string(b) + "): adjoint symmetry fails");
      }
    }

  /* (iii) non-degeneracy across the sample set */
  for (size_t a = 0; a < n; ++a) {
    bool all_zero = true;
    for (size_t b = 0; b < n; ++b)
      if (dim[a][b] != 0 || dim[b][a] != 0) all_zero = false;
    if (all_zero && secs[a]->rank > 0) {
      rep.nondegeneracy = false;
      rep.notes.push_back("sample " + std::to_string(a) +
                          " of positive rank pairs to zero with every sample");
    }
  }

  /* (iv) additivity over direct sums in both arguments */
  for (size_t a = 0; a + 1 < n; ++a) {
    TwistedBundleMorphism sum = direct_sum(*secs[a], *secs[a + 1]).sum;
    for (size_t b = 0; b < n; ++b) {
      if (!flat[a][b] || !flat[a + 1][b] || !flat[b][a] || !flat[b][a + 1])
        continue;
      InnerProductValue left = inner_product(sum, *secs[b]);
      InnerProductValue right = inner_product(*secs[b], sum);
      if (left.dimension != dim[a][b] + dim[a + 1][b] ||
          right.dimension != dim[b][a] + dim[b][a + 1]) {
        rep.additivity = false;
        rep.notes.push_back("sum of samples " + std::to_string(a) + "," +
                            std::to_string(a + 1) + " against sample " +
                            std::to_string(b) + ": dimensions do not add");
      }
    }
  }
  return rep;
}

}  // namespace gerbecalc
