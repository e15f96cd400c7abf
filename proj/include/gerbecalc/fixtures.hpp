#pragma once
/* Built-in example complexes.  All are memoized so repeated access shares
   the same object (and its caches). */

#include "product.hpp"

namespace gerbecalc {
namespace fixtures {

/* Triangulated circle on m vertices (m >= 3). */
inline ComplexPtr circle(int m) { return circle_complex(m); }

/* Boundary of the 3-simplex: a 2-sphere. */
inline ComplexPtr sphere2() {
  static ComplexPtr K =
      build_complex({{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  return K;
}

/* Boundary of the 4-simplex: a 3-sphere. */
inline ComplexPtr sphere3() {
  static ComplexPtr K = build_complex(
      {{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4}, {1, 2, 3, 4}});
  return K;
}

/* The 6-vertex triangulation of the real projective plane (antipodal
   quotient of the icosahedron): every pair of vertices is an edge, ten
   triangles, each edge in exactly two of them. */
inline ComplexPtr rp2_6() {
  static ComplexPtr K = build_complex({{0, 1, 2},
                                       {0, 2, 3},
                                       {0, 3, 4},
                                       {0, 4, 5},
                                       {0, 1, 5},
                                       {1, 2, 4},
                                       {2, 3, 5},
                                       {1, 3, 4},
                                       {2, 4, 5},
                                       {1, 3, 5}});
  return K;
}

/* Torus as circle(3) x circle: 9 vertices. */
inline const ProductComplex& torus9_product() {
  static ProductComplex P = product_with_circle(circle_complex(3), 3);
  return P;
}
inline ComplexPtr torus9() { return torus9_product().total; }

/* rp2_6 x circle(3): the 18-vertex product used by the decomposable
   example. */
inline const ProductComplex& rp2xs1_product() {
  static ProductComplex P = product_with_circle(rp2_6(), 3);
  return P;
}
inline ComplexPtr rp2xs1() { return rp2xs1_product().total; }

}  // namespace fixtures
}  // namespace gerbecalc
