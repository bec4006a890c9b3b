#include "potlab/core/vec.hpp"

#include <cmath>

namespace potlab {

Mat orthonormal_complement(const Vec& normal) {
  const int dim = static_cast<int>(normal.size());
  Mat basis(dim, dim - 1);
  int filled = 0;
  // Gram-Schmidt against the normal, seeded by coordinate axes in order of
  // increasing alignment with the normal.
  Vec order = normal.cwiseAbs();
  for (int pass = 0; pass < dim && filled < dim - 1; ++pass) {
    int axis = 0;
    for (int i = 1; i < dim; ++i)
      if (order[i] < order[axis]) axis = i;
    order[axis] = 1e300;
    Vec v = unit_vec(dim, axis);
    v -= normal.dot(v) * normal;
    for (int k = 0; k < filled; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    const double len = v.norm();
    if (len < 1e-8) continue;
    basis.col(filled++) = v / len;
  }
  return basis;
}

}  // namespace potlab
