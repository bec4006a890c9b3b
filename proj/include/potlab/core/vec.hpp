#pragma once

#include <Eigen/Dense>

#include <initializer_list>

namespace potlab {

/// Largest ambient dimension supported (R^4 cones times up to four extra axes).
inline constexpr int kMaxDim = 8;

/// Stack-allocated dynamic vector; ambient points, normals and gradients.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Vec zero_vec(int dim) { return Vec::Zero(dim); }

inline Vec unit_vec(int dim, int axis) {
  Vec v = Vec::Zero(dim);
  v[axis] = 1.0;
  return v;
}

/// Orthonormal basis of the orthogonal complement of a unit vector (columns).
Mat orthonormal_complement(const Vec& normal);

}  // namespace potlab
