#pragma once

#include <vector>

#include "potlab/core/vec.hpp"

namespace potlab {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [lo, hi].
Rule1D gauss_legendre(int order, double lo, double hi);

/// Composite Gauss-Legendre over consecutive panels [edges[k], edges[k+1]].
Rule1D composite_gauss(const std::vector<double>& edges, int order);

/// Panel edges 0 = e0 < inner < inner*q < ... < outer, geometric between
/// `inner` and `outer` with ratio at most `ratio`.
std::vector<double> geometric_edges(double inner, double outer, double ratio);

/// Quadrature on the unit sphere S^m in R^{m+1}: directions and weights
/// summing to the sphere's area. Polar angles are split at the equator so
/// integrands with a kink on {x_0 = 0} are integrated exactly in the limit.
struct SphereRule {
  std::vector<Vec> directions;
  std::vector<double> weights;
};

SphereRule sphere_rule(int sphere_dim, int order);

/// Area of the unit sphere S^m (m-dimensional measure).
double unit_sphere_area(int sphere_dim);

/// Volume of the unit ball in R^m.
double unit_ball_volume(int dim);

}  // namespace potlab
