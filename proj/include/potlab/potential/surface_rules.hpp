#pragma once

#include <functional>

#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"
#include "potlab/wos/wos.hpp"

namespace potlab::potential {

using geometry::ImplicitDomain;
using wos::EmpiricalMeasure;
using wos::MeasureKind;

/// Deterministic surface-measure rules built from polar coordinates: radial
/// composite Gauss-Legendre on geometric panels times a sphere rule.
struct RuleOptions {
  double inner = 0.01;  // first panel edge
  double ratio = 1.5;   // panel growth factor
  int radial_order = 8;
  int angular_order = 16;
};

/// sigma on the tangent-plane disc of radius `outer` about `center`, lifted
/// to the boundary along the normal of the plane through `base` (exact for
/// half-spaces). Requires the window to be a graph over the plane.
EmpiricalMeasure local_surface_rule(const ImplicitDomain& domain, const Vec& base, const Vec& center, double outer,
                                    const RuleOptions& options);

/// sigma on the boundary of a KP or Hong cone within B(0, outer), as radius
/// times link.
EmpiricalMeasure cone_surface_rule(const ImplicitDomain& domain, double outer, const RuleOptions& options);

/// Multiplies every atom by f(point); the result has kind weighted-surface.
EmpiricalMeasure weighted(EmpiricalMeasure measure, const std::function<double(const Vec&)>& f);

/// Smooth bump exp(1 - 1 / (1 - t^2)), t = |z - center| / radius; equals 1 at
/// the center and vanishes outside the ball.
double bump(const Vec& z, const Vec& center, double radius);

}  // namespace potlab::potential
