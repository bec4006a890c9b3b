#pragma once

#include <functional>
#include <vector>

#include "potlab/core/parallel.hpp"
#include "potlab/core/vec.hpp"
#include "potlab/potential/surface_rules.hpp"
#include "potlab/wos/wos.hpp"

namespace potlab::potential {

/// K(x) = c_n x / |x|^{n+1} with c_n = -1/|S^n|, the gradient of the
/// fundamental solution in R^{n+1}.
struct RieszKernel {
  explicit RieszKernel(int boundary_dim);
  int n;
  double c;
  Vec operator()(const Vec& x) const;
};

/// Sum over atoms of (K(x - z) - K(y - z)) w. Only differences are exposed:
/// a single-point Riesz transform of an unbounded boundary is not defined.
Vec riesz_difference(const EmpiricalMeasure& mu, const Vec& x, const Vec& y, Execution exec = Execution::kParallel);

struct WindowDiagnostic {
  double radius = 0.0;
  Vec lhs;
  double residual = 0.0;
};

struct IdentityOptions {
  double first_window = 8.0;
  int windows = 4;  // radii first_window * 2^k
  RuleOptions rule{0.05, 1.5, 8, 16};
  Execution exec = Execution::kParallel;
};

struct IdentityReport {
  Vec lhs;  // extrapolated in 1/R
  Vec rhs;  // grad u(y) - grad u(x)
  double residual = 0.0;
  std::vector<WindowDiagnostic> windows;
  std::size_t atoms = 0;  // in the largest window
};

/// R(omega)(x) - R(omega)(y) against grad u(y) - grad u(x), with omega = sigma
/// (h = 1) on half-spaces and KP/Hong cones with the explicit u. The
/// boundary is truncated to windows of radius R and the differences are
/// extrapolated linearly in 1/R from the two largest windows.
IdentityReport riesz_green_identity_check(const ImplicitDomain& domain, const Vec& x, const Vec& y,
                                          const IdentityOptions& options);

struct PvResult {
  std::vector<double> radii;
  std::vector<Vec> sums;
  Vec limit;  // linear extrapolation in r from the two smallest radii
};

/// Truncated sums over atoms with |z - xi| > r_k of K(xi - z) w(z).
PvResult pv_riesz(const EmpiricalMeasure& f_sigma, const Vec& xi, const std::vector<double>& radii,
                  Execution exec = Execution::kParallel);

/// Nontangential approach xi + s direction, s over `distances`.
struct ApproachSpec {
  Vec base;
  Vec direction;
  double aperture = 0.5;
  std::vector<double> distances;
};

/// Normal approach from inside (interior = true) or outside, with distances
/// s0 2^{-k}, k < levels.
ApproachSpec normal_approach(const ImplicitDomain& domain, const Vec& xi, bool interior, double s0, int levels);

/// Throws PreconditionError unless the distances are positive and decreasing
/// and dist(xi + s direction, complement side) > aperture * s for every s.
void check_approach(const ImplicitDomain& domain, const ApproachSpec& approach, bool interior);

struct JumpOptions {
  double support_radius = 1.0;  // f vanishes outside B(xi, support_radius)
  RuleOptions rule{1e-3, 1.5, 8, 16};
  Execution exec = Execution::kParallel;
};

struct JumpReport {
  Vec normal;
  double f_at_base = 0.0;
  std::vector<Vec> plus_values;
  std::vector<Vec> minus_values;
  Vec limit_plus;
  Vec limit_minus;
  Vec pv;
  double jump_residual = 0.0;   // |limit+ - limit- - n f(xi)|
  double plus_residual = 0.0;   // |limit+ - n f / 2 - pv|
  double minus_residual = 0.0;  // |limit- + n f / 2 - pv|
};

/// Evaluates R(f sigma) along an interior (plus) and exterior (minus)
/// approach, each point with a polar rule centered at its foot on the tangent
/// plane, and extrapolates linearly in s.
JumpReport jump_relation_check(const ImplicitDomain& domain, const std::function<double(const Vec&)>& f,
                               const ApproachSpec& plus, const ApproachSpec& minus, const JumpOptions& options);

struct LimitReport {
  std::vector<Vec> values;
  Vec limit;
  Vec target;  // -h(xi) n(xi)
  double residual = 0.0;
};

/// grad u along an interior approach, extrapolated linearly, against -h n.
LimitReport nontangential_gradient_limit_check(const ImplicitDomain& domain, const ApproachSpec& approach, double h,
                                               const wos::PoleSpec& pole, const wos::WalkConfig& cfg);

struct GradientBound {
  double grad_norm = 0.0;
  double bound = 0.0;
  double error = 0.0;  // combined standard/interpolation error
  bool pass = false;
};

/// |grad u(x)| against the integral of h against harmonic measure from x.
/// Without h the density is 1 and the bound is exactly 1.
GradientBound gradient_bound_check(const ImplicitDomain& domain, const Vec& x, const wos::PoleSpec& pole,
                                   const wos::WalkConfig& cfg, const std::function<double(const Vec&)>& h = {});

}  // namespace potlab::potential
