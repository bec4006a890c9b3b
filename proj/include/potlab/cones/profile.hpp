#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"

namespace potlab::cones {

/// Angular profile of a degree-one homogeneous harmonic function on the
/// Hong cone in R^4. With s = sin(theta), c = cos(theta) the profile solves
///
///   (s c f')' + lambda s c f = 0,   f(0) = 1, f'(0) = 0,
///
/// where lambda = 3 is the S^3 eigenvalue of degree-one harmonics. The
/// eigenvalue is a parameter so that other values can be studied.
class SphericalProfile final : public geometry::ConeProfile {
 public:
  double theta0() const override { return theta0_; }
  double tau() const override { return tau_; }
  /// f(theta) by cubic Hermite interpolation (series below the startup
  /// point); 0 for theta >= theta0.
  double value(double theta) const override;
  double derivative(double theta) const override;

  double fprime_at_theta0() const { return fprime0_; }
  double eigenvalue() const { return lambda_; }
  double solver_tolerance() const { return tol_; }
  double step() const { return step_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<double>& f_prime() const { return fp_; }
  /// f strictly decreasing on the grid after the startup region.
  bool decreasing() const { return decreasing_; }

  /// Accurate (f, f') at theta in [0, theta0] by re-integrating from the
  /// nearest stored node with tolerance `tol`.
  std::array<double, 2> integrate_to(double theta, double tol) const;

 private:
  friend SphericalProfile solve_profile_ode(double step, double tol, double eigenvalue);
  std::vector<double> grid_;
  std::vector<double> f_;
  std::vector<double> fp_;
  double theta0_ = 0.0;
  double fprime0_ = 0.0;
  double tau_ = 0.0;
  double tol_ = 0.0;
  double step_ = 0.0;
  double lambda_ = 3.0;
  bool decreasing_ = false;
};

inline constexpr double kStartup = 1e-3;
inline constexpr double kHardStop = 1e-6;  // distance to pi/2 where the solver gives up

/// Two-term series at the regular singular point theta = 0:
/// f = 1 - (lambda/4) theta^2 + b theta^4, b = (16a/3 - lambda a + 2 lambda/3)/16, a = -lambda/4.
std::array<double, 2> startup_series(double theta, double eigenvalue);

/// Adaptive Dormand-Prince integration from the startup point with maximum
/// step `step`, stopped at the first sign change of f, followed by a TOMS748
/// root refinement. Throws NumericError when f keeps its sign up to
/// pi/2 - 1e-6 or when f'(theta0) >= 0.
SphericalProfile solve_profile_ode(double step = 1e-3, double tol = 1e-10, double eigenvalue = 3.0);

struct RootEstimate {
  double theta0 = 0.0;
  double fprime = 0.0;
};

/// Independent estimate of theta0 from classical fixed-step RK4 at steps h
/// and h/2, combined by Richardson extrapolation (fourth order).
struct FixedStepCheck {
  RootEstimate coarse;
  RootEstimate fine;
  RootEstimate extrapolated;
};
FixedStepCheck fixed_step_theta0(double h, double eigenvalue = 3.0);

/// theta(x) = atan2(|(x3, x4)|, |(x1, x2)|).
double hong_theta(const Vec& x);
double hong_value(const SphericalProfile& profile, const Vec& x);
Vec hong_gradient(const SphericalProfile& profile, const Vec& x);

struct OverdeterminedReport {
  double eigen_residual = 0.0;
  double bc_residual = 0.0;
  std::array<double, 3> steps{0.02, 0.01, 0.005};
  std::array<double, 3> laplacian_residual{};
  double laplacian_order = 0.0;  // min of the two observed orders
  double max_interior_gradient = 0.0;
  std::size_t samples = 0;
};

OverdeterminedReport verify_overdetermined(const SphericalProfile& profile, std::size_t sample_count,
                                           std::uint64_t seed);

/// Hong cone carrying the explicit solution.
geometry::ImplicitDomain hong_domain(std::shared_ptr<const SphericalProfile> profile);

/// Omega x R^extra; membership and normals lift from the base.
geometry::ImplicitDomain product_extend(const geometry::ImplicitDomain& base, int extra_dims);

/// CSV with columns theta,f,fprime.
void write_profile_csv(std::ostream& os, const SphericalProfile& profile, double spacing);

}  // namespace potlab::cones
