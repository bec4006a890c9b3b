#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "potlab/core/parallel.hpp"
#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"
#include "potlab/geometry/flatness.hpp"
#include "potlab/geometry/sampling.hpp"
#include "potlab/wos/wos.hpp"

namespace potlab::blowup {

using geometry::Ball;
using geometry::ImplicitDomain;

/// (Omega - x_i) / r_i, for x_i on the boundary.
ImplicitDomain rescale_domain(const ImplicitDomain& domain, const Vec& x_i, double r_i);

/// Pole of the rescaled Green functions: a point, or infinity with the
/// explicit u.
struct RescalePole {
  bool at_infinity = false;
  Vec point;
};

struct RescaleOptions {
  wos::WalkConfig walk;
  std::size_t surface_draws = 20000;
  double kernel_radius = 0.25;  // balls B(y, kernel_radius * r_i) for pointwise h
  double min_separation = 10.0;  // |p - x_i| / r_i
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// u_i(x) = g(r_i x + x_i, p) sigma(B(x_i, r_i)) / (r_i omega^p(B(x_i, r_i))).
/// The Green function and harmonic measure share one batch of walks from p;
/// 0 when r_i x + x_i lies outside the domain. At infinity g is replaced by u
/// and omega(B) by the integral of h = |grad u| over the boundary ball.
Estimate rescaled_u(const ImplicitDomain& domain, const Vec& x, const Vec& x_i, double r_i, const RescalePole& pole,
                    const RescaleOptions& options);

/// h_i(x) = h(r_i x + x_i) sigma(B(x_i, r_i)) / omega^p(B(x_i, r_i)) for x on
/// the rescaled boundary, with h from a small ball in the same walk batch.
Estimate rescaled_kernel(const ImplicitDomain& domain, const Vec& x, const Vec& x_i, double r_i,
                         const RescalePole& pole, const RescaleOptions& options);

/// Mean of h_i over `points` surface-measure samples of the rescaled boundary
/// in B(0, 1).
Estimate rescaled_kernel_mean(const ImplicitDomain& domain, const Vec& x_i, double r_i, const RescalePole& pole,
                              std::size_t points, const RescaleOptions& options);

struct ThetaPoint {
  double radius = 0.0;
  double theta = 0.0;
};

/// best_plane flatness of the boundary at x for each radius.
std::vector<ThetaPoint> blowdown_theta_trace(const ImplicitDomain& domain, const Vec& x,
                                             const std::vector<double>& radii,
                                             const geometry::FlatnessOptions& options = {});

/// Least-squares slope of log theta against log r.
double log_log_slope(const std::vector<ThetaPoint>& trace);

using ScalarField = std::function<double(const Vec&)>;

struct FlatnessClassResult {
  bool pass = false;
  int failed_condition = 0;  // 1: v != 0 beyond the slab, 2: lower bound violated
  Vec witness;
};

/// Membership of v in the flatness class at (x0, rho) with direction nu:
/// v = 0 where (x - x0).nu >= sigma_plus rho, v >= -(x - x0).nu - sigma_minus rho,
/// checked on uniform samples of B(x0, rho) and of its sphere.
FlatnessClassResult flatness_class_check(const ScalarField& v, const Vec& x0, double rho, const Vec& nu,
                                         double sigma_plus, double sigma_minus, std::size_t samples,
                                         std::uint64_t seed = 1);

/// Smooth compactly supported vector field with its Jacobian (rows: components).
struct TestField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
  Vec center;
  double reach = 0.0;  // support inside B(center, reach)
};

/// direction * prod_k b((x_k - c_k) / half_width), b(t) = exp(-1 / (1 - t^2)).
TestField bump_field(const Vec& center, double half_width, const Vec& direction);
TestField scaled(const TestField& f, double factor);
TestField sum(const TestField& a, const TestField& b);

/// Sum over the midpoint lattice c + (k + 1/2) h clipped to the ball of
/// |grad u|^2 + 1{u > 0}, gradients by central differences with step h.
double ac_functional(const ScalarField& u, const Ball& ball, double spacing, Execution exec = Execution::kParallel);

/// The first variation integral of the functional along phi.
double first_variation_residual(const ScalarField& u, const TestField& phi, const Ball& ball, double spacing,
                                Execution exec = Execution::kParallel);

struct SphereAverage {
  double radius = 0.0;
  double value = 0.0;
};

/// r^{-n-1} times the integral of u over the sphere of radius r about x.
std::vector<SphereAverage> sphere_average_check(const ScalarField& u, const Vec& x, const std::vector<double>& radii,
                                                int order);

/// Radial bump zeta = b(|x - c| / rho) with its gradient.
struct ScalarBump {
  Vec center;
  double radius = 1.0;
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
};

struct GaussGreen {
  double volume = 0.0;   // -int_{u > 0} grad u . grad zeta
  double surface = 0.0;  // int_{boundary} zeta
  double residual = 0.0;
};

/// Both sides of the Gauss-Green identity for a domain with explicit u.
GaussGreen gauss_green_residual(const ImplicitDomain& domain, const ScalarBump& zeta, double spacing);

/// Integral of |n_i + e_d|^2 over the boundary of each domain inside the window.
std::vector<double> normal_vmo_blowup_integral(const std::vector<ImplicitDomain>& domains, const Ball& window,
                                               std::size_t samples, std::uint64_t seed = 1);

}  // namespace potlab::blowup
