#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"
#include "potlab/geometry/sampling.hpp"
#include "potlab/wos/wos.hpp"

namespace potlab::density {

using geometry::ImplicitDomain;

/// Harmonic measure of {|y'| < radius} on {x_d > 0} seen from (0, ..., 0, t).
double halfspace_ball_measure(int dim, double t, double radius);

/// Poisson kernel of {x_d > 0} at a foot-point distance rho from a pole at height t.
double halfspace_poisson_kernel(int dim, double t, double rho);

enum class KernelMode {
  kFinitePole,  // omega^p(B) / sigma(B)
  kInfinity,    // corkscrew value of u, normalized so the half-space gives h = 1
  kScaledPole,  // pole and corkscrew at scale r, calibrated against the tangent half-space
};

struct KernelOptions {
  KernelMode mode = KernelMode::kFinitePole;
  Vec pole;  // finite-pole mode
  wos::PoleSpec u;
  wos::WalkConfig walk;
  std::size_t surface_draws = 20000;
};

struct KernelSample {
  double radius = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct KernelReport {
  std::vector<KernelSample> samples;
  bool has_explicit = false;
  double explicit_gradient = 0.0;  // |grad u(xi)| from inside, explicit u only
};

/// Estimates of h(xi) from balls B(xi, r), one per radius.
///
/// Scaled-pole mode places the pole at xi - 2 r n and the corkscrew point at
/// x_B = xi - (r/2) n and reports
///   [omega^{p}(B) / sigma(B)] u(x_B) / g(x_B, p)
/// divided by the same quantity for the tangent half-space (closed form).
/// Harmonic measure and the Green function share one batch of walks from the
/// pole, with the shell width scaled by r.
KernelReport poisson_kernel_estimate(const ImplicitDomain& domain, const Vec& xi, const std::vector<double>& radii,
                                     const KernelOptions& options);

/// A boundary function with values in R^k.
struct BoundaryField {
  std::string name;
  std::function<Eigen::VectorXd(const geometry::BoundarySample&)> evaluate;
};

BoundaryField normal_field();
BoundaryField constant_field(double value);
/// log max(h, 1e-12) with h = |grad u| just inside the boundary (explicit u).
BoundaryField log_kernel_field(const ImplicitDomain& domain);
/// Any scalar function of the point.
BoundaryField scalar_field(std::string name, std::function<double(const Vec&)> f);

/// L2 mean oscillation of the field over the boundary in B(xi, r), weighted by
/// surface measure. Throws PreconditionError when the window holds no samples.
double oscillation(const ImplicitDomain& domain, const BoundaryField& field, const Vec& xi, double r,
                   std::size_t samples, std::uint64_t seed);

struct OscillationProfile {
  std::vector<double> scales;
  std::vector<double> sup_oscillation;
  std::size_t centers_per_scale = 0;
};

struct VmoOptions {
  geometry::Ball center_window;  // where random centers are drawn by surface measure
  std::size_t centers_per_scale = 8;
  std::size_t samples = 4000;
  bool include_vertex = true;  // the origin, for conical domains
  std::uint64_t seed = 1;
};

/// Per scale, the sup over one fixed set of centers of oscillation(field, c, r).
OscillationProfile vmo_profile(const ImplicitDomain& domain, const BoundaryField& field,
                               const std::vector<double>& scales, const VmoOptions& options);

void write_profile_csv(std::ostream& os, const OscillationProfile& profile);

struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// omega^p(B(xi, 2r)) / omega^p(B(xi, r)) from one batch of walks.
RatioEstimate doubling_ratio(const ImplicitDomain& domain, const Vec& pole, const Vec& xi, double r,
                             const wos::WalkConfig& cfg);

struct AinftyCheck {
  double sigma_ratio = 0.0;  // sigma(E) / sigma(B)
  double lhs = 0.0;          // C^{-1} sigma_ratio^{1 + eps}
  double mid = 0.0;          // omega(E) / omega(B)
  double mid_error = 0.0;
  double rhs = 0.0;          // C sigma_ratio^{1 - eps}
  double constant = 0.0;
  bool pass = false;
};

/// Both sides of the A-infinity comparison of omega^p and sigma on E inside
/// B(xi, r), E given as a predicate.
AinftyCheck ainfty_ratio_check(const ImplicitDomain& domain, const Vec& pole, const Vec& xi, double r,
                               const wos::BoundaryPredicate& in_e, double eps, double constant,
                               const wos::WalkConfig& cfg, std::size_t surface_draws = 20000);

}  // namespace potlab::density
