#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "potlab/cones/profile.hpp"
#include "potlab/core/errors.hpp"
#include "potlab/density/density.hpp"

using namespace potlab;
using namespace potlab::density;

namespace {

constexpr double kPi = std::numbers::pi;

ImplicitDomain upper_half_space() { return geometry::half_space(3, unit_vec(3, 2), 0.0); }

geometry::ImplicitDomain hong() {
  static const auto p = std::make_shared<const cones::SphericalProfile>(cones::solve_profile_ode());
  return cones::hong_domain(p);
}

Vec hong_point(double phi, double psi) {
  const double t0 = hong().info().theta0;
  return make_vec({std::cos(t0) * std::cos(phi), std::cos(t0) * std::sin(phi), std::sin(t0) * std::cos(psi),
                   std::sin(t0) * std::sin(psi)});
}

wos::WalkConfig walks(std::size_t n, std::uint64_t seed = 1) {
  wos::WalkConfig c;
  c.walks = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("half-space closed forms") {
  for (double t : {0.5, 1.0, 3.0}) {
    for (double r : {0.1, 1.0, 4.0}) {
      CHECK(halfspace_ball_measure(3, t, r) == doctest::Approx(1 - t / std::sqrt(t * t + r * r)).epsilon(1e-12));
      const double four = 2 / kPi * (std::atan(r / t) - r * t / (r * r + t * t));
      CHECK(halfspace_ball_measure(4, t, r) == doctest::Approx(four).epsilon(1e-12));
    }
  }
  CHECK(halfspace_poisson_kernel(3, 1.0, 0.0) == doctest::Approx(1 / (2 * kPi)));
  CHECK(halfspace_ball_measure(5, 1.0, 1e6) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("finite-pole kernel on the half-space") {
  const auto h = upper_half_space();
  KernelOptions o;
  o.pole = make_vec({0, 0, 1});
  o.walk = walks(100000, 2);
  const auto rep = poisson_kernel_estimate(h, zero_vec(3), {0.4, 0.2, 0.1}, o);
  for (const auto& s : rep.samples) {
    const double exact = halfspace_ball_measure(3, 1.0, s.radius) / (kPi * s.radius * s.radius);
    CHECK(std::abs(s.value - exact) <= 3 * s.std_error);
  }
  CHECK(rep.samples.back().value == doctest::Approx(1 / (2 * kPi)).epsilon(0.1));
  CHECK(rep.explicit_gradient == 1.0);

  // A lower-dimensional set carries no harmonic measure.
  const auto hits = wos::run_walks(h, o.pole, walks(2000));
  CHECK(wos::harmonic_measure(hits, [](const Vec& y) { return y[0] == 0.25; }).value == 0.0);

  CHECK_THROWS_AS(poisson_kernel_estimate(h, zero_vec(3), {1e-4}, o), PreconditionError);
  CHECK_THROWS_AS(poisson_kernel_estimate(h, zero_vec(3), {0.1, 0.2}, o), PreconditionError);
}

TEST_CASE("pole-at-infinity kernels") {
  KernelOptions o;
  o.mode = KernelMode::kInfinity;
  o.walk = walks(1);
  const auto h = upper_half_space();
  for (const auto& s : poisson_kernel_estimate(h, make_vec({0.3, 0, 0}), {1.0, 0.1}, o).samples) {
    CHECK(s.value == doctest::Approx(1.0).epsilon(3 * s.std_error + 1e-12));
  }
  const auto c = hong();
  const auto rep = poisson_kernel_estimate(c, hong_point(0.3, 1.1), {0.25, 0.0625, 0.015625}, o);
  CHECK(rep.explicit_gradient == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(rep.samples.back().value - 1.0) <= 0.02);
  CHECK_THROWS_AS(poisson_kernel_estimate(c, zero_vec(4), {0.1}, o), PreconditionError);
}

TEST_CASE("scaled-pole kernels") {
  KernelOptions o;
  o.mode = KernelMode::kScaledPole;
  o.walk = walks(100000, 4);
  // Exactly the calibration geometry: the ratio is 1 up to Monte Carlo error.
  for (const auto& s : poisson_kernel_estimate(upper_half_space(), zero_vec(3), {1.0, 0.01}, o).samples) {
    CHECK(std::abs(s.value - 1.0) <= 3 * s.std_error);
  }
  o.walk = walks(40000, 5);
  const auto rep = poisson_kernel_estimate(hong(), hong_point(0.7, -0.4), {0.125, 0.03125}, o);
  for (const auto& s : rep.samples) CHECK(std::abs(s.value - 1.0) <= 0.1);
  CHECK(std::abs(rep.samples.back().value - 1.0) <= 3 * rep.samples.back().std_error + 0.02);
}

TEST_CASE("oscillation") {
  const auto h = upper_half_space();
  CHECK(oscillation(h, constant_field(3.0), zero_vec(3), 1.0, 500, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(oscillation(h, normal_field(), make_vec({1, 2, 0}), 0.5, 500, 1) == 0.0);

  auto f = [](const Vec& z) { return z[0] * z[0] + std::sin(z[1]); };
  const double base = oscillation(h, scalar_field("f", f), zero_vec(3), 1.0, 2000, 3);
  CHECK(base > 0.1);
  const double shifted =
      oscillation(h, scalar_field("f+7", [&](const Vec& z) { return f(z) + 7.0; }), zero_vec(3), 1.0, 2000, 3);
  const double scaled =
      oscillation(h, scalar_field("-3f", [&](const Vec& z) { return -3.0 * f(z); }), zero_vec(3), 1.0, 2000, 3);
  CHECK(shifted == doctest::Approx(base).epsilon(1e-10));
  CHECK(scaled == doctest::Approx(3 * base).epsilon(1e-12));

  const auto kp = geometry::kp_cone();
  const double near = oscillation(kp, normal_field(), zero_vec(4), 1.0, 4000, 9);
  const double far = oscillation(kp, normal_field(), zero_vec(4), 100.0, 4000, 9);
  CHECK(near > 0.5);
  CHECK(far == doctest::Approx(near).epsilon(0.02));
  // Radial symmetry of the KP normal: |n - mean|^2 averages to 1 because the
  // mean of the normal over a vertex ball vanishes.
  CHECK(near == doctest::Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(oscillation(h, normal_field(), make_vec({0, 0, 5}), 1.0, 100, 1), PreconditionError);
}

TEST_CASE("vmo profiles") {
  const std::vector<double> scales{1.0, 0.25, 1.0 / 16, 1.0 / 64};
  VmoOptions o;
  o.center_window = geometry::Ball{zero_vec(3), 2.0};
  o.samples = 1000;
  const auto flat = vmo_profile(upper_half_space(), normal_field(), scales, o);
  for (double v : flat.sup_oscillation) CHECK(v == 0.0);

  const auto c = hong();
  o.center_window = geometry::Ball{zero_vec(4), 1.0};
  o.centers_per_scale = 4;
  o.samples = 3000;
  const auto prof = vmo_profile(c, normal_field(), scales, o);
  CHECK(prof.centers_per_scale == 5);
  for (double v : prof.sup_oscillation) {
    CHECK(v > 0.5);
    CHECK(v == doctest::Approx(prof.sup_oscillation[0]).epsilon(0.02));
  }
  const auto logh = vmo_profile(c, log_kernel_field(c), scales, o);
  for (double v : logh.sup_oscillation) CHECK(v <= 1e-6);

  std::ostringstream os;
  write_profile_csv(os, prof);
  CHECK(os.str().rfind("scale,sup_oscillation,centers\n1,", 0) == 0);
  CHECK_THROWS_AS(vmo_profile(c, normal_field(), {0.1, 1.0}, o), PreconditionError);
}

TEST_CASE("doubling") {
  const auto h = upper_half_space();
  const auto d = doubling_ratio(h, make_vec({0, 0, 10}), zero_vec(3), 1.0, walks(1000000, 6));
  const double oracle = halfspace_ball_measure(3, 10, 2) / halfspace_ball_measure(3, 10, 1);
  CHECK(oracle == doctest::Approx(3.913).epsilon(1e-3));
  CHECK(d.value == doctest::Approx(oracle).epsilon(0.05));
  CHECK(d.value >= 1.0);
  CHECK(d.value <= 16.0);
  CHECK_THROWS_AS(doubling_ratio(h, make_vec({0, 0, 10}), zero_vec(3), 1e-3, walks(100)), NumericError);
  CHECK_THROWS_AS(doubling_ratio(h, make_vec({0, 0, 1}), zero_vec(3), 1.0, walks(100)), PreconditionError);

  const auto kp = geometry::kp_cone();
  const Vec xi = make_vec({1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)});
  for (double r = 1.0 / 8; r <= 1.0; r *= 2) {
    const auto k = doubling_ratio(kp, xi - 4 * r * kp.outer_normal(xi), xi, r, walks(20000, 7));
    CHECK(k.value >= 1.0);
    CHECK(k.value <= 32.0);
  }
}

TEST_CASE("A-infinity ratios") {
  const auto h = upper_half_space();
  const Vec pole = make_vec({0, 0, 2});
  const auto half = ainfty_ratio_check(h, pole, zero_vec(3), 1.0, [](const Vec& y) { return y.norm() < 0.5; }, 0.1,
                                       2.0, walks(100000, 8));
  CHECK(std::abs(half.sigma_ratio - 0.25) <= 0.01);
  const double oracle = halfspace_ball_measure(3, 2, 0.5) / halfspace_ball_measure(3, 2, 1);
  CHECK(std::abs(half.mid - oracle) <= 3 * half.mid_error);
  CHECK(half.pass);

  const auto whole = ainfty_ratio_check(h, pole, zero_vec(3), 1.0, [](const Vec&) { return true; }, 0.1, 2.0,
                                        walks(10000, 8));
  CHECK(whole.sigma_ratio == 1.0);
  CHECK(whole.mid == 1.0);
  CHECK(whole.pass);

  const auto c = hong();
  const Vec xi = hong_point(0.2, 0.9);
  const double r = 0.25;
  const double inner = r * std::cbrt(0.9);
  const auto ann = ainfty_ratio_check(c, xi - 4 * r * c.outer_normal(xi), xi, r,
                                      [&](const Vec& y) { return (y - xi).norm() > inner; }, 0.25, 4.0,
                                      walks(200000, 9));
  CHECK(ann.sigma_ratio == doctest::Approx(0.1).epsilon(0.1));
  CHECK(ann.pass);

  CHECK_THROWS_AS(ainfty_ratio_check(h, pole, zero_vec(3), 1.0, [](const Vec&) { return false; }, 0.1, 2.0, walks(10)),
                  NumericError);
}
