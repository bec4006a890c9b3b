#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "potlab/blowup/blowup.hpp"
#include "potlab/cones/profile.hpp"
#include "potlab/core/errors.hpp"

using namespace potlab;
using namespace potlab::blowup;

namespace {

constexpr double kPi = std::numbers::pi;

ImplicitDomain upper_half_space() { return geometry::half_space(3, unit_vec(3, 2), 0.0); }

const cones::SphericalProfile& profile() {
  static const cones::SphericalProfile p = cones::solve_profile_ode();
  return p;
}

ImplicitDomain hong() {
  static const auto p = std::make_shared<const cones::SphericalProfile>(profile());
  return cones::hong_domain(p);
}

Vec hong_point(double phi, double psi) {
  const double t0 = hong().info().theta0;
  return make_vec({std::cos(t0) * std::cos(phi), std::cos(t0) * std::sin(phi), std::sin(t0) * std::cos(psi),
                   std::sin(t0) * std::sin(psi)});
}

RescaleOptions options(std::size_t walks, std::uint64_t seed) {
  RescaleOptions o;
  o.walk.walks = walks;
  o.walk.seed = seed;
  return o;
}

double plane_u(const Vec& x) { return std::max(x[x.size() - 1], 0.0); }

}  // namespace

TEST_CASE("rescaled domains") {
  const auto h = upper_half_space();
  const auto r = rescale_domain(h, make_vec({1, 2, 0}), 0.5);
  CHECK(r.signed_distance(make_vec({0, 0, 1})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rescale_domain(h, make_vec({0, 0, 1}), 1.0), PreconditionError);
  CHECK_THROWS_AS(rescale_domain(h, zero_vec(3), 0.0), PreconditionError);
}

TEST_CASE("rescaled u on the half-space") {
  const auto h = upper_half_space();
  RescalePole pole;
  pole.point = make_vec({0, 0, 10});
  const auto o = options(1000000, 3);
  // g(y, p) sigma(B_1) / omega(B_1) in closed form for y = (0, 0, 1).
  const double g = (1.0 / 9.0 - 1.0 / 11.0) / (4 * kPi);
  const double w = 1.0 - 10.0 / std::sqrt(101.0);
  const double oracle = g * kPi / w;
  CHECK(oracle == doctest::Approx(1.0177).epsilon(1e-4));
  const auto est = rescaled_u(h, make_vec({0, 0, 1}), zero_vec(3), 1.0, pole, o);
  CHECK(std::abs(est.value - oracle) <= 3 * est.std_error + 0.01);
  CHECK(rescaled_u(h, make_vec({0, 0, -1}), zero_vec(3), 1.0, pole, options(100, 1)).value == 0.0);

  pole.point = make_vec({0, 0, 5});
  CHECK_THROWS_AS(rescaled_u(h, make_vec({0, 0, 1}), zero_vec(3), 1.0, pole, o), PreconditionError);

  RescalePole inf;
  inf.at_infinity = true;
  const auto at_inf = rescaled_u(h, make_vec({0.3, 0, 0.7}), zero_vec(3), 2.0, inf, options(1, 1));
  CHECK(at_inf.value == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("rescaled kernels") {
  RescalePole inf;
  inf.at_infinity = true;
  const auto c = hong();
  const Vec xi = hong_point(0.4, 1.3);
  // Hong's solution has h = 1 on the whole boundary.
  CHECK(rescaled_kernel_mean(c, xi, 0.1, inf, 200, options(1, 1)).value == doctest::Approx(1.0).epsilon(1e-6));
  // At the vertex u is homogeneous of degree one, so u_i = u.
  const Vec y = make_vec({0.5, 0.1, 0.2, 0.1});
  REQUIRE(c.contains(y));
  for (double r : {1.0, 0.01}) {
    CHECK(rescaled_u(c, y, zero_vec(4), r, inf, options(1, 1)).value ==
          doctest::Approx(cones::hong_value(profile(), y)).epsilon(1e-6));
  }

  const auto h = upper_half_space();
  RescalePole pole;
  pole.point = make_vec({0, 0, 16});
  auto o = options(400000, 5);
  o.kernel_radius = 0.5;
  const auto mean = rescaled_kernel_mean(h, zero_vec(3), 1.0, pole, 16, o);
  CHECK(mean.value == doctest::Approx(1.0).epsilon(0.05));
  const auto point = rescaled_kernel(h, make_vec({0.2, 0.1, 0}), zero_vec(3), 1.0, pole, o);
  CHECK(point.value == doctest::Approx(1.0).epsilon(0.08));
  CHECK_THROWS_AS(rescaled_kernel(h, make_vec({0.2, 0.1, 0.3}), zero_vec(3), 1.0, pole, o), PreconditionError);
}

TEST_CASE("blow-down theta traces") {
  const auto c = hong();
  const std::vector<double> radii{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8};
  const auto smooth = blowdown_theta_trace(c, hong_point(0.3, 0.8), radii);
  CHECK(log_log_slope(smooth) == doctest::Approx(1.0).epsilon(0.1));
  const auto vertex = blowdown_theta_trace(c, zero_vec(4), {0.25, 2.0, 8.0});
  for (const auto& p : vertex) CHECK(p.theta == doctest::Approx(vertex[0].theta).epsilon(0.02));
  CHECK(vertex[0].theta > 0.5);

  CHECK(log_log_slope({{1.0, 2.0}, {2.0, 8.0}, {4.0, 32.0}}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(blowdown_theta_trace(c, zero_vec(4), {1.0, 0.5}), PreconditionError);
}

TEST_CASE("flatness class") {
  const Vec x0 = zero_vec(3);
  const ScalarField v = [](const Vec& x) { return std::max(-x[2], 0.0); };
  CHECK(flatness_class_check(v, x0, 1.0, unit_vec(3, 2), 0.1, 0.1, 4000).pass);
  for (double gamma : {0.05, 0.2}) {
    const Vec nu = make_vec({std::sin(gamma), 0, std::cos(gamma)});
    const auto r = flatness_class_check(v, x0, 1.0, nu, 0.1, 0.1, 4000);
    CHECK(r.pass == (std::sin(gamma) <= 0.1));
    if (!r.pass) CHECK(r.failed_condition >= 1);
  }
  const auto neg = flatness_class_check([](const Vec& x) { return -x[2] - 0.5; }, x0, 1.0, unit_vec(3, 2), 0.1, 0.1,
                                        1000);
  CHECK_FALSE(neg.pass);
  CHECK(neg.failed_condition == 2);
  const auto lifted = flatness_class_check([&](const Vec& x) { return v(x) + 0.01; }, x0, 1.0, unit_vec(3, 2), 0.1,
                                           0.1, 1000);
  CHECK(lifted.failed_condition == 1);
  CHECK(lifted.witness[2] >= 0.1);
  CHECK_THROWS_AS(flatness_class_check(v, x0, 1.0, unit_vec(3, 2), 1.5, 0.1, 10), PreconditionError);
}

TEST_CASE("first variation") {
  const Ball ball{zero_vec(3), 1.0};
  const auto phi = bump_field(zero_vec(3), 0.4, unit_vec(3, 2));
  // Numerical Jacobian of the bump agrees with the analytic one.
  const Vec x = make_vec({0.1, -0.05, 0.12});
  const double e = 1e-6;
  const Mat j = phi.jacobian(x);
  for (int k = 0; k < 3; ++k) {
    Vec a = x;
    Vec b = x;
    a[k] += e;
    b[k] -= e;
    CHECK(j(2, k) == doctest::Approx((phi.value(a)[2] - phi.value(b)[2]) / (2 * e)).epsilon(1e-6));
  }

  const ScalarField u = plane_u;
  const double coarse = std::abs(first_variation_residual(u, phi, ball, 1.0 / 32));
  const double fine = std::abs(first_variation_residual(u, phi, ball, 1.0 / 64));
  CHECK(fine <= 0.6 * coarse + 1e-12);
  CHECK(fine <= 0.01);
  CHECK(first_variation_residual(u, phi, ball, 1.0 / 64, Execution::kSerial) ==
        doctest::Approx(first_variation_residual(u, phi, ball, 1.0 / 64)).epsilon(1e-12));

  const auto tangential = bump_field(zero_vec(3), 0.4, unit_vec(3, 0));
  CHECK(std::abs(first_variation_residual(u, tangential, ball, 1.0 / 64)) <= 1e-3);

  const ScalarField fake = [](const Vec& p) { return 2.0 * std::max(p[2], 0.0); };
  CHECK(std::abs(first_variation_residual(fake, phi, ball, 1.0 / 64)) > 10 * fine);
  const auto lin = sum(phi, scaled(tangential, 2.0));
  CHECK(first_variation_residual(fake, lin, ball, 1.0 / 64) ==
        doctest::Approx(first_variation_residual(fake, phi, ball, 1.0 / 64) +
                        2 * first_variation_residual(fake, tangential, ball, 1.0 / 64))
            .epsilon(1e-9));

  CHECK_THROWS_AS(first_variation_residual(u, bump_field(make_vec({0.8, 0, 0}), 0.4, unit_vec(3, 2)), ball, 0.05),
                  PreconditionError);
  CHECK_THROWS_AS(first_variation_residual(u, phi, ball, 0.5), PreconditionError);

  // |grad u|^2 + 1{u > 0} integrates to the volume of the half ball plus itself.
  CHECK(ac_functional(u, ball, 1.0 / 64) == doctest::Approx(4 * kPi / 3).epsilon(0.02));
}

TEST_CASE("sphere averages") {
  const auto avg = sphere_average_check(plane_u, zero_vec(3), {0.5, 1.0, 4.0}, 16);
  for (const auto& a : avg) CHECK(a.value == doctest::Approx(kPi).epsilon(1e-10));
  const auto c = hong();
  const auto v = [&](const Vec& y) { return cones::hong_value(profile(), y); };
  const auto cone = sphere_average_check(v, zero_vec(4), {0.5, 2.0}, 16);
  CHECK(cone[0].value == doctest::Approx(cone[1].value).epsilon(1e-10));
  CHECK(cone[0].value > 0.0);
}

TEST_CASE("Gauss-Green") {
  const auto h = upper_half_space();
  // Lattice cells straddle the plane: the residual is O(h).
  const double spacing = 1.0 / 64;
  const auto flat = gauss_green_residual(h, ScalarBump{make_vec({0.1, 0, 0.05}), 0.5}, spacing);
  CHECK(flat.surface == doctest::Approx(0.30921346).epsilon(1e-6));
  CHECK(flat.residual <= spacing * flat.surface);
  // Cell faces on the plane.
  const auto aligned = gauss_green_residual(h, ScalarBump{make_vec({0.1, 0, 0}), 0.5}, spacing);
  CHECK(aligned.residual <= 4 * spacing * spacing * aligned.surface);
  const auto inside = gauss_green_residual(h, ScalarBump{make_vec({0, 0, 2}), 0.5}, 1.0 / 32);
  CHECK(inside.surface == 0.0);
  CHECK(std::abs(inside.volume) <= 1e-3);

  const auto c = hong();
  const Vec xi = hong_point(0.2, 0.5);
  const auto coarse = gauss_green_residual(c, ScalarBump{xi, 0.15}, 0.15 / 8);
  const auto fine = gauss_green_residual(c, ScalarBump{xi, 0.15}, 0.15 / 16);
  CHECK(fine.residual <= 0.02 * fine.surface);
  CHECK(fine.residual <= coarse.residual + 1e-6);
}

TEST_CASE("normal blow-up integrals") {
  const Ball window{zero_vec(3), 1.0};
  const std::vector<double> amps{0.02, 0.01, 0.005};
  std::vector<ImplicitDomain> doms;
  for (double a : amps) doms.push_back(geometry::perturbed_graph(3, a, 3.0));
  const auto vals = normal_vmo_blowup_integral(doms, window, 4000);
  CHECK(vals[0] > 0.0);
  CHECK(vals[1] / vals[0] == doctest::Approx(0.25).epsilon(0.05));
  CHECK(vals[2] / vals[1] == doctest::Approx(0.25).epsilon(0.05));
  CHECK(normal_vmo_blowup_integral({upper_half_space()}, window, 100)[0] == 0.0);
}
