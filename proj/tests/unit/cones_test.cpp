#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>

#include "potlab/cones/profile.hpp"
#include "potlab/core/errors.hpp"
#include "potlab/core/rng.hpp"
#include "potlab/wos/wos.hpp"

using namespace potlab;
using namespace potlab::cones;

namespace {

// For lambda = 3 the profile is the Legendre function P_{1/2}(cos 2 theta)
// = 2F1(-1/2, 3/2; 1; sin^2 theta), summed here term by term.
double hyp2f1(double a, double b, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 5000; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

double oracle_f(double t) { return hyp2f1(-0.5, 1.5, 1.0, std::sin(t) * std::sin(t)); }
double oracle_fp(double t) {
  return (-0.5 * 1.5) * hyp2f1(0.5, 2.5, 2.0, std::sin(t) * std::sin(t)) * 2.0 * std::sin(t) * std::cos(t);
}

double oracle_theta0() {
  double lo = 1.0;
  double hi = 1.3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

const SphericalProfile& shared_profile() {
  static const SphericalProfile p = solve_profile_ode();
  return p;
}

}  // namespace

TEST_CASE("profile root and boundary condition") {
  const auto& p = shared_profile();
  CHECK(p.theta0() > 0.0);
  CHECK(p.theta0() < std::numbers::pi / 2);
  CHECK(std::abs(p.integrate_to(p.theta0(), 1e-13)[0]) <= 1e-12);
  CHECK(p.fprime_at_theta0() < 0.0);
  CHECK(std::abs(p.tau() * std::abs(p.fprime_at_theta0()) - 1.0) <= 1e-10);
  CHECK(p.decreasing());

  CHECK(p.theta0() == doctest::Approx(oracle_theta0()).epsilon(1e-10));
  CHECK(p.fprime_at_theta0() == doctest::Approx(oracle_fp(oracle_theta0())).epsilon(1e-8));
  for (double t : {0.2, 0.5, 0.9, 1.1}) {
    CHECK(p.value(t) == doctest::Approx(oracle_f(t)).epsilon(1e-9));
    CHECK(p.derivative(t) == doctest::Approx(oracle_fp(t)).epsilon(1e-8));
  }
}

TEST_CASE("startup series") {
  const auto& p = shared_profile();
  const double t = 0.05;
  const auto s = startup_series(t, 3.0);
  CHECK(std::abs(s[0] - p.integrate_to(t, 1e-13)[0]) / p.value(t) <= 10 * p.solver_tolerance());
  CHECK(std::abs(s[0] - oracle_f(t)) <= 10 * p.solver_tolerance());
  const auto e = startup_series(2 * kStartup, 3.0);
  CHECK(std::abs(e[0] - p.integrate_to(2 * kStartup, 1e-13)[0]) <= p.solver_tolerance());
}

TEST_CASE("independent fixed-step integrator agrees on theta0") {
  const auto& p = shared_profile();
  const auto c = fixed_step_theta0(1e-3);
  CHECK(std::abs(c.extrapolated.theta0 - p.theta0()) <= 1e-9);
  CHECK(std::abs(c.fine.theta0 - p.theta0()) <= 1e-9);
}

TEST_CASE("solver errors") {
  CHECK_THROWS_AS(solve_profile_ode(2e-3, 1e-10), PreconditionError);
  CHECK_THROWS_AS(solve_profile_ode(1e-3, 0.0), PreconditionError);
  CHECK_THROWS_AS(solve_profile_ode(1e-3, 1e-10, 0.05), NumericError);
}

TEST_CASE("Hong solution values and gradients") {
  auto profile = std::make_shared<SphericalProfile>(shared_profile());
  const auto& p = *profile;
  const double t0 = p.theta0();
  CHECK(hong_value(p, make_vec({3, 0, 0, 0})) == doctest::Approx(3 * p.tau()));
  CHECK(hong_value(p, make_vec({std::cos(t0), 0, std::sin(t0), 0})) <= 1e-15);
  const Vec x = make_vec({0.4, -0.3, 0.2, 0.1});
  CHECK(hong_value(p, 2.0 * x) == 2.0 * hong_value(p, x));
  CHECK(hong_value(p, 3.7 * x) == doctest::Approx(3.7 * hong_value(p, x)).epsilon(1e-14));

  const Vec axis = hong_gradient(p, make_vec({2, 0, 0, 0}));
  CHECK(axis[0] == doctest::Approx(p.tau()));
  CHECK(axis.tail(3).norm() <= 1e-12);
  CHECK_THROWS_AS(hong_gradient(p, zero_vec(4)), PreconditionError);

  const auto cone = hong_domain(profile);
  CounterRng rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    const Vec w = rng.unit_sphere(4);
    const double phi = std::atan2(w[1], w[0]);
    const double psi = std::atan2(w[3], w[2]);
    const double r = 0.5 + rng.uniform();
    const Vec xi = r * make_vec({std::cos(t0) * std::cos(phi), std::cos(t0) * std::sin(phi),
                                 std::sin(t0) * std::cos(psi), std::sin(t0) * std::sin(psi)});
    const Vec g = hong_gradient(p, xi);
    CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((g + cone.outer_normal(xi)).norm() <= 1e-9);
    // Continuity across the boundary and agreement with the wos explicit path.
    CHECK(hong_value(p, xi * (1 + 1e-12)) <= 1e-10);
    CHECK((wos::explicit_grad_u(cone, xi) - g).norm() <= 1e-12);
  }

  double max_grad = 0.0;
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec y = 2.0 * rng.unit_ball(4);
    const bool in = cone.contains(y);
    CHECK(in == (hong_value(p, y) > 0.0));
    if (!in) continue;
    ++inside;
    max_grad = std::max(max_grad, hong_gradient(p, y).norm());
  }
  CHECK(inside > 1000);
  CHECK(max_grad <= 1.0 + 1e-9);
}

TEST_CASE("overdetermined problem") {
  const auto& p = shared_profile();
  const auto rep = verify_overdetermined(p, 200, 3);
  CHECK(rep.eigen_residual <= 10 * p.solver_tolerance());
  CHECK(rep.bc_residual <= 1e-10);
  CHECK(rep.laplacian_order >= 1.9);
  CHECK(rep.laplacian_residual[2] < rep.laplacian_residual[0]);
  CHECK(rep.max_interior_gradient <= 1.0 + 1e-9);
}

TEST_CASE("eigenvalue 1 does not give a harmonic function") {
  const auto p1 = solve_profile_ode(1e-3, 1e-10, 1.0);
  CHECK(p1.theta0() == doctest::Approx(1.47692).epsilon(1e-4));
  const auto rep = verify_overdetermined(p1, 100, 3);
  CHECK(rep.eigen_residual <= 10 * p1.solver_tolerance());
  CHECK(rep.laplacian_residual[2] > 0.1);
  CHECK(rep.laplacian_order < 0.5);
}

TEST_CASE("product extension") {
  auto profile = std::make_shared<SphericalProfile>(shared_profile());
  const auto cone = hong_domain(profile);
  const auto prod = product_extend(cone, 1);
  CHECK(prod.dim() == 5);
  CHECK(prod.contains(make_vec({1, 0, 0, 0, 7})));
  const double t0 = profile->theta0();
  const Vec xi = make_vec({std::cos(t0), 0, std::sin(t0), 0, -2});
  const Vec n = prod.outer_normal(xi);
  CHECK(n[4] == 0.0);
  CHECK((n.head(4) - cone.outer_normal(xi.head(4))).norm() <= 1e-15);
  CHECK(wos::explicit_u(prod, make_vec({2, 0, 0, 0, 5})) == doctest::Approx(2 * profile->tau()));
  CHECK_THROWS_AS(product_extend(cone, 0), PreconditionError);
}

TEST_CASE("profile CSV matches the golden file") {
  const auto& p = shared_profile();
  std::ostringstream os;
  write_profile_csv(os, p, 0.01);
  std::ifstream golden(std::string(POTLAB_GOLDEN_DIR) + "/profile.golden.csv");
  REQUIRE(golden.good());
  std::istringstream fresh(os.str());
  std::string a;
  std::string b;
  std::getline(golden, a);
  std::getline(fresh, b);
  CHECK(a == b);
  int rows = 0;
  while (std::getline(golden, a) && std::getline(fresh, b)) {
    double ga[3];
    double fa[3];
    std::replace(a.begin(), a.end(), ',', ' ');
    std::replace(b.begin(), b.end(), ',', ' ');
    std::istringstream(a) >> ga[0] >> ga[1] >> ga[2];
    std::istringstream(b) >> fa[0] >> fa[1] >> fa[2];
    for (int i = 0; i < 3; ++i) CHECK(std::abs(ga[i] - fa[i]) <= 1e-9);
    ++rows;
  }
  CHECK(rows > 100);
}
