#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "potlab/core/errors.hpp"
#include "potlab/geometry/domain.hpp"
#include "potlab/geometry/flatness.hpp"
#include "potlab/geometry/sampling.hpp"

using namespace potlab;
using namespace potlab::geometry;

namespace {

constexpr double kPi = std::numbers::pi;

ImplicitDomain upper_half_space(int dim = 3) { return half_space(dim, unit_vec(dim, dim - 1), 0.0); }

}  // namespace

TEST_CASE("make_domain membership and descriptors") {
  DomainDescriptor hs;
  hs.kind = "halfspace";
  const auto h = make_domain(hs);
  CHECK(h.contains(make_vec({0, 0, 1})));
  CHECK_FALSE(h.contains(make_vec({0, 0, -1})));

  const auto kp = kp_cone();
  CHECK(kp.contains(make_vec({1, 0, 0, 0})));
  CHECK_FALSE(kp.contains(make_vec({0, 0, 0, 1})));

  const auto hong = hong_cone(1.1);
  CHECK(hong.contains(make_vec({1, 0, 0, 0})));

  DomainDescriptor bad;
  bad.kind = "hong_cone";
  bad.theta0 = 2.0;
  CHECK_THROWS_AS(make_domain(bad), PreconditionError);
  bad.kind = "torus";
  try {
    make_domain(bad);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("kp_cone") != std::string::npos);
  }
  DomainDescriptor prod;
  prod.kind = "product";
  prod.theta0 = 1.1;
  prod.extra_dims = -1;
  CHECK_THROWS_AS(make_domain(prod), PreconditionError);
}

TEST_CASE("signed distances") {
  const auto h = upper_half_space();
  CHECK(h.signed_distance(make_vec({0, 0, 2})) == doctest::Approx(2.0));
  CHECK(h.signed_distance(make_vec({5, 5, -3})) == doctest::Approx(-3.0));
  // (rho, w) = (1, 0) to the line rho = w.
  CHECK(kp_cone().signed_distance(make_vec({1, 0, 0, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(kp_cone().signed_distance(zero_vec(4)) == 0.0);

  // Hong cone: brute-force distance to the boundary surface along its
  // meridian (the nearest point shares phi, psi with x).
  const double t0 = 1.1;
  const auto hong = hong_cone(t0);
  const Vec x = make_vec({0.7, 0.2, 0.3, -0.1});
  const double a = std::hypot(x[0], x[1]);
  const double b = std::hypot(x[2], x[3]);
  double best = 1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double s = 3.0 * i / 200000.0;
    best = std::min(best, std::hypot(a - s * std::cos(t0), b - s * std::sin(t0)));
  }
  CHECK(std::abs(hong.signed_distance(x)) == doctest::Approx(best).epsilon(1e-6));

  // Perturbed graph: brute-force curve distance.
  const auto g = perturbed_graph(3, 0.3, 2.0);
  const Vec y = make_vec({0.4, 1.0, 0.9});
  double best_g = 1e300;
  for (int i = 0; i <= 400000; ++i) {
    const double t = -2.0 + 4.0 * i / 400000.0;
    best_g = std::min(best_g, std::hypot(y[0] - t, y[2] - 0.3 * std::cos(2.0 * t)));
  }
  CHECK(g.signed_distance(y) == doctest::Approx(best_g).epsilon(1e-7));
}

TEST_CASE("outer normals") {
  const auto h = upper_half_space();
  const Vec n = h.outer_normal(make_vec({1, 2, 0}));
  CHECK(n[2] == doctest::Approx(-1.0));

  const Vec nk = kp_cone().outer_normal(make_vec({1, 0, 0, 1}));
  CHECK(nk[0] == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(nk[3] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(kp_cone().outer_normal(zero_vec(4)), PreconditionError);

  // e_theta at (theta0, 0, 0) is (-sin t0, 0, cos t0, 0).
  const double t0 = 1.1;
  const Vec xi = make_vec({std::cos(t0), 0, std::sin(t0), 0});
  const Vec nh = hong_cone(t0).outer_normal(xi);
  CHECK(nh[0] == doctest::Approx(-std::sin(t0)));
  CHECK(nh[2] == doctest::Approx(std::cos(t0)));

  // Normal agrees with central differences of the signed distance at O(h).
  const auto g = perturbed_graph(3, 0.3, 2.0);
  const Vec p = g.project_to_boundary(make_vec({0.3, 0.0, 0.5}));
  const Vec ng = g.outer_normal(p);
  double prev_err = 1.0;
  for (double step : {1e-2, 5e-3}) {
    Vec fd(3);
    for (int i = 0; i < 3; ++i) {
      Vec a = p;
      Vec b = p;
      a[i] += step;
      b[i] -= step;
      fd[i] = -(g.signed_distance(a) - g.signed_distance(b)) / (2 * step);
    }
    const double err = (fd.normalized() - ng).norm();
    CHECK(err <= step);
    CHECK(err <= prev_err);
    prev_err = err;
  }
}

TEST_CASE("product and rescaled domains") {
  const auto hong = hong_cone(1.1);
  const auto prod = product_domain(hong, 1);
  CHECK(prod.contains(make_vec({1, 0, 0, 0, 7})));
  const Vec xi = make_vec({std::cos(1.1), 0, std::sin(1.1), 0, 3.0});
  const Vec n = prod.outer_normal(xi);
  CHECK(n[4] == 0.0);
  CHECK(n.head(4).isApprox(hong.outer_normal(xi.head(4))));
  CHECK_THROWS_AS(product_domain(hong, 0), PreconditionError);

  const auto h = upper_half_space();
  const auto hr = rescaled_domain(h, make_vec({3, -1, 0}), 0.25);
  CHECK(hr.kind() == DomainKind::kHalfSpace);
  CHECK(hr.signed_distance(make_vec({0, 0, 1})) == doctest::Approx(1.0));
  CHECK(rescaled_domain(hong, zero_vec(4), 0.125).kind() == DomainKind::kHongCone);

  const Vec c = make_vec({std::cos(1.1), 0, std::sin(1.1), 0});
  const auto local = rescaled_domain(hong, c, 0.01);
  const Vec x = make_vec({0.3, 0.1, -0.2, 0.4});
  CHECK(local.signed_distance(x) == doctest::Approx(hong.signed_distance(0.01 * x + c) / 0.01));
}

TEST_CASE("surface measure of flat discs") {
  const auto h = upper_half_space();
  const auto one = surface_measure(h, {zero_vec(3), 1.0}, 10000, 1);
  CHECK(one.value == doctest::Approx(kPi).epsilon(0.01));
  const auto two = surface_measure(h, {zero_vec(3), 2.0}, 10000, 1);
  CHECK(two.value == doctest::Approx(4 * kPi).epsilon(0.01));
  // Off-plane window: disc of radius sqrt(R^2 - t^2).
  const auto off = surface_measure(h, {make_vec({0, 0, 0.6}), 1.0}, 10000, 1);
  CHECK(off.value == doctest::Approx(kPi * 0.64).epsilon(0.01));

  const auto samples = sample_boundary(h, {zero_vec(3), 1.0}, 10000, 1);
  double total = 0.0;
  for (const auto& s : samples) {
    total += s.weight;
    CHECK(s.point[2] == 0.0);
    CHECK(s.normal.norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(total == doctest::Approx(one.value).epsilon(1e-12));

  CHECK_THROWS_AS(sample_boundary(h, {zero_vec(3), 1.0}, 0, 1), PreconditionError);
  CHECK_THROWS_AS(sample_boundary(h, {make_vec({0, 0, 5}), 1.0}, 100, 1), PreconditionError);
}

TEST_CASE("surface measure on cones") {
  // Two sheets w = +-|x'| with |x| = sqrt(2)|w| <= 1; area element
  // sqrt(2) t^2 dt d(omega) over t in [0, 1/sqrt(2)].
  double oracle = 0.0;
  const int m = 20000;
  const double top = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < m; ++i) {
    const double t = (i + 0.5) * top / m;
    oracle += 2.0 * std::sqrt(2.0) * t * t * 4.0 * kPi * top / m;
  }
  const auto kp = kp_cone();
  const auto one = surface_measure(kp, {zero_vec(4), 1.0}, 10000, 7);
  CHECK(one.value == doctest::Approx(oracle).epsilon(0.01));
  const auto two = surface_measure(kp, {zero_vec(4), 2.0}, 10000, 7);
  CHECK(two.value / one.value == doctest::Approx(8.0).epsilon(0.02));

  // Off-vertex window through the conical chart, checked against the
  // tangent-graph chart by splitting at the size threshold.
  const Vec xi = make_vec({1, 0, 0, 1}) / std::sqrt(2.0);
  const auto small = surface_measure(kp, {xi, 0.1}, 20000, 3);
  // Nearly flat: area of the 3-ball of radius 0.1, slightly enlarged by curvature.
  const double flat = 4.0 / 3.0 * kPi * 1e-3;
  CHECK(small.value == doctest::Approx(flat).epsilon(0.02));

  const auto hong = hong_cone(1.1);
  const auto h1 = surface_measure(hong, {zero_vec(4), 1.0}, 10000, 5);
  // Torus link area 4 pi^2 cos sin, radial integral 1/3.
  CHECK(h1.value == doctest::Approx(4 * kPi * kPi * std::cos(1.1) * std::sin(1.1) / 3).epsilon(0.01));
}

TEST_CASE("sampling works on product, graph, rescaled and generic kinds") {
  const auto g = perturbed_graph(3, 0.1, 1.0);
  const auto sg = surface_measure(g, {zero_vec(3) + make_vec({0, 0, 0.1}), 1.0}, 20000, 2);
  CHECK(sg.value > kPi * 0.9);
  CHECK(sg.value < kPi * 1.1);

  const auto prod = product_domain(kp_cone(), 1);
  const auto sp = surface_measure(prod, {zero_vec(5), 1.0}, 40000, 2);
  CHECK(sp.value > 0.0);
  // Dilation: r^4 scaling about the vertex line.
  const auto sp2 = surface_measure(prod, {zero_vec(5), 2.0}, 40000, 2);
  CHECK(sp2.value / sp.value == doctest::Approx(16.0).epsilon(0.03));

  // A generic sphere of radius 2 (interior): area of the cap inside B(p, 1)
  // with p on the sphere is 2 pi R h, h = 1/(2R) * 1 = 1/4 -> pi.
  const auto sphere = generic_implicit(
      3, [](const Vec& x) { return 2.0 - x.norm(); }, 1.0, "ball");
  const auto cap = surface_measure(sphere, {make_vec({0, 0, 2}), 1.0}, 40000, 9);
  CHECK(cap.value == doctest::Approx(kPi).epsilon(0.03));
  CHECK_THROWS_AS(surface_measure(sphere, {make_vec({0, 0, 5}), 1.0}, 100, 9), PreconditionError);

  const auto hong = hong_cone(1.1);
  const Vec c = make_vec({std::cos(1.1), 0, std::sin(1.1), 0});
  const auto local = rescaled_domain(hong, c, 0.5);
  const auto direct = surface_measure(hong, {c, 0.5}, 20000, 4);
  const auto mapped = surface_measure(local, {zero_vec(4), 1.0}, 20000, 4);
  CHECK(mapped.value * std::pow(0.5, 3) == doctest::Approx(direct.value).epsilon(1e-9));
}

TEST_CASE("samples CSV and determinism") {
  const auto kp = kp_cone();
  const auto a = sample_boundary(kp, {zero_vec(4), 1.0}, 500, 11);
  const auto b = sample_boundary(kp, {zero_vec(4), 1.0}, 500, 11);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].point == b[i].point);
  std::ostringstream os;
  write_samples_csv(os, a);
  CHECK(os.str().rfind("x1,x2,x3,x4,n1,n2,n3,n4,weight\n", 0) == 0);
  for (const auto& s : a) CHECK(std::abs(kp.phi(s.point)) <= 1e-12);
}

TEST_CASE("flatness_theta oracles") {
  const auto h = upper_half_space();
  const auto flat = flatness_theta(h, zero_vec(3), 1.0, make_plane(zero_vec(3), unit_vec(3, 2)));
  CHECK(flat.theta == 0.0);
  CHECK(flat.beta <= flat.theta);

  for (double gamma : {0.1, 0.3}) {
    const Vec n = make_vec({std::sin(gamma), 0, std::cos(gamma)});
    const auto tilt = flatness_theta(h, zero_vec(3), 1.0, make_plane(zero_vec(3), n));
    CHECK(tilt.theta <= std::sin(gamma) + 1e-12);
    CHECK(tilt.theta >= std::sin(gamma) - tilt.max_gap_bound);
  }

  const auto kp = kp_cone();
  const auto k1 = flatness_theta(kp, zero_vec(4), 1.0, make_plane(zero_vec(4), unit_vec(4, 3)));
  CHECK(k1.theta == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(k1.beta <= k1.theta);
  const auto k8 = flatness_theta(kp, zero_vec(4), 8.0, make_plane(zero_vec(4), unit_vec(4, 3)));
  CHECK(k8.theta == doctest::Approx(k1.theta).epsilon(1e-12));
}

TEST_CASE("best_plane") {
  const auto h = upper_half_space();
  for (double r : {0.5, 3.0}) {
    const auto rep = best_plane(h, make_vec({1, -2, 0}), r);
    CHECK(rep.theta <= 1e-9);
    CHECK(std::abs(rep.plane.normal[2]) == doctest::Approx(1.0));
  }

  const auto kp = kp_cone();
  const auto b1 = best_plane(kp, zero_vec(4), 1.0);
  const auto b100 = best_plane(kp, zero_vec(4), 100.0);
  CHECK(b1.theta > 0.3);
  CHECK(b100.theta == doctest::Approx(b1.theta).epsilon(0.02));

  // At a smooth point the boundary deviates from its tangent plane by at most
  // kappa r^2 / 2, kappa <= cot(theta0) + tan(theta0) for the Hong cone.
  const double t0 = 1.1;
  const auto hong = hong_cone(t0);
  const Vec xi = make_vec({std::cos(t0), 0, std::sin(t0), 0});
  const double r = 0.01;
  const auto rep = best_plane(hong, xi, r);
  const double kappa = 1.0 / std::tan(t0) + std::tan(t0);
  CHECK(rep.theta <= kappa * r);
}

TEST_CASE("corkscrew witnesses") {
  const auto h = upper_half_space();
  const auto w = check_corkscrew(h, zero_vec(3), 1.0, 2.0);
  CHECK(w.found);
  CHECK((w.interior - make_vec({0, 0, 0.5})).norm() < 1e-9);
  CHECK((w.exterior - make_vec({0, 0, -0.5})).norm() < 1e-9);
  CHECK_THROWS_AS(check_corkscrew(h, zero_vec(3), 1.0, 1.5), PreconditionError);

  const auto kp = check_corkscrew(kp_cone(), zero_vec(4), 1.0, 4.0, 4);
  CHECK(kp.found);
  CHECK(kp_cone().signed_distance(kp.interior) >= 0.25);
  CHECK(kp_cone().signed_distance(kp.exterior) <= -0.25);
}
