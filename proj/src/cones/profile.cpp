#include "potlab/cones/profile.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "potlab/core/errors.hpp"
#include "potlab/core/parallel.hpp"
#include "potlab/core/rng.hpp"

namespace potlab::cones {

namespace {

using State = std::array<double, 2>;
namespace odeint = boost::numeric::odeint;

// f'' = -2 cot(2 theta) f' - lambda f, the expanded form of the profile ODE.
struct ProfileRhs {
  double lambda;
  void operator()(const State& y, State& dy, double t) const {
    dy[0] = y[1];
    dy[1] = -2.0 * y[1] / std::tan(2.0 * t) - lambda * y[0];
  }
};

State advance(State y, double t0, double t1, double lambda, double tol) {
  if (t1 == t0) return y;
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(tol, tol);
  odeint::integrate_adaptive(stepper, ProfileRhs{lambda}, y, t0, t1, (t1 - t0) / 8.0);
  return y;
}

double second_derivative(double theta, double f, double fp, double lambda) {
  return -2.0 * fp / std::tan(2.0 * theta) - lambda * f;
}

// Cubic Hermite on [t0, t1] with Fritsch-Carlson limiting of the end slopes.
double hermite(double t, double t0, double t1, double y0, double y1, double m0, double m1, bool limit) {
  const double h = t1 - t0;
  if (limit) {
    const double secant = (y1 - y0) / h;
    if (secant == 0.0) {
      m0 = m1 = 0.0;
    } else {
      const double a = m0 / secant;
      const double b = m1 / secant;
      const double norm2 = a * a + b * b;
      if (a < 0.0 || b < 0.0) {
        m0 = a < 0.0 ? 0.0 : m0;
        m1 = b < 0.0 ? 0.0 : m1;
      } else if (norm2 > 9.0) {
        const double s = 3.0 / std::sqrt(norm2);
        m0 = s * a * secant;
        m1 = s * b * secant;
      }
    }
  }
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * m1;
}

State rk4_step(const State& y, double t, double h, double lambda) {
  const ProfileRhs rhs{lambda};
  State k1, k2, k3, k4, tmp;
  rhs(y, k1, t);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(tmp, k2, t + 0.5 * h);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(tmp, k3, t + 0.5 * h);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(tmp, k4, t + h);
  State out;
  for (int i = 0; i < 2; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

RootEstimate rk4_root(double h, double lambda) {
  const double stop = 0.5 * std::numbers::pi - kHardStop;
  double t = kStartup;
  State y = startup_series(t, lambda);
  while (t + h < stop) {
    const State next = rk4_step(y, t, h, lambda);
    if (next[0] <= 0.0) {
      double lo = 0.0;
      double hi = h;
      for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (rk4_step(y, t, mid, lambda)[0] > 0.0 ? lo : hi) = mid;
      }
      const double s = 0.5 * (lo + hi);
      return {t + s, rk4_step(y, t, s, lambda)[1]};
    }
    y = next;
    t += h;
  }
  throw NumericError("fixed-step profile integration: no sign change of f before pi/2");
}

}  // namespace

std::array<double, 2> startup_series(double theta, double eigenvalue) {
  const double a = -eigenvalue / 4.0;
  const double b = (16.0 * a / 3.0 - eigenvalue * a + 2.0 * eigenvalue / 3.0) / 16.0;
  const double t2 = theta * theta;
  return {1.0 + a * t2 + b * t2 * t2, 2.0 * a * theta + 4.0 * b * t2 * theta};
}

SphericalProfile solve_profile_ode(double step, double tol, double eigenvalue) {
  require(step > 0.0 && step <= 1e-3, "solve_profile_ode: step must lie in (0, 1e-3]");
  require(tol > 0.0, "solve_profile_ode: tol must be positive");
  require(eigenvalue > 0.0, "solve_profile_ode: eigenvalue must be positive");
  SphericalProfile p;
  p.step_ = step;
  p.tol_ = tol;
  p.lambda_ = eigenvalue;
  p.grid_ = {0.0};
  p.f_ = {1.0};
  p.fp_ = {0.0};

  const double stop = 0.5 * std::numbers::pi - kHardStop;
  double t = kStartup;
  State y = startup_series(t, eigenvalue);
  bool bracketed = false;
  while (t < stop) {
    p.grid_.push_back(t);
    p.f_.push_back(y[0]);
    p.fp_.push_back(y[1]);
    const double t_next = std::min(t + step, stop);
    const State next = advance(y, t, t_next, eigenvalue, tol);
    if (next[0] <= 0.0) {
      bracketed = true;
      break;
    }
    y = next;
    t = t_next;
  }
  if (!bracketed)
    throw NumericError("solve_profile_ode: f has no sign change in (0, pi/2 - 1e-6); the profile does not close");

  // Root refinement inside the last panel.
  const double t_lo = p.grid_.back();
  const State y_lo{p.f_.back(), p.fp_.back()};
  const double root_tol = std::min(tol, 1e-13);
  auto f_at = [&](double s) { return advance(y_lo, t_lo, s, eigenvalue, root_tol)[0]; };
  const double t_hi = std::min(t_lo + step, stop);
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(f_at, t_lo, t_hi, f_at(t_lo), f_at(t_hi),
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
  const double root = 0.5 * (bracket.first + bracket.second);
  const State at_root = advance(y_lo, t_lo, root, eigenvalue, root_tol);
  if (!(at_root[1] < 0.0)) throw NumericError("theta0_root: f'(theta0) is not negative");
  p.theta0_ = root;
  p.fprime0_ = at_root[1];
  p.tau_ = -1.0 / at_root[1];
  if (root - t_lo < 1e-3 * step) {
    // Avoid a degenerate final panel.
    p.grid_.pop_back();
    p.f_.pop_back();
    p.fp_.pop_back();
  }
  p.grid_.push_back(root);
  p.f_.push_back(at_root[0]);
  p.fp_.push_back(at_root[1]);

  p.decreasing_ = true;
  for (std::size_t i = 2; i < p.f_.size(); ++i)
    if (!(p.f_[i] < p.f_[i - 1]) || !(p.fp_[i] < 0.0)) p.decreasing_ = false;
  return p;
}

double SphericalProfile::value(double theta) const {
  if (theta > theta0_) return 0.0;
  if (theta < kStartup) return startup_series(std::max(theta, 0.0), lambda_)[0];
  auto it = std::upper_bound(grid_.begin(), grid_.end(), theta);
  std::size_t k = static_cast<std::size_t>(it - grid_.begin());
  if (k >= grid_.size()) return f_.back();
  --k;
  return hermite(theta, grid_[k], grid_[k + 1], f_[k], f_[k + 1], fp_[k], fp_[k + 1], true);
}

double SphericalProfile::derivative(double theta) const {
  if (theta > theta0_) return 0.0;
  if (theta < kStartup) return startup_series(std::max(theta, 0.0), lambda_)[1];
  auto it = std::upper_bound(grid_.begin(), grid_.end(), theta);
  std::size_t k = static_cast<std::size_t>(it - grid_.begin());
  if (k >= grid_.size()) return fp_.back();
  --k;
  const double s0 = second_derivative(grid_[k], f_[k], fp_[k], lambda_);
  const double s1 = second_derivative(grid_[k + 1], f_[k + 1], fp_[k + 1], lambda_);
  return hermite(theta, grid_[k], grid_[k + 1], fp_[k], fp_[k + 1], s0, s1, false);
}

std::array<double, 2> SphericalProfile::integrate_to(double theta, double tol) const {
  require(theta >= 0.0 && theta <= theta0_, "integrate_to: theta outside [0, theta0]");
  if (theta < kStartup) return startup_series(theta, lambda_);
  auto it = std::upper_bound(grid_.begin(), grid_.end(), theta);
  const std::size_t k = static_cast<std::size_t>(it - grid_.begin()) - 1;
  return advance({f_[k], fp_[k]}, grid_[k], theta, lambda_, tol);
}

FixedStepCheck fixed_step_theta0(double h, double eigenvalue) {
  require(h > 0.0 && h <= 1e-2, "fixed_step_theta0: step must lie in (0, 1e-2]");
  FixedStepCheck c;
  c.coarse = rk4_root(h, eigenvalue);
  c.fine = rk4_root(0.5 * h, eigenvalue);
  c.extrapolated.theta0 = (16.0 * c.fine.theta0 - c.coarse.theta0) / 15.0;
  c.extrapolated.fprime = (16.0 * c.fine.fprime - c.coarse.fprime) / 15.0;
  return c;
}

double hong_theta(const Vec& x) { return std::atan2(std::hypot(x[2], x[3]), std::hypot(x[0], x[1])); }

double hong_value(const SphericalProfile& profile, const Vec& x) {
  require(x.size() == 4, "hong_value: point must lie in R^4");
  const double theta = hong_theta(x);
  if (theta >= profile.theta0()) return 0.0;
  return x.norm() * profile.tau() * profile.value(theta);
}

Vec hong_gradient(const SphericalProfile& profile, const Vec& x) {
  require(x.size() == 4, "hong_gradient: point must lie in R^4");
  const double r = x.norm();
  require(r > 0.0, "hong_gradient: undefined at the vertex");
  const double a = std::hypot(x[0], x[1]);
  const double b = std::hypot(x[2], x[3]);
  const double theta = std::atan2(b, a);
  Vec g = Vec::Zero(4);
  if (theta > profile.theta0()) return g;
  Vec et = Vec::Zero(4);
  if (a > 0.0) et.head<2>() = -std::sin(theta) * x.head<2>() / a;
  if (b > 0.0) et.tail<2>() = std::cos(theta) * x.tail<2>() / b;
  return profile.tau() * (profile.value(theta) * x / r + profile.derivative(theta) * et);
}

OverdeterminedReport verify_overdetermined(const SphericalProfile& profile, std::size_t sample_count,
                                           std::uint64_t seed) {
  require(sample_count >= 1, "verify_overdetermined: sample_count must be >= 1");
  OverdeterminedReport rep;
  const double lambda = profile.eigenvalue();
  const double t0 = profile.theta0();

  // ODE residual by fourth-order differences of q = s c f', all stencil
  // values integrated from one common starting point.
  const double delta = 1e-3;
  const double fine_tol = 1e-14;
  const int m = 200;
  auto residuals = map_indices<double>(m, Execution::kParallel, [&](std::size_t i) {
    const double lo = kStartup + 2 * delta;
    const double hi = t0 - 2 * delta;
    const double theta = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / m;
    State y = profile.integrate_to(theta - 2 * delta, fine_tol);
    double t = theta - 2 * delta;
    std::array<double, 5> q{};
    double f_mid = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double tk = theta + (k - 2) * delta;
      y = advance(y, t, tk, lambda, fine_tol);
      t = tk;
      q[k] = std::sin(tk) * std::cos(tk) * y[1];
      if (k == 2) f_mid = y[0];
    }
    const double dq = (-q[4] + 8 * q[3] - 8 * q[1] + q[0]) / (12 * delta);
    return std::abs(dq + lambda * std::sin(theta) * std::cos(theta) * f_mid);
  });
  rep.eigen_residual = *std::max_element(residuals.begin(), residuals.end());
  rep.bc_residual = std::abs(profile.tau() * std::abs(profile.fprime_at_theta0()) - 1.0);

  // Interior sample points whose stencils stay inside the cone.
  const geometry::ImplicitDomain cone = geometry::hong_cone(t0);
  const double margin = 3.0 * rep.steps[0];
  std::vector<Vec> points;
  CounterRng rng(seed, 0);
  while (points.size() < sample_count) {
    const double r = 0.5 + rng.uniform();
    const double theta = t0 * rng.uniform();
    const double phi = 2 * std::numbers::pi * rng.uniform();
    const double psi = 2 * std::numbers::pi * rng.uniform();
    Vec x(4);
    x << r * std::cos(theta) * std::cos(phi), r * std::cos(theta) * std::sin(phi),
        r * std::sin(theta) * std::cos(psi), r * std::sin(theta) * std::sin(psi);
    if (cone.signed_distance(x) > margin) points.push_back(x);
  }
  rep.samples = points.size();
  for (std::size_t k = 0; k < rep.steps.size(); ++k) {
    const double h = rep.steps[k];
    auto lap = map_indices<double>(points.size(), Execution::kParallel, [&](std::size_t i) {
      const Vec& x = points[i];
      const double center = hong_value(profile, x);
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) {
        Vec a = x;
        Vec b = x;
        a[j] += h;
        b[j] -= h;
        sum += hong_value(profile, a) + hong_value(profile, b) - 2.0 * center;
      }
      return std::abs(sum) / (h * h);
    });
    rep.laplacian_residual[k] = *std::max_element(lap.begin(), lap.end());
  }
  rep.laplacian_order = std::min(std::log2(rep.laplacian_residual[0] / rep.laplacian_residual[1]),
                                 std::log2(rep.laplacian_residual[1] / rep.laplacian_residual[2]));
  for (const Vec& x : points) rep.max_interior_gradient = std::max(rep.max_interior_gradient, hong_gradient(profile, x).norm());
  return rep;
}

geometry::ImplicitDomain hong_domain(std::shared_ptr<const SphericalProfile> profile) {
  require(profile != nullptr, "hong_domain: profile required");
  const double t0 = profile->theta0();
  return geometry::hong_cone(t0, std::move(profile));
}

geometry::ImplicitDomain product_extend(const geometry::ImplicitDomain& base, int extra_dims) {
  require(base.dim() == 4, "product_extend: base must live in R^4");
  require(extra_dims >= 1, "product_extend: extra_dims must be >= 1");
  return geometry::product_domain(base, extra_dims);
}

void write_profile_csv(std::ostream& os, const SphericalProfile& profile, double spacing) {
  require(spacing > 0.0, "write_profile_csv: spacing must be positive");
  os << "theta,f,fprime\n";
  os.precision(15);
  const auto row = [&](double t) { os << t << "," << profile.value(t) << "," << profile.derivative(t) << "\n"; };
  for (int i = 0; i * spacing < profile.theta0(); ++i) row(i * spacing);
  row(profile.theta0());
}

}  // namespace potlab::cones
