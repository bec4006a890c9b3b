#include "potlab/blowup/blowup.hpp"

#include <cmath>

#include "potlab/core/errors.hpp"
#include "potlab/core/quadrature.hpp"
#include "potlab/core/rng.hpp"
#include "potlab/potential/surface_rules.hpp"

namespace potlab::blowup {

namespace {

bool on_boundary(const ImplicitDomain& domain, const Vec& x) {
  return std::abs(domain.signed_distance(x)) <= 1e-9 * (1.0 + x.norm());
}

double rel(double value, double se) { return value != 0.0 ? se / std::abs(value) : 0.0; }

// Walks from a finite pole, or boundary samples carrying h for the pole at
// infinity, shared by every quantity of one rescaling.
struct Normalizer {
  ImplicitDomain domain;
  Vec x_i;
  double r = 1.0;
  RescalePole pole;
  RescaleOptions options;
  std::vector<wos::HitRecord> hits;
  double omega = 0.0;  // omega(B(x_i, r)) (finite) or the mean of h over the ball (infinity)
  double omega_se = 0.0;
  double sigma = 0.0;
  double sigma_se = 0.0;

  Normalizer(const ImplicitDomain& d, const Vec& xi, double ri, const RescalePole& p, const RescaleOptions& o)
      : domain(d), x_i(xi), r(ri), pole(p), options(o) {
    require(ri > 0.0, "rescaling: radius must be positive");
    require(xi.size() == d.dim() && on_boundary(d, xi), "rescaling: base point must lie on the boundary");
    const geometry::Ball ball{xi, ri};
    if (p.at_infinity) {
      require(wos::has_explicit_u(d), "rescaling: the pole at infinity needs an explicit u");
      const auto pts = geometry::sample_boundary(d, ball, o.surface_draws, o.walk.seed ^ 0x51ee7ULL);
      double mass = 0.0;
      double hmass = 0.0;
      for (const auto& s : pts) {
        mass += s.weight;
        hmass += s.weight * kernel_at(s.point);
      }
      if (mass <= 0.0) throw NumericError("rescaling: empty boundary ball");
      sigma = mass;
      omega = hmass / mass;
      return;
    }
    require(p.point.size() == d.dim() && d.signed_distance(p.point) > o.walk.eps_shell,
            "rescaling: pole must lie in the domain");
    require((p.point - xi).norm() / ri >= o.min_separation, "rescaling: pole too close, |p - x_i| / r_i below the minimum");
    hits = wos::run_walks(d, p.point, o.walk);
    const auto w = wos::harmonic_measure(hits, [&](const Vec& y) { return (y - xi).norm() < ri; });
    if (w.value == 0.0) throw NumericError("rescaling: omega(B(x_i, r_i)) vanishes at the Monte Carlo resolution");
    omega = w.value;
    omega_se = w.std_error;
    const auto s = geometry::surface_measure(d, ball, o.surface_draws, o.walk.seed ^ 0x5a3fULL);
    if (s.value <= 0.0) throw NumericError("rescaling: empty boundary ball");
    sigma = s.value;
    sigma_se = s.std_error;
  }

  // |grad u| just inside a boundary point.
  double kernel_at(const Vec& y) const {
    const Vec n = domain.outer_normal(y);
    return wos::explicit_grad_u(domain, y - 1e-9 * (1.0 + y.norm()) * n).norm();
  }

  // sigma(B) / omega(B) in the normalization of u_i and h_i.
  Estimate scale() const {
    if (pole.at_infinity) return {1.0 / omega, 0.0};
    const double v = sigma / omega;
    return {v, v * std::hypot(rel(omega, omega_se), rel(sigma, sigma_se))};
  }

  Estimate green(const Vec& y) const {
    const int d = domain.dim();
    double sum = 0.0;
    double sum2 = 0.0;
    std::size_t count = 0;
    for (const auto& h : hits) {
      if (h.truncated) continue;
      const double e = wos::fundamental_solution(d, (y - h.hit).norm());
      sum += e;
      sum2 += e * e;
      ++count;
    }
    const double mean = sum / count;
    const double var = count > 1 ? std::max(0.0, (sum2 - sum * mean) / (count - 1)) : 0.0;
    return {wos::fundamental_solution(d, (y - pole.point).norm()) - mean, std::sqrt(var / count)};
  }

  // Pointwise Poisson kernel at a boundary point y.
  Estimate kernel(const Vec& y, std::uint64_t salt) const {
    if (pole.at_infinity) return {kernel_at(y), 0.0};
    const double rho = options.kernel_radius * r;
    const auto w = wos::harmonic_measure(hits, [&](const Vec& z) { return (z - y).norm() < rho; });
    const auto s = geometry::surface_measure(domain, geometry::Ball{y, rho}, options.surface_draws,
                                             options.walk.seed * 6364136223846793005ULL + salt);
    if (s.value <= 0.0) throw NumericError("rescaled_kernel: empty boundary ball");
    const double v = w.value / s.value;
    const double se = w.value > 0.0 ? v * std::hypot(rel(w.value, w.std_error), rel(s.value, s.std_error))
                                    : w.std_error / s.value;
    return {v, se};
  }
};

}  // namespace

ImplicitDomain rescale_domain(const ImplicitDomain& domain, const Vec& x_i, double r_i) {
  require(r_i > 0.0, "rescale_domain: radius must be positive");
  require(x_i.size() == domain.dim() && on_boundary(domain, x_i), "rescale_domain: base point must lie on the boundary");
  return geometry::rescaled_domain(domain, x_i, r_i);
}

Estimate rescaled_u(const ImplicitDomain& domain, const Vec& x, const Vec& x_i, double r_i, const RescalePole& pole,
                    const RescaleOptions& options) {
  const Normalizer norm(domain, x_i, r_i, pole, options);
  const Vec y = r_i * x + x_i;
  if (!domain.contains(y)) return {0.0, 0.0};
  const Estimate s = norm.scale();
  if (pole.at_infinity) return {wos::explicit_u(domain, y) / r_i * s.value, 0.0};
  const Estimate g = norm.green(y);
  if (g.value <= 0.0) throw NumericError("rescaled_u: Green function not resolved by the walks");
  const double v = g.value / r_i * s.value;
  return {v, v * std::hypot(rel(g.value, g.std_error), rel(s.value, s.std_error))};
}

Estimate rescaled_kernel(const ImplicitDomain& domain, const Vec& x, const Vec& x_i, double r_i,
                         const RescalePole& pole, const RescaleOptions& options) {
  const Normalizer norm(domain, x_i, r_i, pole, options);
  const Vec y = r_i * x + x_i;
  require(on_boundary(domain, y), "rescaled_kernel: point must lie on the rescaled boundary");
  const Estimate h = norm.kernel(y, 0);
  const Estimate s = norm.scale();
  const double v = h.value * s.value;
  return {v, v == 0.0 ? h.std_error * s.value : v * std::hypot(rel(h.value, h.std_error), rel(s.value, s.std_error))};
}

Estimate rescaled_kernel_mean(const ImplicitDomain& domain, const Vec& x_i, double r_i, const RescalePole& pole,
                              std::size_t points, const RescaleOptions& options) {
  const Normalizer norm(domain, x_i, r_i, pole, options);
  const auto pts = geometry::sample_boundary(domain, geometry::Ball{x_i, r_i}, points, options.walk.seed ^ 0xb10ULL);
  require(!pts.empty(), "rescaled_kernel_mean: no boundary samples");
  const auto hs = map_indices<double>(pts.size(), options.walk.exec,
                                      [&](std::size_t j) { return norm.kernel(pts[j].point, j + 1).value; });
  double mass = 0.0;
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    mass += pts[j].weight;
    sum += pts[j].weight * hs[j];
    sum2 += pts[j].weight * hs[j] * hs[j];
  }
  const double mean = sum / mass;
  const double spread = std::sqrt(std::max(0.0, sum2 / mass - mean * mean) / pts.size());
  const Estimate s = norm.scale();
  const double v = mean * s.value;
  return {v, v * std::hypot(rel(mean, spread), rel(s.value, s.std_error))};
}

std::vector<ThetaPoint> blowdown_theta_trace(const ImplicitDomain& domain, const Vec& x,
                                             const std::vector<double>& radii,
                                             const geometry::FlatnessOptions& options) {
  for (std::size_t k = 0; k < radii.size(); ++k) {
    require(radii[k] > 0.0 && (k == 0 || radii[k] > radii[k - 1]), "blowdown_theta_trace: radii must increase");
  }
  std::vector<ThetaPoint> out;
  geometry::FlatnessOptions o = options;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    o.seed = options.seed + 7919 * k;  // independent samples per scale
    out.push_back({radii[k], geometry::best_plane(domain, x, radii[k], o).theta});
  }
  return out;
}

double log_log_slope(const std::vector<ThetaPoint>& trace) {
  require(trace.size() >= 2, "log_log_slope: need two points");
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : trace) {
    require(p.theta > 0.0, "log_log_slope: theta must be positive");
    const double lx = std::log(p.radius);
    const double ly = std::log(p.theta);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(trace.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

FlatnessClassResult flatness_class_check(const ScalarField& v, const Vec& x0, double rho, const Vec& nu,
                                         double sigma_plus, double sigma_minus, std::size_t samples,
                                         std::uint64_t seed) {
  require(rho > 0.0, "flatness_class_check: rho must be positive");
  require(sigma_plus > 0.0 && sigma_plus < 1.0 && sigma_minus > 0.0 && sigma_minus < 1.0,
          "flatness_class_check: sigma values must lie in (0, 1)");
  require(std::abs(nu.norm() - 1.0) <= 1e-12, "flatness_class_check: nu must be a unit vector");
  const int d = static_cast<int>(x0.size());
  FlatnessClassResult out;
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    const Vec x = x0 + rho * (i % 2 == 0 ? rng.unit_ball(d) : rng.unit_sphere(d));
    const double s = (x - x0).dot(nu);
    const double value = v(x);
    if (s >= sigma_plus * rho && value != 0.0) {
      out.failed_condition = 1;
      out.witness = x;
      return out;
    }
    if (value < -s - sigma_minus * rho) {
      out.failed_condition = 2;
      out.witness = x;
      return out;
    }
  }
  out.pass = true;
  return out;
}

namespace {

double beta1(double t) { return std::abs(t) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - t * t)); }
double beta1_log_slope(double t) { return -2.0 * t / ((1.0 - t * t) * (1.0 - t * t)); }

// Sum of term(x) h^d over the midpoint lattice c + (k + 1/2) h inside the ball.
template <class Fn>
double lattice_sum(const Ball& ball, double h, Execution exec, Fn&& term) {
  require(h > 0.0 && ball.radius > 0.0, "lattice: need positive spacing and radius");
  const int d = static_cast<int>(ball.center.size());
  const long m = static_cast<long>(std::ceil(ball.radius / h));
  const std::size_t side = static_cast<std::size_t>(2 * m);
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= side;
  const double r2 = ball.radius * ball.radius;
  const double cell = std::pow(h, d);
  return cell * blocked_sum(total, 0.0, exec, [&](std::size_t idx) {
    Vec x(d);
    for (int k = d - 1; k >= 0; --k) {
      const long i = static_cast<long>(idx % side) - m;
      idx /= side;
      x[k] = (i + 0.5) * h;
    }
    if (x.squaredNorm() >= r2) return 0.0;
    return term(Vec(ball.center + x));
  });
}

Vec central_gradient(const ScalarField& u, const Vec& x, double h) {
  Vec g(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Vec a = x;
    Vec b = x;
    a[k] += h;
    b[k] -= h;
    g[k] = (u(a) - u(b)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TestField bump_field(const Vec& center, double half_width, const Vec& direction) {
  require(half_width > 0.0, "bump_field: half width must be positive");
  TestField f;
  f.center = center;
  f.reach = half_width * std::sqrt(static_cast<double>(center.size()));
  auto profile = [center, half_width](const Vec& x, Vec* grad) {
    double b = 1.0;
    Vec t = (x - center) / half_width;
    for (int k = 0; k < t.size(); ++k) b *= beta1(t[k]);
    if (grad) {
      grad->resize(x.size());
      for (int k = 0; k < t.size(); ++k) (*grad)[k] = b == 0.0 ? 0.0 : b * beta1_log_slope(t[k]) / half_width;
    }
    return b;
  };
  f.value = [profile, direction](const Vec& x) -> Vec { return profile(x, nullptr) * direction; };
  f.jacobian = [profile, direction](const Vec& x) -> Mat {
    Vec g;
    profile(x, &g);
    return direction * g.transpose();
  };
  return f;
}

TestField scaled(const TestField& f, double factor) {
  TestField out = f;
  out.value = [f, factor](const Vec& x) -> Vec { return factor * f.value(x); };
  out.jacobian = [f, factor](const Vec& x) -> Mat { return factor * f.jacobian(x); };
  return out;
}

TestField sum(const TestField& a, const TestField& b) {
  TestField out;
  out.center = 0.5 * (a.center + b.center);
  out.reach = std::max((a.center - out.center).norm() + a.reach, (b.center - out.center).norm() + b.reach);
  out.value = [a, b](const Vec& x) -> Vec { return a.value(x) + b.value(x); };
  out.jacobian = [a, b](const Vec& x) -> Mat { return a.jacobian(x) + b.jacobian(x); };
  return out;
}

double ac_functional(const ScalarField& u, const Ball& ball, double spacing, Execution exec) {
  require(spacing > 0.0 && spacing <= ball.radius / 16.0, "ac_functional: spacing must not exceed radius / 16");
  return lattice_sum(ball, spacing, exec, [&](const Vec& x) {
    const Vec g = central_gradient(u, x, spacing);
    return g.squaredNorm() + (u(x) > 0.0 ? 1.0 : 0.0);
  });
}

double first_variation_residual(const ScalarField& u, const TestField& phi, const Ball& ball, double spacing,
                                Execution exec) {
  require((phi.center - ball.center).norm() + phi.reach < ball.radius,
          "first_variation_residual: test field must be supported inside the ball");
  require(spacing > 0.0 && spacing <= phi.reach / 4.0, "first_variation_residual: grid does not resolve the test field");
  return lattice_sum(ball, spacing, exec, [&](const Vec& x) {
    const Mat j = phi.jacobian(x);
    if (j.isZero(0.0)) return 0.0;
    const Vec g = central_gradient(u, x, spacing);
    const double energy = g.squaredNorm() + (u(x) > 0.0 ? 1.0 : 0.0);
    return energy * j.trace() - 2.0 * g.dot(j * g);
  });
}

std::vector<SphereAverage> sphere_average_check(const ScalarField& u, const Vec& x, const std::vector<double>& radii,
                                                int order) {
  const int d = static_cast<int>(x.size());
  require(d >= 2, "sphere_average_check: dimension must be at least 2");
  const SphereRule rule = sphere_rule(d - 1, order);
  std::vector<SphereAverage> out;
  for (double r : radii) {
    require(r > 0.0, "sphere_average_check: radii must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < rule.directions.size(); ++i) {
      // Polar axis along x_d, where free boundaries are usually normalized.
      const Vec& w = rule.directions[i];
      Vec dir(d);
      dir.head(d - 1) = w.tail(d - 1);
      dir[d - 1] = w[0];
      s += rule.weights[i] * u(x + r * dir);
    }
    out.push_back({r, s / r});
  }
  return out;
}

double ScalarBump::value(const Vec& x) const {
  const double t = (x - center).norm() / radius;
  return t >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t));
}

Vec ScalarBump::gradient(const Vec& x) const {
  const Vec dx = x - center;
  const double dist = dx.norm();
  const double t = dist / radius;
  if (t >= 1.0 || dist == 0.0) return Vec::Zero(x.size());
  return value(x) * beta1_log_slope(t) / (radius * dist) * dx;
}

GaussGreen gauss_green_residual(const ImplicitDomain& domain, const ScalarBump& zeta, double spacing) {
  require(wos::has_explicit_u(domain), "gauss_green_residual: needs an explicit u");
  require(spacing > 0.0 && spacing <= zeta.radius / 8.0, "gauss_green_residual: spacing must not exceed radius / 8");
  GaussGreen out;
  out.volume = -lattice_sum(Ball{zeta.center, zeta.radius}, spacing, Execution::kParallel, [&](const Vec& x) {
    if (!domain.contains(x)) return 0.0;
    return wos::explicit_grad_u(domain, x).dot(zeta.gradient(x));
  });
  if (std::abs(domain.signed_distance(zeta.center)) < zeta.radius) {
    const Vec base = domain.project_to_boundary(zeta.center);
    potential::RuleOptions ro{zeta.radius / 256.0, 1.25, 8, 16};
    const double outer = (base - zeta.center).norm() + zeta.radius;
    const auto rule = potential::local_surface_rule(domain, base, zeta.center, outer, ro);
    for (const auto& a : rule.atoms) out.surface += a.weight * zeta.value(a.point);
  }
  out.residual = std::abs(out.volume - out.surface);
  return out;
}

std::vector<double> normal_vmo_blowup_integral(const std::vector<ImplicitDomain>& domains, const Ball& window,
                                               std::size_t samples, std::uint64_t seed) {
  std::vector<double> out;
  for (const auto& dom : domains) {
    const int d = dom.dim();
    const Vec e = unit_vec(d, d - 1);
    double s = 0.0;
    for (const auto& p : geometry::sample_boundary(dom, window, samples, seed)) s += p.weight * (p.normal + e).squaredNorm();
    out.push_back(s);
  }
  return out;
}

}  // namespace potlab::blowup
