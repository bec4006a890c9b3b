#include "potlab/density/density.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "potlab/core/errors.hpp"
#include "potlab/core/parallel.hpp"
#include "potlab/core/quadrature.hpp"

namespace potlab::density {

double halfspace_poisson_kernel(int dim, double t, double rho) {
  require(dim >= 2 && t > 0.0, "halfspace_poisson_kernel: need dim >= 2 and t > 0");
  return 2.0 * t / (unit_sphere_area(dim - 1) * std::pow(rho * rho + t * t, 0.5 * dim));
}

double halfspace_ball_measure(int dim, double t, double radius) {
  require(dim >= 3 && t > 0.0 && radius >= 0.0, "halfspace_ball_measure: need dim >= 3, t > 0, radius >= 0");
  if (radius == 0.0) return 0.0;
  const double inner = 0.125 * t;
  std::vector<double> edges{0.0, radius};
  if (radius > inner) edges = geometric_edges(inner, radius, 1.3);
  const Rule1D rule = composite_gauss(edges, 10);
  const int n = dim - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double rho = rule.nodes[i];
    sum += rule.weights[i] * halfspace_poisson_kernel(dim, t, rho) * std::pow(rho, n - 1);
  }
  return sum * unit_sphere_area(n - 1);
}

namespace {

double relative_se(double value, double se) { return value != 0.0 ? se / std::abs(value) : 0.0; }

struct PoleBatch {
  wos::MeasureEstimate ball;  // omega^p(B(xi, r))
  double green = 0.0;         // g(x, p)
  double green_se = 0.0;
};

// One batch of walks from the pole: harmonic measure of the ball and the
// Green function at x, g(x, p) = E(x - p) - E[E(x - Z)].
PoleBatch pole_batch(const ImplicitDomain& domain, const Vec& pole, const Vec& xi, double r, const Vec& x,
                     const wos::WalkConfig& cfg) {
  const auto hits = wos::run_walks(domain, pole, cfg);
  PoleBatch out;
  out.ball = wos::harmonic_measure(hits, [&](const Vec& y) { return (y - xi).norm() < r; });
  const int d = domain.dim();
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t count = 0;
  for (const auto& h : hits) {
    if (h.truncated) continue;
    const double e = wos::fundamental_solution(d, (x - h.hit).norm());
    sum += e;
    sum2 += e * e;
    ++count;
  }
  const double mean = sum / count;
  const double var = count > 1 ? std::max(0.0, (sum2 - sum * mean) / (count - 1)) : 0.0;
  out.green = wos::fundamental_solution(d, (x - pole).norm()) - mean;
  out.green_se = std::sqrt(var / count);
  return out;
}

double u_at(const ImplicitDomain& domain, const Vec& x, const KernelOptions& o) {
  return wos::u_infinity(domain, x, o.u, o.walk);
}

}  // namespace

KernelReport poisson_kernel_estimate(const ImplicitDomain& domain, const Vec& xi, const std::vector<double>& radii,
                                     const KernelOptions& options) {
  wos::validate(options.walk);
  require(!radii.empty(), "poisson_kernel_estimate: no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    require(radii[k] > 0.0 && (k == 0 || radii[k] < radii[k - 1]),
            "poisson_kernel_estimate: radii must be positive and decreasing");
  }
  const Vec n = domain.outer_normal(xi);  // throws at a vertex
  const int d = domain.dim();
  const int bn = d - 1;
  if (options.mode != KernelMode::kScaledPole) {
    require(radii.back() > 10.0 * options.walk.eps_shell, "poisson_kernel_estimate: radius below the WoS shell scale");
  }

  KernelReport rep;
  rep.has_explicit = wos::has_explicit_u(domain);
  if (rep.has_explicit) {
    const Vec inside = xi - 1e-9 * (1.0 + xi.norm()) * n;
    rep.explicit_gradient = wos::explicit_grad_u(domain, inside).norm();
  }

  std::vector<wos::HitRecord> finite_hits;
  if (options.mode == KernelMode::kFinitePole) {
    require(options.pole.size() == d && domain.signed_distance(options.pole) > options.walk.eps_shell,
            "poisson_kernel_estimate: pole must lie in the domain");
    finite_hits = wos::run_walks(domain, options.pole, options.walk);
  }

  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    const auto sigma = geometry::surface_measure(domain, geometry::Ball{xi, r}, options.surface_draws,
                                                 options.walk.seed + 7919 * (k + 1));
    if (sigma.value <= 0.0) throw NumericError("poisson_kernel_estimate: empty boundary window");
    KernelSample s;
    s.radius = r;
    switch (options.mode) {
      case KernelMode::kFinitePole: {
        const auto w = wos::harmonic_measure(finite_hits, [&](const Vec& y) { return (y - xi).norm() < r; });
        s.value = w.value / sigma.value;
        s.std_error = s.value * std::hypot(relative_se(w.value, w.std_error), relative_se(sigma.value, sigma.std_error));
        if (w.value == 0.0) s.std_error = w.std_error / sigma.value;
        break;
      }
      case KernelMode::kInfinity: {
        const Vec xb = xi - 0.5 * r * n;
        const double flat_area = unit_ball_volume(bn) * std::pow(r, bn);
        s.value = u_at(domain, xb, options) / (0.5 * r) * flat_area / sigma.value;
        s.std_error = s.value * relative_se(sigma.value, sigma.std_error);
        break;
      }
      case KernelMode::kScaledPole: {
        const Vec pole = xi - 2.0 * r * n;
        const Vec xb = xi - 0.5 * r * n;
        wos::WalkConfig cfg = options.walk;
        cfg.eps_shell = options.walk.eps_shell * r;
        cfg.seed = options.walk.seed + 104729 * (k + 1);
        const auto batch = pole_batch(domain, pole, xi, r, xb, cfg);
        if (batch.ball.value == 0.0 || batch.green <= 0.0) {
          throw NumericError("poisson_kernel_estimate: zero harmonic measure or Green function at MC resolution");
        }
        const double q = batch.ball.value / sigma.value * u_at(domain, xb, options) / batch.green;
        const double flat_green = wos::fundamental_solution(d, 1.5 * r) - wos::fundamental_solution(d, 2.5 * r);
        const double q_flat = halfspace_ball_measure(d, 2.0 * r, r) / (unit_ball_volume(bn) * std::pow(r, bn)) *
                              (0.5 * r) / flat_green;
        s.value = q / q_flat;
        s.std_error = s.value * std::sqrt(std::pow(relative_se(batch.ball.value, batch.ball.std_error), 2) +
                                          std::pow(relative_se(batch.green, batch.green_se), 2) +
                                          std::pow(relative_se(sigma.value, sigma.std_error), 2));
        break;
      }
    }
    rep.samples.push_back(s);
  }
  return rep;
}

BoundaryField normal_field() {
  return {"normal", [](const geometry::BoundarySample& s) -> Eigen::VectorXd { return s.normal; }};
}

BoundaryField constant_field(double value) {
  return {"constant", [value](const geometry::BoundarySample&) -> Eigen::VectorXd {
            return Eigen::VectorXd::Constant(1, value);
          }};
}

BoundaryField log_kernel_field(const ImplicitDomain& domain) {
  require(wos::has_explicit_u(domain), "log_kernel_field: needs an explicit u");
  return {"log_h", [domain](const geometry::BoundarySample& s) -> Eigen::VectorXd {
            const Vec inside = s.point - 1e-9 * (1.0 + s.point.norm()) * s.normal;
            const double h = wos::explicit_grad_u(domain, inside).norm();
            return Eigen::VectorXd::Constant(1, std::log(std::max(h, 1e-12)));
          }};
}

BoundaryField scalar_field(std::string name, std::function<double(const Vec&)> f) {
  return {std::move(name), [f = std::move(f)](const geometry::BoundarySample& s) -> Eigen::VectorXd {
            return Eigen::VectorXd::Constant(1, f(s.point));
          }};
}

double oscillation(const ImplicitDomain& domain, const BoundaryField& field, const Vec& xi, double r,
                   std::size_t samples, std::uint64_t seed) {
  const auto pts = geometry::sample_boundary(domain, geometry::Ball{xi, r}, samples, seed);
  require(!pts.empty(), "oscillation: empty boundary window");
  std::vector<Eigen::VectorXd> values;
  values.reserve(pts.size());
  double mass = 0.0;
  Eigen::VectorXd mean;
  for (const auto& p : pts) {
    values.push_back(field.evaluate(p));
    if (mean.size() == 0) mean = Eigen::VectorXd::Zero(values.back().size());
    mean += p.weight * values.back();
    mass += p.weight;
  }
  require(mass > 0.0, "oscillation: empty boundary window");
  mean /= mass;
  double var = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) var += pts[i].weight * (values[i] - mean).squaredNorm();
  return std::sqrt(var / mass);
}

OscillationProfile vmo_profile(const ImplicitDomain& domain, const BoundaryField& field,
                               const std::vector<double>& scales, const VmoOptions& options) {
  for (std::size_t k = 0; k < scales.size(); ++k) {
    require(scales[k] > 0.0 && (k == 0 || scales[k] < scales[k - 1]), "vmo_profile: scales must be positive and decreasing");
  }
  std::vector<Vec> centers;
  if (options.include_vertex && domain.conical() && std::abs(domain.signed_distance(zero_vec(domain.dim()))) == 0.0) {
    centers.push_back(zero_vec(domain.dim()));
  }
  if (options.centers_per_scale > 0) {
    const auto drawn = geometry::sample_boundary(domain, options.center_window, options.centers_per_scale,
                                                 options.seed ^ 0xc3a5c85c97cb3127ULL);
    for (const auto& s : drawn) centers.push_back(s.point);
  }
  require(!centers.empty(), "vmo_profile: no centers");

  OscillationProfile out;
  out.scales = scales;
  out.centers_per_scale = centers.size();
  const std::size_t nc = centers.size();
  // One seed per center, shared across scales.
  const auto osc = map_indices<double>(scales.size() * nc, Execution::kParallel, [&](std::size_t i) {
    const std::size_t k = i / nc;
    const std::size_t j = i % nc;
    return oscillation(domain, field, centers[j], scales[k], options.samples, options.seed * 1000003ULL + j);
  });
  for (std::size_t k = 0; k < scales.size(); ++k) {
    double sup = 0.0;
    for (std::size_t j = 0; j < nc; ++j) sup = std::max(sup, osc[k * nc + j]);
    out.sup_oscillation.push_back(sup);
  }
  return out;
}

void write_profile_csv(std::ostream& os, const OscillationProfile& profile) {
  os << "scale,sup_oscillation,centers\n";
  const auto old = os.precision(15);
  for (std::size_t k = 0; k < profile.scales.size(); ++k) {
    os << profile.scales[k] << ',' << profile.sup_oscillation[k] << ',' << profile.centers_per_scale << '\n';
  }
  os.precision(old);
}

RatioEstimate doubling_ratio(const ImplicitDomain& domain, const Vec& pole, const Vec& xi, double r,
                             const wos::WalkConfig& cfg) {
  require(r > 0.0 && (pole - xi).norm() >= 4.0 * r, "doubling_ratio: pole must lie outside B(xi, 4r)");
  const auto hits = wos::run_walks(domain, pole, cfg);
  std::size_t inner = 0;
  std::size_t outer = 0;
  for (const auto& h : hits) {
    if (h.truncated) continue;
    const double dist = (h.hit - xi).norm();
    inner += dist < r;
    outer += dist < 2.0 * r;
  }
  if (inner == 0) throw NumericError("doubling_ratio: no walk hit B(xi, r)");
  RatioEstimate out;
  out.value = static_cast<double>(outer) / inner;
  out.std_error = out.value * std::sqrt(std::max(0.0, 1.0 / inner - 1.0 / outer));
  return out;
}

AinftyCheck ainfty_ratio_check(const ImplicitDomain& domain, const Vec& pole, const Vec& xi, double r,
                               const wos::BoundaryPredicate& in_e, double eps, double constant,
                               const wos::WalkConfig& cfg, std::size_t surface_draws) {
  require(eps > 0.0 && eps < 1.0 && constant >= 1.0, "ainfty_ratio_check: need eps in (0, 1) and C >= 1");
  const auto pts = geometry::sample_boundary(domain, geometry::Ball{xi, r}, surface_draws, cfg.seed ^ 0xa1f7ULL);
  double sb = 0.0;
  double se = 0.0;
  for (const auto& p : pts) {
    sb += p.weight;
    if (in_e(p.point)) se += p.weight;
  }
  if (se <= 0.0) throw NumericError("ainfty_ratio_check: sigma(E) vanishes at the sampling resolution");

  const auto hits = wos::run_walks(domain, pole, cfg);
  std::size_t nb = 0;
  std::size_t ne = 0;
  for (const auto& h : hits) {
    if (h.truncated || (h.hit - xi).norm() >= r) continue;
    ++nb;
    ne += in_e(h.hit);
  }
  if (nb == 0) throw NumericError("ainfty_ratio_check: no walk hit B(xi, r)");

  AinftyCheck out;
  out.constant = constant;
  out.sigma_ratio = se / sb;
  out.mid = static_cast<double>(ne) / nb;
  out.mid_error = std::sqrt(out.mid * (1.0 - out.mid) / nb);
  out.lhs = std::pow(out.sigma_ratio, 1.0 + eps) / constant;
  out.rhs = constant * std::pow(out.sigma_ratio, 1.0 - eps);
  out.pass = out.lhs <= out.mid + 3.0 * out.mid_error && out.mid - 3.0 * out.mid_error <= out.rhs;
  return out;
}

}  // namespace potlab::density
