#include "potlab/potential/riesz.hpp"

#include <cmath>
#include <limits>

#include "potlab/core/errors.hpp"
#include "potlab/core/quadrature.hpp"

namespace potlab::potential {

namespace {

// Linear fit v = L + a s through (s_prev, v_prev), (s_last, v_last), evaluated at s = 0.
Vec extrapolate_to_zero(double s_prev, const Vec& v_prev, double s_last, const Vec& v_last) {
  return (s_prev * v_last - s_last * v_prev) / (s_prev - s_last);
}

bool on_boundary(const ImplicitDomain& domain, const Vec& x) {
  return std::abs(domain.signed_distance(x)) <= 1e-9 * (1.0 + x.norm());
}

Vec riesz_at(const EmpiricalMeasure& mu, const Vec& x, Execution exec) {
  const RieszKernel k(static_cast<int>(x.size()) - 1);
  return blocked_sum(mu.atoms.size(), Vec(Vec::Zero(x.size())), exec,
                     [&](std::size_t i) -> Vec { return mu.atoms[i].weight * k(x - mu.atoms[i].point); });
}

}  // namespace

RieszKernel::RieszKernel(int boundary_dim) : n(boundary_dim), c(-1.0 / unit_sphere_area(boundary_dim)) {
  require(boundary_dim >= 1 && boundary_dim < kMaxDim, "RieszKernel: boundary dimension out of range");
}

Vec RieszKernel::operator()(const Vec& x) const {
  const double r = x.norm();
  return (c / std::pow(r, n + 1)) * x;
}

Vec riesz_difference(const EmpiricalMeasure& mu, const Vec& x, const Vec& y, Execution exec) {
  require(x.size() == y.size() && x.size() >= 2, "riesz_difference: dimension mismatch");
  const double scale = std::max({1.0, x.norm(), y.norm()});
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& a : mu.atoms) nearest = std::min({nearest, (x - a.point).norm(), (y - a.point).norm()});
  require(nearest > 1e-6 * scale, "riesz_difference: evaluation point on the support of the measure");
  const RieszKernel k(static_cast<int>(x.size()) - 1);
  return blocked_sum(mu.atoms.size(), Vec(Vec::Zero(x.size())), exec, [&](std::size_t i) -> Vec {
    const Vec& z = mu.atoms[i].point;
    return mu.atoms[i].weight * (k(x - z) - k(y - z));
  });
}

IdentityReport riesz_green_identity_check(const ImplicitDomain& domain, const Vec& x, const Vec& y,
                                          const IdentityOptions& options) {
  const auto kind = domain.kind();
  require(kind == geometry::DomainKind::kHalfSpace || kind == geometry::DomainKind::kKPCone ||
              kind == geometry::DomainKind::kHongCone,
          "riesz_green_identity_check: needs a half-space or a KP/Hong cone");
  require(x.size() == domain.dim() && y.size() == domain.dim(), "riesz_green_identity_check: dimension mismatch");
  require(!on_boundary(domain, x) && !on_boundary(domain, y), "riesz_green_identity_check: point on the boundary");
  require(options.windows >= 1 && options.first_window > 0.0, "riesz_green_identity_check: bad windows");

  auto grad = [&](const Vec& p) -> Vec {
    return domain.contains(p) ? wos::explicit_grad_u(domain, p) : Vec(Vec::Zero(p.size()));
  };
  IdentityReport rep;
  rep.rhs = grad(y) - grad(x);

  const Vec mid = 0.5 * (x + y);
  double radius = options.first_window;
  for (int k = 0; k < options.windows; ++k, radius *= 2.0) {
    const EmpiricalMeasure sigma = kind == geometry::DomainKind::kHalfSpace
                                       ? local_surface_rule(domain, domain.project_to_boundary(mid), mid, radius,
                                                            options.rule)
                                       : cone_surface_rule(domain, radius, options.rule);
    WindowDiagnostic w;
    w.radius = radius;
    w.lhs = riesz_difference(sigma, x, y, options.exec);
    w.residual = (w.lhs - rep.rhs).norm();
    rep.windows.push_back(w);
    rep.atoms = sigma.atoms.size();
  }
  const std::size_t m = rep.windows.size();
  if (m == 1) {
    rep.lhs = rep.windows[0].lhs;
  } else {
    const auto& p = rep.windows[m - 2];
    const auto& l = rep.windows[m - 1];
    rep.lhs = extrapolate_to_zero(1.0 / p.radius, p.lhs, 1.0 / l.radius, l.lhs);
  }
  rep.residual = (rep.lhs - rep.rhs).norm();
  return rep;
}

PvResult pv_riesz(const EmpiricalMeasure& f_sigma, const Vec& xi, const std::vector<double>& radii, Execution exec) {
  require(!radii.empty(), "pv_riesz: no truncation radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    require(radii[k] > 0.0 && (k == 0 || radii[k] < radii[k - 1]), "pv_riesz: radii must be positive and decreasing");
  }
  require(radii.back() >= f_sigma.resolution, "pv_riesz: truncation radius below the quadrature resolution");
  const RieszKernel k(static_cast<int>(xi.size()) - 1);
  PvResult out;
  out.radii = radii;
  for (double r : radii) {
    out.sums.push_back(blocked_sum(f_sigma.atoms.size(), Vec(Vec::Zero(xi.size())), exec, [&](std::size_t i) -> Vec {
      const Vec diff = xi - f_sigma.atoms[i].point;
      if (diff.norm() <= r) return Vec::Zero(xi.size());
      return f_sigma.atoms[i].weight * k(diff);
    }));
  }
  const std::size_t m = radii.size();
  out.limit = m == 1 ? out.sums[0] : extrapolate_to_zero(radii[m - 2], out.sums[m - 2], radii[m - 1], out.sums[m - 1]);
  return out;
}

ApproachSpec normal_approach(const ImplicitDomain& domain, const Vec& xi, bool interior, double s0, int levels) {
  require(s0 > 0.0 && levels >= 1, "normal_approach: need s0 > 0 and levels >= 1");
  ApproachSpec a;
  a.base = xi;
  const Vec n = domain.outer_normal(xi);
  a.direction = interior ? Vec(-n) : n;
  for (int k = 0; k < levels; ++k) a.distances.push_back(s0 * std::ldexp(1.0, -k));
  return a;
}

void check_approach(const ImplicitDomain& domain, const ApproachSpec& approach, bool interior) {
  require(approach.aperture > 0.0 && approach.aperture < 1.0, "approach: aperture must lie in (0, 1)");
  require(std::abs(approach.direction.norm() - 1.0) <= 1e-12, "approach: direction must be a unit vector");
  require(!approach.distances.empty(), "approach: no distances");
  for (std::size_t k = 0; k < approach.distances.size(); ++k) {
    const double s = approach.distances[k];
    require(s > 0.0 && (k == 0 || s < approach.distances[k - 1]), "approach: distances must be positive and decreasing");
    const double sd = domain.signed_distance(approach.base + s * approach.direction);
    require((interior ? sd : -sd) > approach.aperture * s, "approach: point outside the nontangential cone");
  }
}

JumpReport jump_relation_check(const ImplicitDomain& domain, const std::function<double(const Vec&)>& f,
                               const ApproachSpec& plus, const ApproachSpec& minus, const JumpOptions& options) {
  require((plus.base - minus.base).norm() == 0.0, "jump_relation_check: approaches must share the base point");
  const Vec& xi = plus.base;
  require(on_boundary(domain, xi), "jump_relation_check: base point is not on the boundary");
  require(options.support_radius > 0.0, "jump_relation_check: support radius must be positive");
  JumpReport rep;
  rep.normal = domain.outer_normal(xi);
  check_approach(domain, plus, true);
  check_approach(domain, minus, false);
  rep.f_at_base = f(xi);

  auto side = [&](const ApproachSpec& a, std::vector<Vec>& values) {
    for (double s : a.distances) {
      const Vec x = xi + s * a.direction;
      const Vec foot = x - (x - xi).dot(rep.normal) * rep.normal;
      const double height = std::abs((x - xi).dot(rep.normal));
      RuleOptions ro = options.rule;
      ro.inner = std::min(ro.inner, 0.25 * height);
      const double outer = (foot - xi).norm() + options.support_radius;
      const auto fs = weighted(local_surface_rule(domain, xi, x, outer, ro), f);
      values.push_back(riesz_at(fs, x, options.exec));
    }
    const std::size_t m = values.size();
    return m == 1 ? values[0] : extrapolate_to_zero(a.distances[m - 2], values[m - 2], a.distances[m - 1], values[m - 1]);
  };
  rep.limit_plus = side(plus, rep.plus_values);
  rep.limit_minus = side(minus, rep.minus_values);

  // Principal value with panel edges on the truncation radii.
  const double rho = options.support_radius;
  RuleOptions pvo = options.rule;
  pvo.inner = std::ldexp(rho, -9);
  pvo.ratio = 2.0001;
  const auto fs = weighted(local_surface_rule(domain, xi, xi, rho, pvo), f);
  std::vector<double> radii;
  for (int k = 2; k <= 5; ++k) radii.push_back(std::ldexp(rho, -k));
  rep.pv = pv_riesz(fs, xi, radii, options.exec).limit;

  const Vec nf = rep.f_at_base * rep.normal;
  rep.jump_residual = (rep.limit_plus - rep.limit_minus - nf).norm();
  rep.plus_residual = (rep.limit_plus - 0.5 * nf - rep.pv).norm();
  rep.minus_residual = (rep.limit_minus + 0.5 * nf - rep.pv).norm();
  return rep;
}

LimitReport nontangential_gradient_limit_check(const ImplicitDomain& domain, const ApproachSpec& approach, double h,
                                               const wos::PoleSpec& pole, const wos::WalkConfig& cfg) {
  const Vec n = domain.outer_normal(approach.base);
  check_approach(domain, approach, true);
  LimitReport rep;
  for (double s : approach.distances) rep.values.push_back(wos::grad_u(domain, approach.base + s * approach.direction, pole, cfg));
  const auto& d = approach.distances;
  const std::size_t m = d.size();
  rep.limit = m == 1 ? rep.values[0] : extrapolate_to_zero(d[m - 2], rep.values[m - 2], d[m - 1], rep.values[m - 1]);
  rep.target = -h * n;
  rep.residual = (rep.limit - rep.target).norm();
  return rep;
}

GradientBound gradient_bound_check(const ImplicitDomain& domain, const Vec& x, const wos::PoleSpec& pole,
                                   const wos::WalkConfig& cfg, const std::function<double(const Vec&)>& h) {
  require(domain.contains(x) && domain.signed_distance(x) > 0.0, "gradient_bound_check: x must lie in the domain");
  GradientBound out;
  out.grad_norm = wos::grad_u(domain, x, pole, cfg).norm();
  // Interpolation error of the explicit profile, or the difference-quotient error.
  const double grad_error = pole.mode == wos::UMode::kExplicit && !pole.finite_difference ? 1e-9 : 1e-6;
  double se = 0.0;
  if (h) {
    const auto cloud = wos::hit_cloud(domain, x, cfg);
    require(!cloud.atoms.empty(), "gradient_bound_check: every walk was truncated");
    const std::size_t count = cloud.atoms.size();
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& a : cloud.atoms) {
      const double v = h(a.point);
      sum += v;
      sum2 += v * v;
    }
    out.bound = sum / count;
    const double var = count > 1 ? std::max(0.0, (sum2 - sum * sum / count) / (count - 1)) : 0.0;
    se = std::sqrt(var / count);
  } else {
    out.bound = 1.0;
  }
  out.error = std::hypot(se, grad_error);
  out.pass = out.grad_norm <= out.bound + 3.0 * out.error;
  return out;
}

}  // namespace potlab::potential
