#include "potlab/potential/surface_rules.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>

#include "potlab/core/errors.hpp"
#include "potlab/core/parallel.hpp"
#include "potlab/core/quadrature.hpp"

namespace potlab::potential {

namespace {

void check_options(const RuleOptions& o) {
  require(o.inner > 0.0 && o.ratio > 1.0 && o.radial_order >= 1 && o.angular_order >= 1,
          "surface rule: need inner > 0, ratio > 1, positive orders");
}

// Boundary point on the line q + t n, |t| <= reach; the domain lies on the -n side.
Vec lift(const ImplicitDomain& domain, const Vec& q, const Vec& n, double reach) {
  auto g = [&](double t) { return domain.signed_distance(q + t * n); };
  double lo = -reach;
  double hi = reach;
  const double glo = g(lo);
  const double ghi = g(hi);
  if (glo == 0.0) return q + lo * n;
  if (ghi == 0.0) return q + hi * n;
  if (!(glo > 0.0 && ghi < 0.0)) throw NumericError("local_surface_rule: window is not a graph over the plane");
  boost::uintmax_t iters = 100;
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return q + 0.5 * (r.first + r.second) * n;
}

EmpiricalMeasure finish(std::vector<wos::Atom> atoms, MeasureKind kind, double resolution, int dim) {
  EmpiricalMeasure m;
  m.atoms = std::move(atoms);
  m.kind = kind;
  m.resolution = resolution;
  m.dim = dim;
  for (const auto& a : m.atoms) m.total_mass += a.weight;
  return m;
}

}  // namespace

EmpiricalMeasure local_surface_rule(const ImplicitDomain& domain, const Vec& base, const Vec& center, double outer,
                                    const RuleOptions& options) {
  check_options(options);
  const int d = domain.dim();
  require(d >= 2 && base.size() == d && center.size() == d, "local_surface_rule: dimension mismatch");
  require(outer > options.inner, "local_surface_rule: outer radius must exceed the inner panel edge");
  const Vec n = domain.outer_normal(base);
  const Mat tangent = orthonormal_complement(n);
  const Vec c = center - (center - base).dot(n) * n;
  const Rule1D radial = composite_gauss(geometric_edges(options.inner, outer, options.ratio), options.radial_order);
  const SphereRule dirs = sphere_rule(d - 2, options.angular_order);
  const bool flat = domain.kind() == geometry::DomainKind::kHalfSpace;
  const std::size_t nd = dirs.directions.size();

  auto atoms = map_indices<wos::Atom>(radial.nodes.size() * nd, Execution::kParallel, [&](std::size_t k) {
    const std::size_t i = k / nd;
    const std::size_t j = k % nd;
    const double rho = radial.nodes[i];
    const Vec q = c + rho * (tangent * dirs.directions[j]);
    const double w = radial.weights[i] * std::pow(rho, d - 2) * dirs.weights[j];
    if (flat) return wos::Atom{q, w};
    const Vec y = lift(domain, q, n, outer);
    const double cosine = std::abs(domain.outer_normal(y).dot(n));
    require(cosine > 1e-3, "local_surface_rule: boundary is nearly vertical over the plane");
    return wos::Atom{y, w / cosine};
  });
  return finish(std::move(atoms), MeasureKind::kSurface, options.inner, d);
}

EmpiricalMeasure cone_surface_rule(const ImplicitDomain& domain, double outer, const RuleOptions& options) {
  check_options(options);
  require(outer > options.inner, "cone_surface_rule: outer radius must exceed the inner panel edge");
  const auto kind = domain.kind();
  require(kind == geometry::DomainKind::kKPCone || kind == geometry::DomainKind::kHongCone,
          "cone_surface_rule: needs a KP or Hong cone");

  // Link of the cone on the unit sphere with its 2-dimensional measure.
  std::vector<Vec> link;
  std::vector<double> link_w;
  if (kind == geometry::DomainKind::kKPCone) {
    const SphereRule s2 = sphere_rule(2, options.angular_order);
    const double h = 1.0 / std::sqrt(2.0);
    for (double sign : {1.0, -1.0}) {
      for (std::size_t j = 0; j < s2.directions.size(); ++j) {
        Vec l(4);
        l.head(3) = h * s2.directions[j];
        l[3] = sign * h;
        link.push_back(l);
        link_w.push_back(0.5 * s2.weights[j]);
      }
    }
  } else {
    const double t0 = domain.info().theta0;
    const double a = std::cos(t0);
    const double b = std::sin(t0);
    const int m = 4 * options.angular_order;
    const double step = 2.0 * std::numbers::pi / m;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double phi = (i + 0.5) * step;
        const double psi = (j + 0.5) * step;
        link.push_back(make_vec({a * std::cos(phi), a * std::sin(phi), b * std::cos(psi), b * std::sin(psi)}));
        link_w.push_back(a * b * step * step);
      }
    }
  }

  const Rule1D radial = composite_gauss(geometric_edges(options.inner, outer, options.ratio), options.radial_order);
  const std::size_t nl = link.size();
  auto atoms = map_indices<wos::Atom>(radial.nodes.size() * nl, Execution::kParallel, [&](std::size_t k) {
    const std::size_t i = k / nl;
    const std::size_t j = k % nl;
    const double s = radial.nodes[i];
    return wos::Atom{s * link[j], radial.weights[i] * s * s * link_w[j]};
  });
  return finish(std::move(atoms), MeasureKind::kSurface, options.inner, 4);
}

EmpiricalMeasure weighted(EmpiricalMeasure measure, const std::function<double(const Vec&)>& f) {
  std::vector<wos::Atom> kept;
  kept.reserve(measure.atoms.size());
  for (auto& a : measure.atoms) {
    const double w = a.weight * f(a.point);
    if (w != 0.0) kept.push_back({a.point, w});
  }
  return finish(std::move(kept), MeasureKind::kWeightedSurface, measure.resolution, measure.dim);
}

double bump(const Vec& z, const Vec& center, double radius) {
  const double t2 = (z - center).squaredNorm() / (radius * radius);
  if (t2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

}  // namespace potlab::potential
