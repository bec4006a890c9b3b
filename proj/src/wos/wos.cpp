#include "potlab/wos/wos.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "potlab/core/errors.hpp"
#include "potlab/core/quadrature.hpp"
#include "potlab/core/rng.hpp"

namespace potlab::wos {

using geometry::DomainInfo;
using geometry::DomainKind;

void validate(const WalkConfig& cfg) {
  require(cfg.eps_shell > 0.0, "walk config: eps_shell must be > 0");
  require(cfg.max_steps >= 1, "walk config: max_steps must be >= 1");
  require(cfg.step_fraction > 0.0 && cfg.step_fraction <= 1.0, "walk config: step_fraction must lie in (0, 1]");
  require(cfg.walks >= 1, "walk config: walks must be >= 1");
}

HitRecord walk_to_boundary(const ImplicitDomain& domain, const Vec& start, const WalkConfig& cfg,
                           std::uint64_t walk_index) {
  const int dim = domain.dim();
  CounterRng rng(cfg.seed, walk_index);
  HitRecord rec;
  Vec x = start;
  for (long step = 0; step < cfg.max_steps; ++step) {
    const double d = domain.signed_distance(x);
    if (d <= cfg.eps_shell) {
      rec.hit = domain.project_to_boundary(x);
      rec.steps = step;
      return rec;
    }
    x += (cfg.step_fraction * d) * rng.unit_sphere(dim);
  }
  rec.truncated = true;
  rec.steps = cfg.max_steps;
  rec.hit = domain.project_to_boundary(x);
  return rec;
}

std::vector<HitRecord> run_walks(const ImplicitDomain& domain, const Vec& start, const WalkConfig& cfg) {
  validate(cfg);
  require(start.size() == domain.dim(), "walks: start has wrong dimension");
  const double d = domain.signed_distance(start);
  require(d > 0.0, "walks: start point lies outside the domain");
  require(d > cfg.eps_shell, "walks: start point lies inside the absorption shell");
  return map_indices<HitRecord>(cfg.walks, cfg.exec,
                                [&](std::size_t i) { return walk_to_boundary(domain, start, cfg, i); });
}

MeasureEstimate harmonic_measure(const std::vector<HitRecord>& hits, const BoundaryPredicate& indicator) {
  MeasureEstimate est;
  std::size_t inside = 0;
  for (const auto& h : hits) {
    if (h.truncated) {
      ++est.truncated;
      continue;
    }
    ++est.samples;
    if (indicator(h.hit)) ++inside;
  }
  if (est.samples == 0) throw NumericError("harmonic_measure: every walk was truncated");
  const double n = static_cast<double>(est.samples);
  est.value = static_cast<double>(inside) / n;
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / n);
  return est;
}

MeasureEstimate harmonic_measure(const ImplicitDomain& domain, const Vec& pole, const BoundaryPredicate& indicator,
                                 const WalkConfig& cfg) {
  return harmonic_measure(run_walks(domain, pole, cfg), indicator);
}

EmpiricalMeasure hit_cloud(const ImplicitDomain& domain, const Vec& pole, const WalkConfig& cfg) {
  const auto hits = run_walks(domain, pole, cfg);
  EmpiricalMeasure m;
  m.kind = MeasureKind::kHarmonic;
  m.resolution = cfg.eps_shell;
  m.dim = domain.dim();
  const double w = 1.0 / static_cast<double>(cfg.walks);
  for (const auto& h : hits) {
    if (h.truncated) continue;
    m.atoms.push_back({h.hit, w});
    m.total_mass += w;
  }
  return m;
}

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& measure) {
  for (int i = 0; i < measure.dim; ++i) os << "x" << i + 1 << ",";
  os << "weight\n";
  os.precision(17);
  for (const auto& a : measure.atoms) {
    for (Eigen::Index i = 0; i < a.point.size(); ++i) os << a.point[i] << ",";
    os << a.weight << "\n";
  }
}

double fundamental_solution(int dim, double r) {
  require(dim >= 3, "fundamental_solution: dimension must be >= 3");
  return 1.0 / ((dim - 2) * unit_sphere_area(dim - 1) * std::pow(r, dim - 2));
}

MeasureEstimate green_finite_pole(const ImplicitDomain& domain, const Vec& x, const Vec& p, const WalkConfig& cfg) {
  require(x.size() == domain.dim() && p.size() == domain.dim(), "green: points have wrong dimension");
  require((x - p).norm() > 0.0, "green: coincident points");
  require(domain.contains(p), "green: pole lies outside the domain");
  const bool x_inside = domain.contains(x);
  require(x_inside || domain.signed_distance(x) < 0.0, "green: x lies on the boundary");
  const int dim = domain.dim();
  // Walk from the point farther from the boundary; g is symmetric.
  const bool from_p = !x_inside || domain.signed_distance(p) >= domain.signed_distance(x);
  const Vec& walker = from_p ? p : x;
  const Vec& probe = from_p ? x : p;
  const auto hits = run_walks(domain, walker, cfg);

  struct Moments {
    double s = 0.0;
    double s2 = 0.0;
    double n = 0.0;
    Moments& operator+=(const Moments& o) {
      s += o.s;
      s2 += o.s2;
      n += o.n;
      return *this;
    }
  };
  const Moments m = blocked_sum(hits.size(), Moments{}, cfg.exec, [&](std::size_t i) {
    Moments t;
    if (hits[i].truncated) return t;
    const double e = fundamental_solution(dim, (probe - hits[i].hit).norm());
    t.s = e;
    t.s2 = e * e;
    t.n = 1.0;
    return t;
  });
  if (m.n == 0.0) throw NumericError("green: every walk was truncated");
  MeasureEstimate est;
  est.samples = static_cast<std::size_t>(m.n);
  est.truncated = hits.size() - est.samples;
  const double mean = m.s / m.n;
  const double var = std::max(0.0, m.s2 / m.n - mean * mean);
  est.value = fundamental_solution(dim, (x - p).norm()) - mean;
  est.std_error = m.n > 1.0 ? std::sqrt(var / (m.n - 1.0)) : 0.0;
  return est;
}

bool has_explicit_u(const ImplicitDomain& domain) {
  const DomainInfo& in = domain.info();
  switch (in.kind) {
    case DomainKind::kHalfSpace:
    case DomainKind::kKPCone: return true;
    case DomainKind::kHongCone: return in.profile != nullptr;
    case DomainKind::kProductCone:
    case DomainKind::kRescaled: return has_explicit_u(*in.base);
    default: return false;
  }
}

namespace {

void require_explicit(const ImplicitDomain& domain) {
  if (!has_explicit_u(domain))
    throw PreconditionError("explicit u is unavailable for " + domain.describe() +
                            (domain.kind() == DomainKind::kHongCone ? " (no profile attached)" : ""));
}

struct HongFrame {
  double r, a, b, theta;
};

HongFrame hong_frame(const Vec& x) {
  const double a = std::hypot(x[0], x[1]);
  const double b = std::hypot(x[2], x[3]);
  return {std::hypot(a, b), a, b, std::atan2(b, a)};
}

}  // namespace

double explicit_u(const ImplicitDomain& domain, const Vec& x) {
  require_explicit(domain);
  const DomainInfo& in = domain.info();
  switch (in.kind) {
    case DomainKind::kHalfSpace: return std::max(0.0, in.normal.dot(x) - in.offset);
    case DomainKind::kKPCone: {
      const double rho = x.head<3>().norm();
      const double w = x[3];
      if (rho <= std::abs(w)) return 0.0;
      return (rho * rho - w * w) / (2.0 * std::numbers::sqrt2 * rho);
    }
    case DomainKind::kHongCone: {
      const HongFrame f = hong_frame(x);
      if (f.theta >= in.theta0) return 0.0;
      return f.r * in.profile->tau() * in.profile->value(f.theta);
    }
    case DomainKind::kProductCone: return explicit_u(*in.base, x.head(in.base->dim()));
    case DomainKind::kRescaled: return explicit_u(*in.base, in.scale * x + in.center) / in.scale;
    default: break;
  }
  throw PreconditionError("explicit u is unavailable");
}

Vec explicit_grad_u(const ImplicitDomain& domain, const Vec& x) {
  require_explicit(domain);
  const DomainInfo& in = domain.info();
  const int d = domain.dim();
  switch (in.kind) {
    case DomainKind::kHalfSpace:
      return in.normal.dot(x) - in.offset > 0.0 ? Vec(in.normal) : Vec(Vec::Zero(d));
    case DomainKind::kKPCone: {
      const double rho = x.head<3>().norm();
      const double w = x[3];
      Vec g = Vec::Zero(4);
      if (rho <= std::abs(w)) return g;
      const double c = 1.0 / (2.0 * std::numbers::sqrt2);
      g.head<3>() = c * (1.0 + w * w / (rho * rho)) * x.head<3>() / rho;
      g[3] = -w / (std::numbers::sqrt2 * rho);
      return g;
    }
    case DomainKind::kHongCone: {
      const HongFrame f = hong_frame(x);
      Vec g = Vec::Zero(4);
      if (f.theta > in.theta0 || f.r == 0.0) return g;
      const double tau = in.profile->tau();
      const Vec er = x / f.r;
      Vec et = Vec::Zero(4);
      if (f.a > 0.0) et.head<2>() = -std::sin(f.theta) * x.head<2>() / f.a;
      if (f.b > 0.0) et.tail<2>() = std::cos(f.theta) * x.tail<2>() / f.b;
      return tau * in.profile->value(f.theta) * er + tau * in.profile->derivative(f.theta) * et;
    }
    case DomainKind::kProductCone: {
      Vec g = Vec::Zero(d);
      g.head(in.base->dim()) = explicit_grad_u(*in.base, x.head(in.base->dim()));
      return g;
    }
    case DomainKind::kRescaled: return explicit_grad_u(*in.base, in.scale * x + in.center);
    default: break;
  }
  throw PreconditionError("explicit u is unavailable");
}

double u_infinity(const ImplicitDomain& domain, const Vec& x, const PoleSpec& mode, const WalkConfig& cfg) {
  require(x.size() == domain.dim(), "u_infinity: point has wrong dimension");
  if (mode.mode == UMode::kExplicit) return explicit_u(domain, x);
  require(domain.contains(x), "u_infinity: x lies outside the domain");
  require(mode.p_far.size() == domain.dim() && mode.anchor.size() == domain.dim(),
          "u_infinity: ratio mode needs p_far and anchor");
  require(domain.contains(mode.p_far) && domain.contains(mode.anchor),
          "u_infinity: p_far and anchor must lie in the domain");
  require((mode.p_far - x).norm() >= 10.0 * (x - mode.anchor).norm(),
          "u_infinity: p_far too close (|p_far - x| < 10 |x - a|)");
  const auto num = green_finite_pole(domain, x, mode.p_far, cfg);
  const auto den = green_finite_pole(domain, mode.anchor, mode.p_far, cfg);
  if (den.value <= 0.0) throw NumericError("u_infinity: anchor Green value is not positive at MC resolution");
  return num.value / den.value;
}

Vec grad_u(const ImplicitDomain& domain, const Vec& x, const PoleSpec& mode, const WalkConfig& cfg) {
  if (mode.mode == UMode::kExplicit && !mode.finite_difference) {
    require(x.size() == domain.dim(), "grad_u: point has wrong dimension");
    return explicit_grad_u(domain, x);
  }
  const double d = domain.signed_distance(x);
  const double step = std::min(1e-4, d / 10.0);
  require(d > 0.0 && d > 4.0 * step, "grad_u: x inside the finite-difference safety margin");
  Vec g(domain.dim());
  for (int i = 0; i < domain.dim(); ++i) {
    Vec xp = x;
    Vec xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (u_infinity(domain, xp, mode, cfg) - u_infinity(domain, xm, mode, cfg)) / (2.0 * step);
  }
  return g;
}

}  // namespace potlab::wos
