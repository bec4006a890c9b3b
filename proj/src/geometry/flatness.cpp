#include "potlab/geometry/flatness.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "potlab/core/errors.hpp"
#include "potlab/core/parallel.hpp"
#include "potlab/core/rng.hpp"
#include "potlab/geometry/sampling.hpp"

namespace potlab::geometry {

namespace {

constexpr std::uint64_t kPlaneStream = 0x5eedf1a7ULL;

Vec canonical_sign(Vec n) {
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (std::abs(n[i]) > 1e-12) {
      if (n[i] > 0.0) n = -n;
      break;
    }
  }
  return n;
}

// Fixed sample sets reused for every candidate plane, so the objective is a
// deterministic function of the plane parameters.
struct Workspace {
  std::vector<BoundarySample> boundary;
  std::vector<Vec> plane_unit;  // points of the closed unit (d-1)-ball
  double gap = 0.0;
};

Workspace make_workspace(const ImplicitDomain& domain, const Vec& x, double r, const FlatnessOptions& opt) {
  require(r > 0.0, "flatness: radius must be positive");
  require(opt.boundary_samples >= 1 && opt.plane_samples >= 1, "flatness: sample counts must be >= 1");
  Workspace ws;
  ws.boundary = sample_boundary(domain, {x, r}, opt.boundary_samples, opt.seed);
  const int n = domain.dim() - 1;
  ws.plane_unit = map_indices<Vec>(opt.plane_samples, Execution::kParallel, [&](std::size_t i) {
    CounterRng rng(opt.seed ^ kPlaneStream, i);
    // A quarter of the plane samples sit on the rim, where the excess of a
    // cone or a tilted plane is attained.
    return i % 4 == 3 ? rng.unit_sphere(n) : rng.unit_ball(n);
  });
  const double covered = static_cast<double>(std::max<std::size_t>(1, std::min(ws.boundary.size(), ws.plane_unit.size())));
  ws.gap = std::pow(1.0 / covered, 1.0 / n);
  return ws;
}

double plane_excess(const ImplicitDomain& domain, const Vec& foot, double rho, const Mat& tangent,
                    const std::vector<Vec>& unit) {
  double m = 0.0;
  for (const Vec& t : unit) m = std::max(m, std::abs(domain.signed_distance(foot + rho * (tangent * t))));
  return m;
}

struct Excess {
  double boundary = 0.0;
  double plane = 0.0;
};

Excess excess(const ImplicitDomain& domain, const Vec& x, double r, const Plane& p, const Workspace& ws) {
  Excess e;
  for (const auto& s : ws.boundary) e.boundary = std::max(e.boundary, std::abs(p.normal.dot(s.point - p.base)));
  const double h = p.normal.dot(x - p.base);
  const double rho = std::sqrt(std::max(0.0, r * r - h * h));
  const Vec foot = x - h * p.normal;
  const Mat tangent = orthonormal_complement(p.normal);
  e.plane = plane_excess(domain, foot, rho, tangent, ws.plane_unit);
  return e;
}

FlatnessReport make_report(const Vec& x, double r, const Plane& p, const Excess& e, const Workspace& ws) {
  FlatnessReport rep;
  rep.center = x;
  rep.radius = r;
  rep.plane = p;
  rep.beta = e.boundary / r;
  rep.theta = std::max(e.boundary, e.plane) / r;
  rep.sample_count = ws.boundary.size() + ws.plane_unit.size();
  rep.max_gap_bound = ws.gap;
  return rep;
}

template <class F>
double golden_section(F&& f, double lo, double hi, int iterations) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace

Plane make_plane(const Vec& base, const Vec& normal) {
  require(base.size() == normal.size(), "plane: base and normal dimensions differ");
  require(normal.norm() > 0.0, "plane: zero normal");
  return {base, normal.normalized()};
}

FlatnessReport flatness_theta(const ImplicitDomain& domain, const Vec& x, double r, const Plane& plane,
                              const FlatnessOptions& options) {
  require(std::abs(plane.normal.dot(x - plane.base)) <= r, "flatness_theta: plane must pass within r of x");
  const Workspace ws = make_workspace(domain, x, r, options);
  return make_report(x, r, plane, excess(domain, x, r, plane, ws), ws);
}

FlatnessReport best_plane(const ImplicitDomain& domain, const Vec& x, double r, const FlatnessOptions& options) {
  const Workspace ws = make_workspace(domain, x, r, options);
  const int d = domain.dim();

  double total = 0.0;
  Vec mean = Vec::Zero(d);
  for (const auto& s : ws.boundary) {
    mean += s.weight * s.point;
    total += s.weight;
  }
  std::vector<Vec> starts{unit_vec(d, d - 1)};
  if (total > 0.0) {
    mean /= total;
    Mat cov = Mat::Zero(d, d);
    for (const auto& s : ws.boundary) cov += s.weight * (s.point - mean) * (s.point - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    // Every principal axis is a start: near-degenerate spectra (cone vertices)
    // make the smallest one unreliable.
    starts.clear();
    for (int j = 0; j < d; ++j) starts.push_back(eig.eigenvectors().col(j).normalized());
  }

  auto plane_of = [&](const Vec& n, double off) { return Plane{x + off * n, n}; };
  auto objective = [&](const Vec& n, double off) {
    const Excess e = excess(domain, x, r, plane_of(n, off), ws);
    return std::max(e.boundary, e.plane);
  };

  Vec normal = starts.front();
  double offset = 0.0;
  double best = 1e300;
  for (const Vec& start : starts) {
    Vec n = start;
    double off = total > 0.0 ? std::clamp(n.dot(mean - x), -0.9 * r, 0.9 * r) : 0.0;
    double value = objective(n, off);
    for (double span : {0.6, 0.3, 0.15, 0.075}) {
      const Mat tangent = orthonormal_complement(n);
      for (int j = 0; j < d - 1; ++j) {
        const Vec t = tangent.col(j);
        auto rotated = [&](double a) { return Vec(std::cos(a) * n + std::sin(a) * t); };
        const double a = golden_section([&](double s) { return objective(rotated(s), off); }, -span, span, 32);
        const Vec cand = rotated(a);
        const double v = objective(cand, off);
        if (v < value) {
          value = v;
          n = cand;
        }
      }
      const double reach = std::min(0.9 * r, value + 1e-3 * r);
      const double o = golden_section([&](double s) { return objective(n, s); }, -reach, reach, 40);
      const double v = objective(n, o);
      if (v < value) {
        value = v;
        off = o;
      }
    }
    if (value < best) {
      best = value;
      normal = n;
      offset = off;
    }
  }
  const Vec canon = canonical_sign(normal);
  if (canon.dot(normal) < 0.0) offset = -offset;
  const Plane p = plane_of(canon, offset);
  return make_report(x, r, p, excess(domain, x, r, p, ws), ws);
}

CorkscrewWitness check_corkscrew(const ImplicitDomain& domain, const Vec& xi, double r, double C, int grid) {
  require(r > 0.0, "check_corkscrew: radius must be positive");
  require(C >= 2.0, "check_corkscrew: C must be >= 2");
  require(grid >= 1, "check_corkscrew: grid must be >= 1");
  const int d = domain.dim();
  auto feasible = [&](const Vec& y, double sign) {
    return std::min(sign * domain.signed_distance(y), r - (y - xi).norm());
  };
  auto search = [&](double sign, Vec& best_point) {
    const int side = 2 * grid + 1;
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= side;
    double best = -1e300;
    for (long long idx = 0; idx < total; ++idx) {
      Vec y = xi;
      long long rem = idx;
      for (int i = 0; i < d; ++i) {
        y[i] += r * static_cast<double>(rem % side - grid) / grid;
        rem /= side;
      }
      const double v = feasible(y, sign);
      if (v > best) {
        best = v;
        best_point = y;
      }
    }
    double step = r / grid;
    while (step > 1e-6 * r) {
      bool moved = false;
      for (int i = 0; i < d && !moved; ++i) {
        for (double s : {1.0, -1.0}) {
          Vec y = best_point;
          y[i] += s * step;
          const double v = feasible(y, sign);
          if (v > best) {
            best = v;
            best_point = y;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    return best;
  };
  CorkscrewWitness w;
  w.interior_radius = search(1.0, w.interior);
  w.exterior_radius = search(-1.0, w.exterior);
  const double need = r / C * (1.0 - 1e-12);
  w.found = w.interior_radius >= need && w.exterior_radius >= need;
  return w;
}

}  // namespace potlab::geometry
