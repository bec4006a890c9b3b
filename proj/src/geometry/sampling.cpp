#include "potlab/geometry/sampling.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>

#include "potlab/core/errors.hpp"
#include "potlab/core/parallel.hpp"
#include "potlab/core/quadrature.hpp"
#include "potlab/core/rng.hpp"

namespace potlab::geometry {

namespace {

struct Hit {
  Vec point;
  Vec normal;
  double jacobian = 0.0;
};

class Chart {
 public:
  virtual ~Chart() = default;
  /// Appends the boundary points produced by one draw (possibly none).
  virtual void draw(CounterRng& rng, std::vector<Hit>& out) const = 0;
};

bool in_window(const Ball& window, const Vec& y) { return (y - window.center).norm() <= window.radius; }

class PlaneChart final : public Chart {
 public:
  PlaneChart(const ImplicitDomain& domain, const Ball& window) {
    const DomainInfo& in = domain.info();
    normal_ = in.normal;
    const double dist = domain.signed_distance(window.center);
    origin_ = window.center - dist * normal_;
    radius_ = std::sqrt(std::max(0.0, window.radius * window.radius - dist * dist));
    tangent_ = orthonormal_complement(normal_);
    jacobian_ = unit_ball_volume(in.dim - 1) * std::pow(radius_, in.dim - 1);
  }
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    const Vec t = radius_ * rng.unit_ball(static_cast<int>(tangent_.cols()));
    out.push_back({origin_ + tangent_ * t, -normal_, jacobian_});
  }

 private:
  Vec normal_;
  Vec origin_;
  Mat tangent_;
  double radius_ = 0.0;
  double jacobian_ = 0.0;
};

class GraphChart final : public Chart {
 public:
  GraphChart(const ImplicitDomain& domain, const Ball& window) : window_(window) {
    const DomainInfo& in = domain.info();
    dim_ = in.dim;
    amplitude_ = in.amplitude;
    frequency_ = in.frequency;
    jacobian_ = unit_ball_volume(dim_ - 1) * std::pow(window.radius, dim_ - 1);
  }
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    const Vec t = window_.radius * rng.unit_ball(dim_ - 1);
    Vec y(dim_);
    y.head(dim_ - 1) = window_.center.head(dim_ - 1) + t;
    y[dim_ - 1] = amplitude_ * std::cos(frequency_ * y[0]);
    if (!in_window(window_, y)) return;
    const double slope = -amplitude_ * frequency_ * std::sin(frequency_ * y[0]);
    Vec n = Vec::Zero(dim_);
    n[0] = slope;
    n[dim_ - 1] = -1.0;
    const double stretch = n.norm();
    out.push_back({y, n / stretch, jacobian_ * stretch});
  }

 private:
  Ball window_;
  int dim_ = 0;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double jacobian_ = 0.0;
};

// Radial coordinate times a point of the cone's link on the unit sphere.
class ConicalChart final : public Chart {
 public:
  ConicalChart(const ImplicitDomain& domain, const Ball& window) : domain_(domain), window_(window) {
    const DomainInfo& in = domain.info();
    kind_ = in.kind;
    n_ = in.dim - 1;
    const double c = window.center.norm();
    s_hi_ = c + window.radius;
    const double s_lo = std::max(0.0, c - window.radius);
    ratio_ = std::pow(s_lo / s_hi_, n_);
    double link_area = 0.0;
    if (kind_ == DomainKind::kKPCone) {
      link_area = 4.0 * std::numbers::pi;
    } else {
      cos0_ = std::cos(in.theta0);
      sin0_ = std::sin(in.theta0);
      link_area = 4.0 * std::numbers::pi * std::numbers::pi * cos0_ * sin0_;
    }
    jacobian_ = (1.0 - ratio_) * std::pow(s_hi_, n_) / n_ * link_area;
  }
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    const double s = s_hi_ * std::pow(ratio_ + rng.uniform() * (1.0 - ratio_), 1.0 / n_);
    Vec link(4);
    if (kind_ == DomainKind::kKPCone) {
      const Vec w = rng.unit_sphere(3);
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      link << w[0], w[1], w[2], sign;
      link /= std::numbers::sqrt2;
    } else {
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      const double psi = 2.0 * std::numbers::pi * rng.uniform();
      link << cos0_ * std::cos(phi), cos0_ * std::sin(phi), sin0_ * std::cos(psi), sin0_ * std::sin(psi);
    }
    const Vec y = s * link;
    if (s <= 1e-9 * window_.radius || !in_window(window_, y)) return;
    out.push_back({y, domain_.outer_normal(y), jacobian_});
  }

 private:
  ImplicitDomain domain_;
  Ball window_;
  DomainKind kind_;
  int n_ = 3;
  double s_hi_ = 0.0;
  double ratio_ = 0.0;
  double cos0_ = 0.0;
  double sin0_ = 0.0;
  double jacobian_ = 0.0;
};

// Product of a conical base with extra Euclidean axes; extra coordinates are
// drawn uniformly in the bounding box of the window.
class ProductChart final : public Chart {
 public:
  ProductChart(const ImplicitDomain& domain, const Ball& window) : window_(window) {
    const DomainInfo& in = domain.info();
    base_dim_ = in.base->dim();
    extra_ = in.extra_dims;
    Ball base_window{window.center.head(base_dim_), window.radius};
    base_ = std::make_unique<ConicalChart>(*in.base, base_window);
    box_ = std::pow(2.0 * window.radius, extra_);
  }
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    std::vector<Hit> base_hits;
    base_->draw(rng, base_hits);
    Vec extra(extra_);
    for (int i = 0; i < extra_; ++i)
      extra[i] = window_.center[base_dim_ + i] + window_.radius * (2.0 * rng.uniform() - 1.0);
    for (const Hit& h : base_hits) {
      Vec y(base_dim_ + extra_);
      y << h.point, extra;
      if (!in_window(window_, y)) continue;
      Vec n = Vec::Zero(base_dim_ + extra_);
      n.head(base_dim_) = h.normal;
      out.push_back({y, n, h.jacobian * box_});
    }
  }

 private:
  Ball window_;
  int base_dim_ = 0;
  int extra_ = 0;
  double box_ = 1.0;
  std::unique_ptr<ConicalChart> base_;
};

// Graph over the tangent plane at the boundary point nearest the window
// center; valid for windows small compared with the distance to the vertex.
class TangentGraphChart final : public Chart {
 public:
  TangentGraphChart(const ImplicitDomain& domain, const Ball& window) : domain_(domain), window_(window) {
    origin_ = domain.project_to_boundary(window.center);
    normal_ = domain.outer_normal(origin_);
    tangent_ = orthonormal_complement(normal_);
    n_ = domain.dim() - 1;
    jacobian_ = unit_ball_volume(n_) * std::pow(window.radius, n_);
  }
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    const Vec foot = origin_ + tangent_ * (window_.radius * rng.unit_ball(n_));
    const double span = 2.0 * window_.radius;
    auto f = [&](double eta) { return domain_.signed_distance(foot + eta * normal_); };
    // Crossing nearest to the tangent plane: scan outward symmetrically.
    constexpr int kSteps = 32;
    const double h = span / kSteps;
    double lo = 0.0;
    double hi = 0.0;
    bool found = false;
    const double f0 = f(0.0);
    if (f0 == 0.0) {
      lo = hi = 0.0;
      found = true;
    }
    for (int k = 1; k <= kSteps && !found; ++k) {
      for (double dir : {1.0, -1.0}) {
        const double a = dir * (k - 1) * h;
        const double b = dir * k * h;
        if ((f(a) > 0.0) != (f(b) > 0.0)) {
          lo = a;
          hi = b;
          found = true;
          break;
        }
      }
    }
    if (!found) return;
    double flo = f(lo);
    for (int iter = 0; iter < 80 && std::abs(hi - lo) > 1e-15 * (1.0 + origin_.norm()); ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const Vec y = foot + 0.5 * (lo + hi) * normal_;
    if (!in_window(window_, y)) return;
    if (domain_.singular_distance(y) <= 1e-9 * window_.radius) return;
    const Vec n = domain_.outer_normal(y);
    const double cosine = std::abs(n.dot(normal_));
    if (cosine < 1e-3) return;
    out.push_back({y, n, jacobian_ / cosine});
  }

 private:
  ImplicitDomain domain_;
  Ball window_;
  Vec origin_;
  Vec normal_;
  Mat tangent_;
  int n_ = 2;
  double jacobian_ = 0.0;
};

// Crossings of random coordinate lines with the boundary. A crossing found on
// a line parallel to axis j carries weight d (2R)^{d-1} / sum_k |n_k|, which
// integrates |n_j| / sum_k |n_k| against surface measure; summing over the
// randomly chosen axis gives an unbiased estimate for any orientation.
class CrossingChart final : public Chart {
 public:
  CrossingChart(const ImplicitDomain& domain, const Ball& window) : domain_(domain), window_(window) {
    dim_ = domain.dim();
    jacobian_ = dim_ * std::pow(2.0 * window.radius, dim_ - 1);
  }
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    const int axis = std::min(dim_ - 1, static_cast<int>(rng.uniform() * dim_));
    Vec origin = window_.center;
    for (int i = 0; i < dim_; ++i)
      if (i != axis) origin[i] += window_.radius * (2.0 * rng.uniform() - 1.0);
    const double R = window_.radius;
    auto point = [&](double t) {
      Vec y = origin;
      y[axis] += t;
      return y;
    };
    constexpr int kProbes = 64;
    double prev_t = -R;
    double prev_f = domain_.phi(point(prev_t));
    for (int k = 1; k <= kProbes; ++k) {
      const double t = -R + 2.0 * R * k / kProbes;
      const double ft = domain_.phi(point(t));
      if ((prev_f > 0.0) != (ft > 0.0)) {
        double lo = prev_t;
        double hi = t;
        double flo = prev_f;
        for (int iter = 0; iter < 80 && hi - lo > 1e-14 * R; ++iter) {
          const double mid = 0.5 * (lo + hi);
          const double fm = domain_.phi(point(mid));
          if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        const Vec y = point(0.5 * (lo + hi));
        if (in_window(window_, y)) {
          const Vec n = -domain_.distance_gradient(y);
          out.push_back({y, n, jacobian_ / n.cwiseAbs().sum()});
        }
      }
      prev_t = t;
      prev_f = ft;
    }
  }

 private:
  ImplicitDomain domain_;
  Ball window_;
  int dim_ = 3;
  double jacobian_ = 0.0;
};

// Samples the base domain in the preimage window and maps them forward.
class RescaledChart final : public Chart {
 public:
  RescaledChart(const ImplicitDomain& domain, const Ball& window);
  void draw(CounterRng& rng, std::vector<Hit>& out) const override {
    std::vector<Hit> base_hits;
    base_->draw(rng, base_hits);
    for (Hit& h : base_hits) {
      h.point = (h.point - center_) / scale_;
      h.jacobian /= measure_scale_;
      out.push_back(std::move(h));
    }
  }

 private:
  std::unique_ptr<Chart> base_;
  Vec center_;
  double scale_ = 1.0;
  double measure_scale_ = 1.0;
};

void require_boundary_in_window(const ImplicitDomain& domain, const Ball& window) {
  if (domain.exact_distance()) {
    if (std::abs(domain.signed_distance(window.center)) > window.radius)
      throw PreconditionError("window does not meet the boundary");
    return;
  }
  const int dim = domain.dim();
  const int per_axis = 7;
  long long total = 1;
  for (int i = 0; i < dim; ++i) total *= per_axis;
  bool pos = false;
  bool neg = false;
  for (long long idx = 0; idx < total && !(pos && neg); ++idx) {
    Vec y = window.center;
    long long rem = idx;
    for (int i = 0; i < dim; ++i) {
      y[i] += window.radius * (2.0 * (rem % per_axis) / (per_axis - 1) - 1.0);
      rem /= per_axis;
    }
    if ((y - window.center).norm() > window.radius) continue;
    (domain.phi(y) > 0.0 ? pos : neg) = true;
  }
  if (!(pos && neg)) throw PreconditionError("window does not meet the boundary (probe-grid sign test)");
}

std::unique_ptr<Chart> choose_chart(const ImplicitDomain& domain, const Ball& window) {
  switch (domain.kind()) {
    case DomainKind::kHalfSpace: return std::make_unique<PlaneChart>(domain, window);
    case DomainKind::kPerturbedGraph: return std::make_unique<GraphChart>(domain, window);
    case DomainKind::kKPCone:
    case DomainKind::kHongCone:
      if (domain.singular_distance(window.center) > 4.0 * window.radius)
        return std::make_unique<TangentGraphChart>(domain, window);
      return std::make_unique<ConicalChart>(domain, window);
    case DomainKind::kProductCone:
      if (domain.singular_distance(window.center) > 4.0 * window.radius)
        return std::make_unique<TangentGraphChart>(domain, window);
      return std::make_unique<ProductChart>(domain, window);
    case DomainKind::kRescaled: return std::make_unique<RescaledChart>(domain, window);
    case DomainKind::kGenericImplicit: return std::make_unique<CrossingChart>(domain, window);
  }
  throw PreconditionError("sample_boundary: unsupported domain kind");
}

RescaledChart::RescaledChart(const ImplicitDomain& domain, const Ball& window) {
  const DomainInfo& in = domain.info();
  center_ = in.center;
  scale_ = in.scale;
  measure_scale_ = std::pow(scale_, in.dim - 1);
  Ball base_window{scale_ * window.center + center_, scale_ * window.radius};
  base_ = choose_chart(*in.base, base_window);
}

std::vector<std::vector<Hit>> draw_all(const ImplicitDomain& domain, const Ball& window, std::size_t count,
                                       std::uint64_t seed) {
  require(count >= 1, "sample_boundary: count must be >= 1");
  require(window.radius > 0.0, "sample_boundary: window radius must be positive");
  require(window.center.size() == domain.dim(), "sample_boundary: window center has wrong dimension");
  require_boundary_in_window(domain, window);
  const std::unique_ptr<Chart> chart = choose_chart(domain, window);
  return map_indices<std::vector<Hit>>(count, Execution::kParallel, [&](std::size_t i) {
    CounterRng rng(seed, i);
    std::vector<Hit> hits;
    chart->draw(rng, hits);
    return hits;
  });
}

}  // namespace

std::vector<BoundarySample> sample_boundary(const ImplicitDomain& domain, const Ball& window,
                                            std::size_t count, std::uint64_t seed) {
  const auto draws = draw_all(domain, window, count, seed);
  std::vector<BoundarySample> samples;
  samples.reserve(count);
  const double inv = 1.0 / static_cast<double>(count);
  for (const auto& hits : draws)
    for (const Hit& h : hits) samples.push_back({h.point, h.normal, h.jacobian * inv});
  return samples;
}

SurfaceEstimate surface_measure(const ImplicitDomain& domain, const Ball& window, std::size_t count,
                                std::uint64_t seed) {
  const auto draws = draw_all(domain, window, count, seed);
  double sum = 0.0;
  double sum2 = 0.0;
  SurfaceEstimate est;
  est.draws = count;
  for (const auto& hits : draws) {
    double s = 0.0;
    for (const Hit& h : hits) s += h.jacobian;
    est.accepted += hits.size();
    sum += s;
    sum2 += s * s;
  }
  const double n = static_cast<double>(count);
  est.value = sum / n;
  const double var = std::max(0.0, sum2 / n - est.value * est.value);
  est.std_error = count > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return est;
}

void write_samples_csv(std::ostream& os, const std::vector<BoundarySample>& samples) {
  if (samples.empty()) return;
  const auto d = samples.front().point.size();
  for (Eigen::Index i = 0; i < d; ++i) os << "x" << i + 1 << ",";
  for (Eigen::Index i = 0; i < d; ++i) os << "n" << i + 1 << ",";
  os << "weight\n";
  os.precision(17);
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < d; ++i) os << s.point[i] << ",";
    for (Eigen::Index i = 0; i < d; ++i) os << s.normal[i] << ",";
    os << s.weight << "\n";
  }
}

}  // namespace potlab::geometry
