#include "potlab/geometry/domain.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "potlab/core/errors.hpp"

namespace potlab::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign_or_plus(double v) { return v < 0.0 ? -1.0 : 1.0; }

class HalfSpaceModel final : public DomainModel {
 public:
  HalfSpaceModel(int dim, const Vec& normal, double offset) {
    info_.kind = DomainKind::kHalfSpace;
    info_.dim = dim;
    info_.name = "halfspace";
    info_.normal = normal.normalized();
    info_.offset = offset;
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override { return signed_distance(x); }
  double signed_distance(const Vec& x) const override { return info_.normal.dot(x) - info_.offset; }
  Vec distance_gradient(const Vec&) const override { return info_.normal; }
  bool conical() const override { return info_.offset == 0.0; }

 private:
  DomainInfo info_;
};

// {|x'| > |w|} in R^4 with x' = (x1, x2, x3), w = x4.
class KPConeModel final : public DomainModel {
 public:
  KPConeModel() {
    info_.kind = DomainKind::kKPCone;
    info_.dim = 4;
    info_.name = "kp_cone";
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override { return x.head<3>().squaredNorm() - x[3] * x[3]; }
  double signed_distance(const Vec& x) const override {
    return (x.head<3>().norm() - std::abs(x[3])) / std::numbers::sqrt2;
  }
  Vec distance_gradient(const Vec& x) const override {
    Vec g(4);
    const double rho = x.head<3>().norm();
    if (rho > 0.0) {
      g.head<3>() = x.head<3>() / rho;
    } else {
      g.head<3>() = Eigen::Vector3d(1.0, 0.0, 0.0);
    }
    g[3] = -sign_or_plus(x[3]);
    return g / std::numbers::sqrt2;
  }
  double singular_distance(const Vec& x) const override { return x.norm(); }
  bool conical() const override { return true; }

 private:
  DomainInfo info_;
};

// {x1^2 + x2^2 > (x3^2 + x4^2) cot^2 theta0} in R^4, i.e. theta < theta0 with
// theta = atan2(|(x3, x4)|, |(x1, x2)|).
class HongConeModel final : public DomainModel {
 public:
  HongConeModel(double theta0, std::shared_ptr<const ConeProfile> profile) {
    info_.kind = DomainKind::kHongCone;
    info_.dim = 4;
    info_.name = "hong_cone";
    info_.theta0 = theta0;
    info_.profile = std::move(profile);
    sin0_ = std::sin(theta0);
    cos0_ = std::cos(theta0);
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override {
    const double a2 = x[0] * x[0] + x[1] * x[1];
    const double b2 = x[2] * x[2] + x[3] * x[3];
    return a2 * sin0_ * sin0_ - b2 * cos0_ * cos0_;
  }
  double signed_distance(const Vec& x) const override {
    const double a = std::hypot(x[0], x[1]);
    const double b = std::hypot(x[2], x[3]);
    // r sin(theta0 - theta) = a sin(theta0) - b cos(theta0)
    return a * sin0_ - b * cos0_;
  }
  Vec distance_gradient(const Vec& x) const override {
    const double a = std::hypot(x[0], x[1]);
    const double b = std::hypot(x[2], x[3]);
    Vec g = Vec::Zero(4);
    if (a > 0.0) {
      g[0] = x[0] / a;
      g[1] = x[1] / a;
    } else {
      g[0] = 1.0;
    }
    g.head<2>() *= sin0_;
    if (b > 0.0) {
      g[2] = -cos0_ * x[2] / b;
      g[3] = -cos0_ * x[3] / b;
    } else {
      g[2] = -cos0_;
    }
    return g;
  }
  double singular_distance(const Vec& x) const override { return x.norm(); }
  bool conical() const override { return true; }

 private:
  DomainInfo info_;
  double sin0_ = 0.0;
  double cos0_ = 0.0;
};

class ProductModel final : public DomainModel {
 public:
  ProductModel(const ImplicitDomain& base, int extra_dims) {
    info_.kind = DomainKind::kProductCone;
    info_.dim = base.dim() + extra_dims;
    info_.name = "product(" + base.info().name + ")";
    info_.extra_dims = extra_dims;
    info_.base = std::make_shared<const ImplicitDomain>(base);
    info_.theta0 = base.info().theta0;
    info_.profile = base.info().profile;
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override { return base().phi(head(x)); }
  double signed_distance(const Vec& x) const override { return base().signed_distance(head(x)); }
  Vec distance_gradient(const Vec& x) const override {
    Vec g = Vec::Zero(info_.dim);
    g.head(base().dim()) = base().distance_gradient(head(x));
    return g;
  }
  bool exact_distance() const override { return base().exact_distance(); }
  double singular_distance(const Vec& x) const override { return base().singular_distance(head(x)); }
  bool conical() const override { return base().conical(); }

 private:
  const ImplicitDomain& base() const { return *info_.base; }
  Vec head(const Vec& x) const { return x.head(base().dim()); }
  DomainInfo info_;
};

// {x_d > a cos(k x_1)}; exact distance via a one-dimensional minimization in
// the (x_1, x_d) plane, since the boundary is a cylinder over a curve.
class PerturbedGraphModel final : public DomainModel {
 public:
  PerturbedGraphModel(int dim, double amplitude, double frequency) {
    info_.kind = DomainKind::kPerturbedGraph;
    info_.dim = dim;
    info_.name = "perturbed_graph";
    info_.amplitude = amplitude;
    info_.frequency = frequency;
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override { return x[info_.dim - 1] - height(x[0]); }
  double signed_distance(const Vec& x) const override {
    const auto [t, dist] = foot(x);
    (void)t;
    return phi(x) >= 0.0 ? dist : -dist;
  }
  Vec distance_gradient(const Vec& x) const override {
    const int d = info_.dim;
    const auto [t, dist] = foot(x);
    Vec g = Vec::Zero(d);
    if (dist > 1e-12 * (1.0 + std::abs(x[d - 1]))) {
      g[0] = x[0] - t;
      g[d - 1] = x[d - 1] - height(t);
      g /= dist;
      if (phi(x) < 0.0) g = -g;
    } else {
      g[0] = -slope(t);
      g[d - 1] = 1.0;
      g.normalize();
    }
    return g;
  }

 private:
  double height(double t) const { return info_.amplitude * std::cos(info_.frequency * t); }
  double slope(double t) const { return -info_.amplitude * info_.frequency * std::sin(info_.frequency * t); }

  std::pair<double, double> foot(const Vec& x) const {
    const double x1 = x[0];
    const double z = x[info_.dim - 1];
    const double vertical = std::abs(z - height(x1));
    if (info_.amplitude == 0.0 || vertical == 0.0) return {x1, vertical};
    auto dist2 = [&](double t) {
      const double dz = height(t) - z;
      return (t - x1) * (t - x1) + dz * dz;
    };
    // The foot lies within the vertical distance of x1; scan then polish.
    const double span = vertical;
    const double period = 2.0 * std::numbers::pi / info_.frequency;
    const int steps = std::max(16, static_cast<int>(std::ceil(32.0 * span / period)));
    double best_t = x1;
    double best = dist2(x1);
    const double h = 2.0 * span / steps;
    for (int i = 0; i <= steps; ++i) {
      const double t = x1 - span + i * h;
      const double v = dist2(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    const auto result = boost::math::tools::brent_find_minima(dist2, best_t - h, best_t + h, 52);
    if (result.second < best) {
      best = result.second;
      best_t = result.first;
    }
    return {best_t, std::sqrt(best)};
  }

  DomainInfo info_;
};

class GenericModel final : public DomainModel {
 public:
  GenericModel(int dim, std::function<double(const Vec&)> fn, double lipschitz, std::string name)
      : fn_(std::move(fn)) {
    info_.kind = DomainKind::kGenericImplicit;
    info_.dim = dim;
    info_.name = std::move(name);
    info_.lipschitz = lipschitz;
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override { return fn_(x); }
  double signed_distance(const Vec& x) const override { return fn_(x) / info_.lipschitz; }
  Vec distance_gradient(const Vec& x) const override {
    Vec g(info_.dim);
    const double h = 1e-6 * (1.0 + x.norm());
    for (int i = 0; i < info_.dim; ++i) {
      Vec xp = x;
      Vec xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (fn_(xp) - fn_(xm)) / (2.0 * h);
    }
    const double n = g.norm();
    return n > 0.0 ? Vec(g / n) : unit_vec(info_.dim, info_.dim - 1);
  }
  bool exact_distance() const override { return false; }

 private:
  DomainInfo info_;
  std::function<double(const Vec&)> fn_;
};

class RescaledModel final : public DomainModel {
 public:
  RescaledModel(const ImplicitDomain& base, const Vec& center, double scale) {
    info_ = base.info();
    info_.kind = DomainKind::kRescaled;
    info_.name = "rescaled(" + base.info().name + ")";
    info_.base = std::make_shared<const ImplicitDomain>(base);
    info_.center = center;
    info_.scale = scale;
  }
  const DomainInfo& info() const override { return info_; }
  double phi(const Vec& x) const override { return base().phi(to_base(x)); }
  double signed_distance(const Vec& x) const override {
    return base().signed_distance(to_base(x)) / info_.scale;
  }
  Vec distance_gradient(const Vec& x) const override { return base().distance_gradient(to_base(x)); }
  bool exact_distance() const override { return base().exact_distance(); }
  double singular_distance(const Vec& x) const override {
    return base().singular_distance(to_base(x)) / info_.scale;
  }

 private:
  const ImplicitDomain& base() const { return *info_.base; }
  Vec to_base(const Vec& x) const { return info_.scale * x + info_.center; }
  DomainInfo info_;
};

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kHalfSpace: return "halfspace";
    case DomainKind::kKPCone: return "kp_cone";
    case DomainKind::kHongCone: return "hong_cone";
    case DomainKind::kProductCone: return "product";
    case DomainKind::kPerturbedGraph: return "perturbed_graph";
    case DomainKind::kGenericImplicit: return "generic";
    case DomainKind::kRescaled: return "rescaled";
  }
  return "unknown";
}

double DomainModel::singular_distance(const Vec&) const { return kInf; }

ImplicitDomain::ImplicitDomain(std::shared_ptr<const DomainModel> model) : model_(std::move(model)) {}

double ImplicitDomain::signed_distance(const Vec& x) const { return model_->signed_distance(x); }

Vec ImplicitDomain::outer_normal(const Vec& xi) const {
  require(xi.size() == dim(), "outer_normal: dimension mismatch");
  if (singular_distance(xi) <= 1e-9 * (1.0 + xi.norm()))
    throw PreconditionError("outer_normal: point is on the singular set (cone vertex)");
  return -model_->distance_gradient(xi).normalized();
}

Vec ImplicitDomain::project_to_boundary(const Vec& x) const {
  Vec y = x;
  if (exact_distance()) {
    for (int iter = 0; iter < 3; ++iter) {
      const double d = signed_distance(y);
      if (d == 0.0) break;
      y -= d * distance_gradient(y);
    }
    return y;
  }
  // Newton along the normalized gradient; the distance bound is phi / L.
  for (int iter = 0; iter < 50; ++iter) {
    const double d = signed_distance(y);
    if (std::abs(d) <= 1e-13 * (1.0 + y.norm())) break;
    y -= d * distance_gradient(y);
  }
  return y;
}

std::string ImplicitDomain::describe() const {
  const DomainInfo& in = info();
  std::ostringstream os;
  os << in.name << "(d=" << in.dim;
  switch (in.kind) {
    case DomainKind::kHalfSpace: os << ", offset=" << in.offset; break;
    case DomainKind::kHongCone: os << ", theta0=" << in.theta0; break;
    case DomainKind::kProductCone: os << ", extra=" << in.extra_dims; break;
    case DomainKind::kPerturbedGraph: os << ", a=" << in.amplitude << ", k=" << in.frequency; break;
    case DomainKind::kRescaled: os << ", scale=" << in.scale; break;
    default: break;
  }
  os << ")";
  return os.str();
}

ImplicitDomain half_space(int dim, const Vec& inward_normal, double offset) {
  require(dim >= 2 && dim <= kMaxDim, "half_space: dimension out of range");
  require(inward_normal.size() == dim, "half_space: normal has wrong dimension");
  require(inward_normal.norm() > 0.0, "half_space: zero normal");
  return ImplicitDomain(std::make_shared<HalfSpaceModel>(dim, inward_normal, offset));
}

ImplicitDomain kp_cone() { return ImplicitDomain(std::make_shared<KPConeModel>()); }

ImplicitDomain hong_cone(double theta0, std::shared_ptr<const ConeProfile> profile) {
  require(theta0 > 0.0 && theta0 < 0.5 * std::numbers::pi, "hong_cone: theta0 must lie in (0, pi/2)");
  return ImplicitDomain(std::make_shared<HongConeModel>(theta0, std::move(profile)));
}

ImplicitDomain product_domain(const ImplicitDomain& base, int extra_dims) {
  require(extra_dims >= 1, "product_domain: extra_dims must be >= 1");
  require(base.dim() + extra_dims <= kMaxDim, "product_domain: dimension exceeds supported maximum");
  return ImplicitDomain(std::make_shared<ProductModel>(base, extra_dims));
}

ImplicitDomain perturbed_graph(int dim, double amplitude, double frequency) {
  require(dim >= 2 && dim <= kMaxDim, "perturbed_graph: dimension out of range");
  require(frequency > 0.0, "perturbed_graph: frequency must be positive");
  return ImplicitDomain(std::make_shared<PerturbedGraphModel>(dim, amplitude, frequency));
}

ImplicitDomain generic_implicit(int dim, std::function<double(const Vec&)> phi, double lipschitz,
                                std::string name) {
  require(dim >= 2 && dim <= kMaxDim, "generic_implicit: dimension out of range");
  require(lipschitz > 0.0, "generic_implicit: Lipschitz bound must be positive");
  return ImplicitDomain(std::make_shared<GenericModel>(dim, std::move(phi), lipschitz, std::move(name)));
}

ImplicitDomain rescaled_domain(const ImplicitDomain& base, const Vec& center, double scale) {
  require(scale > 0.0, "rescaled_domain: scale must be positive");
  require(center.size() == base.dim(), "rescaled_domain: center has wrong dimension");
  if (base.kind() == DomainKind::kHalfSpace) {
    const DomainInfo& in = base.info();
    return half_space(in.dim, in.normal, (in.offset - in.normal.dot(center)) / scale);
  }
  if (base.conical() && center.norm() == 0.0) return base;
  return ImplicitDomain(std::make_shared<RescaledModel>(base, center, scale));
}

std::vector<std::string> supported_kinds() {
  return {"halfspace", "kp_cone", "hong_cone", "product", "perturbed_graph"};
}

ImplicitDomain make_domain(const DomainDescriptor& spec) {
  if (spec.kind == "halfspace") {
    require(spec.dim >= 2 && spec.dim <= 5, "halfspace: dim must lie in {2,...,5}");
    Vec n = unit_vec(spec.dim, spec.dim - 1);
    if (!spec.normal.empty()) {
      require(static_cast<int>(spec.normal.size()) == spec.dim, "halfspace: normal length must equal dim");
      for (int i = 0; i < spec.dim; ++i) n[i] = spec.normal[i];
    }
    return half_space(spec.dim, n, spec.offset);
  }
  if (spec.kind == "kp_cone") return kp_cone();
  if (spec.kind == "hong_cone") return hong_cone(spec.theta0);
  if (spec.kind == "perturbed_graph") return perturbed_graph(spec.dim, spec.amplitude, spec.frequency);
  if (spec.kind == "product") {
    require(spec.extra_dims >= 1, "product: extra_dims must be >= 1");
    DomainDescriptor base = spec;
    base.kind = spec.base_kind;
    require(base.kind == "kp_cone" || base.kind == "hong_cone", "product: base must be a cone");
    return product_domain(make_domain(base), spec.extra_dims);
  }
  std::string kinds;
  for (const auto& k : supported_kinds()) kinds += (kinds.empty() ? "" : ", ") + k;
  throw PreconditionError("unknown domain kind '" + spec.kind + "' (supported: " + kinds + ")");
}

}  // namespace potlab::geometry
