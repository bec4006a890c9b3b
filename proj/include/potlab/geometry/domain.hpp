#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "potlab/core/vec.hpp"

namespace potlab::geometry {

enum class DomainKind {
  kHalfSpace,
  kKPCone,
  kHongCone,
  kProductCone,
  kPerturbedGraph,
  kGenericImplicit,
  kRescaled,
};

std::string to_string(DomainKind kind);

/// Angular profile f(theta) of a degree-one homogeneous harmonic function on
/// a cone {theta < theta0}; u = r * tau * f(theta).
class ConeProfile {
 public:
  virtual ~ConeProfile() = default;
  virtual double theta0() const = 0;
  virtual double tau() const = 0;
  virtual double value(double theta) const = 0;
  virtual double derivative(double theta) const = 0;
};

class ImplicitDomain;

/// Parameters of a domain, filled according to its kind.
struct DomainInfo {
  DomainKind kind = DomainKind::kHalfSpace;
  int dim = 0;
  std::string name;
  Vec normal;          // half-space: inward unit normal, Omega = {normal . x > offset}
  double offset = 0.0;
  double theta0 = 0.0;  // Hong cone opening
  std::shared_ptr<const ConeProfile> profile;
  double amplitude = 0.0;  // perturbed graph x_d > amplitude * cos(frequency * x_1)
  double frequency = 0.0;
  int extra_dims = 0;  // product cone
  std::shared_ptr<const ImplicitDomain> base;  // product and rescaled kinds
  Vec center;          // rescaled: Omega_r = (Omega - center) / scale
  double scale = 1.0;
  double lipschitz = 1.0;  // generic implicit
};

class DomainModel {
 public:
  virtual ~DomainModel() = default;

  virtual const DomainInfo& info() const = 0;
  /// Defining function, positive exactly on the domain.
  virtual double phi(const Vec& x) const = 0;
  /// Signed distance to the boundary (positive inside). For generic
  /// implicit domains this is the certified lower bound phi / Lipschitz.
  virtual double signed_distance(const Vec& x) const = 0;
  /// Gradient of the signed distance (points into the domain).
  virtual Vec distance_gradient(const Vec& x) const = 0;
  virtual bool exact_distance() const { return true; }
  /// Distance to the set where the boundary is not smooth (cone vertex,
  /// vertex line of a product cone); +inf when the boundary is smooth.
  virtual double singular_distance(const Vec& x) const;
  /// True when the domain is invariant under dilations about the origin.
  virtual bool conical() const { return false; }
};

/// Immutable, cheaply copyable handle to a domain; safe to share across threads.
class ImplicitDomain {
 public:
  explicit ImplicitDomain(std::shared_ptr<const DomainModel> model);

  int dim() const { return model_->info().dim; }
  DomainKind kind() const { return model_->info().kind; }
  const DomainInfo& info() const { return model_->info(); }
  const DomainModel& model() const { return *model_; }

  double phi(const Vec& x) const { return model_->phi(x); }
  bool contains(const Vec& x) const { return model_->phi(x) > 0.0; }
  double signed_distance(const Vec& x) const;
  Vec distance_gradient(const Vec& x) const { return model_->distance_gradient(x); }
  double singular_distance(const Vec& x) const { return model_->singular_distance(x); }
  bool conical() const { return model_->conical(); }
  bool exact_distance() const { return model_->exact_distance(); }

  /// Unit outer normal at a boundary point. Throws PreconditionError at a
  /// cone vertex (within 1e-9 of the singular set, relative to |xi| + 1).
  Vec outer_normal(const Vec& xi) const;

  /// Nearest boundary point (exact kinds) or Newton projection along the
  /// defining-function gradient (generic kinds).
  Vec project_to_boundary(const Vec& x) const;

  std::string describe() const;

 private:
  std::shared_ptr<const DomainModel> model_;
};

ImplicitDomain half_space(int dim, const Vec& inward_normal, double offset);
ImplicitDomain kp_cone();
ImplicitDomain hong_cone(double theta0, std::shared_ptr<const ConeProfile> profile = nullptr);
ImplicitDomain product_domain(const ImplicitDomain& base, int extra_dims);
ImplicitDomain perturbed_graph(int dim, double amplitude, double frequency);
ImplicitDomain generic_implicit(int dim, std::function<double(const Vec&)> phi, double lipschitz,
                                std::string name = "generic");
/// (Omega - center) / scale, with analytic shortcuts where the result is
/// again a built-in kind (half-spaces, cones rescaled about their vertex).
ImplicitDomain rescaled_domain(const ImplicitDomain& base, const Vec& center, double scale);

/// Declarative domain record as it appears in experiment configs.
struct DomainDescriptor {
  std::string kind;  // halfspace | kp_cone | hong_cone | product | perturbed_graph
  int dim = 3;
  std::vector<double> normal;  // half-space inward normal (defaults to e_d)
  double offset = 0.0;
  double theta0 = 0.0;  // hong_cone opening, must lie in (0, pi/2)
  double amplitude = 0.0;
  double frequency = 1.0;
  int extra_dims = 0;
  std::string base_kind = "hong_cone";  // product base
};

std::vector<std::string> supported_kinds();

/// Builds a built-in domain. Hong cones need theta0 in (0, pi/2); callers
/// that want the explicit solution attach a profile via hong_cone().
ImplicitDomain make_domain(const DomainDescriptor& descriptor);

}  // namespace potlab::geometry
