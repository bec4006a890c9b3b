#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "potlab/core/parallel.hpp"
#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"

namespace potlab::wos {

using geometry::ImplicitDomain;

struct WalkConfig {
  double eps_shell = 1e-4;
  long max_steps = 10000;
  double step_fraction = 1.0;
  std::uint64_t seed = 1;
  std::size_t walks = 10000;
  Execution exec = Execution::kParallel;
};

void validate(const WalkConfig& cfg);

struct HitRecord {
  Vec hit;
  long steps = 0;
  bool truncated = false;
};

/// One walk; deterministic in (cfg.seed, walk_index).
HitRecord walk_to_boundary(const ImplicitDomain& domain, const Vec& start, const WalkConfig& cfg,
                           std::uint64_t walk_index);

/// cfg.walks walks from `start`, indices 0..walks-1. The serial and OpenMP
/// paths return identical records.
std::vector<HitRecord> run_walks(const ImplicitDomain& domain, const Vec& start, const WalkConfig& cfg);

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t truncated = 0;
};

using BoundaryPredicate = std::function<bool(const Vec&)>;

/// Fraction of non-truncated walks whose hit satisfies `indicator`, with
/// binomial standard error.
MeasureEstimate harmonic_measure(const ImplicitDomain& domain, const Vec& pole, const BoundaryPredicate& indicator,
                                 const WalkConfig& cfg);
MeasureEstimate harmonic_measure(const std::vector<HitRecord>& hits, const BoundaryPredicate& indicator);

enum class MeasureKind { kHarmonic, kWeightedSurface, kSurface };

struct Atom {
  Vec point;
  double weight = 0.0;
};

struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  double total_mass = 0.0;
  MeasureKind kind = MeasureKind::kHarmonic;
  double resolution = 0.0;  // shell width or quadrature spacing
  int dim = 0;
};

/// Atoms at the non-truncated hits, each of weight 1 / walks.
EmpiricalMeasure hit_cloud(const ImplicitDomain& domain, const Vec& pole, const WalkConfig& cfg);

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& measure);

/// Fundamental solution with -Laplace E = delta in R^dim, dim >= 3.
double fundamental_solution(int dim, double r);

/// g(x, p) = E(x - p) - E[E(x' - Z)], Z harmonic measure from the point of
/// {x, p} farther from the boundary. For x outside the closure the walk
/// always starts at p, and the estimate is of a quantity that vanishes.
MeasureEstimate green_finite_pole(const ImplicitDomain& domain, const Vec& x, const Vec& p, const WalkConfig& cfg);

enum class UMode { kExplicit, kRatio };

struct PoleSpec {
  UMode mode = UMode::kExplicit;
  Vec p_far;   // ratio mode
  Vec anchor;  // ratio mode, u(anchor) = 1
  bool finite_difference = false;  // grad_u by central differences in explicit mode too
};

bool has_explicit_u(const ImplicitDomain& domain);
/// Degree-one solution with |grad u| = 1 on the boundary: (n.x - c)^+ on
/// half-spaces, (rho^2 - w^2) / (2 sqrt 2 rho) on the KP cone, r tau f(theta)
/// on a Hong cone carrying a profile; products and rescalings inherit.
double explicit_u(const ImplicitDomain& domain, const Vec& x);
Vec explicit_grad_u(const ImplicitDomain& domain, const Vec& x);

double u_infinity(const ImplicitDomain& domain, const Vec& x, const PoleSpec& mode, const WalkConfig& cfg);

/// Explicit gradient, or central differences of u_infinity with step
/// min(1e-4, d(x) / 10) in ratio mode (or when finite_difference is set).
Vec grad_u(const ImplicitDomain& domain, const Vec& x, const PoleSpec& mode, const WalkConfig& cfg);

}  // namespace potlab::wos
