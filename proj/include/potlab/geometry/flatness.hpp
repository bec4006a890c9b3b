#pragma once

#include <cstdint>

#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"

namespace potlab::geometry {

struct Plane {
  Vec base;
  Vec normal;  // unit
};

Plane make_plane(const Vec& base, const Vec& normal);

struct FlatnessReport {
  Vec center;
  double radius = 0.0;
  Plane plane;
  double theta = 0.0;  // two-sided excess / r
  double beta = 0.0;   // one-sided: sup over the boundary of dist(y, P) / r
  std::size_t sample_count = 0;
  double max_gap_bound = 0.0;  // nominal spacing of the sample sets, relative to r
};

struct FlatnessOptions {
  std::size_t boundary_samples = 6000;
  std::size_t plane_samples = 3000;
  std::uint64_t seed = 1;
};

/// Theta(x, r, P) from dense samples of the boundary and of the plane. The
/// sampled value is a lower bound; adding max_gap_bound gives an upper bound
/// (both excess functions are 1-Lipschitz).
FlatnessReport flatness_theta(const ImplicitDomain& domain, const Vec& x, double r, const Plane& plane,
                              const FlatnessOptions& options = {});

/// Upper bound for inf_P Theta(x, r, P): principal-component start followed
/// by two golden-section sweeps over rotations and the offset.
FlatnessReport best_plane(const ImplicitDomain& domain, const Vec& x, double r,
                          const FlatnessOptions& options = {});

struct CorkscrewWitness {
  bool found = false;
  Vec interior;
  Vec exterior;
  double interior_radius = 0.0;  // largest certified radius at the witness
  double exterior_radius = 0.0;
};

/// Interior and exterior balls of radius r / C inside B(xi, r), searched on a
/// (2 * grid + 1)^d probe lattice and refined by compass search.
CorkscrewWitness check_corkscrew(const ImplicitDomain& domain, const Vec& xi, double r, double C,
                                 int grid = 8);

}  // namespace potlab::geometry
