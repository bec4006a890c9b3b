#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "potlab/core/vec.hpp"
#include "potlab/geometry/domain.hpp"

namespace potlab::geometry {

struct Ball {
  Vec center;
  double radius = 1.0;
};

/// A point of the boundary with its outer normal and a surface-measure
/// quadrature weight; weights of a window sum to an estimate of its area.
struct BoundarySample {
  Vec point;
  Vec normal;
  double weight = 0.0;
};

struct SurfaceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
  std::size_t accepted = 0;
};

/// Surface-measure samples of the boundary inside `window`. `count` is the
/// number of chart draws; rejected draws carry no sample. Deterministic in
/// `seed` and independent of the worker count.
///
/// Charts: graph over a plane for half-spaces and perturbed graphs, radial x
/// link for cones near their vertex, tangent-plane graph for small windows
/// at smooth cone points, and coordinate-line crossings for generic kinds.
std::vector<BoundarySample> sample_boundary(const ImplicitDomain& domain, const Ball& window,
                                            std::size_t count, std::uint64_t seed);

/// Monte Carlo estimate of H^n(boundary intersect window) with standard error.
SurfaceEstimate surface_measure(const ImplicitDomain& domain, const Ball& window, std::size_t count,
                                std::uint64_t seed);

/// CSV with columns x1..xd,n1..nd,weight.
void write_samples_csv(std::ostream& os, const std::vector<BoundarySample>& samples);

}  // namespace potlab::geometry
