#include "potlab/core/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "potlab/core/errors.hpp"

namespace potlab {

Rule1D gauss_legendre(int order, double lo, double hi) {
  require(order >= 1, "gauss_legendre: order must be >= 1");
  Rule1D rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  if (order == 1) {
    rule.nodes[0] = mid;
    rule.weights[0] = 2.0 * half;
    return rule;
  }
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[order - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[order - 1 - i] = half * w;
  }
  return rule;
}

Rule1D composite_gauss(const std::vector<double>& edges, int order) {
  Rule1D rule;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const Rule1D panel = gauss_legendre(order, edges[k], edges[k + 1]);
    rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return rule;
}

std::vector<double> geometric_edges(double inner, double outer, double ratio) {
  require(inner > 0.0 && outer > inner && ratio > 1.0, "geometric_edges: need 0 < inner < outer, ratio > 1");
  const int panels = static_cast<int>(std::ceil(std::log(outer / inner) / std::log(ratio)));
  const double q = std::pow(outer / inner, 1.0 / panels);
  std::vector<double> edges{0.0, inner};
  for (int k = 1; k <= panels; ++k) edges.push_back(k == panels ? outer : inner * std::pow(q, k));
  return edges;
}

double unit_sphere_area(int sphere_dim) {
  const double m1 = sphere_dim + 1.0;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m1) / std::tgamma(0.5 * m1);
}

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

SphereRule sphere_rule(int sphere_dim, int order) {
  require(sphere_dim >= 1 && order >= 1, "sphere_rule: need sphere_dim >= 1, order >= 1");
  SphereRule rule;
  if (sphere_dim == 1) {
    const int count = 4 * order;
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * (k + 0.5) / count;
      rule.directions.push_back(make_vec({std::cos(a), std::sin(a)}));
      rule.weights.push_back(2.0 * std::numbers::pi / count);
    }
    return rule;
  }
  const SphereRule lower = sphere_rule(sphere_dim - 1, order);
  Rule1D polar = composite_gauss({0.0, 0.5 * std::numbers::pi, std::numbers::pi}, order);
  for (std::size_t i = 0; i < polar.nodes.size(); ++i) {
    const double t = polar.nodes[i];
    const double jac = std::pow(std::sin(t), sphere_dim - 1) * polar.weights[i];
    for (std::size_t j = 0; j < lower.directions.size(); ++j) {
      Vec dir(sphere_dim + 1);
      dir[0] = std::cos(t);
      dir.tail(sphere_dim) = std::sin(t) * lower.directions[j];
      rule.directions.push_back(dir);
      rule.weights.push_back(jac * lower.weights[j]);
    }
  }
  return rule;
}

}  // namespace potlab
