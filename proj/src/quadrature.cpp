#include "fmcf/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fmcf {

GaussRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  GaussRule rule{Eigen::VectorXd(order), Eigen::VectorXd(order)};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    // Newton on P_order starting from the Chebyshev guess
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (z * p1 - p0) / (z * z - 1.0);
    }
    // ascending order on [a, b]
    rule.nodes[order - 1 - i] = mid + half * z;
    rule.weights[order - 1 - i] = 2.0 * half / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

HomotopyRule::HomotopyRule(int order) : order_(order), outer_(gauss_legendre(order)) {
  const GaussRule inner = gauss_legendre(order);
  xi_.resize(order * order);
  xi_w_.resize(order * order);
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      const double t = outer_.nodes[a];
      xi_[a * order + b] = t * inner.nodes[b];
      xi_w_[a * order + b] = outer_.weights[a] * t * inner.weights[b];
    }
  }
}

double zeta(double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw std::invalid_argument("zeta is only needed on (0,1), got " + std::to_string(sigma));
  }
  return std::riemann_zeta(sigma);
}

SingularQuadrature::SingularQuadrature(const SphereGrid& grid, double sigma)
    : grid_(&grid), sigma_(sigma), coef_(0.0) {
  if (grid.dimension() == 1) coef_ = -zeta(sigma) * grid.spacing();
}

std::array<Index, 2> SingularQuadrature::neighbors(Index x) const {
  if (grid_->dimension() != 1) return {-1, -1};
  return grid_->parameter_neighbors(x);
}

double SingularQuadrature::weight(Index x, Index y) const {
  if (y == x) return 0.0;
  double w = grid_->weights()[y];
  for (Index nb : neighbors(x)) {
    if (nb == y) w += coef_;
  }
  return w;
}

}  // namespace fmcf
