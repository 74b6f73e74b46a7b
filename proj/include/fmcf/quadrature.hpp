#ifndef FMCF_QUADRATURE_HPP
#define FMCF_QUADRATURE_HPP

#include "fmcf/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace fmcf {

/// Gauss-Legendre rule mapped to [a, b].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussRule gauss_legendre(int order, double a = 0.0, double b = 1.0);

/// Tensor rule for the homotopy variables: t' on [0,1] and xi on [0,t'].
class HomotopyRule {
 public:
  explicit HomotopyRule(int order = 8);

  int order() const { return order_; }
  /// Outer rule in t' (also used for the plain t' integral of the first variation).
  const GaussRule& outer() const { return outer_; }
  /// Flattened triangle rule: xi values and weights for the iterated integral
  /// over 0 <= xi <= t' <= 1 (weights sum to 1/2).
  const Eigen::VectorXd& xi_nodes() const { return xi_; }
  const Eigen::VectorXd& xi_weights() const { return xi_w_; }

 private:
  int order_;
  GaussRule outer_;
  Eigen::VectorXd xi_;
  Eigen::VectorXd xi_w_;
};

/// Punctured-trapezoid rule for integrands with an |y - x|^{-sigma} singularity
/// at the target node.
///
/// For n = 1 the missing singular mass is restored from the neighbour values:
/// integrate() returns sum_{y != x} w_y f(y) - zeta(sigma) h sum_{nbr} f(nbr).
/// This is exact for the leading c|d|^{-sigma} term and cancels odd terms on
/// symmetric stencils. For n = 2 the plain punctured sum is returned.
class SingularQuadrature {
 public:
  SingularQuadrature(const SphereGrid& grid, double sigma);

  const SphereGrid& grid() const { return *grid_; }
  double sigma() const { return sigma_; }
  /// Coefficient -zeta(sigma) h multiplying each neighbour value (0 for n = 2).
  double neighbor_coefficient() const { return coef_; }
  /// Neighbours receiving the correction, -1 where absent.
  std::array<Index, 2> neighbors(Index x) const;

  /// Applies the rule to f(y) for y != x; f is called with node indices only.
  template <class F>
  double integrate(Index x, F&& f) const {
    const Index count = grid_->size();
    const Eigen::VectorXd& w = grid_->weights();
    double sum = 0.0;
    for (Index y = 0; y < count; ++y) {
      if (y != x) sum += w[y] * f(y);
    }
    if (coef_ != 0.0) {
      for (Index nb : neighbors(x)) {
        if (nb >= 0) sum += coef_ * f(nb);
      }
    }
    return sum;
  }

  /// Vector-valued variant of integrate().
  template <class F>
  Vec3 integrate_vec(Index x, F&& f) const {
    const Index count = grid_->size();
    const Eigen::VectorXd& w = grid_->weights();
    Vec3 sum = Vec3::Zero();
    for (Index y = 0; y < count; ++y) {
      if (y != x) sum += w[y] * f(y);
    }
    if (coef_ != 0.0) {
      for (Index nb : neighbors(x)) {
        if (nb >= 0) sum += coef_ * f(nb);
      }
    }
    return sum;
  }

  /// Effective weight of node y in the rule centred at x (0 at y = x).
  double weight(Index x, Index y) const;

 private:
  const SphereGrid* grid_;
  double sigma_;
  double coef_;
};

/// Riemann zeta at a real argument in (0, 1).
double zeta(double sigma);

}  // namespace fmcf

#endif  // FMCF_QUADRATURE_HPP
