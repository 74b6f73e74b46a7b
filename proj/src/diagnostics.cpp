#include "fmcf/diagnostics.hpp"

#include "fmcf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace fmcf {

namespace {

void check_alpha(double alpha, const char* name) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in (0,1)");
  }
}

}  // namespace

HolderEstimate holder_norm(const SphereGrid& grid, const Eigen::VectorXd& u, double alpha,
                           int k) {
  check_alpha(alpha, "alpha");
  if (k != 0 && k != 1) throw std::invalid_argument("k must be 0 or 1");
  if (u.size() != grid.size()) throw std::invalid_argument("sample count does not match grid");
  HolderEstimate est;
  est.alpha = alpha;
  est.k = k;
  est.sup = u.lpNorm<Eigen::Infinity>();
  const Index count = grid.size();
  double semi = 0.0;
  if (k == 0) {
#pragma omp parallel for schedule(static) reduction(max : semi)
    for (Index x = 0; x < count; ++x) {
      for (Index y = x + 1; y < count; ++y) {
        semi = std::max(semi, std::abs(u[y] - u[x]) / std::pow(grid.chord(y, x), alpha));
      }
    }
  } else {
    const Eigen::Matrix3Xd g = tangential_gradient(grid, u);
    est.sup += g.colwise().norm().maxCoeff();
#pragma omp parallel for schedule(static) reduction(max : semi)
    for (Index x = 0; x < count; ++x) {
      for (Index y = x + 1; y < count; ++y) {
        semi = std::max(semi, (g.col(y) - g.col(x)).norm() / std::pow(grid.chord(y, x), alpha));
      }
    }
  }
  est.seminorm = semi;
  return est;
}

InterpolationReport interpolation_check(const SphereGrid& grid, const Eigen::VectorXd& u,
                                        double s1, double s2, double theta) {
  check_alpha(s1, "s1");
  check_alpha(s2, "s2");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
  InterpolationReport r;
  r.s = theta * s1 + (1.0 - theta) * s2;
  check_alpha(r.s, "mixed exponent");
  r.norm_s = holder_norm(grid, u, r.s).total();
  r.norm_s1 = holder_norm(grid, u, s1).total();
  r.norm_s2 = holder_norm(grid, u, s2).total();
  const double denom = r.norm_s1 == r.norm_s2
                            ? r.norm_s1
                            : std::pow(r.norm_s1, theta) * std::pow(r.norm_s2, 1.0 - theta);
  r.ratio = denom > 0.0 ? r.norm_s / denom : 0.0;
  return r;
}

DivergenceTerms divergence_identity_terms(const RadialField& rho, Index x,
                                          const KernelParams& params,
                                          const Eigen::Matrix3d& rotation) {
  const SphereGrid& grid = rho.grid();
  if (grid.is_hemisphere()) {
    throw std::invalid_argument("divergence identity needs a full-sphere field");
  }
  const SingularQuadrature quad(grid, params.s);
  const double q = params.n - 1.0 + params.s;
  const double half_p = 0.5 * params.p;

  auto node = [&](Index i) -> Vec3 { return rotation * grid.node(i); };
  auto grad = [&](Index i) -> Vec3 { return rotation * rho.gradient(i); };
  auto phi = [&](Index i) -> Vec3 { return rho(i) * node(i); };
  // transpose of the tangential Jacobian of Phi applied to w
  auto jac_t = [&](Index i, const Vec3& w) -> Vec3 {
    const Vec3 e = node(i);
    const Vec3 tangential = w - e.dot(w) * e;
    return rho(i) * tangential + grad(i) * e.dot(w);
  };

  const Vec3 px = phi(x);
  DivergenceTerms out;
  const Vec3 moment = quad.integrate_vec(x, [&](Index y) -> Vec3 {
    const Vec3 d = phi(y) - px;
    return d * std::exp(-half_p * std::log(d.squaredNorm()));
  });
  out.t1 = jac_t(x, moment);
  out.t2 = quad.integrate_vec(x, [&](Index y) -> Vec3 {
    const Vec3 d = phi(y) - px;
    return params.n * node(y) * std::exp(-0.5 * q * std::log(d.squaredNorm()));
  }) / q;
  out.t3 = quad.integrate_vec(x, [&](Index y) -> Vec3 {
    const Vec3 d = phi(y) - px;
    return (jac_t(y, d) - jac_t(x, d)) * std::exp(-half_p * std::log(d.squaredNorm()));
  });
  return out;
}

double divergence_identity_residual(const RadialField& rho, Index x, const KernelParams& params) {
  return divergence_identity_terms(rho, x, params).residual();
}

double divergence_identity_residual(const RadialField& rho, const KernelParams& params) {
  double worst = 0.0;
  for (Index x = 0; x < rho.size(); ++x) {
    worst = std::max(worst, divergence_identity_residual(rho, x, params));
  }
  return worst;
}

Eigen::VectorXd lemma521_values(double s, int resolution) {
  check_alpha(s, "s");
  const SphereGrid grid = SphereGrid::build(1, resolution, Topology::full_sphere);
  const double e = 1.0 - s;
  Eigen::VectorXd out(grid.size());
  for (Index x = 0; x < grid.size(); ++x) {
    double sum = 0.0;
    for (Index y = 0; y < grid.size(); ++y) {
      if (y != x) sum += grid.weights()[y] * std::pow(grid.chord(y, x), -e);
    }
    out[x] = sum;
  }
  return out;
}

Lemma521Report lemma521_bound(double s, const std::vector<int>& resolutions, double ratio_gate) {
  if (resolutions.size() < 3) throw std::invalid_argument("need at least three resolutions");
  Lemma521Report r;
  r.s = s;
  r.resolutions = resolutions;
  for (int res : resolutions) r.values.push_back(lemma521_values(s, res).maxCoeff());
  r.increasing = true;
  for (std::size_t i = 1; i < r.values.size(); ++i) {
    r.increments.push_back(r.values[i] - r.values[i - 1]);
    if (!(r.values[i] > r.values[i - 1])) r.increasing = false;
  }
  for (std::size_t i = 1; i < r.increments.size(); ++i) {
    r.ratios.push_back(r.increments[i] / r.increments[i - 1]);
  }
  r.max_ratio = *std::max_element(r.ratios.begin(), r.ratios.end());
  r.cauchy = r.max_ratio <= ratio_gate && r.max_ratio >= 0.0;
  return r;
}

KernelBoundReport kernel_bound_check(const RadialField& rho, const KernelParams& params,
                                     int samples, std::uint64_t seed) {
  const Index count = rho.size();
  if (count < 2) throw std::invalid_argument("kernel bound check needs two nodes");
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<Index> pick(0, count - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  KernelBoundReport r;
  r.samples = samples;
  r.kappa = std::pow(std::min(1.0, rho.values().minCoeff()), -params.p);
  for (int i = 0; i < samples; ++i) {
    const Index x = pick(gen);
    Index y = pick(gen);
    while (y == x) y = pick(gen);
    const double xi = unit(gen);
    const double scaled =
        kernel_K(xi, rho, y, x, params) * std::pow(rho.grid().chord(y, x), params.p);
    r.max_scaled = std::max(r.max_scaled, scaled);
  }
  r.pass = r.max_scaled <= r.kappa * (1.0 + 1e-12);
  return r;
}

double volume(const RadialField& rho) {
  const int n = rho.grid().dimension();
  return quad_integrate(rho.grid(), rho.values().array().pow(n + 1).matrix()) / (n + 1);
}

}  // namespace fmcf
