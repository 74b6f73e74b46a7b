#ifndef FMCF_DIAGNOSTICS_HPP
#define FMCF_DIAGNOSTICS_HPP

#include "fmcf/geometry.hpp"
#include "fmcf/nonlocal.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace fmcf {

/// Discrete C^{k+alpha} norm: sup part plus the all-pairs seminorm.
struct HolderEstimate {
  double alpha = 0.5;
  int k = 0;
  double sup = 0.0;
  double seminorm = 0.0;

  double total() const { return sup + seminorm; }
};

/// k = 0 uses u itself; k = 1 adds sup|grad u| and takes the seminorm of grad u.
HolderEstimate holder_norm(const SphereGrid& grid, const Eigen::VectorXd& u, double alpha,
                           int k = 0);

struct InterpolationReport {
  double s = 0.0;
  double norm_s = 0.0;
  double norm_s1 = 0.0;
  double norm_s2 = 0.0;
  /// ||u||_{C^s} / (||u||_{C^{s1}}^theta ||u||_{C^{s2}}^{1-theta})
  double ratio = 0.0;
};
InterpolationReport interpolation_check(const SphereGrid& grid, const Eigen::VectorXd& u,
                                        double s1, double s2, double theta);

/// The three vectors of the sphere divergence identity T1 + T2 + T3 = 0 at x.
struct DivergenceTerms {
  Vec3 t1 = Vec3::Zero();
  Vec3 t2 = Vec3::Zero();
  Vec3 t3 = Vec3::Zero();

  double residual() const { return (t1 + t2 + t3).norm(); }
};
/// `rotation` rotates the whole configuration before evaluation.
DivergenceTerms divergence_identity_terms(const RadialField& rho, Index x,
                                          const KernelParams& params,
                                          const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity());
double divergence_identity_residual(const RadialField& rho, Index x, const KernelParams& params);
/// Largest residual over all nodes.
double divergence_identity_residual(const RadialField& rho, const KernelParams& params);

struct Lemma521Report {
  double s = 0.5;
  std::vector<int> resolutions;
  std::vector<double> values;
  std::vector<double> increments;
  /// increments[i+1] / increments[i]
  std::vector<double> ratios;
  bool increasing = false;
  bool cauchy = false;
  double max_ratio = 0.0;
};
/// Punctured sums of |x - y|^{-(n-s)} over the unit circle at each resolution.
Lemma521Report lemma521_bound(double s, const std::vector<int>& resolutions = {128, 256, 512, 1024},
                              double ratio_gate = 0.75);
/// Values of the punctured sum at every node of a full circle with the given resolution.
Eigen::VectorXd lemma521_values(double s, int resolution);

struct KernelBoundReport {
  int samples = 0;
  double kappa = 0.0;
  double max_scaled = 0.0;
  bool pass = false;
};
/// Samples random (xi, y, x) and checks K_{xi rho}(y,x) |y-x|^p <= kappa with
/// kappa = min(1, min rho)^{-p}, a lower bound on the image separation ratio.
KernelBoundReport kernel_bound_check(const RadialField& rho, const KernelParams& params,
                                     int samples = 10000, std::uint64_t seed = 20240917);

/// Cone volume (1/(n+1)) int rho^{n+1}.
double volume(const RadialField& rho);

}  // namespace fmcf

#endif  // FMCF_DIAGNOSTICS_HPP
