#ifndef FMCF_NONLOCAL_HPP
#define FMCF_NONLOCAL_HPP

#include "fmcf/geometry.hpp"
#include "fmcf/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace fmcf {

/// Fractional order s and surface dimension n; the kernel decays like |y-x|^{-p}.
struct KernelParams {
  double s = 0.5;
  int n = 1;
  double p = 2.5;

  static KernelParams make(double s, int n = 1);
};

/// Raised when the image nodes of Phi_rho come too close together.
class DegenerateParametrization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest ratio |Phi_rho(y) - Phi_rho(x)| / |y - x| over node pairs.
double injectivity_ratio(const RadialField& rho);
/// Throws DegenerateParametrization if injectivity_ratio(rho) / max rho < min_ratio,
/// so uniform dilations never trip it.
void check_injectivity(const RadialField& rho, double min_ratio = 0.1);

/// K_{xi rho}(y, x) = |Phi_{xi rho}(y) - Phi_{xi rho}(x)|^{-p}.
double kernel_K(double xi, const RadialField& rho, Index y, Index x, const KernelParams& params);
/// d/dxi of [1 + xi(rho(y) - 1)]^n K_{xi rho}(y, x).
double kernel_K_dxi(double xi, const RadialField& rho, Index y, Index x,
                    const KernelParams& params);

/// Principal-value fractional Laplacian 2 int (u(y) - u(x)) |x - y|^{-p} at one node,
/// evaluated by Taylor subtraction plus the first moment psi.
double frac_laplacian(const SphereGrid& grid, const Eigen::VectorXd& u, Index x,
                      const KernelParams& params);
Eigen::VectorXd frac_laplacian(const SphereGrid& grid, const Eigen::VectorXd& u,
                               const KernelParams& params);
/// Dense matrix L with L u equal to frac_laplacian(grid, u) for every u.
Eigen::MatrixXd frac_laplacian_matrix(const SphereGrid& grid, const KernelParams& params);

/// Kernel evaluator K(y, x) for first_moment_psi.
using KernelFn = std::function<double(Index, Index)>;

/// psi(x) = PV int (y - x) K(y, x) dH_y, summed in mirrored pairs around x.
Vec3 first_moment_psi(const SphereGrid& grid, Index x, const KernelFn& kernel, double sigma);

double remainder_R1(const RadialField& rho, Index x, const KernelParams& params,
                    const HomotopyRule& rule);
double remainder_R2(const RadialField& rho, Index x, const KernelParams& params,
                    const HomotopyRule& rule);

struct Remainders {
  Eigen::VectorXd r1;
  Eigen::VectorXd r2;
};
/// R1 and R2 at every node in a single pass over the homotopy rule.
Remainders remainder_terms(const RadialField& rho, const KernelParams& params,
                           const HomotopyRule& rule);

/// First variation 2 int ((rho(y)-1)y - (rho(x)-1)x) . nu J K_{t' rho} dH_y along the homotopy.
/// The singular cell is restored from a local expansion of the integrand.
double homotopy_derivative(double t, const RadialField& rho, Index x, const KernelParams& params);
Eigen::VectorXd homotopy_derivative(double t, const RadialField& rho, const KernelParams& params);
/// int_0^1 homotopy_derivative dt' with the outer Gauss rule.
Eigen::VectorXd homotopy_integral(const RadialField& rho, const KernelParams& params,
                                  const HomotopyRule& rule);

/// -H^s at rho(x) x from the fractional Laplacian, the reference curvature and R1, R2.
double parametrized_Hs(const RadialField& rho, Index x, const KernelParams& params,
                       const HomotopyRule& rule, const Eigen::VectorXd& hs_ref);
Eigen::VectorXd parametrized_Hs(const RadialField& rho, const KernelParams& params,
                                const HomotopyRule& rule, const Eigen::VectorXd& hs_ref);

/// Sampled closed hypersurface. For curves the samples are ordered along a
/// uniform parameter and `periodic_curve` enables the singular-cell correction.
struct ClosedSurface {
  int n = 1;
  Eigen::Matrix3Xd points;
  Eigen::Matrix3Xd normals;
  Eigen::VectorXd weights;
  bool periodic_curve = false;

  Index size() const { return points.cols(); }
};

ClosedSurface circle_surface(double radius, int count);
ClosedSurface ellipse_surface(double a, double b, int count);
/// Image of the full-sphere grid under x -> rho(x) x.
ClosedSurface image_surface(const RadialField& rho);

/// H^s(x) = (2/s) int ((y - x) . nu(y)) |y - x|^{-p} dH_y at sample i.
double divergence_oracle_Hs(const ClosedSurface& surface, Index i, const KernelParams& params);
Eigen::VectorXd divergence_oracle_Hs(const ClosedSurface& surface, const KernelParams& params);

enum class HsRefMode { half_ball, full_sphere };
std::string to_string(HsRefMode mode);
HsRefMode hs_ref_mode_from_string(const std::string& name);

/// H^s of the reference configuration at every node.
/// full_sphere: the unit sphere constant (hemisphere grids use their doubled grid).
/// half_ball: boundary of the unit half-ball, free cap plus the flat base.
Eigen::VectorXd hs_reference(const SphereGrid& grid, const KernelParams& params, HsRefMode mode);

}  // namespace fmcf

#endif  // FMCF_NONLOCAL_HPP
