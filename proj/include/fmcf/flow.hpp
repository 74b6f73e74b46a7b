#ifndef FMCF_FLOW_HPP
#define FMCF_FLOW_HPP

#include "fmcf/diagnostics.hpp"
#include "fmcf/geometry.hpp"
#include "fmcf/nonlocal.hpp"
#include "fmcf/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmcf {

/// Invalid configuration value; the message names the key and its legal range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FlowConfig {
  int n = 1;
  double s = 0.5;
  double theta = 1.5707963267948966;
  double dt = 1e-3;
  double t_end = 1e-2;
  int resolution = 128;
  Topology topology = Topology::hemisphere;
  HsRefMode hs_ref_mode = HsRefMode::half_ball;
  int max_picard = 20;
  double picard_tol = 1e-9;
  double bc_tol = 1e-6;
  bool refresh_remainders = true;
  int homotopy_order = 8;
  int max_halvings = 5;

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

struct FlowState {
  double t = 0.0;
  RadialField rho;
  double bc_residual = 0.0;
  double min_rho = 0.0;
  double volume = 0.0;
};

/// Per-step record; volume_rate and flux are the two sides of the discrete
/// volume balance (V(t+dt) - V(t))/dt = int d_t rho * rho^n.
struct StepDiagnostics {
  double t = 0.0;
  double volume = 0.0;
  double sup_dev = 0.0;
  double max_bc_residual = 0.0;
  int picard_iterations = 0;
  double dt_used = 0.0;
  int halvings = 0;
  double volume_rate = 0.0;
  double flux = 0.0;
};

enum class FlowStatus { ok, nonconvergence, extinction, injectivity };
std::string to_string(FlowStatus status);

/// Runs stop once min rho falls below this radius.
inline constexpr double kExtinctionRadius = 0.05;
/// Smallest accepted |Phi(y) - Phi(x)| / |y - x| before kernel passes.
inline constexpr double kInjectivityRatio = 0.1;

class FlowError : public std::runtime_error {
 public:
  FlowError(FlowStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  FlowStatus status() const { return status_; }

 private:
  FlowStatus status_;
};

struct Trajectory {
  std::vector<FlowState> states;
  std::vector<StepDiagnostics> steps;
  FlowStatus status = FlowStatus::ok;
  std::string message;
};

/// sqrt(rho^2 + |grad rho|^2) / rho.
double prefactor_A(const RadialField& rho, Index x);
Eigen::VectorXd prefactor_A(const RadialField& rho);
/// Outward unit normal of the surface rho(x) x.
Vec3 unit_normal(const RadialField& rho, Index x);
/// Jacobian of x -> (1 + t(rho(x) - 1)) x.
double jacobian_J(double t, const RadialField& rho, Index x);

/// Operator pieces at a configuration rho.
struct OperatorTerms {
  Eigen::VectorXd laplacian;
  Eigen::VectorXd r1;
  Eigen::VectorXd r2;
  Eigen::VectorXd A;
};
OperatorTerms operator_terms(const RadialField& rho, const KernelParams& params,
                             const HomotopyRule& rule);

/// P = (A - 1)(Lap rho - H_ref) + A (R1 + R2 (rho - 1)).
Eigen::VectorXd remainder_P(const OperatorTerms& terms, const RadialField& rho,
                            const Eigen::VectorXd& hs_ref);
Eigen::VectorXd remainder_P(const RadialField& rho, const KernelParams& params,
                            const HomotopyRule& rule, const Eigen::VectorXd& hs_ref);

/// d_t rho = A (Lap rho - H_ref + R1 + R2 (rho - 1)).
Eigen::VectorXd assemble_rhs(const RadialField& rho, const KernelParams& params,
                             const HomotopyRule& rule, const Eigen::VectorXd& hs_ref);

/// V = d_t rho * rho / sqrt(rho^2 + |grad rho|^2).
double normal_velocity(const RadialField& rho, double rho_t, Index x);

/// d rho/d eta - cos(theta) sqrt(rho^2 + |grad rho|^2) at each boundary node.
Eigen::VectorXd bc_residual(const RadialField& rho, double theta);

/// Moves boundary values (interior fixed) until the contact-angle residual is
/// below tol. Throws FlowError(nonconvergence) if Newton fails.
Eigen::VectorXd apply_bc(const SphereGrid& grid, const Eigen::VectorXd& u, double theta,
                         double tol = 1e-12);
RadialField apply_bc(const RadialField& rho, double theta, double tol = 1e-12);

/// Backward-Euler step (I - dt L) u = u0 + dt f.
Eigen::VectorXd implicit_heat_step(const Eigen::MatrixXd& L, const Eigen::VectorXd& u0,
                                   double dt, const Eigen::VectorXd& source);

class FlowSolver {
 public:
  using Observer = std::function<void(const FlowState&, const StepDiagnostics&)>;

  FlowSolver(GridPtr grid, FlowConfig config);
  /// Uses the supplied reference curvature instead of computing it.
  FlowSolver(GridPtr grid, FlowConfig config, Eigen::VectorXd hs_ref);

  const FlowConfig& config() const { return config_; }
  const SphereGrid& grid() const { return *grid_; }
  const Eigen::VectorXd& hs_ref() const { return hs_ref_; }
  const Eigen::MatrixXd& laplacian() const { return L_; }
  const KernelParams& params() const { return params_; }
  const HomotopyRule& rule() const { return rule_; }
  /// Largest accepted initial step, 0.5 h^{1+s}.
  double dt_gate() const;
  /// Step actually attempted first: min(config dt, dt_gate()).
  double nominal_dt() const;

  /// Projects onto the boundary condition (hemisphere) and fills diagnostics.
  FlowState initial_state(const RadialField& rho0) const;

  /// Advances by at most dt, halving on failure. Throws FlowError once halvings
  /// are exhausted.
  FlowState step(const FlowState& state, double dt, StepDiagnostics* diag = nullptr);

  /// Steps to t_end. Stops early on failure or extinction, recording the status.
  Trajectory run(const RadialField& rho0, const Observer& observer = {});

 private:
  FlowState attempt(const FlowState& state, double dt, int* iterations) const;
  const Eigen::PartialPivLU<Eigen::MatrixXd>& factor(double dt) const;
  FlowState finish_state(double t, Eigen::VectorXd values) const;

  GridPtr grid_;
  FlowConfig config_;
  KernelParams params_;
  HomotopyRule rule_;
  Eigen::VectorXd hs_ref_;
  Eigen::MatrixXd L_;
  mutable std::map<double, Eigen::PartialPivLU<Eigen::MatrixXd>> factors_;
};

}  // namespace fmcf

#endif  // FMCF_FLOW_HPP
