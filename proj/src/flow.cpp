#include "fmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fmcf {

namespace {

void config_check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double root_term(const RadialField& rho, Index x) {
  const double r = rho(x);
  if (!(r > 0.0)) throw std::domain_error("radial function must be positive");
  return std::sqrt(r * r + rho.gradient(x).squaredNorm());
}

}  // namespace

void FlowConfig::validate() const {
  config_check(n == 1 || n == 2, "n must be 1 or 2");
  config_check(s > 0.0 && s < 1.0, "s must lie in (0,1)");
  config_check(theta > 0.0 && theta < std::numbers::pi, "theta must lie in (0,pi)");
  config_check(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  config_check(t_end > 0.0 && std::isfinite(t_end), "t_end must be positive");
  config_check(resolution >= 8, "resolution must be at least 8");
  config_check(n == 1 || resolution % 4 == 0, "resolution must be a multiple of 4 when n = 2");
  config_check(max_picard >= 1, "max_picard must be at least 1");
  config_check(picard_tol > 0.0, "picard_tol must be positive");
  config_check(bc_tol > 0.0, "bc_tol must be positive");
  config_check(homotopy_order >= 1 && homotopy_order <= 64, "homotopy_order must lie in [1,64]");
  config_check(max_halvings >= 0 && max_halvings <= 30, "max_halvings must lie in [0,30]");
  config_check(topology == Topology::hemisphere || hs_ref_mode == HsRefMode::full_sphere,
               "hs_ref_mode must be full-sphere on full-sphere topology");
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::ok:
      return "ok";
    case FlowStatus::nonconvergence:
      return "nonconvergence";
    case FlowStatus::extinction:
      return "extinction";
    case FlowStatus::injectivity:
      return "injectivity";
  }
  return "unknown";
}

double prefactor_A(const RadialField& rho, Index x) { return root_term(rho, x) / rho(x); }

Eigen::VectorXd prefactor_A(const RadialField& rho) {
  Eigen::VectorXd a(rho.size());
  for (Index x = 0; x < rho.size(); ++x) a[x] = prefactor_A(rho, x);
  return a;
}

Vec3 unit_normal(const RadialField& rho, Index x) {
  const double root = root_term(rho, x);
  return (rho(x) * rho.grid().node(x) - rho.gradient(x)) / root;
}

double jacobian_J(double t, const RadialField& rho, Index x) {
  const double a = 1.0 + t * (rho(x) - 1.0);
  if (!(a > 0.0)) throw std::domain_error("degenerate radial factor 1 + t(rho - 1)");
  const int n = rho.grid().dimension();
  return std::pow(a, n - 1) * std::sqrt(a * a + t * t * rho.gradient(x).squaredNorm());
}

OperatorTerms operator_terms(const RadialField& rho, const KernelParams& params,
                             const HomotopyRule& rule) {
  Remainders r = remainder_terms(rho, params, rule);
  return {frac_laplacian(rho.grid(), rho.values(), params), std::move(r.r1), std::move(r.r2),
          prefactor_A(rho)};
}

Eigen::VectorXd remainder_P(const OperatorTerms& terms, const RadialField& rho,
                            const Eigen::VectorXd& hs_ref) {
  const Eigen::ArrayXd a = terms.A.array();
  const Eigen::ArrayXd shift = rho.values().array() - 1.0;
  return ((a - 1.0) * (terms.laplacian - hs_ref).array() +
          a * (terms.r1.array() + terms.r2.array() * shift))
      .matrix();
}

Eigen::VectorXd remainder_P(const RadialField& rho, const KernelParams& params,
                            const HomotopyRule& rule, const Eigen::VectorXd& hs_ref) {
  return remainder_P(operator_terms(rho, params, rule), rho, hs_ref);
}

Eigen::VectorXd assemble_rhs(const RadialField& rho, const KernelParams& params,
                             const HomotopyRule& rule, const Eigen::VectorXd& hs_ref) {
  const OperatorTerms t = operator_terms(rho, params, rule);
  const Eigen::ArrayXd shift = rho.values().array() - 1.0;
  return (t.A.array() * (t.laplacian - hs_ref + t.r1).array() +
          t.A.array() * t.r2.array() * shift)
      .matrix();
}

double normal_velocity(const RadialField& rho, double rho_t, Index x) {
  return rho_t * rho(x) / root_term(rho, x);
}

Eigen::VectorXd bc_residual(const RadialField& rho, double theta) {
  const SphereGrid& grid = rho.grid();
  if (!grid.is_hemisphere()) {
    throw std::invalid_argument("boundary residual needs a hemisphere grid");
  }
  const std::vector<Index>& nodes = grid.boundary_nodes();
  Eigen::VectorXd r(static_cast<Index>(nodes.size()));
  const double c = std::cos(theta);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Index b = nodes[k];
    const double dn = rho.gradient(b).dot(grid.conormal(b));
    r[static_cast<Index>(k)] = dn - c * root_term(rho, b);
  }
  return r;
}

namespace {

struct BoundaryStencil {
  Index node;
  Index in1;
  Index in2;
  Index side_lo = -1;
  Index side_hi = -1;
};

std::vector<BoundaryStencil> boundary_stencils(const SphereGrid& grid) {
  std::vector<BoundaryStencil> out;
  for (Index b : grid.boundary_nodes()) {
    if (grid.dimension() == 1) {
      if (b == 0) {
        out.push_back({b, 1, 2});
      } else {
        out.push_back({b, b - 1, b - 2});
      }
    } else {
      const int lon = grid.longitude_of(b);
      const int ring0 = grid.ring_of(b);
      out.push_back({b, grid.ring_node(grid.ring_for_step(1), lon),
                     grid.ring_node(grid.ring_for_step(2), lon), grid.ring_node(ring0, lon - 1),
                     grid.ring_node(ring0, lon + 1)});
    }
  }
  return out;
}

struct BoundaryEquation {
  double S;
  double q2;
  double h;
  double c;

  double residual(double z) const {
    const double g = (3.0 * z - S) / (2.0 * h);
    return g - c * std::sqrt(z * z + g * g + q2);
  }
  double slope(double z) const {
    const double g = (3.0 * z - S) / (2.0 * h);
    const double root = std::sqrt(z * z + g * g + q2);
    return 1.5 / h - c * (z + g * 1.5 / h) / root;
  }
};

BoundaryEquation equation_at(const SphereGrid& grid, const Eigen::VectorXd& v,
                             const BoundaryStencil& st, double c) {
  const double h = grid.spacing();
  double q2 = 0.0;
  if (st.side_lo >= 0) {
    const double q = (v[st.side_hi] - v[st.side_lo]) / (2.0 * h);
    q2 = q * q;
  }
  return {4.0 * v[st.in1] - v[st.in2], q2, h, c};
}

// damped Newton for one boundary value
double solve_boundary_value(const BoundaryEquation& eq, double z, double tol) {
  double r = eq.residual(z);
  for (int it = 0; it < 50 && std::abs(r) > tol; ++it) {
    const double slope = eq.slope(z);
    if (!(std::abs(slope) > 0.0)) break;
    double step = -r / slope;
    double trial = z + step;
    double rt = eq.residual(trial);
    int damp = 0;
    while ((!(trial > 0.0) || std::abs(rt) >= std::abs(r)) && damp < 40) {
      step *= 0.5;
      trial = z + step;
      rt = eq.residual(trial);
      ++damp;
    }
    if (!(trial > 0.0) || std::abs(rt) >= std::abs(r)) break;
    z = trial;
    r = rt;
  }
  return z;
}

}  // namespace

Eigen::VectorXd apply_bc(const SphereGrid& grid, const Eigen::VectorXd& u, double theta,
                         double tol) {
  if (!grid.is_hemisphere()) {
    throw std::invalid_argument("boundary condition applies on hemisphere grids only");
  }
  const double c = std::cos(theta);
  const std::vector<BoundaryStencil> stencils = boundary_stencils(grid);
  Eigen::VectorXd v = u;
  const double inner_tol = 1e-3 * tol;
  double worst = 0.0;
  for (int sweep = 0; sweep < 50; ++sweep) {
    for (const BoundaryStencil& st : stencils) {
      v[st.node] = solve_boundary_value(equation_at(grid, v, st, c), v[st.node], inner_tol);
    }
    worst = 0.0;
    for (const BoundaryStencil& st : stencils) {
      worst = std::max(worst, std::abs(equation_at(grid, v, st, c).residual(v[st.node])));
    }
    if (worst <= inner_tol || grid.dimension() == 1) break;
  }
  if (!(worst <= tol)) {
    throw FlowError(FlowStatus::nonconvergence,
                    "boundary Newton left residual " + std::to_string(worst));
  }
  return v;
}

RadialField apply_bc(const RadialField& rho, double theta, double tol) {
  return RadialField(rho.grid_ptr(), apply_bc(rho.grid(), rho.values(), theta, tol));
}

Eigen::VectorXd implicit_heat_step(const Eigen::MatrixXd& L, const Eigen::VectorXd& u0,
                                   double dt, const Eigen::VectorXd& source) {
  const Index count = L.rows();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(count, count) - dt * L;
  return M.partialPivLu().solve(u0 + dt * source);
}

FlowSolver::FlowSolver(GridPtr grid, FlowConfig config)
    : FlowSolver(grid, config, Eigen::VectorXd()) {}

FlowSolver::FlowSolver(GridPtr grid, FlowConfig config, Eigen::VectorXd hs_ref)
    : grid_(std::move(grid)),
      config_(config),
      params_(KernelParams::make(config.s, config.n)),
      rule_(config.homotopy_order),
      hs_ref_(std::move(hs_ref)) {
  config_.validate();
  if (!grid_ || grid_->dimension() != config_.n) {
    throw ConfigError("grid dimension does not match n");
  }
  if (grid_->topology() != config_.topology) {
    throw ConfigError("grid topology does not match the configuration");
  }
  if (hs_ref_.size() == 0) {
    hs_ref_ = hs_reference(*grid_, params_, config_.hs_ref_mode);
  } else if (hs_ref_.size() != grid_->size()) {
    throw std::invalid_argument("reference curvature has the wrong length");
  }
  L_ = frac_laplacian_matrix(*grid_, params_);
}

double FlowSolver::dt_gate() const {
  return 0.5 * std::pow(grid_->spacing(), 1.0 + params_.s);
}

double FlowSolver::nominal_dt() const { return std::min(config_.dt, dt_gate()); }

const Eigen::PartialPivLU<Eigen::MatrixXd>& FlowSolver::factor(double dt) const {
  auto it = factors_.find(dt);
  if (it != factors_.end()) return it->second;
  if (factors_.size() > 8) factors_.clear();
  const Index count = L_.rows();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(count, count) - dt * L_;
  return factors_.emplace(dt, M.partialPivLu()).first->second;
}

FlowState FlowSolver::finish_state(double t, Eigen::VectorXd values) const {
  RadialField rho(grid_, std::move(values));
  double res = 0.0;
  if (grid_->is_hemisphere()) res = bc_residual(rho, config_.theta).lpNorm<Eigen::Infinity>();
  const double lo = rho.values().minCoeff();
  const double vol = volume(rho);
  return FlowState{t, std::move(rho), res, lo, vol};
}

FlowState FlowSolver::initial_state(const RadialField& rho0) const {
  if (rho0.grid_ptr() != grid_ && rho0.size() != grid_->size()) {
    throw std::invalid_argument("initial field lives on a different grid");
  }
  Eigen::VectorXd v = rho0.values();
  if (grid_->is_hemisphere()) v = apply_bc(*grid_, v, config_.theta, 1e-3 * config_.bc_tol);
  return finish_state(0.0, std::move(v));
}

FlowState FlowSolver::attempt(const FlowState& state, double dt, int* iterations) const {
  const Eigen::VectorXd& u0 = state.rho.values();
  const auto& lu = factor(dt);
  Eigen::VectorXd hat = u0;
  Remainders frozen;
  for (int k = 1; k <= config_.max_picard; ++k) {
    const RadialField current(grid_, hat);
    check_injectivity(current, kInjectivityRatio);
    if (k == 1 || config_.refresh_remainders) frozen = remainder_terms(current, params_, rule_);
    const OperatorTerms terms{L_ * hat, frozen.r1, frozen.r2, prefactor_A(current)};
    const Eigen::VectorXd P = remainder_P(terms, current, hs_ref_);
    Eigen::VectorXd u = lu.solve(u0 + dt * (P - hs_ref_));
    if (!u.allFinite()) throw FlowError(FlowStatus::nonconvergence, "non-finite Picard iterate");
    if (grid_->is_hemisphere()) u = apply_bc(*grid_, u, config_.theta, 1e-3 * config_.bc_tol);
    const double change = (u - hat).lpNorm<Eigen::Infinity>();
    hat = std::move(u);
    if (change < config_.picard_tol) {
      if (iterations != nullptr) *iterations = k;
      if (!(hat.minCoeff() > 0.0)) {
        throw FlowError(FlowStatus::extinction, "radial function lost positivity");
      }
      return finish_state(state.t + dt, hat);
    }
  }
  throw FlowError(FlowStatus::nonconvergence,
                  "Picard iteration did not converge in " + std::to_string(config_.max_picard) +
                      " iterations");
}

FlowState FlowSolver::step(const FlowState& state, double dt, StepDiagnostics* diag) {
  FlowStatus last = FlowStatus::nonconvergence;
  std::string why;
  double h = dt;
  for (int halvings = 0; halvings <= config_.max_halvings; ++halvings, h *= 0.5) {
    try {
      int iterations = 0;
      FlowState next = attempt(state, h, &iterations);
      if (diag != nullptr) {
        const int n = grid_->dimension();
        const Eigen::ArrayXd un = next.rho.values().array();
        const Eigen::ArrayXd uo = state.rho.values().array();
        Eigen::ArrayXd weight = Eigen::ArrayXd::Zero(un.size());
        for (int k = 0; k <= n; ++k) weight += un.pow(k) * uo.pow(n - k);
        weight /= (n + 1);
        const Eigen::VectorXd rate = ((un - uo) / h).matrix();
        const double mean = quad_integrate(*grid_, next.rho.values()) / grid_->weights().sum();
        diag->t = next.t;
        diag->volume = next.volume;
        diag->sup_dev = (next.rho.values().array() - mean).abs().maxCoeff();
        diag->max_bc_residual = next.bc_residual;
        diag->picard_iterations = iterations;
        diag->dt_used = h;
        diag->halvings = halvings;
        diag->volume_rate = (next.volume - state.volume) / h;
        diag->flux = quad_integrate(*grid_, (rate.array() * weight).matrix());
      }
      return next;
    } catch (const FlowError& e) {
      last = e.status();
      why = e.what();
    } catch (const DegenerateParametrization& e) {
      last = FlowStatus::injectivity;
      why = e.what();
    } catch (const std::domain_error& e) {
      last = FlowStatus::extinction;
      why = e.what();
    }
  }
  throw FlowError(last, why + " (after " + std::to_string(config_.max_halvings) + " halvings)");
}

Trajectory FlowSolver::run(const RadialField& rho0, const Observer& observer) {
  Trajectory tr;
  FlowState state = initial_state(rho0);
  tr.states.push_back(state);
  const double dt = nominal_dt();
  while (state.t < config_.t_end - 1e-9 * dt) {
    const double h = std::min(dt, config_.t_end - state.t);
    StepDiagnostics d;
    try {
      state = step(state, h, &d);
    } catch (const FlowError& e) {
      tr.status = e.status();
      tr.message = e.what();
      break;
    }
    tr.states.push_back(state);
    tr.steps.push_back(d);
    if (observer) observer(state, d);
    if (state.min_rho < kExtinctionRadius) {
      tr.status = FlowStatus::extinction;
      tr.message = "min rho " + std::to_string(state.min_rho) + " below extinction radius";
      break;
    }
  }
  return tr;
}

}  // namespace fmcf
