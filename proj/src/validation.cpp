#include "fmcf/validation.hpp"

#include "fmcf/diagnostics.hpp"
#include "fmcf/flow.hpp"
#include "fmcf/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fmcf {

namespace {

constexpr double kPi = std::numbers::pi;

CheckResult check_le(int criterion, std::string name, double measured, double tol,
                     std::string detail = {}) {
  return {criterion, std::move(name), measured, tol, "<=", measured <= tol, std::move(detail)};
}

CheckResult check_ge(int criterion, std::string name, double measured, double tol,
                     std::string detail = {}) {
  return {criterion, std::move(name), measured, tol, ">=", measured >= tol, std::move(detail)};
}

CheckResult check_true(int criterion, std::string name, bool ok, std::string detail = {}) {
  return {criterion, std::move(name), ok ? 1.0 : 0.0, 1.0, ">=", ok, std::move(detail)};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

Eigen::VectorXd sample(const SphereGrid& g, double (*f)(const Vec3&, double)) {
  Eigen::VectorXd v(g.size());
  for (Index i = 0; i < g.size(); ++i) v[i] = f(g.node(i), g.dimension() == 1 ? g.angle(i) : 0.0);
  return v;
}

struct Shape {
  const char* name;
  double (*f)(const Vec3&, double);
};

const Shape kShapes[] = {
    {"x_{n+1}", [](const Vec3& x, double) { return x.y(); }},
    {"x_1^2", [](const Vec3& x, double) { return x.x() * x.x(); }},
    {"cos 2phi", [](const Vec3&, double phi) { return std::cos(2.0 * phi); }},
};

double max_interior(const SphereGrid& g, const Eigen::VectorXd& v) {
  double m = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    if (!g.is_boundary(i)) m = std::max(m, std::abs(v[i]));
  }
  return m;
}

// relative M1 residual |A + H_ref - int hd| over interior nodes
double m1_residual(int resolution, const Shape& shape, double amp, const KernelParams& params,
                   const HomotopyRule& rule) {
  const GridPtr g = build_grid(1, resolution, Topology::hemisphere);
  const Eigen::VectorXd field = Eigen::VectorXd::Ones(g->size()) + amp * sample(*g, shape.f);
  const RadialField rho(g, field);
  const Eigen::VectorXd href = hs_reference(*g, params, HsRefMode::half_ball);
  const Eigen::VectorXd a = parametrized_Hs(rho, params, rule, href);
  const Eigen::VectorXd b = homotopy_integral(rho, params, rule) - href;
  return max_interior(*g, a - b) / max_interior(*g, a);
}

SuiteReport m1_suite(int res) {
  SuiteReport r{"m1-identity", res, {}};
  const KernelParams params = KernelParams::make(0.5, 1);
  const HomotopyRule rule(8);
  for (const Shape& shape : kShapes) {
    for (double amp : {0.01, 0.05, 0.1}) {
      const std::string tag = std::string("rho = 1 + ") + short_num(amp) + " " + shape.name;
      const double coarse = m1_residual(res, shape, amp, params, rule);
      const double fine = m1_residual(2 * res, shape, amp, params, rule);
      r.checks.push_back(check_le(1, "M1 residual at " + std::to_string(res) + ", " + tag, coarse,
                                  1e-3));
      r.checks.push_back(check_ge(1, "M1 gain " + std::to_string(res) + "->" +
                                         std::to_string(2 * res) + ", " + tag,
                                  coarse / fine, 2.0, "fine residual " + fmt(fine)));
    }
  }
  return r;
}

SuiteReport scaling_suite(int res) {
  SuiteReport r{"scaling", res, {}};
  for (double s : {0.3, 0.5, 0.7}) {
    const KernelParams params = KernelParams::make(s, 1);
    const Eigen::VectorXd unit = divergence_oracle_Hs(circle_surface(1.0, res), params);
    const double h1 = unit.mean();
    double spread = std::sqrt((unit.array() - h1).square().mean()) / h1;
    r.checks.push_back(check_le(0, "oracle constancy on the unit circle, s=" + short_num(s),
                                spread, 1e-3));
    for (double radius : {0.8, 1.0, 1.25}) {
      const Eigen::VectorXd hr = divergence_oracle_Hs(circle_surface(radius, res), params);
      const double rel = std::abs(hr.mean() / (std::pow(radius, -s) * h1) - 1.0);
      r.checks.push_back(check_le(2,
                                  "H^s(R) = R^-s H^s(1), s=" + short_num(s) +
                                      " R=" + short_num(radius),
                                  rel, 1e-3));
    }
  }
  // dilations through the parametrized operator on the full circle
  const KernelParams params = KernelParams::make(0.5, 1);
  const HomotopyRule rule(8);
  const GridPtr g = build_grid(1, res, Topology::full_sphere);
  const Eigen::VectorXd href = hs_reference(*g, params, HsRefMode::full_sphere);
  for (double c : {0.8, 1.25}) {
    const RadialField rho = RadialField::constant(g, c);
    const Eigen::VectorXd value = parametrized_Hs(rho, params, rule, href);
    const double expect = -std::pow(c, -params.s) * href[0];
    const double rel = (value.array() - expect).abs().maxCoeff() / std::abs(expect);
    r.checks.push_back(check_le(0, "parametrized -H^s of rho = " + short_num(c) +
                                       " equals -c^-s H^s(1)",
                                rel, 1e-3));
  }
  return r;
}

SuiteReport shrinking_suite(int res) {
  SuiteReport r{"shrinking-circle", res, {}};
  const KernelParams params = KernelParams::make(0.5, 1);
  const double c = divergence_oracle_Hs(circle_surface(1.0, 2048), 0, params);
  const double t_half = (1.0 - std::pow(0.5, 1.5)) / (1.5 * c);
  FlowConfig cfg;
  cfg.s = 0.5;
  cfg.topology = Topology::full_sphere;
  cfg.hs_ref_mode = HsRefMode::full_sphere;
  cfg.resolution = res;
  cfg.dt = 2e-4;
  cfg.t_end = t_half;
  const GridPtr g = build_grid(1, res, Topology::full_sphere);
  FlowSolver solver(g, cfg);
  const Trajectory tr = solver.run(RadialField::constant(g, 1.0));
  r.checks.push_back(check_true(3, "shrinking-circle run completes", tr.status == FlowStatus::ok,
                                tr.message));
  double worst = 0.0;
  double last_radius = 1.0;
  for (const FlowState& st : tr.states) {
    const double radius = quad_integrate(*g, st.rho.values()) / g->weights().sum();
    const double exact = std::pow(1.0 - 1.5 * c * st.t, 1.0 / 1.5);
    worst = std::max(worst, std::abs(radius / exact - 1.0));
    last_radius = radius;
  }
  r.checks.push_back(check_le(3, "max |R(t)/R_exact(t) - 1| down to R = 0.5", worst, 1e-2,
                              "c_0.5 = " + fmt(c) + ", final R = " + fmt(last_radius)));
  r.checks.push_back(check_le(3, "run reaches R = 0.5", last_radius, 0.5 + 5e-3));
  double balance = 0.0;
  bool decreasing = true;
  double prev = tr.states.front().volume;
  for (const StepDiagnostics& d : tr.steps) {
    balance = std::max(balance, std::abs(d.volume_rate - d.flux));
    if (!(d.volume < prev)) decreasing = false;
    prev = d.volume;
  }
  r.checks.push_back(check_le(6, "volume balance |dV/dt - int rho_t rho^n|", balance, 1e-8));
  r.checks.push_back(check_true(6, "volume strictly decreasing", decreasing && !tr.steps.empty()));
  return r;
}

Eigen::VectorXd cosine_field(const SphereGrid& g, double amp) {
  Eigen::VectorXd v(g.size());
  for (Index i = 0; i < g.size(); ++i) v[i] = 1.0 + amp * std::cos(2.0 * g.angle(i));
  return v;
}

SuiteReport bc_suite(int res) {
  SuiteReport r{"bc", res, {}};
  const GridPtr hemi = build_grid(1, res, Topology::hemisphere);
  const char* names[] = {"pi/3", "pi/2", "2pi/3"};
  const double angles[] = {kPi / 3.0, kPi / 2.0, 2.0 * kPi / 3.0};
  for (int k = 0; k < 3; ++k) {
    FlowConfig cfg;
    cfg.theta = angles[k];
    cfg.resolution = res;
    cfg.dt = 2e-4;
    cfg.t_end = 20 * cfg.dt;
    FlowSolver solver(hemi, cfg);
    const Trajectory tr = solver.run(RadialField(hemi, cosine_field(*hemi, 0.05)));
    double worst = tr.states.front().bc_residual;
    for (const StepDiagnostics& d : tr.steps) worst = std::max(worst, d.max_bc_residual);
    r.checks.push_back(check_true(4, std::string("capillary run completes, theta=") + names[k],
                                  tr.status == FlowStatus::ok && tr.steps.size() == 20,
                                  tr.message));
    r.checks.push_back(check_le(4, std::string("max boundary residual, theta=") + names[k], worst,
                                1e-6));
  }

  // theta = pi/2: hemisphere run against the reflected full-circle run
  FlowConfig cfg;
  cfg.theta = kPi / 2.0;
  cfg.resolution = res;
  cfg.hs_ref_mode = HsRefMode::full_sphere;
  cfg.dt = 1e-4;
  cfg.t_end = 50 * cfg.dt;
  FlowSolver half(hemi, cfg);
  const RadialField start(hemi, cosine_field(*hemi, 0.05));
  const Trajectory a = half.run(start);
  const RadialField reflected = reflect_field(start);
  FlowConfig full_cfg = cfg;
  full_cfg.topology = Topology::full_sphere;
  full_cfg.resolution = reflected.grid().resolution();
  FlowSolver whole(reflected.grid_ptr(), full_cfg);
  const Trajectory b = whole.run(reflected);
  const bool both = a.status == FlowStatus::ok && b.status == FlowStatus::ok &&
                    a.states.size() == 51 && b.states.size() == 51;
  r.checks.push_back(check_true(4, "hemisphere and reflected runs complete 50 steps", both,
                                a.message + b.message));
  double worst = 0.0;
  if (both) {
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      const Eigen::VectorXd& u = a.states[k].rho.values();
      const Eigen::VectorXd& v = b.states[k].rho.values();
      for (Index i = 0; i < u.size(); ++i) {
        worst = std::max(worst, std::abs(u[i] - v[i]) / std::abs(v[i]));
      }
    }
  }
  r.checks.push_back(check_le(4, "theta=pi/2 hemisphere vs reflected run, 50 steps", worst, 5e-3));
  return r;
}

double c05_seminorm(const SphereGrid& g, const Eigen::VectorXd& u) {
  return holder_norm(g, u, 0.5).seminorm;
}

SuiteReport identities_suite(int res) {
  SuiteReport r{"identities", res, {}};
  const KernelParams params = KernelParams::make(0.5, 1);

  // maximum principle of the implicit step
  {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = -1.0;
    for (Topology topo : {Topology::hemisphere, Topology::full_sphere}) {
      const SphereGrid g = SphereGrid::build(1, 128, topo);
      const Eigen::MatrixXd L = frac_laplacian_matrix(g, params);
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());
      for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd u(g.size());
        for (Index i = 0; i < u.size(); ++i) u[i] = unit(gen);
        const double dt = k % 2 == 0 ? 1e-3 : 1e-1;
        const Eigen::VectorXd next = implicit_heat_step(L, u, dt, zero);
        worst = std::max(worst, next.lpNorm<Eigen::Infinity>() - u.lpNorm<Eigen::Infinity>());
      }
    }
    r.checks.push_back(check_le(5, "max (|u_next|_inf - |u|_inf) over 100 random fields", worst,
                                1e-12));
  }

  // smoothing from 1 + 0.1 cos 2phi
  {
    FlowConfig cfg;
    cfg.topology = Topology::full_sphere;
    cfg.hs_ref_mode = HsRefMode::full_sphere;
    cfg.resolution = 128;
    cfg.dt = 1e-3;
    cfg.t_end = 20 * cfg.dt;
    const GridPtr g = build_grid(1, 128, Topology::full_sphere);
    FlowSolver solver(g, cfg);
    const Trajectory tr = solver.run(RadialField(g, cosine_field(*g, 0.1)));
    bool sup_down = tr.steps.size() == 20;
    bool semi_down = sup_down;
    const Eigen::VectorXd& first = tr.states.front().rho.values();
    double prev_sup = (first.array() - quad_integrate(*g, first) / (2.0 * kPi)).abs().maxCoeff();
    double prev_semi = c05_seminorm(*g, first);
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
      const double sup = tr.steps[k - 1].sup_dev;
      const double semi = c05_seminorm(*g, tr.states[k].rho.values());
      if (!(sup < prev_sup)) sup_down = false;
      if (!(semi < prev_semi)) semi_down = false;
      prev_sup = sup;
      prev_semi = semi;
    }
    r.checks.push_back(check_true(7, "sup|rho - mean| decreases monotonically over 20 steps",
                                  sup_down, "final " + fmt(prev_sup)));
    r.checks.push_back(check_true(7, "C^0.5 seminorm decreases monotonically over 20 steps",
                                  semi_down, "final " + fmt(prev_semi)));
  }

  // sphere divergence identity under refinement
  {
    struct Field {
      const char* name;
      double (*f)(double);
    };
    const Field family[] = {{"1", [](double) { return 1.0; }},
                            {"1 + 0.05 cos 2phi", [](double p) { return 1.0 + 0.05 * std::cos(2 * p); }},
                            {"1 + 0.05 sin phi", [](double p) { return 1.0 + 0.05 * std::sin(p); }},
                            {"1 + 0.05 cos^2 phi",
                             [](double p) { return 1.0 + 0.05 * std::cos(p) * std::cos(p); }}};
    for (const Field& field : family) {
      double res_at[2];
      for (int level = 0; level < 2; ++level) {
        const int n = level == 0 ? res / 2 : res;
        const GridPtr g = build_grid(1, n, Topology::full_sphere);
        Eigen::VectorXd v(g->size());
        for (Index i = 0; i < v.size(); ++i) v[i] = field.f(g->angle(i));
        res_at[level] = divergence_identity_residual(RadialField(g, v), params);
      }
      r.checks.push_back(check_ge(8, std::string("divergence residual gain, rho = ") + field.name,
                                  res_at[0] / res_at[1], 2.0,
                                  fmt(res_at[0]) + " -> " + fmt(res_at[1])));
      if (std::string(field.name) == "1") {
        r.checks.push_back(check_le(8, "divergence residual for rho = 1", res_at[1], 1e-3));
      }
    }
  }

  // Lemma-type bound on int |x - y|^{-(n-s)}
  {
    const Lemma521Report rep = lemma521_bound(0.5);
    std::string values;
    for (double v : rep.values) values += fmt(v) + " ";
    r.checks.push_back(check_true(8, "bound integral increasing in resolution", rep.increasing, values));
    r.checks.push_back(check_le(8, "bound integral increment ratio", rep.max_ratio, 0.75));
  }

  // interpolation inequality on 12 trig polynomials
  {
    const SphereGrid g = SphereGrid::build(1, res, Topology::full_sphere);
    double worst = 0.0;
    for (int degree = 1; degree <= 4; ++degree) {
      for (double amp : {0.1, 1.0, 10.0}) {
        Eigen::VectorXd u(g.size());
        for (Index i = 0; i < u.size(); ++i) {
          const double p = g.angle(i);
          double sum = 0.0;
          for (int k = 1; k <= degree; ++k) sum += std::cos(k * p) / k + 0.5 * std::sin(k * p) / k;
          u[i] = amp * sum;
        }
        worst = std::max(worst, interpolation_check(g, u, 0.25, 0.75, 0.5).ratio);
      }
    }
    r.checks.push_back(check_le(8, "interpolation ratio over 12 functions", worst, 10.0));
  }

  // kernel decay bound for |rho - 1| <= 0.3
  {
    const GridPtr g = build_grid(1, std::max(64, res / 2), Topology::hemisphere);
    Eigen::VectorXd v(g->size());
    for (Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.3 * std::cos(3.0 * g->angle(i));
    const KernelBoundReport rep = kernel_bound_check(RadialField(g, v), params, 10000);
    r.checks.push_back(check_le(8, "max K |y-x|^p over 10^4 pairs vs kappa", rep.max_scaled,
                                rep.kappa, "kappa " + fmt(rep.kappa)));
  }
  return r;
}

}  // namespace

bool SuiteReport::pass() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"m1-identity", "scaling", "shrinking-circle",
                                                 "bc", "identities"};
  return names;
}

bool is_suite(const std::string& name) {
  const auto& names = suite_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

int default_resolution(const std::string& suite) {
  if (suite == "shrinking-circle" || suite == "bc") return 128;
  if (is_suite(suite)) return 512;
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

SuiteReport run_suite(const std::string& suite, int resolution) {
  const int res = resolution > 0 ? resolution : default_resolution(suite);
  if (res < 16) throw std::invalid_argument("validation resolution must be at least 16");
  if (suite == "m1-identity") return m1_suite(res);
  if (suite == "scaling") return scaling_suite(res);
  if (suite == "shrinking-circle") return shrinking_suite(res);
  if (suite == "bc") return bc_suite(res);
  if (suite == "identities") return identities_suite(res);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

std::string format_report(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite " << report.suite << " (resolution " << report.resolution << ")\n";
  char line[512];
  for (const CheckResult& c : report.checks) {
    std::snprintf(line, sizeof line, "  %-4s %-68s %12.4e %s %-10.3e", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.relation.c_str(), c.tolerance);
    out << line;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << '\n';
  }
  out << (report.pass() ? "result: PASS" : "result: FAIL") << '\n';
  return out.str();
}

}  // namespace fmcf
