#include "fmcf/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fmcf {

namespace {

constexpr double kPi = std::numbers::pi;

double inv_pow(double r2, double half_p) { return std::exp(-half_p * std::log(r2)); }

void require_distinct(Index y, Index x) {
  if (y == x) throw std::invalid_argument("kernel is singular on the diagonal y = x");
}

// (rho(y)-1) y, the homotopy velocity of the node y
Vec3 velocity(const RadialField& rho, Index y) { return (rho(y) - 1.0) * rho.grid().node(y); }

}  // namespace

KernelParams KernelParams::make(double s, int n) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
  if (n != 1 && n != 2) throw std::invalid_argument("n must be 1 or 2");
  return KernelParams{s, n, n + 1.0 + s};
}

double injectivity_ratio(const RadialField& rho) {
  const SphereGrid& grid = rho.grid();
  const Index count = grid.size();
  double best = std::numeric_limits<double>::infinity();
  for (Index x = 0; x < count; ++x) {
    const Vec3 px = rho(x) * grid.node(x);
    for (Index y = x + 1; y < count; ++y) {
      const double d = (rho(y) * grid.node(y) - px).norm() / grid.chord(y, x);
      best = std::min(best, d);
    }
  }
  return best;
}

void check_injectivity(const RadialField& rho, double min_ratio) {
  const double ratio = injectivity_ratio(rho) / rho.values().maxCoeff();
  if (!(ratio >= min_ratio)) {
    throw DegenerateParametrization("image nodes nearly collide: separation ratio " +
                                    std::to_string(ratio) + " below " +
                                    std::to_string(min_ratio));
  }
}

double kernel_K(double xi, const RadialField& rho, Index y, Index x, const KernelParams& params) {
  require_distinct(y, x);
  const SphereGrid& g = rho.grid();
  const Vec3 d = g.node(y) - g.node(x) + xi * (velocity(rho, y) - velocity(rho, x));
  return inv_pow(d.squaredNorm(), 0.5 * params.p);
}

double kernel_K_dxi(double xi, const RadialField& rho, Index y, Index x,
                    const KernelParams& params) {
  require_distinct(y, x);
  const SphereGrid& g = rho.grid();
  const Vec3 dv = velocity(rho, y) - velocity(rho, x);
  const Vec3 d = g.node(y) - g.node(x) + xi * dv;
  const double r2 = d.squaredNorm();
  const double k = inv_pow(r2, 0.5 * params.p);
  const double a = 1.0 + xi * (rho(y) - 1.0);
  const int n = params.n;
  return n * (rho(y) - 1.0) * std::pow(a, n - 1) * k -
         std::pow(a, n) * params.p * d.dot(dv) * k / r2;
}

Vec3 first_moment_psi(const SphereGrid& grid, Index x, const KernelFn& kernel, double sigma) {
  const SingularQuadrature quad(grid, sigma);
  auto term = [&](Index y) -> Vec3 { return (grid.node(y) - grid.node(x)) * kernel(y, x); };
  if (grid.dimension() != 1) return quad.integrate_vec(x, term);

  // mirrored pairs x-k, x+k are combined before accumulation
  const Index count = grid.size();
  const Eigen::VectorXd& w = grid.weights();
  const bool periodic = !grid.is_hemisphere();
  Vec3 sum = Vec3::Zero();
  const Index reach = periodic ? count / 2 : count;
  for (Index k = 1; k <= reach; ++k) {
    Index lo = x - k;
    Index hi = x + k;
    if (periodic) {
      lo = (lo + count) % count;
      hi = hi % count;
      if (lo == hi) {
        sum += w[lo] * term(lo);
        continue;
      }
    }
    const bool has_lo = lo >= 0;
    const bool has_hi = hi < count;
    if (!has_lo && !has_hi) break;
    Vec3 pair = Vec3::Zero();
    if (has_lo) pair += w[lo] * term(lo);
    if (has_hi) pair += w[hi] * term(hi);
    sum += pair;
  }
  Vec3 corr = Vec3::Zero();
  for (Index nb : quad.neighbors(x)) {
    if (nb >= 0) corr += quad.neighbor_coefficient() * term(nb);
  }
  return sum + corr;
}

double frac_laplacian(const SphereGrid& grid, const Eigen::VectorXd& u, Index x,
                      const KernelParams& params) {
  if (u.size() != grid.size()) throw std::invalid_argument("sample count does not match grid");
  const Vec3 grad = tangential_gradient(grid, u).col(x);
  const SingularQuadrature quad(grid, params.s);
  const double half_p = 0.5 * params.p;
  auto k0 = [&](Index y, Index xx) {
    const double c = grid.chord(y, xx);
    return inv_pow(c * c, half_p);
  };
  const Vec3 xv = grid.node(x);
  const double taylor = quad.integrate(x, [&](Index y) {
    return 2.0 * (u[y] - u[x] - grad.dot(grid.node(y) - xv)) * k0(y, x);
  });
  const Vec3 psi = first_moment_psi(grid, x, k0, params.s);
  return taylor + 2.0 * grad.dot(psi);
}

Eigen::VectorXd frac_laplacian(const SphereGrid& grid, const Eigen::VectorXd& u,
                               const KernelParams& params) {
  if (u.size() != grid.size()) throw std::invalid_argument("sample count does not match grid");
  const Eigen::Matrix3Xd grad = tangential_gradient(grid, u);
  const SingularQuadrature quad(grid, params.s);
  const double half_p = 0.5 * params.p;
  auto k0 = [&](Index y, Index xx) {
    const double c = grid.chord(y, xx);
    return inv_pow(c * c, half_p);
  };
  const Index count = grid.size();
  Eigen::VectorXd out(count);
#pragma omp parallel for schedule(static)
  for (Index x = 0; x < count; ++x) {
    const Vec3 g = grad.col(x);
    const Vec3 xv = grid.node(x);
    const double taylor = quad.integrate(x, [&](Index y) {
      return 2.0 * (u[y] - u[x] - g.dot(grid.node(y) - xv)) * k0(y, x);
    });
    out[x] = taylor + 2.0 * g.dot(first_moment_psi(grid, x, k0, params.s));
  }
  return out;
}

Eigen::MatrixXd frac_laplacian_matrix(const SphereGrid& grid, const KernelParams& params) {
  const Index count = grid.size();
  const SingularQuadrature quad(grid, params.s);
  const double half_p = 0.5 * params.p;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(count, count);
#pragma omp parallel for schedule(static)
  for (Index x = 0; x < count; ++x) {
    double diag = 0.0;
    for (Index y = 0; y < count; ++y) {
      if (y == x) continue;
      const double c = grid.chord(y, x);
      const double entry = 2.0 * quad.weight(x, y) * inv_pow(c * c, half_p);
      L(x, y) = entry;
      diag += entry;
    }
    L(x, x) = -diag;
  }
  return L;
}

namespace {

struct RemainderAt {
  double r1;
  double r2;
};

// R1 and R2 at x; D = d/dxi {a^n K} is shared between R1 and the second R2 term.
RemainderAt remainder_at(const RadialField& rho, Index x, const KernelParams& params,
                         const HomotopyRule& rule, const SingularQuadrature& quad) {
  const SphereGrid& g = rho.grid();
  const Index count = g.size();
  const int n = params.n;
  const double half_p = 0.5 * params.p;
  const double pole_half = 0.5 * (n - 1 + params.s);
  const Eigen::VectorXd& xi = rule.xi_nodes();
  const Eigen::VectorXd& xw = rule.xi_weights();
  const GaussRule& outer = rule.outer();
  const Vec3 xv = g.node(x);
  const Vec3 vx = velocity(rho, x);
  const double rx = rho(x);

  double r1 = 0.0;
  double r2_pole = 0.0;
  double r2_hom = 0.0;
  double r2_grad = 0.0;
  for (Index y = 0; y < count; ++y) {
    if (y == x) continue;
    const double wq = quad.weight(x, y);
    const Vec3 d0 = g.node(y) - xv;
    const Vec3 dv = velocity(rho, y) - vx;
    const double c2 = d0.squaredNorm();
    const double d0dv = d0.dot(dv);
    const double dv2 = dv.squaredNorm();
    const double ry = rho(y);
    const double drho = ry - rx;

    double dsum = 0.0;
    for (Index q = 0; q < xi.size(); ++q) {
      const double e = xi[q];
      const double r2 = c2 + 2.0 * e * d0dv + e * e * dv2;
      const double k = inv_pow(r2, half_p);
      const double a = 1.0 + e * (ry - 1.0);
      const double an1 = n == 1 ? 1.0 : std::pow(a, n - 1);
      const double dd = n * (ry - 1.0) * an1 * k - an1 * a * params.p * (d0dv + e * dv2) * k / r2;
      dsum += xw[q] * dd;
    }
    r1 += wq * 2.0 * drho * dsum;
    r2_hom += wq * c2 * dsum;
    r2_pole += wq * inv_pow(c2, pole_half);

    const double gd = d0.dot(rho.gradient(y));
    if (gd != 0.0) {
      double tsum = 0.0;
      for (Index q = 0; q < outer.nodes.size(); ++q) {
        const double t = outer.nodes[q];
        const double r2 = c2 + 2.0 * t * d0dv + t * t * dv2;
        const double a = 1.0 + t * (ry - 1.0);
        const double an1 = n == 1 ? 1.0 : std::pow(a, n - 1);
        tsum += outer.weights[q] * t * an1 * inv_pow(r2, half_p);
      }
      r2_grad += wq * gd * tsum;
    }
  }
  return {r1, r2_pole + r2_hom - 2.0 * r2_grad};
}

}  // namespace

double remainder_R1(const RadialField& rho, Index x, const KernelParams& params,
                    const HomotopyRule& rule) {
  const SingularQuadrature quad(rho.grid(), params.s);
  return remainder_at(rho, x, params, rule, quad).r1;
}

double remainder_R2(const RadialField& rho, Index x, const KernelParams& params,
                    const HomotopyRule& rule) {
  const SingularQuadrature quad(rho.grid(), params.s);
  return remainder_at(rho, x, params, rule, quad).r2;
}

Remainders remainder_terms(const RadialField& rho, const KernelParams& params,
                           const HomotopyRule& rule) {
  check_injectivity(rho);
  const SingularQuadrature quad(rho.grid(), params.s);
  const Index count = rho.size();
  Remainders out{Eigen::VectorXd(count), Eigen::VectorXd(count)};
#pragma omp parallel for schedule(static)
  for (Index x = 0; x < count; ++x) {
    const RemainderAt r = remainder_at(rho, x, params, rule, quad);
    out.r1[x] = r.r1;
    out.r2[x] = r.r2;
  }
  return out;
}

namespace {

// Coefficient c of |d|^{-s} in the expansion of the first-variation integrand
// around x along the curve (n = 1), d the signed arclength.
double local_singular_coefficient(double t, double r, double r1, double r2,
                                  const KernelParams& params) {
  const double a = 1.0 + t * (r - 1.0);
  const double a1 = t * r1;
  const double a2 = t * r2;
  // components in the (e, tau) frame at x
  const Eigen::Vector2d v1(r1, r - 1.0);
  const Eigen::Vector2d v2(r2 - (r - 1.0), 2.0 * r1);
  const Eigen::Vector2d nn(a, -a1);
  const Eigen::Vector2d n1(2.0 * a1, a - a2);
  const Eigen::Vector2d p1(a1, a);
  const Eigen::Vector2d p2(a2 - a, 2.0 * a1);
  const double A1 = v1.dot(nn);
  const double A2 = v1.dot(n1) + 0.5 * v2.dot(nn);
  const double speed2 = p1.squaredNorm();
  const double beta = p1.dot(p2) / speed2;
  return 2.0 * std::pow(speed2, -0.5 * params.p) * (A2 - 0.5 * params.p * beta * A1);
}

double homotopy_at(double t, const RadialField& rho, Index x, const KernelParams& params,
                   const AngularDerivatives* deriv, double zeta_s) {
  const SphereGrid& g = rho.grid();
  const Index count = g.size();
  const int n = params.n;
  const double half_p = 0.5 * params.p;
  const Vec3 vx = velocity(rho, x);
  const Vec3 px = (1.0 + t * (rho(x) - 1.0)) * g.node(x);
  const Eigen::VectorXd& w = g.weights();
  double sum = 0.0;
  for (Index y = 0; y < count; ++y) {
    if (y == x) continue;
    const double a = 1.0 + t * (rho(y) - 1.0);
    const double an1 = n == 1 ? 1.0 : std::pow(a, n - 1);
    const Vec3 nj = an1 * (a * g.node(y) - t * rho.gradient(y));
    const Vec3 dphi = a * g.node(y) - px;
    sum += w[y] * 2.0 * (velocity(rho, y) - vx).dot(nj) * inv_pow(dphi.squaredNorm(), half_p);
  }
  if (deriv != nullptr) {
    const auto nbrs = g.parameter_neighbors(x);
    const int sides = (nbrs[0] >= 0 ? 1 : 0) + (nbrs[1] >= 0 ? 1 : 0);
    const double c = local_singular_coefficient(t, rho(x), deriv->first[x], deriv->second[x], params);
    sum += -zeta_s * sides * c * std::pow(g.spacing(), 1.0 - params.s);
  }
  return sum;
}

}  // namespace

double homotopy_derivative(double t, const RadialField& rho, Index x,
                           const KernelParams& params) {
  if (rho.grid().dimension() == 1) {
    const AngularDerivatives d = angular_derivatives(rho.grid(), rho.values());
    return homotopy_at(t, rho, x, params, &d, zeta(params.s));
  }
  return homotopy_at(t, rho, x, params, nullptr, 0.0);
}

Eigen::VectorXd homotopy_derivative(double t, const RadialField& rho,
                                    const KernelParams& params) {
  check_injectivity(rho);
  const Index count = rho.size();
  const bool curve = rho.grid().dimension() == 1;
  AngularDerivatives d;
  if (curve) d = angular_derivatives(rho.grid(), rho.values());
  const double zs = curve ? zeta(params.s) : 0.0;
  Eigen::VectorXd out(count);
#pragma omp parallel for schedule(static)
  for (Index x = 0; x < count; ++x) {
    out[x] = homotopy_at(t, rho, x, params, curve ? &d : nullptr, zs);
  }
  return out;
}

Eigen::VectorXd homotopy_integral(const RadialField& rho, const KernelParams& params,
                                  const HomotopyRule& rule) {
  const GaussRule& outer = rule.outer();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(rho.size());
  for (Index q = 0; q < outer.nodes.size(); ++q) {
    total += outer.weights[q] * homotopy_derivative(outer.nodes[q], rho, params);
  }
  return total;
}

double parametrized_Hs(const RadialField& rho, Index x, const KernelParams& params,
                       const HomotopyRule& rule, const Eigen::VectorXd& hs_ref) {
  const SingularQuadrature quad(rho.grid(), params.s);
  const RemainderAt r = remainder_at(rho, x, params, rule, quad);
  return frac_laplacian(rho.grid(), rho.values(), x, params) - hs_ref[x] + r.r1 +
         r.r2 * (rho(x) - 1.0);
}

Eigen::VectorXd parametrized_Hs(const RadialField& rho, const KernelParams& params,
                                const HomotopyRule& rule, const Eigen::VectorXd& hs_ref) {
  if (hs_ref.size() != rho.size()) {
    throw std::invalid_argument("reference curvature has the wrong length");
  }
  const Remainders r = remainder_terms(rho, params, rule);
  const Eigen::VectorXd lap = frac_laplacian(rho.grid(), rho.values(), params);
  return lap - hs_ref + r.r1 + r.r2.cwiseProduct(rho.values() - Eigen::VectorXd::Ones(rho.size()));
}

ClosedSurface circle_surface(double radius, int count) {
  if (count < 8) throw std::invalid_argument("circle needs at least 8 samples");
  ClosedSurface c;
  c.n = 1;
  c.periodic_curve = true;
  c.points.setZero(3, count);
  c.normals.setZero(3, count);
  c.weights.setConstant(count, radius * 2.0 * kPi / count);
  for (int i = 0; i < count; ++i) {
    const double phi = 2.0 * kPi * i / count;
    c.normals.col(i) << std::cos(phi), std::sin(phi), 0.0;
    c.points.col(i) = radius * c.normals.col(i);
  }
  return c;
}

ClosedSurface ellipse_surface(double a, double b, int count) {
  if (count < 8) throw std::invalid_argument("ellipse needs at least 8 samples");
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("ellipse semi-axes must be positive");
  ClosedSurface c;
  c.n = 1;
  c.periodic_curve = true;
  c.points.setZero(3, count);
  c.normals.setZero(3, count);
  c.weights.resize(count);
  const double h = 2.0 * kPi / count;
  for (int i = 0; i < count; ++i) {
    const double u = h * i;
    const double speed = std::hypot(a * std::sin(u), b * std::cos(u));
    c.points.col(i) << a * std::cos(u), b * std::sin(u), 0.0;
    c.normals.col(i) << b * std::cos(u) / speed, a * std::sin(u) / speed, 0.0;
    c.weights[i] = h * speed;
  }
  return c;
}

ClosedSurface image_surface(const RadialField& rho) {
  const SphereGrid& g = rho.grid();
  if (g.is_hemisphere()) {
    throw std::invalid_argument("the divergence oracle needs a closed surface, got a hemisphere");
  }
  ClosedSurface c;
  c.n = g.dimension();
  c.periodic_curve = g.dimension() == 1;
  const Index count = g.size();
  c.points.resize(3, count);
  c.normals.resize(3, count);
  c.weights.resize(count);
  for (Index i = 0; i < count; ++i) {
    const Vec3 grad = rho.gradient(i);
    const double r = rho(i);
    const double root = std::sqrt(r * r + grad.squaredNorm());
    c.points.col(i) = r * g.node(i);
    c.normals.col(i) = (r * g.node(i) - grad) / root;
    c.weights[i] = g.weights()[i] * std::pow(r, g.dimension() - 1) * root;
  }
  return c;
}

namespace {

double oracle_at(const ClosedSurface& surface, Index i, const KernelParams& params,
                 double zeta_s) {
  const Index count = surface.size();
  const Vec3 x = surface.points.col(i);
  const double half_p = 0.5 * params.p;
  auto f = [&](Index j) {
    const Vec3 d = surface.points.col(j) - x;
    return d.dot(surface.normals.col(j)) * inv_pow(d.squaredNorm(), half_p);
  };
  double sum = 0.0;
  for (Index j = 0; j < count; ++j) {
    if (j != i) sum += surface.weights[j] * f(j);
  }
  if (surface.periodic_curve) {
    const Index lo = (i + count - 1) % count;
    const Index hi = (i + 1) % count;
    sum -= zeta_s * (surface.weights[lo] * f(lo) + surface.weights[hi] * f(hi));
  }
  return 2.0 / params.s * sum;
}

void check_surface(const ClosedSurface& surface, const KernelParams& params) {
  if (surface.n != params.n) {
    throw std::invalid_argument("surface dimension does not match the kernel parameters");
  }
}

}  // namespace

double divergence_oracle_Hs(const ClosedSurface& surface, Index i, const KernelParams& params) {
  check_surface(surface, params);
  return oracle_at(surface, i, params, zeta(params.s));
}

Eigen::VectorXd divergence_oracle_Hs(const ClosedSurface& surface, const KernelParams& params) {
  check_surface(surface, params);
  const double zs = zeta(params.s);
  const Index count = surface.size();
  Eigen::VectorXd out(count);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < count; ++i) out[i] = oracle_at(surface, i, params, zs);
  return out;
}

std::string to_string(HsRefMode mode) {
  return mode == HsRefMode::half_ball ? "half-ball" : "full-sphere";
}

HsRefMode hs_ref_mode_from_string(const std::string& name) {
  if (name == "half-ball") return HsRefMode::half_ball;
  if (name == "full-sphere") return HsRefMode::full_sphere;
  throw std::invalid_argument("hs_ref_mode must be half-ball or full-sphere, got '" + name + "'");
}

namespace {

// int_0^u cos^s v dv for 0 <= u <= pi/2
double cos_power_integral(double u, double s) {
  static const GaussRule direct = gauss_legendre(24);
  static const GaussRule graded = gauss_legendre(32);
  if (u <= 0.25 * kPi) {
    double sum = 0.0;
    for (Index q = 0; q < direct.nodes.size(); ++q) {
      sum += direct.weights[q] * std::pow(std::cos(u * direct.nodes[q]), s);
    }
    return u * sum;
  }
  // complement int_0^z sin^s w dw with w = z q^8, which smooths the endpoint
  const double z = 0.5 * kPi - u;
  const double full = 0.5 * std::sqrt(kPi) * std::tgamma(0.5 * (1.0 + s)) /
                      std::tgamma(1.0 + 0.5 * s);
  double tail = 0.0;
  for (Index q = 0; q < graded.nodes.size(); ++q) {
    const double r = graded.nodes[q];
    const double r7 = std::pow(r, 7);
    tail += graded.weights[q] * std::pow(std::sin(z * r7 * r), s) * 8.0 * r7;
  }
  return full - z * tail;
}

double cos_power_between(double u1, double u2, double s) {
  auto prim = [s](double u) {
    return u >= 0.0 ? cos_power_integral(u, s) : -cos_power_integral(-u, s);
  };
  return prim(u2) - prim(u1);
}

// (2/s) times the flat-base contribution to H^s of the unit half-ball at x
double flat_base_term(const Vec3& x, const KernelParams& params) {
  const double s = params.s;
  if (params.n == 1) {
    const double h = x.y();
    if (h <= 1e-14) return 0.0;
    const double u1 = std::atan((-1.0 - x.x()) / h);
    const double u2 = std::atan((1.0 - x.x()) / h);
    return 2.0 / s * std::pow(h, -s) * cos_power_between(u1, u2, s);
  }
  const double h = x.z();
  if (h <= 1e-14) return 0.0;
  static const GaussRule panel = gauss_legendre(8);
  const int panels = 64;
  const Eigen::Vector2d c(x.x(), x.y());
  const double e = 0.5 * (params.p - 2.0);
  const double inner = std::pow(h * h, -e);
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    for (Index q = 0; q < panel.nodes.size(); ++q) {
      const double alpha = 2.0 * kPi * (k + panel.nodes[q]) / panels;
      const Eigen::Vector2d dir(std::cos(alpha), std::sin(alpha));
      const double b = c.dot(dir);
      const double reach = -b + std::sqrt(b * b + 1.0 - c.squaredNorm());
      const double radial = h * (inner - std::pow(reach * reach + h * h, -e)) / (params.p - 2.0);
      sum += panel.weights[q] * 2.0 * kPi / panels * radial;
    }
  }
  return 2.0 / s * sum;
}

}  // namespace

Eigen::VectorXd hs_reference(const SphereGrid& grid, const KernelParams& params,
                             HsRefMode mode) {
  if (grid.dimension() != params.n) {
    throw std::invalid_argument("grid dimension does not match the kernel parameters");
  }
  const Index count = grid.size();
  if (mode == HsRefMode::full_sphere) {
    auto full = std::make_shared<const SphereGrid>(grid.is_hemisphere() ? grid.doubled()
                                                                        : SphereGrid(grid));
    const ClosedSurface sphere = image_surface(RadialField::constant(full, 1.0));
    double value = 0.0;
    if (grid.dimension() == 1) {
      value = divergence_oracle_Hs(sphere, 0, params);
    } else {
      const Eigen::VectorXd h = divergence_oracle_Hs(sphere, params);
      value = full->weights().dot(h) / full->weights().sum();
    }
    return Eigen::VectorXd::Constant(count, value);
  }
  if (!grid.is_hemisphere()) {
    throw std::invalid_argument("half-ball reference curvature needs a hemisphere grid");
  }
  const SingularQuadrature quad(grid, params.s);
  const double half_p = 0.5 * params.p;
  Eigen::VectorXd out(count);
#pragma omp parallel for schedule(static)
  for (Index x = 0; x < count; ++x) {
    const Vec3 xv = grid.node(x);
    const double cap = quad.integrate(x, [&](Index y) {
      const Vec3 d = grid.node(y) - xv;
      return d.dot(grid.node(y)) * inv_pow(d.squaredNorm(), half_p);
    });
    out[x] = 2.0 / params.s * cap + flat_base_term(xv, params);
  }
  return out;
}

}  // namespace fmcf
