// Continuum reference values for the n = 1 operators, computed with Boost.Math
// directly from the integral definitions. Nothing here uses the fmcf grid.
#ifndef FMCF_TESTS_ORACLES_HPP
#define FMCF_TESTS_ORACLES_HPP

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

constexpr double kPi = std::numbers::pi;
using Fn = std::function<double(double)>;

/// rho(phi) on the arc y = (cos phi, sin phi) with its derivative.
struct Profile {
  Fn rho;
  Fn drho;
};

inline double chord(double a, double b) { return 2.0 * std::abs(std::sin(0.5 * (a - b))); }

/// int_0^m f(d) dd for f ~ c d^{-s} at 0. Below delta the leading power is
/// integrated exactly (error O(delta^{2-s})); above it d = u^2 smooths the rest.
inline double near_zero(const Fn& f, double m, double s, double delta = 1e-4) {
  if (m <= 0.0) return 0.0;
  if (m <= delta) delta = 0.5 * m;
  const double head = f(delta) * delta / (1.0 - s);
  auto g = [&](double u) { return 2.0 * u * f(u * u); };
  return head + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                    g, std::sqrt(delta), std::sqrt(m), 12, 1e-11);
}

inline double smooth(const Fn& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-11);
}

/// PV int_0^pi F(phi) dphi around phi_x, folding the symmetric part.
inline double folded_hemisphere(const Fn& F, double phi_x, double s) {
  const double m = std::min(phi_x, kPi - phi_x);
  const double folded = near_zero([&](double d) { return F(phi_x + d) + F(phi_x - d); }, m, s);
  return folded + (phi_x < 0.5 * kPi ? smooth(F, phi_x + m, kPi) : smooth(F, 0.0, phi_x - m));
}

/// PV int over the full circle around phi_x.
inline double folded_circle(const Fn& F, double phi_x, double s) {
  return near_zero([&](double d) { return F(phi_x + d) + F(phi_x - d); }, kPi, s);
}

/// The unit circle constant H^s = (1/s) int (2 sin(theta/2))^{-s} dtheta in closed form.
inline double circle_constant(double s) {
  using boost::math::tgamma;
  return (1.0 / s) * 2.0 * std::pow(2.0, -s) * std::sqrt(kPi) * tgamma(0.5 * (1.0 - s)) /
         tgamma(1.0 - 0.5 * s);
}

/// Eigenvalue of u -> 2 PV int (u(y) - u(x)) |y - x|^{-(2+s)} on cos(k phi).
inline double fourier_symbol(double s, int k) {
  auto f = [&](double th) {
    return (std::cos(k * th) - 1.0) * std::pow(2.0 * std::sin(0.5 * th), -(2.0 + s));
  };
  return 2.0 * 2.0 * near_zero(f, kPi, s);
}

/// int_lo^hi |y - x|^{-s} dphi with x at angle phi_x inside [lo, hi].
inline double chord_power_integral(double s, double phi_x, double lo, double hi) {
  auto f = [&](double d) { return std::pow(2.0 * std::sin(0.5 * d), -s); };
  return near_zero(f, phi_x - lo, s) + near_zero(f, hi - phi_x, s);
}

/// 2 PV int_0^pi (u(phi) - u(phi_x)) |y - x|^{-(2+s)} dphi.
inline double hemisphere_laplacian(const Fn& u, double phi_x, double s) {
  auto F = [&](double p) { return 2.0 * (u(p) - u(phi_x)) * std::pow(chord(p, phi_x), -(2.0 + s)); };
  return folded_hemisphere(F, phi_x, s);
}

struct Point {
  double x;
  double y;
};

inline Point on_arc(double phi) { return {std::cos(phi), std::sin(phi)}; }

/// Pieces of the deformation x -> (1 + xi (rho(x) - 1)) x between two arc points.
struct Pair {
  double d0x, d0y;  // y - x
  double dvx, dvy;  // v(y) - v(x), v = (rho - 1) e
  double ry;
  double gx, gy;  // grad rho at y
};

inline Pair make_pair(const Profile& pr, double py, double px) {
  const Point ey = on_arc(py);
  const Point ex = on_arc(px);
  const double ry = pr.rho(py);
  const double rx = pr.rho(px);
  const double dr = pr.drho(py);
  return {ey.x - ex.x,
          ey.y - ex.y,
          (ry - 1.0) * ey.x - (rx - 1.0) * ex.x,
          (ry - 1.0) * ey.y - (rx - 1.0) * ex.y,
          ry,
          -dr * std::sin(py),
          dr * std::cos(py)};
}

/// d/dxi [a K_xi] for n = 1 with a = 1 + xi (rho(y) - 1).
inline double kernel_dxi(const Pair& q, double xi, double p) {
  const double dx = q.d0x + xi * q.dvx;
  const double dy = q.d0y + xi * q.dvy;
  const double r2 = dx * dx + dy * dy;
  const double k = std::pow(r2, -0.5 * p);
  const double a = 1.0 + xi * (q.ry - 1.0);
  return (q.ry - 1.0) * k - a * p * (dx * q.dvx + dy * q.dvy) * k / r2;
}

/// int_0^1 (1 - xi) d/dxi[a K] dxi, the triangle 0 < xi < t' < 1 collapsed.
inline double triangle_dxi(const Pair& q, double p) {
  auto f = [&](double xi) { return (1.0 - xi) * kernel_dxi(q, xi, p); };
  return boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, 1.0);
}

inline double remainder_r1(const Profile& pr, double phi_x, double s) {
  const double p = 2.0 + s;
  auto F = [&](double py) {
    const Pair q = make_pair(pr, py, phi_x);
    return 2.0 * (pr.rho(py) - pr.rho(phi_x)) * triangle_dxi(q, p);
  };
  return folded_hemisphere(F, phi_x, s);
}

inline double remainder_r2(const Profile& pr, double phi_x, double s) {
  const double p = 2.0 + s;
  auto hom = [&](double py) {
    const Pair q = make_pair(pr, py, phi_x);
    return (q.d0x * q.d0x + q.d0y * q.d0y) * triangle_dxi(q, p);
  };
  auto grad = [&](double py) {
    const Pair q = make_pair(pr, py, phi_x);
    const double gd = q.d0x * q.gx + q.d0y * q.gy;
    auto inner = [&](double t) {
      const double dx = q.d0x + t * q.dvx;
      const double dy = q.d0y + t * q.dvy;
      return t * std::pow(dx * dx + dy * dy, -0.5 * p);
    };
    return gd * boost::math::quadrature::gauss<double, 30>::integrate(inner, 0.0, 1.0);
  };
  return chord_power_integral(s, phi_x, 0.0, kPi) + folded_hemisphere(hom, phi_x, s) -
         2.0 * folded_hemisphere(grad, phi_x, s);
}

/// First variation of H^s along the homotopy at time t.
inline double homotopy_derivative(const Profile& pr, double t, double phi_x, double s) {
  const double p = 2.0 + s;
  auto F = [&](double py) {
    const Pair q = make_pair(pr, py, phi_x);
    const Point ey = on_arc(py);
    const double a = 1.0 + t * (q.ry - 1.0);
    const double dx = q.d0x + t * q.dvx;
    const double dy = q.d0y + t * q.dvy;
    const double k = std::pow(dx * dx + dy * dy, -0.5 * p);
    const double wx = a * ey.x - t * q.gx;
    const double wy = a * ey.y - t * q.gy;
    return 2.0 * (q.dvx * wx + q.dvy * wy) * k;
  };
  return folded_hemisphere(F, phi_x, s);
}

}  // namespace oracle

#endif  // FMCF_TESTS_ORACLES_HPP
