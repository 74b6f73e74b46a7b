#include "fmcf/nonlocal.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace fmcf;

namespace {

constexpr double kPi = std::numbers::pi;

RadialField profile_field(const GridPtr& g, const oracle::Profile& pr) {
  Eigen::VectorXd v(g->size());
  for (Index i = 0; i < v.size(); ++i) v[i] = pr.rho(g->angle(i));
  return RadialField(g, v);
}

oracle::Profile height(double a) {
  return {[a](double p) { return 1.0 + a * std::sin(p); }, [a](double p) { return a * std::cos(p); }};
}

oracle::Profile cos2(double a) {
  return {[a](double p) { return 1.0 + a * std::cos(2 * p); },
          [a](double p) { return -2.0 * a * std::sin(2 * p); }};
}

double rel(double got, double want) { return std::abs(got / want - 1.0); }

}  // namespace

TEST_CASE("kernel special cases") {
  const KernelParams P = KernelParams::make(0.5, 1);
  CHECK(P.p == doctest::Approx(2.5));
  const GridPtr g = build_grid(1, 33, Topology::hemisphere);
  const RadialField one = RadialField::constant(g, 1.0);
  const RadialField two = RadialField::constant(g, 2.0);
  const RadialField wavy = profile_field(g, cos2(0.2));
  for (Index y : {0, 5, 17}) {
    const Index x = 9;
    const double base = std::pow(g->chord(y, x), -2.5);
    CHECK(kernel_K(0.0, wavy, y, x, P) == doctest::Approx(base).epsilon(1e-13));
    CHECK(kernel_K(0.7, one, y, x, P) == doctest::Approx(base).epsilon(1e-13));
    CHECK(kernel_K(1.0, two, y, x, P) == doctest::Approx(std::pow(2.0 * g->chord(y, x), -2.5)).epsilon(1e-13));
    CHECK(kernel_K_dxi(0.3, one, y, x, P) == 0.0);
  }
  CHECK_THROWS(kernel_K(0.5, wavy, 4, 4, P));
  CHECK_THROWS(kernel_K_dxi(0.5, wavy, 4, 4, P));
}

TEST_CASE("kernel xi-derivative matches finite differences") {
  const GridPtr g = build_grid(1, 65, Topology::hemisphere);
  const KernelParams P = KernelParams::make(0.5, 1);
  const RadialField wavy = profile_field(g, cos2(0.2));
  const RadialField c = RadialField::constant(g, 1.3);
  auto scaled = [&](const RadialField& r, double xi, Index y, Index x) {
    return (1.0 + xi * (r(y) - 1.0)) * kernel_K(xi, r, y, x, P);
  };
  const double step = 1e-5;
  for (const RadialField* r : {&wavy, &c}) {
    for (double xi : {0.0, 0.4, 1.0}) {
      for (Index y : {3, 20, 50}) {
        const Index x = 11;
        const double fd = (scaled(*r, xi + step, y, x) - scaled(*r, xi - step, y, x)) / (2 * step);
        CHECK(rel(kernel_K_dxi(xi, *r, y, x, P), fd) < 1e-6);
      }
    }
  }
  // rho = c at xi = 0: (c - 1)(1 - p)|y - x|^{-p}
  CHECK(kernel_K_dxi(0.0, c, 30, 11, P) ==
        doctest::Approx(0.3 * (1.0 - 2.5) * std::pow(g->chord(30, 11), -2.5)).epsilon(1e-12));
}

TEST_CASE("fractional laplacian against the Fourier symbol") {
  const double s = 0.5;
  const KernelParams P = KernelParams::make(s, 1);
  const SphereGrid g = SphereGrid::build(1, 512, Topology::full_sphere);
  CHECK(frac_laplacian(g, Eigen::VectorXd::Constant(g.size(), 2.0), P).cwiseAbs().maxCoeff() < 1e-9);
  for (int k : {1, 2}) {
    Eigen::VectorXd u(g.size());
    // k = 1 is the ambient linear function y . e with e at angle 0.3
    for (Index i = 0; i < u.size(); ++i) u[i] = std::cos(k * (g.angle(i) - (k == 1 ? 0.3 : 0.0)));
    const Eigen::VectorXd lu = frac_laplacian(g, u, P);
    const double lambda = oracle::fourier_symbol(s, k);
    double lo = 1e300, hi = -1e300;
    for (Index i = 0; i < u.size(); ++i) {
      if (std::abs(u[i]) < 0.5) continue;
      const double r = lu[i] / u[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    CHECK(rel(lo, lambda) < 1e-3);
    CHECK(rel(hi, lambda) < 1e-3);
    CHECK((hi - lo) / std::abs(lambda) < 1e-2);
  }
}

TEST_CASE("fractional laplacian on the hemisphere") {
  const double s = 0.5;
  const KernelParams P = KernelParams::make(s, 1);
  const SphereGrid g = SphereGrid::build(1, 513, Topology::hemisphere);
  auto u = [](double p) { return std::cos(2 * p) + 0.3 * std::sin(p); };
  Eigen::VectorXd v(g.size());
  for (Index i = 0; i < v.size(); ++i) v[i] = u(g.angle(i));
  const Index x = 128;  // phi = pi/4
  CHECK(rel(frac_laplacian(g, v, x, P), oracle::hemisphere_laplacian(u, kPi / 4, s)) < 1e-3);

  const Eigen::MatrixXd L = frac_laplacian_matrix(g, P);
  const Eigen::VectorXd direct = frac_laplacian(g, v, P);
  CHECK((L * v - direct).cwiseAbs().maxCoeff() < 1e-8 * direct.cwiseAbs().maxCoeff());
  CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-8 * L.cwiseAbs().maxCoeff());
  for (Index i = 0; i < L.rows(); ++i) {
    for (Index j = 0; j < L.cols(); ++j) {
      if (i != j && L(i, j) < 0.0) FAIL("negative off-diagonal entry");
    }
  }
}

TEST_CASE("first moment symmetry") {
  const double s = 0.5;
  const SphereGrid c = SphereGrid::build(1, 256, Topology::full_sphere);
  auto k = [&](const SphereGrid& g) {
    return [&g](Index y, Index x) { return std::pow(g.chord(y, x), -2.5); };
  };
  for (Index x : {0, 37, 200}) {
    // the tangential part cancels in pairs; the normal part is -x/2 int |y - x|^{-s}
    const Vec3 psi = first_moment_psi(c, x, k(c), s);
    CHECK(std::abs(psi.dot(c.tangent(x))) < 1e-10);
    CHECK(rel(psi.dot(c.node(x)), -0.5 * s * oracle::circle_constant(s)) < 1e-4);
  }
  const SphereGrid h = SphereGrid::build(1, 257, Topology::hemisphere);
  const Vec3 psi = first_moment_psi(h, 128, k(h), s);
  CHECK(std::abs(psi.dot(h.tangent(128))) < 1e-8);
}

TEST_CASE("remainders vanish at constants and match nested quadrature") {
  const double s = 0.5;
  const KernelParams P = KernelParams::make(s, 1);
  const HomotopyRule rule(8);
  const GridPtr g = build_grid(1, 513, Topology::hemisphere);
  const RadialField c = RadialField::constant(g, 1.2);
  CHECK(std::abs(remainder_R1(c, 100, P, rule)) < 1e-10);

  // rho = 1: only the pole term survives
  const RadialField one = RadialField::constant(g, 1.0);
  const double pole = oracle::chord_power_integral(s, kPi / 2, 0.0, kPi);
  CHECK(rel(remainder_R2(one, 256, P, rule), pole) < 1e-4);

  const oracle::Profile pr = height(0.05);
  const RadialField rho = profile_field(g, pr);
  for (Index x : {128, 256, 400}) {
    const double phi = g->angle(x);
    CHECK(rel(remainder_R1(rho, x, P, rule), oracle::remainder_r1(pr, phi, s)) < 1e-3);
    CHECK(rel(remainder_R2(rho, x, P, rule), oracle::remainder_r2(pr, phi, s)) < 1e-3);
  }
  const Remainders all = remainder_terms(rho, P, rule);
  CHECK(all.r1[128] == doctest::Approx(remainder_R1(rho, 128, P, rule)).epsilon(1e-12));
  CHECK(all.r2[128] == doctest::Approx(remainder_R2(rho, 128, P, rule)).epsilon(1e-12));

  // the 8-point homotopy rule is converged against 16 points
  const Remainders fine = remainder_terms(rho, P, HomotopyRule(16));
  CHECK((all.r1 - fine.r1).cwiseAbs().maxCoeff() < 1e-4 * fine.r1.cwiseAbs().maxCoeff());
  CHECK((all.r2 - fine.r2).cwiseAbs().maxCoeff() < 1e-4 * fine.r2.cwiseAbs().maxCoeff());
}

TEST_CASE("R1 is quadratic in the perturbation amplitude") {
  const KernelParams P = KernelParams::make(0.5, 1);
  const HomotopyRule rule(8);
  const GridPtr g = build_grid(1, 257, Topology::hemisphere);
  const Eigen::VectorXd r_small = remainder_terms(profile_field(g, height(0.005)), P, rule).r1;
  const Eigen::VectorXd r_big = remainder_terms(profile_field(g, height(0.01)), P, rule).r1;
  const Index x = 128;
  CHECK(r_big[x] / r_small[x] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("homotopy derivative") {
  const double s = 0.5;
  const KernelParams P = KernelParams::make(s, 1);
  const GridPtr g = build_grid(1, 513, Topology::hemisphere);
  CHECK(homotopy_derivative(0.3, RadialField::constant(g, 1.0), P).cwiseAbs().maxCoeff() == 0.0);

  const oracle::Profile pr = height(0.05);
  const RadialField rho = profile_field(g, pr);
  for (Index x : {128, 256}) {
    CHECK(rel(homotopy_derivative(0.5, rho, x, P), oracle::homotopy_derivative(pr, 0.5, g->angle(x), s)) <
          1e-3);
  }

  // rho = c on the circle: minus the t-derivative of the oracle along dilations
  const GridPtr full = build_grid(1, 512, Topology::full_sphere);
  const double cst = 1.2, t = 0.5, d = 1e-4;
  auto h_at = [&](double tt) {
    return divergence_oracle_Hs(circle_surface(1.0 + tt * (cst - 1.0), 2048), 0, P);
  };
  const double fd = -(h_at(t + d) - h_at(t - d)) / (2 * d);
  const Eigen::VectorXd hd = homotopy_derivative(t, RadialField::constant(full, cst), P);
  CHECK(rel(hd.mean(), fd) < 1e-3);
  CHECK((hd.array() - hd.mean()).abs().maxCoeff() < 1e-10 * std::abs(fd));
}

TEST_CASE("parametrized curvature") {
  const double s = 0.5;
  const KernelParams P = KernelParams::make(s, 1);
  const HomotopyRule rule(8);
  const GridPtr full = build_grid(1, 512, Topology::full_sphere);
  const Eigen::VectorXd href = hs_reference(*full, P, HsRefMode::full_sphere);
  CHECK(rel(href[0], oracle::circle_constant(s)) < 1e-6);
  CHECK(parametrized_Hs(RadialField::constant(full, 1.0), P, rule, href) == -href);
  for (double c : {0.8, 1.25}) {
    const Eigen::VectorXd v = parametrized_Hs(RadialField::constant(full, c), P, rule, href);
    CHECK(rel(v.minCoeff(), -std::pow(c, -s) * oracle::circle_constant(s)) < 1e-3);
    CHECK(rel(v.maxCoeff(), -std::pow(c, -s) * oracle::circle_constant(s)) < 1e-3);
  }
}

TEST_CASE("M1 identity on the perturbation family") {
  const KernelParams P = KernelParams::make(0.5, 1);
  const HomotopyRule rule(8);
  const GridPtr g = build_grid(1, 129, Topology::hemisphere);
  const Eigen::VectorXd href = hs_reference(*g, P, HsRefMode::half_ball);
  const oracle::Fn shapes[] = {[](double p) { return std::sin(p); },
                               [](double p) { return std::cos(p) * std::cos(p); },
                               [](double p) { return std::cos(2 * p); }};
  for (const auto& f : shapes) {
    for (double a : {0.01, 0.05, 0.1}) {
      Eigen::VectorXd v(g->size());
      for (Index i = 0; i < v.size(); ++i) v[i] = 1.0 + a * f(g->angle(i));
      const RadialField rho(g, v);
      const Eigen::VectorXd lhs = parametrized_Hs(rho, P, rule, href);
      const Eigen::VectorXd rhs = homotopy_integral(rho, P, rule) - href;
      double worst = 0.0;
      for (Index i = 1; i + 1 < v.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
      CHECK(worst < 1e-3 * lhs.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("divergence oracle") {
  const KernelParams P = KernelParams::make(0.5, 1);
  const Eigen::VectorXd h = divergence_oracle_Hs(circle_surface(1.0, 1024), P);
  const double mean = h.mean();
  CHECK(std::sqrt((h.array() - mean).square().mean()) / mean < 1e-3);
  CHECK(rel(mean, oracle::circle_constant(0.5)) < 1e-6);
  for (double s : {0.3, 0.7}) {
    const KernelParams Q = KernelParams::make(s, 1);
    CHECK(rel(divergence_oracle_Hs(circle_surface(1.0, 1024), 5, Q), oracle::circle_constant(s)) < 1e-5);
  }
  for (double R : {0.8, 1.25}) {
    CHECK(rel(divergence_oracle_Hs(circle_surface(R, 1024), 3, P), std::pow(R, -0.5) * mean) < 1e-3);
  }
  // the vertex on the long axis is sharper
  const ClosedSurface e = ellipse_surface(1.2, 0.8, 1024);
  CHECK(divergence_oracle_Hs(e, 0, P) > divergence_oracle_Hs(e, 256, P));
}

TEST_CASE("reference curvature modes") {
  const KernelParams P = KernelParams::make(0.5, 1);
  const SphereGrid g = SphereGrid::build(1, 257, Topology::hemisphere);
  const Eigen::VectorXd half = hs_reference(g, P, HsRefMode::half_ball);
  const Eigen::VectorXd full = hs_reference(g, P, HsRefMode::full_sphere);
  for (Index i = 0; i < g.size(); ++i) {
    CHECK(std::abs(half[i] - half[g.size() - 1 - i]) < 1e-10 * std::abs(half[i]));
    CHECK(full[i] == doctest::Approx(oracle::circle_constant(0.5)).epsilon(1e-5));
  }
  CHECK(std::abs(half[128] - full[128]) > 1e-3);
  CHECK_THROWS(hs_reference(SphereGrid::build(1, 256, Topology::full_sphere), P, HsRefMode::half_ball));

  // n = 2 sphere constant 2 pi 2^{1-s} / (s (1 - s)); the punctured rule converges like h^{1/2}
  const KernelParams P2 = KernelParams::make(0.5, 2);
  const double exact = 2 * kPi * std::pow(2.0, 0.5) / 0.25;
  double prev = 1.0;
  for (int res : {16, 32, 64}) {
    const Eigen::VectorXd sphere = hs_reference(SphereGrid::build(2, res, Topology::full_sphere), P2,
                                                HsRefMode::full_sphere);
    const double err = rel(sphere.mean(), exact);
    CHECK(prev / err > 1.3);
    CHECK(sphere.maxCoeff() - sphere.minCoeff() < 1e-10 * exact);
    prev = err;
  }
  CHECK(hs_ref_mode_from_string(to_string(HsRefMode::half_ball)) == HsRefMode::half_ball);
  CHECK_THROWS(hs_ref_mode_from_string("bogus"));
}

TEST_CASE("injectivity") {
  const GridPtr g = build_grid(1, 65, Topology::full_sphere);
  CHECK(injectivity_ratio(RadialField::constant(g, 0.5)) == doctest::Approx(0.5));
  CHECK_NOTHROW(check_injectivity(profile_field(g, cos2(0.1))));
  CHECK_THROWS_AS(check_injectivity(profile_field(g, cos2(0.95)), 0.1), DegenerateParametrization);
  CHECK_THROWS(image_surface(RadialField::constant(build_grid(1, 65, Topology::hemisphere), 1.0)));
}
