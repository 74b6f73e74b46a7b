#include "fmcf/quadrature.hpp"

#include "oracles.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <doctest.h>

#include <cmath>

using namespace fmcf;

TEST_CASE("gauss-legendre matches boost abscissae") {
  const GaussRule r = gauss_legendre(10, -1.0, 1.0);
  using B = boost::math::quadrature::gauss<double, 10>;
  // boost stores the non-negative half
  for (int i = 0; i < 5; ++i) {
    const double a = B::abscissa()[static_cast<std::size_t>(i)];
    const double w = B::weights()[static_cast<std::size_t>(i)];
    CHECK(r.nodes[5 + i] == doctest::Approx(a).epsilon(1e-14));
    CHECK(r.nodes[4 - i] == doctest::Approx(-a).epsilon(1e-14));
    CHECK(r.weights[5 + i] == doctest::Approx(w).epsilon(1e-13));
  }
  const GaussRule u = gauss_legendre(6, 0.0, 1.0);
  double m = 0.0;
  for (Index i = 0; i < 6; ++i) m += u.weights[i] * std::pow(u.nodes[i], 11);
  CHECK(m == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("homotopy rule covers the triangle") {
  const HomotopyRule rule(8);
  CHECK(rule.xi_weights().sum() == doctest::Approx(0.5).epsilon(1e-14));
  // int_0^1 int_0^t xi^2 dxi dt = 1/12
  double m = 0.0;
  for (Index q = 0; q < rule.xi_nodes().size(); ++q) {
    CHECK(rule.xi_nodes()[q] > 0.0);
    CHECK(rule.xi_nodes()[q] < 1.0);
    m += rule.xi_weights()[q] * rule.xi_nodes()[q] * rule.xi_nodes()[q];
  }
  CHECK(m == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
}

TEST_CASE("zeta agrees with boost") {
  for (double s : {0.1, 0.5, 0.9}) CHECK(zeta(s) == doctest::Approx(boost::math::zeta(s)).epsilon(1e-13));
}

TEST_CASE("singular rule restores the missing cell") {
  const double s = 0.5;
  for (int res : {257, 1025}) {
    const SphereGrid g = SphereGrid::build(1, res, Topology::hemisphere);
    const SingularQuadrature quad(g, s);
    const Index pole = (res - 1) / 2;
    const double got = quad.integrate(pole, [&](Index y) { return std::pow(g.chord(y, pole), -s); });
    const double exact = oracle::chord_power_integral(s, 0.5 * oracle::kPi, 0.0, oracle::kPi);
    CHECK(std::abs(got / exact - 1.0) < (res == 257 ? 1e-3 : 1e-4));
  }
  const SphereGrid c = SphereGrid::build(1, 512, Topology::full_sphere);
  const SingularQuadrature quad(c, s);
  CHECK(quad.neighbor_coefficient() == doctest::Approx(-zeta(s) * c.spacing()));
  const double got = quad.integrate(0, [&](Index y) { return std::pow(c.chord(y, 0), -s); });
  CHECK(std::abs(got * (1.0 / s) / oracle::circle_constant(s) - 1.0) < 1e-5);
}
