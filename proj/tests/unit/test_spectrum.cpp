#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"
#include "ptspec/spectrum.hpp"
#include "ptspec/transform.hpp"

using namespace ptspec;

TEST_SUITE("spectrum") {

TEST_CASE("associated Legendre values with the Condon-Shortley phase") {
  CHECK(assoc_legendre(3, 1, 0.3) == doctest::Approx(0.7869998411689801).epsilon(1e-14));
  CHECK(assoc_legendre(3, 2, -0.7) == doctest::Approx(-5.355).epsilon(1e-14));
  CHECK(assoc_legendre(4, 3, 0.55) == doctest::Approx(-33.64095425812801).epsilon(1e-14));
  CHECK(assoc_legendre(2, 2, 0.9) == doctest::Approx(0.57).epsilon(1e-13));
  CHECK(assoc_legendre(2, 3, 0.4) == 0.0);
  CHECK_THROWS_AS(assoc_legendre(2, -1, 0.4), RangeError);
}

TEST_CASE("point spectrum") {
  for (int nu = 0; nu <= 5; ++nu) {
    const auto d = spectral_data(nu);
    REQUIRE(static_cast<int>(d.point_spectrum.size()) == nu);
    for (int m = 1; m <= nu; ++m) CHECK(d.point_spectrum[m - 1] == -static_cast<double>(m * m));
    CHECK(d.continuous_spectrum_start == 0.0);
  }
}

TEST_CASE("nu = 1 ground state is sech x / sqrt 2") {
  const Grid g(20.0, 4096);
  const auto st = bound_states(1, g);
  REQUIRE(st.size() == 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(st[0].samples[i] - sech(g.x(i)) / std::sqrt(2.0)));
  CHECK(worst <= 1e-12);
  CHECK(st[0](0.7) == doctest::Approx(sech(0.7) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("bound states are orthonormal eigenfunctions") {
  const Grid g(20.0, 4096);
  for (int nu = 1; nu <= 3; ++nu) {
    const auto st = bound_states(nu, g);
    for (const auto& s : st) {
      CHECK(s.energy == -static_cast<double>(s.m * s.m));
      CHECK(eigen_residual(s, nu, g) <= 5e-3);
      for (const auto& t : st) {
        const double ip = inner(g, s.samples, t.samples);
        CHECK(std::abs(ip - (s.m == t.m ? 1.0 : 0.0)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("bound states are orthogonal to the continuum") {
  const Grid g(20.0, 4096);
  KQuadrature probe;
  probe.nodes = {-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0};
  probe.weights.assign(probe.nodes.size(), 1.0);
  for (int nu = 1; nu <= 3; ++nu) {
    const SpectralBasis basis(nu, g);
    for (const auto& s : bound_states(nu, g))
      for (const cplx v : basis.forward(std::span<const double>(s.samples), probe)) CHECK(std::abs(v) <= 1e-8);
  }
}

TEST_CASE("Wronskian") {
  CHECK(std::abs(wronskian_eval(1, 1.0) - cplx(-2.0, 0.0)) <= 1e-15);
  CHECK(std::abs(wronskian_eval(0, 2.0) - cplx(0.0, -4.0)) <= 1e-15);
  for (int nu = 0; nu <= 4; ++nu) {
    CHECK(std::abs(wronskian_eval(nu, 0.0)) == 0.0);
    for (double k : {0.3, 1.0, 5.0}) CHECK(std::abs(wronskian_eval(nu, k)) == doctest::Approx(2.0 * k));
  }
}

TEST_CASE("bound-state CSV layout") {
  const Grid g(10.0, 64);
  std::ostringstream os;
  write_bound_states_csv(os, 2, g, bound_states(2, g));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "# nu=2,L=10,n_points=64");
  std::getline(is, line);
  CHECK(line == "x,psi_1,psi_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 64);
}

}
