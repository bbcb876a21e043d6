#include <doctest.h>

#include <cmath>

#include "ptspec/error.hpp"
#include "ptspec/lpaley.hpp"
#include "ptspec/spectrum.hpp"

using namespace ptspec;

namespace {

GridFunction mod_gauss(const Grid& g, double c, double k0, double s) {
  return g.sample([=](double x) { return std::exp(-(x - c) * (x - c) / (2.0 * s * s)) * std::cos(k0 * x); });
}

GridFunction ac_part(int nu, const GridFunction& f, const Grid& g) {
  const auto proj = bound_projection(f, bound_states(nu, g), g);
  GridFunction out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] - proj[i];
  return out;
}

}  // namespace

TEST_SUITE("lpaley") {

TEST_CASE("square function energy equals the sum of band energies") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = mod_gauss(g, 0.0, 3.0, 1.0);
  const auto sf = square_function(1, f, p, g);
  REQUIRE(sf.per_band_norms.size() == 17);
  double bands = 0.0;
  for (double v : sf.per_band_norms) bands += v * v;
  const double total = l2_norm(g, sf.values);
  CHECK(std::abs(total * total - bands) <= 1e-10 * bands);
  CHECK(sf.bound_state_norm >= 0.0);
}

TEST_CASE("bands two apart are orthogonal") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = mod_gauss(g, 0.5, 2.0, 0.7);
  const std::vector<cplx> fc(f.begin(), f.end());
  const BandOperator op(1, g);
  const auto a = op.phi(p, 1, fc), b = op.phi(p, 3, fc), c = op.phi(p, 2, fc);
  cplx ab = 0.0, ac = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    ab += g.weight(i) * a[i] * std::conj(b[i]);
    ac += g.weight(i) * a[i] * std::conj(c[i]);
  }
  // Bands two apart meet only at the quadrature floor; neighbours overlap at O(1).
  CHECK(std::abs(ab) <= 1e-4 * l2_norm(g, a) * l2_norm(g, b));
  CHECK(std::abs(ac) > 1e-2 * l2_norm(g, a) * l2_norm(g, c));
}

TEST_CASE("Q then R reconstructs the a.c. part") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = g.sample([](double x) { return std::exp(-0.5 * x * x); });
  CHECK(q_r_roundtrip(1, f, p, g) <= 1e-6);
  CHECK(q_r_roundtrip(2, f, p, g) <= 1e-6);
}

TEST_CASE("ratio is unchanged by reflection") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = mod_gauss(g, 1.5, 3.0, 1.0);
  GridFunction r(f.rbegin(), f.rend());
  for (double q : {1.5, 2.0, 3.0})
    CHECK(lp_ratio(1, f, q, p, g) == doctest::Approx(lp_ratio(1, r, q, p, g)).epsilon(1e-9));
}

TEST_CASE("p = 2 ratio lies in the square-sum bracket") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = mod_gauss(g, 0.0, 9.0, 2.0);
  const auto fa = ac_part(1, f, g);
  CHECK(spectral_tail_fraction(1, fa, p, g) < 1e-8);
  const auto [lo, hi] = p.square_sum_bracket();
  const double r = lp_ratio(1, f, 2.0, p, g);
  CHECK(r >= std::sqrt(lo) - 1e-4);
  CHECK(r <= std::sqrt(hi) + 1e-4);
}

TEST_CASE("spectral tail sees low-frequency content") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = 2, .j_max = 10});
  const auto f = ac_part(1, g.sample([](double x) { return std::exp(-x * x / 18.0); }), g);
  CHECK(spectral_tail_fraction(1, f, p, g) > 0.1);
}

TEST_CASE("errors") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = mod_gauss(g, 0.0, 3.0, 1.0);
  CHECK_THROWS_AS(lp_ratio(1, f, 1.0, p, g), ArgumentError);
  CHECK_THROWS_AS(lp_ratio(1, f, 5.0, p, g), ArgumentError);
  CHECK_THROWS_AS(lp_ratio(1, bound_states(1, g)[0].samples, 2.0, p, g), DegenerateInputError);
  CHECK_THROWS_AS(square_function(1, GridFunction(10, 0.0), p, g), ArgumentError);
}

}
