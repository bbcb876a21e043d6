#include <doctest.h>

#include <cmath>

#include "ptspec/numerics.hpp"
#include "ptspec/spectrum.hpp"
#include "ptspec/transform.hpp"

using namespace ptspec;

namespace {

GridFunction gaussian(const Grid& g, double shift = 0.0) {
  return g.sample([shift](double x) { return std::exp(-0.5 * (x - shift) * (x - shift)); });
}

}  // namespace

TEST_SUITE("transform") {

TEST_CASE("quadrature rules") {
  const auto q = KQuadrature::uniform(40.0, 4096);
  REQUIRE(q.size() == 4096);
  double w = 0.0;
  for (double v : q.weights) w += v;
  CHECK(w == doctest::Approx(80.0).epsilon(1e-12));
  for (std::size_t i = 1; i < q.size(); ++i) CHECK(q.nodes[i] > q.nodes[i - 1]);
  const auto b = KQuadrature::band(1.0, 2.0, 0.05);
  for (double k : b.nodes) CHECK((std::abs(k) >= 1.0 && std::abs(k) <= 2.0));
  double bw = 0.0;
  for (double v : b.weights) bw += v;
  CHECK(bw == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("free Gaussian transform") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(10.0, 512);
  const auto c = forward(0, gaussian(g), q, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    worst = std::max(worst, std::abs(c.values[i] - std::sqrt(2.0 * kPi) * std::exp(-0.5 * q.nodes[i] * q.nodes[i])));
  CHECK(worst <= 1e-8);
  CHECK_FALSE(c.warning.has_value());
}

TEST_CASE("non-decaying input is flagged") {
  const Grid g(10.0, 1024);
  const auto f = g.sample([](double x) { return std::cos(x); });
  const auto c = forward(0, f, KQuadrature::uniform(5.0, 64), g);
  CHECK(c.warning.has_value());
  CHECK(c.tail_bound > 1e-10);
}

TEST_CASE("bound state has no continuum component") {
  const Grid g(20.0, 4096);
  const auto psi = bound_states(1, g)[0].samples;
  const auto c = forward(1, psi, KQuadrature::uniform(40.0, 4096), g);
  double worst = 0.0;
  for (const cplx v : c.values) worst = std::max(worst, std::abs(v));
  CHECK(worst <= 1e-8);
}

TEST_CASE("linearity") {
  const Grid g(20.0, 2048);
  const auto q = KQuadrature::uniform(20.0, 512);
  const auto f = gaussian(g, 0.5), h = g.sample([](double x) { return sech(x) * std::sin(2.0 * x); });
  GridFunction comb(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) comb[i] = 2.0 * f[i] + 3.0 * h[i];
  const auto a = forward(2, f, q, g), b = forward(2, h, q, g), c = forward(2, comb, q, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    worst = std::max(worst, std::abs(c.values[i] - 2.0 * a.values[i] - 3.0 * b.values[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("conjugate symmetry at nu = 0 and modulus symmetry for nu >= 1") {
  const Grid g(20.0, 2048);
  const auto q = KQuadrature::uniform(8.0, 256);
  const auto f = gaussian(g, 0.7);
  const auto c0 = forward(0, f, q, g);
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(c0.values[n - 1 - i] - std::conj(c0.values[i])) <= 1e-12);
  for (int nu = 1; nu <= 3; ++nu) {
    const auto c = forward(nu, f, q, g);
    const WaveFamily fam(nu);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = q.nodes[i];
      CHECK(std::abs(std::abs(c.values[n - 1 - i]) - std::abs(c.values[i])) <= 1e-12);
      const cplx phase = std::conj(fam.normalization(-k)) / fam.normalization(k);
      CHECK(std::abs(c.values[n - 1 - i] - phase * std::conj(c.values[i])) <= 1e-12);
    }
  }
}

TEST_CASE("adjoint of zero coefficients") {
  const Grid g(10.0, 256);
  const auto q = KQuadrature::uniform(5.0, 64);
  SpectralCoefficients c;
  c.nu = 1;
  c.values.assign(q.size(), 0.0);
  for (const cplx v : adjoint_apply(1, c, q, g)) CHECK(v == cplx(0.0));
}

TEST_CASE("free round trip on a band-limited function") {
  const Grid g(20.0, 4096);
  const auto f = gaussian(g);
  const auto q = KQuadrature::uniform(12.0, 1024, 4);
  const auto back = adjoint_apply(0, forward(0, f, q, g), q, g);
  ComplexGridFunction d(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) d[i] = back[i] - f[i];
  CHECK(l2_norm(g, d) / l2_norm(g, f) <= 1e-8);
}

TEST_CASE("forward after adjoint reproduces smooth coefficients") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(6.0, 1024, 4);
  SpectralCoefficients c;
  c.nu = 1;
  // Small near k = 0, where the waves flip sign, so the synthesis decays inside the box.
  for (double k : q.nodes) c.values.push_back(std::exp(-2.0 * (k - 2.5) * (k - 2.5)) * cplx(1.0, 0.3));
  const SpectralBasis basis(1, g);
  const auto synth = basis.adjoint(c.values, q);
  const auto again = basis.forward(std::span<const cplx>(synth), q);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (std::abs(q.nodes[i]) > 0.3 && std::abs(q.nodes[i]) < 5.0) worst = std::max(worst, std::abs(again[i] - c.values[i]));
  CHECK(worst <= 1e-6);
}

TEST_CASE("completeness") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(40.0, 4096);
  const auto f = gaussian(g);
  CHECK(completeness_defect(0, f, g, q) <= 1e-8);
  for (int nu = 1; nu <= 3; ++nu) CHECK(completeness_defect(nu, f, g, q) <= 1e-6);
  const auto psi2 = bound_states(2, g)[1].samples;
  CHECK(completeness_defect(2, psi2, g, q) <= 1e-6);
}

TEST_CASE("completeness is parity invariant") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(40.0, 4096);
  const auto f = gaussian(g, 1.3);
  const GridFunction fr(f.rbegin(), f.rend());
  CHECK(std::abs(completeness_defect(2, f, g, q) - completeness_defect(2, fr, g, q)) <= 1e-10);
}

TEST_CASE("Parseval on the a.c. part") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(40.0, 4096);
  const auto f = gaussian(g, -0.4);
  const auto proj = bound_projection(f, bound_states(2, g), g);
  GridFunction fa(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fa[i] = f[i] - proj[i];
  const auto c = forward(2, fa, q, g);
  double e = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) e += q.weights[i] * std::norm(c.values[i]);
  e /= 2.0 * kPi;
  const double n2 = std::pow(l2_norm(g, fa), 2);
  CHECK(std::abs(e - n2) / n2 <= 1e-6);
}

}
