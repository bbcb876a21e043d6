#include <doctest.h>

#include <cmath>

#include "ptspec/calculus.hpp"
#include "ptspec/error.hpp"
#include "ptspec/estimates.hpp"
#include "ptspec/numerics.hpp"
#include "ptspec/spectrum.hpp"

using namespace ptspec;

TEST_SUITE("calculus") {

TEST_CASE("multiplier lookup") {
  CHECK(multipliers::by_name("one").id == "one");
  CHECK(multipliers::by_name("mihlin").m(1.0) == cplx(0.5));
  const auto ip = multipliers::by_name("ipow:2");
  CHECK(std::abs(ip.m(3.0) - std::exp(cplx(0.0, 2.0 * std::log(3.0)))) <= 1e-15);
  CHECK(std::abs(multipliers::by_name("heat:0.5").m(2.0) - std::exp(-1.0)) <= 1e-15);
  CHECK_THROWS(multipliers::by_name("nope"));
}

TEST_CASE("band node counts") {
  CHECK(required_band_nodes(0, 20.0) >= static_cast<std::size_t>(std::ceil(16.0 * 20.0 / kPi)));
  CHECK(required_band_nodes(10, 20.0) >= static_cast<std::size_t>(std::ceil(16.0 * 32.0 * 20.0 / kPi)));
  CHECK(required_band_nodes(-6, 20.0) >= 64);
}

TEST_CASE("free profile matches an independent quadrature") {
  const auto p = make_partition();
  const auto one = multipliers::identity();
  CHECK(std::abs(FreeProfile(one, p, 0, 10.0)(0.0) - 0.11401178478900241) <= 1e-12);
  CHECK(std::abs(FreeProfile(one, p, 0, 10.0)(1.0) - 0.056632154785771188) <= 1e-12);
  CHECK(std::abs(FreeProfile(one, p, 0, 10.0)(3.0) + 0.10697033734717912) <= 1e-12);
  CHECK(std::abs(FreeProfile(one, p, 4, 10.0)(0.5) + 0.22141203739826283) <= 1e-12);
  CHECK(std::abs(FreeProfile(one, p, -4, 10.0)(2.0) - 0.024642656319021665) <= 1e-12);
  CHECK(std::abs(FreeProfile(one, p, 2, 10.0)(1.7) - FreeProfile(one, p, 2, 10.0)(-1.7)) <= 1e-15);
}

TEST_CASE("nu = 0 kernels equal the free oracle") {
  const Grid g(10.0, 512);
  const auto p = make_partition();
  for (const auto& spec : {multipliers::identity(), multipliers::mihlin()})
    for (int j : {-2, 0, 3, 6}) {
      const auto k = multiplier_kernel(0, spec, p, j, g);
      const auto o = free_kernel_oracle(spec, p, j, g);
      CHECK(k.max_abs_diff(o) <= 1e-8);
    }
}

TEST_CASE("free oracle is translation invariant") {
  const Grid g(10.0, 256);
  const auto o = free_kernel_oracle(multipliers::identity(), make_partition(), 1, g);
  for (std::size_t i = 0; i + 7 < g.size(); i += 13)
    for (std::size_t l = 0; l + 7 < g.size(); l += 17) CHECK(std::abs(o.at(i, l) - o.at(i + 7, l + 7)) <= 1e-15);
}

TEST_CASE("kernels are Hermitian and real for real symbols") {
  const Grid g(10.0, 512);
  const auto p = make_partition();
  for (int nu = 1; nu <= 3; ++nu) {
    const auto k = multiplier_kernel(nu, multipliers::identity(), p, 2, g);
    CHECK(k.max_hermitian_defect() <= 1e-12);
    double imag = 0.0;
    for (const cplx v : k.entries) imag = std::max(imag, std::abs(v.imag()));
    CHECK(imag <= 1e-12);
  }
  const auto c = multiplier_kernel(1, multipliers::imaginary_power(2.0), p, 2, g);
  CHECK(c.max_hermitian_defect() > 1e-6);
}

TEST_CASE("under-resolved explicit quadrature is rejected") {
  const Grid g(10.0, 512);
  CHECK_THROWS_AS(multiplier_kernel(1, multipliers::identity(), make_partition(), 4, g,
                                    KQuadrature::band(std::exp2(1.5), std::exp2(2.5), 1.0, 2)),
                  ResolutionError);
}

TEST_CASE("nu = 1 low-pass diagonal at the origin") {
  const Grid g(20.0, 4097);
  const auto p = make_partition();
  const std::size_t o = g.nearest(0.0);
  REQUIRE(g.x(o) == doctest::Approx(0.0).epsilon(1e-12));
  const LowpassKernel k0(1, p, 0, g, false), k2(1, p, 2, g, false);
  CHECK(std::abs(k0(o, o) - 0.10773226896705352) <= 1e-8);
  CHECK(std::abs(k2(o, o) - 0.40235636143312474) <= 1e-8);
}

TEST_CASE("apply_multiplier identities") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(40.0, 4096);
  const auto f = g.sample([](double x) { return std::exp(-0.5 * (x - 0.3) * (x - 0.3)); });
  const auto one = multipliers::identity();
  const auto id = apply_multiplier(2, one, f, {.include_bound_states = true}, g, q);
  ComplexGridFunction d(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) d[i] = id[i] - f[i];
  CHECK(l2_norm(g, d) / l2_norm(g, f) <= 1e-6);

  const auto psi = bound_states(1, g)[0].samples;
  CHECK(l2_norm(g, apply_multiplier(1, one, psi, {}, g, q)) <= 1e-6);
}

TEST_CASE("m(lambda) = lambda acts as H on the a.c. part") {
  const Grid g(20.0, 4096);
  const auto q = KQuadrature::uniform(40.0, 4096);
  const auto f = g.sample([](double x) { return std::exp(-0.5 * x * x) * std::cos(2.0 * x); });
  const auto proj = bound_projection(f, bound_states(1, g), g);
  GridFunction fa(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fa[i] = f[i] - proj[i];
  const auto hf = apply_multiplier(1, multipliers::energy(), fa, {}, g, q);
  const double h = g.spacing();
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 2; i + 2 < g.size(); ++i) {
    const double d2 = (-fa[i - 2] + 16.0 * fa[i - 1] - 30.0 * fa[i] + 16.0 * fa[i + 1] - fa[i + 2]) / (12.0 * h * h);
    const double ref = -d2 + potential(1, g.x(i)) * fa[i];
    worst = std::max(worst, std::abs(hf[i] - ref));
    scale = std::max(scale, std::abs(ref));
  }
  CHECK(worst / scale <= 5e-4);
}

TEST_CASE("band additivity on a band-interior function") {
  const Grid g(20.0, 4096);
  const auto p = make_partition({.j_min = -6, .j_max = 10});
  const auto f = g.sample([](double x) { return std::exp(-x * x / 8.0) * std::cos(9.0 * x); });
  const auto proj = bound_projection(f, bound_states(1, g), g);
  const auto out = apply_multiplier(1, multipliers::identity(), f, {.partition = &p}, g, KQuadrature{});
  ComplexGridFunction d(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) d[i] = out[i] - (f[i] - proj[i]);
  CHECK(l2_norm(g, d) / l2_norm(g, f) <= 1e-6);
}

TEST_CASE("multiplier norm") {
  CHECK(multiplier_norm(multipliers::identity()) == doctest::Approx(6.0).epsilon(1e-3));
  const double mh = multiplier_norm(multipliers::mihlin());
  CHECK(std::isfinite(mh));
  CHECK(mh >= 1.0);
  double prev = 0.0;
  for (double beta : {0.0, 1.0, 2.0, 4.0}) {
    const double c = multiplier_norm(multipliers::imaginary_power(beta));
    CHECK(std::isfinite(c));
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(scaled_c1_norm(multipliers::identity(), 0.01) == doctest::Approx(scaled_c1_norm(multipliers::identity(), 100.0)));
}

}
