#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptspec/grid.hpp"

namespace ptspec {

/// Default cap on the Poschl-Teller order nu.
inline constexpr int kDefaultMaxNu = 12;

/// Integer polynomial p(s, z) = sum_{a,b} coeffs[a][b] s^a z^b with a, b <= nu.
///
/// The family p_nu generated by poly_recursion gives the continuum
/// eigenfunctions of -d^2/dx^2 - nu(nu+1) sech^2 x after substituting
/// s = tanh x and z = ik.
class BivarPoly {
 public:
  BivarPoly() : BivarPoly(0) {}
  explicit BivarPoly(int nu);

  int nu() const { return nu_; }
  std::int64_t coeff(int s_deg, int z_deg) const;
  std::int64_t& coeff(int s_deg, int z_deg);
  const std::vector<std::vector<std::int64_t>>& coeffs() const { return coeffs_; }

  /// Coefficients alpha_b(s) of z^b after substituting s; size nu+1.
  std::vector<double> z_coefficients(double s) const;
  void z_coefficients(double s, std::span<double> out) const;

  cplx operator()(double s, cplx z) const;

  /// Coefficientwise check of p(-s, -z) = (-1)^nu p(s, z).
  bool has_parity() const;
  bool is_monic_in_z() const;

  bool operator==(const BivarPoly&) const = default;

 private:
  int nu_;
  std::vector<std::vector<std::int64_t>> coeffs_;
};

/// p_0 ... p_nu by p_n = (1 - s^2) d/ds p_{n-1} + (z - n s) p_{n-1}, p_0 = 1.
/// Exact 64-bit arithmetic; overflow or nu > max_nu raises RangeError.
std::vector<BivarPoly> poly_recursion(int nu, int max_nu = kDefaultMaxNu);

/// Potential V(x) = -nu(nu+1) sech^2 x.
double potential(int nu, double x);

/// Precomputed evaluator for the distorted plane waves of one order nu.
class WaveFamily {
 public:
  explicit WaveFamily(int nu, int max_nu = kDefaultMaxNu);

  int nu() const { return nu_; }
  const BivarPoly& poly() const { return poly_; }

  /// sign(k)^nu prod_j (j + i|k|)^{-1}; k = 0 yields the k -> 0+ limit.
  cplx normalization(double k) const;
  /// prod_j (j^2 + k^2)^{-1}.
  double product_normalization(double k) const;

  /// P_nu(x, k) = p_nu(tanh x, ik).
  cplx big_p(double x, double k) const;

  /// e_nu(x, k); throws DomainError at k = 0.
  cplx wave(double x, double k) const;
  /// e_nu(x, k) conj(e_nu(y, k)) through the analytic product formula.
  cplx product(double x, double y, double k) const;

 private:
  int nu_;
  BivarPoly poly_;
};

cplx eval_distorted_wave(int nu, double x, double k);
cplx eval_wave_product(int nu, double x, double y, double k);

enum class FdOrder { central2, central4 };

/// max over interior points of |(-D^2 + V - k^2) e_nu| / (1 + k^2).
/// Requires h|k| <= 0.1 (ResolutionError otherwise) and k != 0.
double helmholtz_residual(int nu, double k, const Grid& grid, FdOrder order = FdOrder::central2);

/// max over the grid of |e - e^{ikx} - (1/2ik) int e^{ik|x-y|} V(y) e(y) dy|,
/// integral by fourth-order cumulative quadrature split at y = x. The kernel is the
/// outgoing one, which e_nu satisfies for k > 0; for k < 0 the residual is O(1).
double lippmann_schwinger_residual(int nu, double k, const Grid& grid);

nlohmann::json to_json(const BivarPoly& p);
BivarPoly poly_from_json(const nlohmann::json& j);

}  // namespace ptspec
