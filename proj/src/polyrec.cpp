#include "ptspec/polyrec.hpp"

#include <cmath>
#include <string>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"

namespace ptspec {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw RangeError("poly_recursion: coefficient overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw RangeError("poly_recursion: coefficient overflow");
  return r;
}

}  // namespace

BivarPoly::BivarPoly(int nu) : nu_(nu) {
  if (nu < 0) throw RangeError("BivarPoly: nu must be nonnegative");
  coeffs_.assign(static_cast<std::size_t>(nu) + 1,
                 std::vector<std::int64_t>(static_cast<std::size_t>(nu) + 1, 0));
}

std::int64_t BivarPoly::coeff(int a, int b) const {
  if (a < 0 || b < 0 || a > nu_ || b > nu_) return 0;
  return coeffs_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

std::int64_t& BivarPoly::coeff(int a, int b) {
  if (a < 0 || b < 0 || a > nu_ || b > nu_) throw RangeError("BivarPoly: index out of range");
  return coeffs_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

void BivarPoly::z_coefficients(double s, std::span<double> out) const {
  // Horner in s for every z-degree.
  for (int b = 0; b <= nu_; ++b) {
    double acc = 0.0;
    for (int a = nu_; a >= 0; --a) acc = acc * s + static_cast<double>(coeff(a, b));
    out[static_cast<std::size_t>(b)] = acc;
  }
}

std::vector<double> BivarPoly::z_coefficients(double s) const {
  std::vector<double> out(static_cast<std::size_t>(nu_) + 1);
  z_coefficients(s, out);
  return out;
}

cplx BivarPoly::operator()(double s, cplx z) const {
  const auto alpha = z_coefficients(s);
  cplx acc = 0.0;
  for (int b = nu_; b >= 0; --b) acc = acc * z + alpha[static_cast<std::size_t>(b)];
  return acc;
}

bool BivarPoly::has_parity() const {
  // p(-s,-z) has coefficient (-1)^{a+b} c_ab; parity requires (-1)^{a+b} = (-1)^nu
  // wherever c_ab != 0.
  for (int a = 0; a <= nu_; ++a)
    for (int b = 0; b <= nu_; ++b)
      if (coeff(a, b) != 0 && ((a + b + nu_) % 2) != 0) return false;
  return true;
}

bool BivarPoly::is_monic_in_z() const {
  if (coeff(0, nu_) != 1) return false;
  for (int a = 1; a <= nu_; ++a)
    if (coeff(a, nu_) != 0) return false;
  return true;
}

std::vector<BivarPoly> poly_recursion(int nu, int max_nu) {
  if (nu < 0) throw RangeError("poly_recursion: nu must be nonnegative");
  if (nu > max_nu)
    throw RangeError("poly_recursion: nu = " + std::to_string(nu) + " exceeds maximum " +
                     std::to_string(max_nu));
  std::vector<BivarPoly> out;
  out.reserve(static_cast<std::size_t>(nu) + 1);
  BivarPoly p0(0);
  p0.coeff(0, 0) = 1;
  out.push_back(p0);
  for (int n = 1; n <= nu; ++n) {
    const BivarPoly& prev = out.back();
    BivarPoly next(n);
    for (int a = 0; a <= n - 1; ++a) {
      for (int b = 0; b <= n - 1; ++b) {
        const std::int64_t c = prev.coeff(a, b);
        if (c == 0) continue;
        // (1 - s^2) d/ds
        if (a >= 1) {
          const std::int64_t d = checked_mul(a, c);
          next.coeff(a - 1, b) = checked_add(next.coeff(a - 1, b), d);
          next.coeff(a + 1, b) = checked_add(next.coeff(a + 1, b), -d);
        }
        // z p
        next.coeff(a, b + 1) = checked_add(next.coeff(a, b + 1), c);
        // -n s p
        next.coeff(a + 1, b) = checked_add(next.coeff(a + 1, b), checked_mul(-n, c));
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

double potential(int nu, double x) {
  const double s = sech(x);
  return -static_cast<double>(nu) * (nu + 1) * s * s;
}

WaveFamily::WaveFamily(int nu, int max_nu) : nu_(nu), poly_(poly_recursion(nu, max_nu).back()) {}

cplx WaveFamily::normalization(double k) const {
  const double ak = std::abs(k);
  cplx prod = 1.0;
  for (int j = 1; j <= nu_; ++j) prod /= cplx(static_cast<double>(j), ak);
  if (k < 0.0 && (nu_ % 2) == 1) prod = -prod;
  return prod;
}

double WaveFamily::product_normalization(double k) const {
  double prod = 1.0;
  for (int j = 1; j <= nu_; ++j) prod /= static_cast<double>(j) * j + k * k;
  return prod;
}

cplx WaveFamily::big_p(double x, double k) const { return poly_(std::tanh(x), cplx(0.0, k)); }

cplx WaveFamily::wave(double x, double k) const {
  if (k == 0.0) throw DomainError("eval_distorted_wave: k = 0 is outside the domain");
  return normalization(k) * big_p(x, k) * std::polar(1.0, k * x);
}

cplx WaveFamily::product(double x, double y, double k) const {
  return product_normalization(k) * big_p(x, k) * big_p(y, -k) * std::polar(1.0, k * (x - y));
}

cplx eval_distorted_wave(int nu, double x, double k) { return WaveFamily(nu).wave(x, k); }

cplx eval_wave_product(int nu, double x, double y, double k) {
  return WaveFamily(nu).product(x, y, k);
}

double helmholtz_residual(int nu, double k, const Grid& grid, FdOrder order) {
  if (k == 0.0) throw DomainError("helmholtz_residual: k must be nonzero");
  const double h = grid.spacing();
  if (h * std::abs(k) > 0.1)
    throw ResolutionError("helmholtz_residual: h|k| = " + std::to_string(h * std::abs(k)) +
                          " exceeds 0.1");
  const WaveFamily fam(nu);
  const std::size_t n = grid.size();
  ComplexGridFunction e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = fam.wave(grid.x(i), k);
  const std::size_t margin = order == FdOrder::central2 ? 1 : 2;
  double worst = 0.0;
  const double inv_h2 = 1.0 / (h * h);
  for (std::size_t i = margin; i + margin < n; ++i) {
    cplx d2;
    if (order == FdOrder::central2) {
      d2 = (e[i - 1] - 2.0 * e[i] + e[i + 1]) * inv_h2;
    } else {
      d2 = (-e[i - 2] + 16.0 * e[i - 1] - 30.0 * e[i] + 16.0 * e[i + 1] - e[i + 2]) *
           (inv_h2 / 12.0);
    }
    const cplx r = -d2 + (potential(nu, grid.x(i)) - k * k) * e[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst / (1.0 + k * k);
}

namespace {

// Cumulative integral F(x_i) = int_{x_0}^{x_i} f with the four-point interior
// rule h/24(-f_{i-1} + 13 f_i + 13 f_{i+1} - f_{i+2}); trapezoid on the edge cells.
std::vector<cplx> cumulative_integral(std::span<const cplx> f, double h) {
  const std::size_t n = f.size();
  std::vector<cplx> out(n);
  CompensatedSum<cplx> acc;
  out[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cplx cell;
    if (i == 0 || i + 2 >= n)
      cell = 0.5 * h * (f[i] + f[i + 1]);
    else
      cell = (h / 24.0) * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
    acc += cell;
    out[i + 1] = acc.value();
  }
  return out;
}

}  // namespace

double lippmann_schwinger_residual(int nu, double k, const Grid& grid) {
  if (k == 0.0) throw DomainError("lippmann_schwinger_residual: k must be nonzero");
  const double h = grid.spacing();
  if (h * std::abs(k) > 0.1)
    throw ResolutionError("lippmann_schwinger_residual: h|k| = " + std::to_string(h * std::abs(k)) +
                          " exceeds 0.1");
  if (nu == 0) return 0.0;
  const double edge = std::abs(potential(nu, grid.half_width()));
  if (edge >= 1e-12)
    throw ResolutionError("lippmann_schwinger_residual: |V(L)| = " + std::to_string(edge) +
                          " is not below 1e-12; enlarge L");
  const WaveFamily fam(nu);
  const std::size_t n = grid.size();
  ComplexGridFunction e(n), left(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    e[i] = fam.wave(x, k);
    const cplx ve = potential(nu, x) * e[i];
    left[i] = std::polar(1.0, -k * x) * ve;
    right[i] = std::polar(1.0, k * x) * ve;
  }
  const auto cum_left = cumulative_integral(left, h);
  const auto cum_right = cumulative_integral(right, h);
  const cplx total_right = cum_right.back();
  const cplx coef = 1.0 / cplx(0.0, 2.0 * k);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    // y < x contributes e^{ik(x-y)}, y > x contributes e^{ik(y-x)}.
    const cplx integral = std::polar(1.0, k * x) * cum_left[i] +
                          std::polar(1.0, -k * x) * (total_right - cum_right[i]);
    const cplx r = e[i] - std::polar(1.0, k * x) - coef * integral;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

nlohmann::json to_json(const BivarPoly& p) {
  nlohmann::json j;
  j["nu"] = p.nu();
  j["coeffs"] = p.coeffs();
  return j;
}

BivarPoly poly_from_json(const nlohmann::json& j) {
  const int nu = j.at("nu").get<int>();
  BivarPoly p(nu);
  const auto rows = j.at("coeffs").get<std::vector<std::vector<std::int64_t>>>();
  if (rows.size() != static_cast<std::size_t>(nu) + 1)
    throw ArgumentError("poly_from_json: coefficient rows do not match nu");
  for (int a = 0; a <= nu; ++a) {
    if (rows[static_cast<std::size_t>(a)].size() != static_cast<std::size_t>(nu) + 1)
      throw ArgumentError("poly_from_json: coefficient columns do not match nu");
    for (int b = 0; b <= nu; ++b)
      p.coeff(a, b) = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
  return p;
}

}  // namespace ptspec
