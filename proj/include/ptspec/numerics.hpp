#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace ptspec {

/// Neumaier-compensated accumulator. Works for double and std::complex<double>.
template <class T>
class CompensatedSum {
 public:
  void add(T v) {
    if constexpr (std::is_same_v<T, double>) {
      add_real(sum_, comp_, v);
    } else {
      double sr = sum_.real(), cr = comp_.real();
      double si = sum_.imag(), ci = comp_.imag();
      add_real(sr, cr, v.real());
      add_real(si, ci, v.imag());
      sum_ = T(sr, si);
      comp_ = T(cr, ci);
    }
  }
  CompensatedSum& operator+=(T v) {
    add(v);
    return *this;
  }
  T value() const { return sum_ + comp_; }

 private:
  static void add_real(double& s, double& c, double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  T sum_{};
  T comp_{};
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares y ~ slope*x + intercept. Throws InsufficientDataError
/// when fewer than min_points samples are given.
LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::size_t min_points = 2);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; n in {1, 2, 3, 4, 5, 8, 16}.
QuadratureRule gauss_legendre(int n);

/// Composite Gauss-Legendre over consecutive panels [breaks[i], breaks[i+1]].
QuadratureRule composite_gauss_legendre(std::span<const double> breaks, int points_per_panel);

/// Composite rule on [a, b] with n_panels equal panels.
QuadratureRule composite_gauss_legendre(double a, double b, int n_panels, int points_per_panel);

inline double sech(double x) {
  const double ax = std::abs(x);
  if (ax > 350.0) return 0.0;
  const double e = std::exp(-ax);
  return 2.0 * e / (1.0 + e * e);
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace ptspec
