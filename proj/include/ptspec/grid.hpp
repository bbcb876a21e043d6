#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ptspec {

using cplx = std::complex<double>;
using GridFunction = std::vector<double>;
using ComplexGridFunction = std::vector<cplx>;

/// Uniform symmetric grid on [-L, L] with n points (both endpoints included).
class Grid {
 public:
  Grid() : Grid(20.0, 4096) {}
  Grid(double half_width, std::size_t n_points);

  /// Grid on [-L, L] with spacing as close to h as possible (n rounded up).
  static Grid with_spacing(double half_width, double h);

  double half_width() const { return half_width_; }
  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double x(std::size_t i) const { return -half_width_ + static_cast<double>(i) * h_; }
  std::vector<double> points() const;

  /// Trapezoid weight of node i.
  double weight(std::size_t i) const { return (i == 0 || i + 1 == n_) ? 0.5 * h_ : h_; }

  /// Index of the grid point nearest to x (clamped).
  std::size_t nearest(double x) const;

  template <class F>
  GridFunction sample(F&& f) const {
    GridFunction out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = f(x(i));
    return out;
  }

 private:
  double half_width_;
  std::size_t n_;
  double h_;
};

/// Trapezoid quadrature of a grid function.
double integrate(const Grid& g, std::span<const double> f);
cplx integrate(const Grid& g, std::span<const cplx> f);

double l2_norm(const Grid& g, std::span<const double> f);
double l2_norm(const Grid& g, std::span<const cplx> f);
double lp_norm(const Grid& g, std::span<const double> f, double p);
double l1_norm(const Grid& g, std::span<const double> f);
double inner(const Grid& g, std::span<const double> f, std::span<const double> q);

/// Real part of a complex grid function.
GridFunction real_part(std::span<const cplx> f);

}  // namespace ptspec
