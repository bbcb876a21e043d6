#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptspec/grid.hpp"

namespace ptspec {

/// Half-open dyadic interval [left, left + length), length = 2^{-level}.
struct DyadicInterval {
  double left = 0.0;
  double length = 0.0;
  int level = 0;

  double right() const { return left + length; }
  bool contains(double x) const { return x >= left && x < right(); }
  DyadicInterval parent() const;
};

struct BadPart {
  DyadicInterval cube;
  /// Grid index range [first, last) of the points inside the cube.
  std::size_t first = 0;
  std::size_t last = 0;
  /// b_k on the whole grid; zero off the cube.
  GridFunction values;
};

/// Point-mass measure: each grid point carries mass h.
struct CZDecomposition {
  GridFunction good;
  std::vector<BadPart> bad_parts;
  double cz_threshold = 0.0;
  double l1_norm = 0.0;

  double cube_total_length() const;
  /// max_i |g_i + sum_k b_k(x_i) - f_i| in units of eps * max(|f_i|, |g_i|).
  /// On a cube g_i is the average a and b_i = fl(f_i - a), so the sum is f_i up to
  /// the single rounding of that subtraction.
  double reconstruction_error(std::span<const double> f) const;
  /// h * |sum_{x_i in I} |f_i|| / |I|.
  static double cube_average(const Grid& grid, std::span<const double> f, std::size_t first,
                             std::size_t last, double length);
};

/// Stopping-time decomposition over dyadic intervals anchored at 0. The search
/// starts from the two intervals [-2^a, 0), [0, 2^a) with 2^a >= 2L and descends
/// until intervals are shorter than the grid spacing.
CZDecomposition cz_decompose(std::span<const double> f, double cz_threshold, const Grid& grid);

nlohmann::json cz_json(const CZDecomposition& d);

struct MaximalResult {
  GridFunction values;
};

/// Centered maximal function of the cell-constant extension of f:
/// radii 0 and h * 2^l up to 2L.
MaximalResult maximal_function(std::span<const double> f, const Grid& grid);

/// rho_t * |f| on the grid for rho(x) = (eps/2)(1+|x|)^{-1-eps}, using cell
/// integrals of rho_t so the discrete kernel has unit mass.
GridFunction decay_convolution(std::span<const double> f, double t, double eps, const Grid& grid);

/// ||(sum_j (M f_j)^2)^{1/2}||_p / ||(sum_j |f_j|^2)^{1/2}||_p.
double fefferman_stein_check(const std::vector<GridFunction>& family, double p, const Grid& grid);

}  // namespace ptspec
