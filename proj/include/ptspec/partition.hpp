#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace ptspec {

/// C-infinity seed: 1 on [-1, 1], 0 outside (-2, 2), monotone on 1 <= |x| <= 2.
double smooth_seed(double x);

struct PartitionParams {
  std::function<double(double)> seed = smooth_seed;
  int j_min = -8;
  int j_max = 12;
};

/// Dyadic partition of unity built from a seed Theta:
///   Phi(x) = Theta(x), phi(x) = Theta(x) - Theta(2x), psi(x) = Theta(x/4) - Theta(4x),
/// with band members phi_j(x) = phi(2^{-j} x) for j in [j_min, j_max].
class DyadicPartition {
 public:
  explicit DyadicPartition(PartitionParams params);

  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }

  double seed(double x) const { return seed_(x); }
  double Phi(double x) const { return seed_(x); }
  double phi(double x) const { return seed_(x) - seed_(2.0 * x); }
  double psi(double x) const { return seed_(0.25 * x) - seed_(4.0 * x); }

  double phi_j(int j, double x) const { return phi(std::ldexp(x, -j)); }
  double Phi_j(int j, double x) const { return Phi(std::ldexp(x, -j)); }
  double psi_j(int j, double x) const { return psi(std::ldexp(x, -j)); }

  /// |x| interval carrying phi_j: [2^{j-1}, 2^{j+1}].
  static double band_lo(int j) { return std::ldexp(1.0, j - 1); }
  static double band_hi(int j) { return std::ldexp(1.0, j + 1); }

  /// sum_{j in range} phi_j(x)
  double band_sum(double x) const;
  /// sum_{j in range} phi_j(x)^2
  double band_square_sum(double x) const;

  /// Extremes of band_square_sum over the fully covered annulus
  /// [2^{j_min}, 2^{j_max}], by dense logarithmic sampling.
  std::pair<double, double> square_sum_bracket(int samples_per_octave = 512) const;

 private:
  std::function<double(double)> seed_;
  int j_min_;
  int j_max_;
};

/// Validates the seed (flat on [-1,1], vanishing off [-2,2], even, monotone on
/// [1,2]) and returns the partition; ArgumentError on an invalid profile.
DyadicPartition make_partition(const PartitionParams& params = {});

}  // namespace ptspec
