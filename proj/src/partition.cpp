#include "ptspec/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptspec/error.hpp"

namespace ptspec {

namespace {

double bump_edge(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

}  // namespace

double smooth_seed(double x) {
  const double ax = std::abs(x);
  if (ax <= 1.0) return 1.0;
  if (ax >= 2.0) return 0.0;
  const double a = bump_edge(2.0 - ax);
  const double b = bump_edge(ax - 1.0);
  return a / (a + b);
}

DyadicPartition::DyadicPartition(PartitionParams params)
    : seed_(std::move(params.seed)), j_min_(params.j_min), j_max_(params.j_max) {}

double DyadicPartition::band_sum(double x) const {
  double s = 0.0;
  for (int j = j_min_; j <= j_max_; ++j) s += phi_j(j, x);
  return s;
}

double DyadicPartition::band_square_sum(double x) const {
  double s = 0.0;
  for (int j = j_min_; j <= j_max_; ++j) {
    const double v = phi_j(j, x);
    s += v * v;
  }
  return s;
}

std::pair<double, double> DyadicPartition::square_sum_bracket(int samples_per_octave) const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const int total = (j_max_ - j_min_) * samples_per_octave;
  for (int t = 0; t <= total; ++t) {
    const double x = std::exp2(j_min_ + static_cast<double>(t) / samples_per_octave);
    const double v = band_square_sum(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

DyadicPartition make_partition(const PartitionParams& params) {
  if (!params.seed) throw ArgumentError("make_partition: missing seed");
  if (params.j_min >= params.j_max) throw ArgumentError("make_partition: need j_min < j_max");
  const auto& th = params.seed;
  constexpr int n = 2048;
  double prev = th(1.0);
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    if (th(x) != 1.0 || th(-x) != 1.0)
      throw ArgumentError("make_partition: seed must equal 1 on [-1, 1]");
    const double y = 1.0 + x;
    const double v = th(y);
    if (v > prev) throw ArgumentError("make_partition: seed is not monotone on [1, 2]");
    if (std::abs(v - th(-y)) > 0.0) throw ArgumentError("make_partition: seed must be even");
    if (v < 0.0 || v > 1.0) throw ArgumentError("make_partition: seed must take values in [0, 1]");
    prev = v;
    if (th(2.0 + x) != 0.0 || th(-2.0 - x) != 0.0)
      throw ArgumentError("make_partition: seed must vanish for |x| >= 2");
  }
  return DyadicPartition(params);
}

}  // namespace ptspec
