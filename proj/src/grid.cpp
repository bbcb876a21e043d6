#include "ptspec/grid.hpp"

#include <algorithm>
#include <cmath>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"

namespace ptspec {

Grid::Grid(double half_width, std::size_t n_points)
    : half_width_(half_width), n_(n_points), h_(0.0) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ArgumentError("grid half-width must be positive");
  if (n_points < 3) throw ArgumentError("grid needs at least 3 points");
  h_ = 2.0 * half_width / static_cast<double>(n_points - 1);
}

Grid Grid::with_spacing(double half_width, double h) {
  if (!(h > 0.0)) throw ArgumentError("grid spacing must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half_width / h)) + 1;
  return Grid(half_width, n);
}

std::vector<double> Grid::points() const {
  std::vector<double> p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = x(i);
  return p;
}

std::size_t Grid::nearest(double xv) const {
  const double t = std::round((xv + half_width_) / h_);
  if (t <= 0.0) return 0;
  return std::min(n_ - 1, static_cast<std::size_t>(t));
}

double integrate(const Grid& g, std::span<const double> f) {
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * f[i];
  return s.value();
}

cplx integrate(const Grid& g, std::span<const cplx> f) {
  CompensatedSum<cplx> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * f[i];
  return s.value();
}

double l2_norm(const Grid& g, std::span<const double> f) {
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * f[i] * f[i];
  return std::sqrt(s.value());
}

double l2_norm(const Grid& g, std::span<const cplx> f) {
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * std::norm(f[i]);
  return std::sqrt(s.value());
}

double lp_norm(const Grid& g, std::span<const double> f, double p) {
  if (!(p >= 1.0)) throw ArgumentError("lp_norm requires p >= 1");
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * std::pow(std::abs(f[i]), p);
  return std::pow(s.value(), 1.0 / p);
}

double l1_norm(const Grid& g, std::span<const double> f) {
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * std::abs(f[i]);
  return s.value();
}

double inner(const Grid& g, std::span<const double> f, std::span<const double> q) {
  CompensatedSum<double> s;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * f[i] * q[i];
  return s.value();
}

GridFunction real_part(std::span<const cplx> f) {
  GridFunction out(f.size());
  std::transform(f.begin(), f.end(), out.begin(), [](cplx v) { return v.real(); });
  return out;
}

}  // namespace ptspec
