#include "ptspec/cztools.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"

namespace ptspec {

DyadicInterval DyadicInterval::parent() const {
  const double len = 2.0 * length;
  return {std::floor(left / len) * len, len, level - 1};
}

double CZDecomposition::cube_total_length() const {
  double s = 0.0;
  for (const auto& b : bad_parts) s += b.cube.length;
  return s;
}

double CZDecomposition::reconstruction_error(std::span<const double> f) const {
  double worst = 0.0;
  GridFunction sum = good;
  for (const auto& b : bad_parts)
    for (std::size_t i = b.first; i < b.last; ++i) sum[i] += b.values[i];
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double scale = std::max(std::abs(f[i]), std::abs(good[i]));
    if (sum[i] == f[i]) continue;
    worst = std::max(worst, std::abs(sum[i] - f[i]) / (scale * std::numeric_limits<double>::epsilon()));
  }
  return worst;
}

double CZDecomposition::cube_average(const Grid& grid, std::span<const double> f, std::size_t first,
                                     std::size_t last, double length) {
  CompensatedSum<double> s;
  for (std::size_t i = first; i < last; ++i) s += std::abs(f[i]);
  return grid.spacing() * s.value() / length;
}

namespace {

struct Stopper {
  const Grid& grid;
  std::span<const double> f;
  const std::vector<double>& xs;
  double threshold;
  std::vector<BadPart>& out;

  std::pair<std::size_t, std::size_t> range(const DyadicInterval& I) const {
    const auto a = std::lower_bound(xs.begin(), xs.end(), I.left) - xs.begin();
    const auto b = std::lower_bound(xs.begin(), xs.end(), I.right()) - xs.begin();
    return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
  }

  void visit(const DyadicInterval& I) {
    const auto [first, last] = range(I);
    if (first == last) return;
    if (CZDecomposition::cube_average(grid, f, first, last, I.length) > threshold) {
      out.push_back({I, first, last, {}});
      return;
    }
    if (I.length < grid.spacing()) return;
    const double half = 0.5 * I.length;
    visit({I.left, half, I.level + 1});
    visit({I.left + half, half, I.level + 1});
  }
};

}  // namespace

CZDecomposition cz_decompose(std::span<const double> f, double cz_threshold, const Grid& grid) {
  if (!(cz_threshold > 0.0)) throw ArgumentError("cz_decompose: threshold must be positive");
  if (f.size() != grid.size()) throw ArgumentError("cz_decompose: f does not match the grid");
  CZDecomposition d;
  d.cz_threshold = cz_threshold;
  const double L = grid.half_width();
  {
    CompensatedSum<double> s;
    for (double v : f) s += std::abs(v);
    d.l1_norm = grid.spacing() * s.value();
  }
  if (!(cz_threshold > d.l1_norm / (2.0 * L)))
    throw ArgumentError("cz_decompose: threshold must exceed ||f||_1 / (2L)");

  const auto xs = grid.points();
  int top = static_cast<int>(std::ceil(std::log2(2.0 * L)));
  const double root = std::ldexp(1.0, top);
  Stopper st{grid, f, xs, cz_threshold, d.bad_parts};
  st.visit({-root, root, -top});
  st.visit({0.0, root, -top});

  d.good.assign(f.begin(), f.end());
  for (auto& bp : d.bad_parts) {
    CompensatedSum<double> s;
    for (std::size_t i = bp.first; i < bp.last; ++i) s += f[i];
    const double avg = s.value() / static_cast<double>(bp.last - bp.first);
    bp.values.assign(f.size(), 0.0);
    for (std::size_t i = bp.first; i < bp.last; ++i) {
      d.good[i] = avg;
      bp.values[i] = f[i] - avg;
    }
  }
  return d;
}

nlohmann::json cz_json(const CZDecomposition& d) {
  nlohmann::json cubes = nlohmann::json::array();
  for (const auto& b : d.bad_parts) cubes.push_back({{"left", b.cube.left}, {"length", b.cube.length}});
  return {{"threshold", d.cz_threshold},
          {"cubes", cubes},
          {"l1_norm", d.l1_norm},
          {"cube_total_length", d.cube_total_length()}};
}

MaximalResult maximal_function(std::span<const double> f, const Grid& grid) {
  const std::size_t n = f.size();
  if (n != grid.size()) throw ArgumentError("maximal_function: f does not match the grid");
  MaximalResult r;
  r.values.resize(n);
  const long N = static_cast<long>(n);
  auto at = [&](long i) { return (i >= 0 && i < N) ? std::abs(f[static_cast<std::size_t>(i)]) : 0.0; };
  long max_m = 1;
  while (static_cast<double>(max_m) * grid.spacing() < 2.0 * grid.half_width()) max_m *= 2;
  for (long i = 0; i < N; ++i) {
    double best = at(i);
    // Window [x_i - m h, x_i + m h]: full cells i-m+1 .. i+m-1 and half cells at both ends.
    double inner_sum = at(i);
    long covered = 0;
    for (long m = 1; m <= max_m; m *= 2) {
      for (long q = covered + 1; q <= m - 1; ++q) inner_sum += at(i - q) + at(i + q);
      covered = std::max(covered, m - 1);
      const double avg = (inner_sum + 0.5 * (at(i - m) + at(i + m))) / (2.0 * static_cast<double>(m));
      best = std::max(best, avg);
    }
    r.values[static_cast<std::size_t>(i)] = best;
  }
  return r;
}

GridFunction decay_convolution(std::span<const double> f, double t, double eps, const Grid& grid) {
  if (!(t > 0.0) || !(eps > 0.0)) throw ArgumentError("decay_convolution: need t > 0 and eps > 0");
  const std::size_t n = f.size();
  const double h = grid.spacing();
  // Antiderivative of rho_t from 0, odd in x.
  auto R = [&](double x) {
    const double v = 0.5 * (1.0 - std::pow(1.0 + std::abs(x) / t, -eps));
    return x < 0.0 ? -v : v;
  };
  std::vector<double> w(n);
  for (std::size_t d = 0; d < n; ++d) w[d] = R((static_cast<double>(d) + 0.5) * h) - R((static_cast<double>(d) - 0.5) * h);
  GridFunction out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[i > j ? i - j : j - i] * std::abs(f[j]);
    out[i] = s;
  }
  return out;
}

double fefferman_stein_check(const std::vector<GridFunction>& family, double p, const Grid& grid) {
  if (family.empty()) throw ArgumentError("fefferman_stein_check: empty family");
  if (!(p > 1.0) || !std::isfinite(p)) throw ArgumentError("fefferman_stein_check: need 1 < p < inf");
  const std::size_t n = grid.size();
  GridFunction num(n, 0.0), den(n, 0.0);
  for (const auto& fj : family) {
    if (fj.size() != n) throw ArgumentError("fefferman_stein_check: member does not match the grid");
    const auto mf = maximal_function(fj, grid);
    for (std::size_t i = 0; i < n; ++i) {
      num[i] += mf.values[i] * mf.values[i];
      den[i] += fj[i] * fj[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    num[i] = std::sqrt(num[i]);
    den[i] = std::sqrt(den[i]);
  }
  const double d = lp_norm(grid, den, p);
  if (!(d > 0.0)) throw DegenerateInputError("fefferman_stein_check: zero denominator");
  return lp_norm(grid, num, p) / d;
}

}  // namespace ptspec
